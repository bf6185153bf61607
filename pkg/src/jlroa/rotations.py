"""Givens rotations and exact solvers for the per-pair angle maximization.

Each Jacobi step maximizes h(theta) = f(Q G(i,j,theta)) over one rotation
angle.  After substituting x = tan(theta), the objective increment is a
rational function of x whose stationary points are roots of a low-degree
polynomial; orders 3 and 4 are solved exactly that way, anything higher
falls back to sampling plus safeguarded Newton on h'.

Solvers operate on the 2 x ... x 2 subtensor of the working tensor on the
rotation plane.  A pair (i, j) with both indices kept (j < p) is class C1,
a kept/discarded pair (i < p <= j) is class C2.  C1 objectives have period
pi/2 in theta, so their tangent candidates live in [-1, 1]; C2 objectives
have period pi and admit x = +/-inf (a column swap, encoded theta = pi/2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .symtensor import OrthoMatrix, StructuralError, SymTensor, _as_array

# Candidates within this relative window of the best gain are considered
# tied; ties resolve to the smallest |theta|, then to positive theta.
TIE_RTOL = 1e-12
# Imaginary part allowed when accepting a polynomial root as real.
ROOT_IMAG_CUTOFF = 1e-10


def classify_pair(i: int, j: int, n: int, p: int) -> str:
    if not (0 <= i < j < n):
        raise StructuralError(f"need 0 <= i < j < n={n}, got ({i}, {j})")
    if i >= p:
        raise StructuralError(f"pair ({i}, {j}) is outside the sweep set for p={p}")
    return "C1" if j < p else "C2"


@dataclass(frozen=True)
class PairClass:
    i: int
    j: int
    kind: str

    @classmethod
    def from_pair(cls, i: int, j: int, n: int, p: int) -> "PairClass":
        return cls(i, j, classify_pair(i, j, n, p))


@dataclass(frozen=True)
class RotationSolution:
    """Optimal angle for one plane rotation.

    ``candidates`` lists every examined tangent value with its objective
    increment; ``gain`` is the increment of the chosen candidate and is
    never negative because x = 0 is always examined.
    """

    theta_star: float
    x_star: float
    gain: float
    candidates: tuple
    solver_kind: str


def givens_array(n: int, i: int, j: int, theta: float) -> np.ndarray:
    if not (0 <= i < j < n):
        raise StructuralError(f"need 0 <= i < j < n={n}, got ({i}, {j})")
    G = np.eye(n)
    c, s = math.cos(theta), math.sin(theta)
    G[i, i] = c
    G[j, j] = c
    G[i, j] = -s
    G[j, i] = s
    return G


def givens(n: int, i: int, j: int, theta: float) -> OrthoMatrix:
    """Plane rotation by ``theta`` in coordinates (i, j), determinant 1."""
    return OrthoMatrix(givens_array(n, i, j, theta), validate=False)


def apply_givens_array(W: np.ndarray, i: int, j: int, theta: float) -> np.ndarray:
    """Rotate every mode of ``W`` in the (i, j) plane.

    Equivalent to contracting all modes with the Givens matrix, but touches
    only the 2n^(d-1) entries per mode that carry index i or j; everything
    else is copied bit-for-bit.
    """
    n = W.shape[0]
    if not (0 <= i < j < n):
        raise StructuralError(f"need 0 <= i < j < n={n}, got ({i}, {j})")
    c, s = math.cos(theta), math.sin(theta)
    T = W.copy()
    for m in range(W.ndim):
        sl_i = (slice(None),) * m + (i,)
        sl_j = (slice(None),) * m + (j,)
        Ti = T[sl_i].copy()
        Tj = T[sl_j].copy()
        T[sl_i] = c * Ti + s * Tj
        T[sl_j] = -s * Ti + c * Tj
    return T


def apply_givens(W: SymTensor, i: int, j: int, theta: float) -> SymTensor:
    # symmetric up to one rounding step; exact symmetry is restored by the
    # periodic refresh in the sweep drivers
    return SymTensor(apply_givens_array(_as_array(W), i, j, theta), validate=False)


def real_roots(coeffs) -> np.ndarray:
    """Real roots of a polynomial given by descending coefficients.

    Uses companion-matrix eigenvalues; leading zeros reduce the degree
    explicitly and roots with |imag| <= ROOT_IMAG_CUTOFF * (1 + |root|) are
    accepted as real.
    """
    c = np.asarray(coeffs, dtype=float)
    nz = np.nonzero(c)[0]
    if nz.size == 0:
        return np.array([])
    c = c[nz[0] :]
    if c.size <= 1:
        return np.array([])
    r = np.roots(c)
    keep = np.abs(r.imag) <= ROOT_IMAG_CUTOFF * (1.0 + np.abs(r))
    return r[keep].real


def _pick(candidates) -> tuple[float, float, float]:
    """Choose the best (x, increment) pair: max gain, then smallest |theta|,
    then positive theta."""
    best = max(v for _, v in candidates)
    window = TIE_RTOL * abs(best)
    tied = [(x, v) for x, v in candidates if v >= best - window]

    def key(item):
        x = item[0]
        th = math.pi / 2 if math.isinf(x) else math.atan(x)
        return (abs(th), 0.0 if th > 0 else 1.0)

    x_star, gain = min(tied, key=key)
    if math.isinf(x_star):
        return math.pi / 2, math.inf, gain
    return math.atan(x_star), x_star, gain


def _resolvent_candidates(xi_poly) -> list[float]:
    """Map real roots xi of the resolvent back to tangents in [-1, 1].

    Each xi = x - 1/x gives the pair of roots of x^2 - xi x - 1 = 0, which
    represent the same rotation shifted by pi/2; at least one lies in the
    fundamental interval.
    """
    xs = [0.0]
    for xi in real_roots(xi_poly):
        for x in real_roots([1.0, -xi, -1.0]):
            if abs(x) <= 1.0:
                xs.append(float(x))
    return xs


def solve_c1_order3(sub) -> RotationSolution:
    """Exact maximizer for an order-3 kept/kept pair (2 x 2 x 2 input)."""
    S = _as_array(sub)
    w111, w112, w122, w222 = S[0, 0, 0], S[0, 0, 1], S[0, 1, 1], S[1, 1, 1]
    a = 6.0 * (w111 * w112 - w122 * w222)
    b = 6.0 * (
        w111**2 + w222**2 - 3.0 * w112**2 - 3.0 * w122**2
        - 2.0 * w111 * w122 - 2.0 * w112 * w222
    )

    def inc(x):
        return (a * (x - x**3) - 0.5 * b * x * x) / (1.0 + x * x) ** 2

    cands = tuple((x, float(inc(x))) for x in _resolvent_candidates([a, b, -4.0 * a]))
    theta, x_star, gain = _pick(cands)
    return RotationSolution(theta, x_star, gain, cands, "c1-order3")


def solve_c2_order3(sub) -> RotationSolution:
    """Exact maximizer for an order-3 kept/discarded pair.

    The input is the plane subtensor with the kept index first; only the
    kept diagonal entry enters the objective.
    """
    S = _as_array(sub)
    w111, w113, w133, w333 = S[0, 0, 0], S[0, 0, 1], S[0, 1, 1], S[1, 1, 1]

    def inc(x):
        if math.isinf(x):
            return w333**2 - w111**2
        num = (
            (w333**2 - w111**2) * x**6
            + 6.0 * w133 * w333 * x**5
            + (-3.0 * w111**2 + 9.0 * w133**2 + 6.0 * w113 * w333) * x**4
            + (18.0 * w113 * w133 + 2.0 * w111 * w333) * x**3
            + (-3.0 * w111**2 + 6.0 * w133 * w111 + 9.0 * w113**2) * x * x
            + 6.0 * w111 * w113 * x
        )
        return num / (1.0 + x * x) ** 3

    xs = [0.0, math.inf, -math.inf]
    xs.extend(float(x) for x in real_roots(
        [-w133, w333 - 2.0 * w113, 2.0 * w133 - w111, w113]
    ))
    cands = tuple((x, float(inc(x))) for x in xs)
    theta, x_star, gain = _pick(cands)
    return RotationSolution(theta, x_star, gain, cands, "c2-order3")


def solve_c1_order4(sub) -> RotationSolution:
    """Exact maximizer for an order-4 kept/kept pair (2x2x2x2 input)."""
    S = _as_array(sub)
    w1111 = S[0, 0, 0, 0]
    w1112 = S[0, 0, 0, 1]
    w1122 = S[0, 0, 1, 1]
    w1222 = S[0, 1, 1, 1]
    w2222 = S[1, 1, 1, 1]
    a = 8.0 * (w1111 * w1112 - w1222 * w2222)
    b = 8.0 * (
        w1111**2 - 3.0 * w1122 * w1111 - 4.0 * w1112**2
        - 4.0 * w1222**2 + w2222**2 - 3.0 * w1122 * w2222
    )
    c = 8.0 * (
        18.0 * w1112 * w1122 - 7.0 * w1111 * w1112 + 3.0 * w1111 * w1222
        - 18.0 * w1122 * w1222 - 3.0 * w1112 * w2222 + 7.0 * w1222 * w2222
    )
    d = 8.0 * (
        9.0 * w1111 * w1122 - 32.0 * w1112 * w1222 - 2.0 * w1111 * w2222
        + 9.0 * w1122 * w2222 + 12.0 * w1112**2 - 36.0 * w1122**2
        + 12.0 * w1222**2
    )
    e = 80.0 * (
        6.0 * w1122 * w1222 - w1111 * w1222 - 6.0 * w1112 * w1122
        + w1112 * w2222
    )
    a1 = 8.0 * (w1111 * w1112 - w1222 * w2222)
    a2 = (
        -4.0 * w1111**2 + 12.0 * w1122 * w1111 + 16.0 * w1112**2
        + 16.0 * w1222**2 - 4.0 * w2222**2 + 12.0 * w1122 * w2222
    )
    a3 = (
        48.0 * w1112 * w1122 + 8.0 * w1111 * w1222
        - 48.0 * w1122 * w1222 - 8.0 * w1112 * w2222
    )
    a4 = (
        -6.0 * w1111**2 + 4.0 * w1111 * w2222 + 72.0 * w1122**2
        - 6.0 * w2222**2 + 64.0 * w1112 * w1222
    )

    def inc(x):
        x2 = x * x
        return (
            a1 * (x - x**7) + a2 * (x2 + x**6) + a3 * (x**3 - x**5) + a4 * x2 * x2
        ) / (1.0 + x2) ** 4

    resolvent = [a, b, 4.0 * a + c, 3.0 * b + d, 2.0 * a + 2.0 * c + e]
    cands = tuple((x, float(inc(x))) for x in _resolvent_candidates(resolvent))
    theta, x_star, gain = _pick(cands)
    return RotationSolution(theta, x_star, gain, cands, "c1-order4")


def solve_c2_order4(sub) -> RotationSolution:
    """Exact maximizer for an order-4 kept/discarded pair."""
    S = _as_array(sub)
    w1111 = S[0, 0, 0, 0]
    w1113 = S[0, 0, 0, 1]
    w1133 = S[0, 0, 1, 1]
    w1333 = S[0, 1, 1, 1]
    w3333 = S[1, 1, 1, 1]

    def inc(x):
        if math.isinf(x):
            return w3333**2 - w1111**2
        x2 = x * x
        num = (
            (w3333**2 - w1111**2) * x**8
            + 8.0 * w1333 * w3333 * x**7
            + (-4.0 * w1111**2 + 16.0 * w1333**2 + 12.0 * w1133 * w3333) * x**6
            + (48.0 * w1133 * w1333 + 8.0 * w1113 * w3333) * x**5
            + (
                -6.0 * w1111**2 + 2.0 * w3333 * w1111 + 36.0 * w1133**2
                + 32.0 * w1113 * w1333
            ) * x2 * x2
            + (48.0 * w1113 * w1133 + 8.0 * w1111 * w1333) * x**3
            + (-4.0 * w1111**2 + 12.0 * w1133 * w1111 + 16.0 * w1113**2) * x2
            + 8.0 * w1111 * w1113 * x
        )
        return num / (1.0 + x2) ** 4

    xs = [0.0, math.inf, -math.inf]
    xs.extend(float(x) for x in real_roots([
        w1333,
        3.0 * w1133 - w3333,
        3.0 * w1113 - 3.0 * w1333,
        w1111 - 3.0 * w1133,
        -w1113,
    ]))
    cands = tuple((x, float(inc(x))) for x in xs)
    theta, x_star, gain = _pick(cands)
    return RotationSolution(theta, x_star, gain, cands, "c2-order4")


# ---------------------------------------------------------------------------
# Generic order: sampling plus safeguarded Newton on h'.

def _plane_objective(sub: np.ndarray, kept: int):
    """h and h' for the subproblem restricted to the rotation plane.

    ``kept`` is 1 or 2, the number of plane diagonal entries appearing in
    the objective.  h' uses the closed-form identity relating it to the
    near-diagonal entries of the rotated subtensor.
    """
    d = sub.ndim

    def h(theta):
        T = apply_givens_array(sub, 0, 1, theta)
        val = T[(0,) * d] ** 2
        if kept == 2:
            val += T[(1,) * d] ** 2
        return float(val)

    def hprime(theta):
        T = apply_givens_array(sub, 0, 1, theta)
        s01 = T[(0,) * d] * T[(1,) + (0,) * (d - 1)]
        if kept == 2:
            s10 = T[(0,) + (1,) * (d - 1)] * T[(1,) * d]
            return float(2.0 * d * (s01 - s10))
        return float(2.0 * d * s01)

    return h, hprime


def _safeguarded_newton(hprime, lo: float, hi: float, x0: float) -> float:
    """Root of h' in [lo, hi], Newton steps with bisection fallback."""
    flo, fhi = hprime(lo), hprime(hi)
    bracket = flo * fhi < 0
    x = x0
    fx = hprime(x)
    h2step = max(1e-7, 1e-7 * (hi - lo))
    for _ in range(100):
        d2 = (hprime(x + h2step) - hprime(x - h2step)) / (2.0 * h2step)
        if d2 != 0.0:
            step = -fx / d2
        else:
            step = 0.0
        nxt = x + step
        if step == 0.0 or not (lo <= nxt <= hi):
            if not bracket:
                break
            nxt = 0.5 * (lo + hi)
            step = nxt - x
        fnxt = hprime(nxt)
        if bracket:
            if flo * fnxt < 0:
                hi, fhi = nxt, fnxt
            else:
                lo, flo = nxt, fnxt
        x, fx = nxt, fnxt
        if abs(step) <= 1e-14:
            break
    return x


def solve_generic(W, i: int, j: int, p: int) -> RotationSolution:
    """Angle maximization for any order: 1024-point scan then Newton polish.

    C1 pairs are searched over [-pi/4, pi/4) using the pi/2 period of their
    objective; C2 pairs over [-pi/2, pi/2) with the column swaps at +/-pi/2
    examined explicitly.
    """
    arr = _as_array(W)
    d = arr.ndim
    kind = classify_pair(i, j, arr.shape[0], p)
    take = np.array([i, j])
    sub = arr[np.ix_(*([take] * d))]
    kept = 2 if kind == "C1" else 1
    half = math.pi / 4 if kind == "C1" else math.pi / 2
    h, hprime = _plane_objective(sub, kept)

    npts = 1024
    thetas = [-half + 2.0 * half * k / npts for k in range(npts)]
    vals = [h(t) for t in thetas]
    kbest = max(range(npts), key=lambda q: vals[q])
    t_best = thetas[kbest]
    step = 2.0 * half / npts
    t_ref = _safeguarded_newton(hprime, t_best - step, t_best + step, t_best)

    h0 = h(0.0)
    cand_thetas = [0.0, t_best, t_ref]
    if kind == "C2":
        cand_thetas.extend([math.pi / 2, -math.pi / 2])
    cands = []
    for t in cand_thetas:
        x = math.tan(t) if abs(t) < math.pi / 2 - 1e-12 else math.copysign(math.inf, t)
        cands.append((x, h(t) - h0))
    cands = tuple(cands)
    theta, x_star, gain = _pick(cands)
    return RotationSolution(theta, x_star, gain, cands, "generic")


def pair_subtensor(W, i: int, j: int) -> np.ndarray:
    """Dense 2 x ... x 2 restriction of W to the (i, j) plane."""
    arr = _as_array(W)
    take = np.array([i, j])
    return arr[np.ix_(*([take] * arr.ndim))]


def solve_pair(W, i: int, j: int, p: int) -> RotationSolution:
    """Dispatch one pair subproblem to the exact or generic solver."""
    arr = _as_array(W)
    kind = classify_pair(i, j, arr.shape[0], p)
    if arr.ndim == 3:
        sub = pair_subtensor(arr, i, j)
        return solve_c1_order3(sub) if kind == "C1" else solve_c2_order3(sub)
    if arr.ndim == 4:
        sub = pair_subtensor(arr, i, j)
        return solve_c1_order4(sub) if kind == "C1" else solve_c2_order4(sub)
    return solve_generic(arr, i, j, p)
