"""Sweep drivers for the rank-p orthogonal approximation problem.

Three pair-selection strategies share one rotation loop: the row-major
cyclic sweep, an arbitrary explicit ordering, and gradient-based selection
(largest |Lambda| entry, which always satisfies the selection inequality
2|Lambda_ij| >= eps ||Lambda||_F for eps <= 2/n).  Power-method and
polar-decomposition baselines are included for comparison experiments.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import DiagnosticReport, diag_entries, diagnostics, lambda_from_rotated
from .orderings import PairOrdering, pair_set
from .rotations import apply_givens_array, solve_pair
from .symtensor import (
    OrthoMatrix,
    StiefelMatrix,
    StructuralError,
    SymTensor,
    _as_array,
    contract_all,
    frobenius_norm,
    random_orthogonal,
)


class ConfigError(ValueError):
    """Invalid run configuration."""


class BreakdownError(RuntimeError):
    """Numerical breakdown (zero contraction, failed cross-check, ...)."""


ORDERING_CYCLIC = "cyclic"
ORDERING_EXPLICIT = "explicit"
ORDERING_JACOBI_G = "jacobi-g"

INIT_IDENTITY = "identity"
INIT_RANDOM = "random-orthogonal"
INIT_HOSVD = "hosvd"


@dataclass
class RunConfig:
    """Configuration shared by the Jacobi drivers.

    ``tol_grad`` is relative: a run stops once the gradient norm falls
    below tol_grad * max(1, ||A||).  ``stall_gain`` guards against sweeps
    that neither gain objective nor reduce the gradient.  For gradient
    selection, ``epsilon`` must lie in (0, 2/n]; None picks 2/n.
    """

    p: int = 1
    ordering: str = ORDERING_CYCLIC
    epsilon: float | None = None
    tol_grad: float = 1e-10
    max_sweeps: int = 200
    max_iters: int | None = None
    init: str = INIT_IDENTITY
    init_seed: int | None = None
    reorthogonalize_every: int = 1000
    stall_gain: float = 1e-14

    def validate(self, n: int) -> None:
        if not (1 <= self.p <= n):
            raise ConfigError(f"need 1 <= p <= n={n}, got p={self.p}")
        if self.ordering not in (ORDERING_CYCLIC, ORDERING_EXPLICIT, ORDERING_JACOBI_G):
            raise ConfigError(f"unknown ordering {self.ordering!r}")
        if self.tol_grad <= 0:
            raise ConfigError("tol_grad must be positive")
        if self.max_sweeps < 1:
            raise ConfigError("max_sweeps must be at least 1")
        if self.max_iters is not None and self.max_iters < 0:
            raise ConfigError("max_iters must be nonnegative")
        if self.init not in (INIT_IDENTITY, INIT_RANDOM, INIT_HOSVD):
            raise ConfigError(f"unknown init {self.init!r}")
        if self.reorthogonalize_every < 1:
            raise ConfigError("reorthogonalize_every must be at least 1")
        if self.ordering == ORDERING_JACOBI_G and self.epsilon is not None:
            if not (0.0 < self.epsilon <= 2.0 / n):
                raise ConfigError(
                    f"epsilon must lie in (0, 2/n] = (0, {2.0 / n:.6g}], got {self.epsilon}"
                )


@dataclass
class IterationRecord:
    k: int
    i: int
    j: int
    theta: float
    f: float
    grad_norm: float
    gain: float
    margin: float | None = None


@dataclass
class IterationTrace:
    records: list = field(default_factory=list)
    converged: bool = False
    sweeps: int = 0
    iterations: int = 0
    stop_reason: str = ""
    Q: OrthoMatrix | None = None
    sigmas: np.ndarray | None = None
    residual_sq: float | None = None
    diagnostics: DiagnosticReport | None = None

    def f_values(self) -> np.ndarray:
        return np.array([r.f for r in self.records])

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iter", "i", "j", "theta", "f", "grad_norm", "gain"])
            for r in self.records:
                writer.writerow(
                    [r.k, r.i, r.j, repr(r.theta), repr(r.f), repr(r.grad_norm), repr(r.gain)]
                )


@dataclass
class ApproximationResult:
    """Rank-p approximation: frame, weights, objective, and residual."""

    X: StiefelMatrix
    sigmas: np.ndarray
    objective: float
    residual_sq: float

    def to_dict(self) -> dict:
        return {
            "objective": self.objective,
            "residual_sq": self.residual_sq,
            "sigmas": [float(s) for s in self.sigmas],
            "X": self.X.mat.ravel(order="F").tolist(),
        }


def result_to_dict(result: ApproximationResult, trace: IterationTrace) -> dict:
    out = result.to_dict()
    out["diagnostics"] = trace.diagnostics.to_dict() if trace.diagnostics else None
    out["converged"] = bool(trace.converged)
    out["sweeps"] = int(trace.sweeps)
    return out


def extract_result(A, Q, p: int) -> ApproximationResult:
    """Read off the rank-p approximation carried by the first p columns of Q.

    The weights are the p leading diagonal entries of the rotated tensor and
    the residual identity ||A - sum_k s_k u_k^(x d)||^2 = ||A||^2 - sum s_k^2
    is verified directly; disagreement beyond roundoff raises BreakdownError.
    """
    arr = _as_array(A)
    qm = _as_array(Q)
    d = arr.ndim
    n = arr.shape[0]
    if qm.shape[0] != n:
        raise StructuralError(f"frame rows {qm.shape[0]} do not match tensor dim {n}")
    if not (1 <= p <= qm.shape[1]):
        raise StructuralError(f"need 1 <= p <= {qm.shape[1]}, got {p}")
    X = qm[:, :p]
    Wt = contract_all(arr, X).data
    sigmas = diag_entries(Wt).copy()
    objective = float(np.sum(sigmas**2))
    norm_sq = float(np.sum(arr * arr))
    residual_sq = norm_sq - objective

    approx = np.zeros_like(arr)
    for k in range(p):
        term = X[:, k]
        for _ in range(d - 1):
            term = np.multiply.outer(term, X[:, k])
        approx += sigmas[k] * term
    direct = float(np.sum((arr - approx) ** 2))
    if abs(direct - residual_sq) > 1e-10 * max(1.0, norm_sq):
        raise BreakdownError(
            f"residual identity violated: direct {direct:.12e} vs {residual_sq:.12e}"
        )
    return ApproximationResult(
        X=StiefelMatrix(X, validate=False),
        sigmas=sigmas,
        objective=objective,
        residual_sq=residual_sq,
    )


def hosvd_init(A, p: int) -> StiefelMatrix:
    """Leading p left singular vectors of the mode-1 unfolding, sign-fixed so
    each column's largest-magnitude entry is positive."""
    arr = _as_array(A)
    n = arr.shape[0]
    if not (1 <= p <= n):
        raise StructuralError(f"need 1 <= p <= n={n}, got {p}")
    U, _, _ = np.linalg.svd(arr.reshape(n, -1), full_matrices=False)
    U = U[:, :n].copy()
    for k in range(U.shape[1]):
        m = int(np.argmax(np.abs(U[:, k])))
        if U[m, k] < 0:
            U[:, k] = -U[:, k]
    return StiefelMatrix(U[:, :p], validate=False)


def hosvd_frame(A) -> OrthoMatrix:
    """Full orthogonal frame of mode-1 left singular vectors, sign-fixed."""
    arr = _as_array(A)
    n = arr.shape[0]
    return OrthoMatrix(hosvd_init(arr, n).mat, validate=False)


def _polar_orthogonal(Q: np.ndarray) -> np.ndarray:
    U, _, Vt = np.linalg.svd(Q)
    return U @ Vt


def _initial_frame(A, cfg: RunConfig) -> np.ndarray:
    n = _as_array(A).shape[0]
    if cfg.init == INIT_IDENTITY:
        return np.eye(n)
    if cfg.init == INIT_RANDOM:
        return random_orthogonal(n, cfg.init_seed).mat.copy()
    return hosvd_frame(A).mat.copy()


class _State:
    """Mutable loop state: the accumulated frame and the rotated tensor."""

    def __init__(self, A, cfg: RunConfig):
        self.arr = _as_array(A)
        self.cfg = cfg
        self.n = self.arr.shape[0]
        self.d = self.arr.ndim
        self.Q = _initial_frame(A, cfg)
        self.W = contract_all(self.arr, self.Q).data.copy()
        self.tol_abs = cfg.tol_grad * max(1.0, frobenius_norm(self.arr))
        self.k = 0

    def f_value(self) -> float:
        dg = diag_entries(self.W)[: self.cfg.p]
        return float(dg @ dg)

    def grad(self) -> np.ndarray:
        return lambda_from_rotated(self.W, self.cfg.p)

    def rotate(self, i: int, j: int, theta: float) -> None:
        if theta != 0.0:
            self.W = apply_givens_array(self.W, i, j, theta)
            c, s = math.cos(theta), math.sin(theta)
            qi = self.Q[:, i].copy()
            qj = self.Q[:, j].copy()
            self.Q[:, i] = c * qi + s * qj
            self.Q[:, j] = -s * qi + c * qj
        self.k += 1
        if self.k % self.cfg.reorthogonalize_every == 0:
            self.Q = _polar_orthogonal(self.Q)
            self.W = contract_all(self.arr, self.Q).data.copy()

    def finalize(self, trace: IterationTrace) -> ApproximationResult:
        qm = OrthoMatrix(self.Q, validate=False)
        result = extract_result(self.arr, qm, self.cfg.p)
        trace.Q = qm
        trace.sigmas = result.sigmas
        trace.residual_sq = result.residual_sq
        trace.diagnostics = diagnostics(self.arr, self.Q, self.cfg.p)
        trace.iterations = self.k
        return result


def _run_sweeps(A, pairs, cfg: RunConfig):
    state = _State(A, cfg)
    trace = IterationTrace()
    max_iters = cfg.max_iters
    stop = None
    converged = False
    sweeps = 0
    while True:
        grad_start = float(np.linalg.norm(state.grad()))
        f_start = state.f_value()
        if grad_start <= state.tol_abs:
            converged = True
            stop = "gradient"
            break
        if sweeps >= cfg.max_sweeps:
            stop = "max-sweeps"
            break
        grad_end = grad_start
        for (i, j) in pairs:
            sol = solve_pair(state.W, i, j, cfg.p)
            state.rotate(i, j, sol.theta_star)
            f = state.f_value()
            grad_end = float(np.linalg.norm(state.grad()))
            trace.records.append(
                IterationRecord(state.k, i, j, sol.theta_star, f, grad_end, sol.gain)
            )
            if grad_end <= state.tol_abs:
                converged = True
                stop = "gradient"
                break
            if max_iters is not None and state.k >= max_iters:
                stop = "max-iters"
                break
        sweeps += 1
        if stop is not None:
            break
        if state.f_value() - f_start <= cfg.stall_gain and grad_end >= grad_start:
            # no objective or gradient progress over a whole sweep
            stop = "stalled"
            break
    trace.converged = converged
    trace.sweeps = sweeps
    trace.stop_reason = stop or "max-sweeps"
    result = state.finalize(trace)
    return result, trace


def run_jlroa(A, cfg: RunConfig):
    """Cyclic-ordering Jacobi sweep driver."""
    arr = _as_array(A)
    cfg.validate(arr.shape[0])
    if cfg.ordering not in (ORDERING_CYCLIC, ORDERING_EXPLICIT):
        raise ConfigError("run_jlroa expects a cyclic configuration")
    return _run_sweeps(arr, pair_set(arr.shape[0], cfg.p), cfg)


def run_general(A, ordering: PairOrdering, cfg: RunConfig):
    """Jacobi sweeps driven by an explicit pair ordering."""
    arr = _as_array(A)
    cfg.validate(arr.shape[0])
    if ordering.n != arr.shape[0] or ordering.p != cfg.p:
        raise StructuralError(
            f"ordering for (n={ordering.n}, p={ordering.p}) does not match "
            f"(n={arr.shape[0]}, p={cfg.p})"
        )
    return _run_sweeps(arr, list(ordering.pairs), cfg)


def _argmax_pair(L: np.ndarray, p: int) -> tuple[int, int]:
    n = L.shape[0]
    absL = np.abs(L)
    best_val = -1.0
    best = (0, 1)
    tri = np.triu(absL[:p, :p], 1)
    if tri.size:
        i, j = np.unravel_index(int(np.argmax(tri)), tri.shape)
        if tri[i, j] > best_val:
            best_val = float(tri[i, j])
            best = (int(i), int(j))
    if p < n:
        block = absL[:p, p:]
        i, j = np.unravel_index(int(np.argmax(block)), block.shape)
        if block[i, j] > best_val:
            best_val = float(block[i, j])
            best = (int(i), int(j) + p)
    return best


def run_jacobi_g(A, cfg: RunConfig):
    """Gradient-selection driver: rotate the pair with the largest |Lambda|
    entry, recording the selection margin 2|Lambda_ij| - eps ||Lambda||."""
    arr = _as_array(A)
    if cfg.ordering != ORDERING_JACOBI_G:
        cfg = RunConfig(**{**cfg.__dict__, "ordering": ORDERING_JACOBI_G})
    cfg.validate(arr.shape[0])
    n = arr.shape[0]
    eps = cfg.epsilon if cfg.epsilon is not None else 2.0 / n
    state = _State(arr, cfg)
    trace = IterationTrace()
    N = len(pair_set(n, cfg.p))
    max_iters = cfg.max_iters if cfg.max_iters is not None else cfg.max_sweeps * N
    converged = False
    stop = "max-iters"
    while state.k < max_iters:
        L = state.grad()
        gn = float(np.linalg.norm(L))
        if gn <= state.tol_abs:
            converged = True
            stop = "gradient"
            break
        i, j = _argmax_pair(L, cfg.p)
        margin = 2.0 * abs(L[i, j]) - eps * gn
        if margin < -1e-12 * gn:
            raise BreakdownError("selection inequality violated")
        sol = solve_pair(state.W, i, j, cfg.p)
        state.rotate(i, j, sol.theta_star)
        trace.records.append(
            IterationRecord(
                state.k,
                i,
                j,
                sol.theta_star,
                state.f_value(),
                float(np.linalg.norm(state.grad())),
                sol.gain,
                margin=margin,
            )
        )
    trace.converged = converged
    trace.stop_reason = stop
    trace.sweeps = -(-state.k // N) if N else 0
    result = state.finalize(trace)
    return result, trace


# ---------------------------------------------------------------------------
# Baselines.

@dataclass
class PowerTrace:
    sigmas: list = field(default_factory=list)
    iterations: int = 0
    converged: bool = False


def run_shopm(A, x0, max_iters: int = 500, tol: float = 1e-14):
    """Symmetric higher-order power method for the rank-1 subproblem.

    Iterates x <- A x^(d-1) / || . ||; convergence is not guaranteed and the
    trace keeps every weight so oscillation is observable.
    """
    arr = _as_array(A)
    d = arr.ndim
    x = np.asarray(x0, dtype=float).copy()
    nx = np.linalg.norm(x)
    if nx == 0.0:
        raise BreakdownError("zero starting vector")
    x /= nx
    trace = PowerTrace()
    for _ in range(max_iters):
        y = arr
        for _ in range(d - 1):
            y = np.tensordot(y, x, axes=([1], [0]))
        trace.sigmas.append(float(y @ x))
        ny = float(np.linalg.norm(y))
        if ny < 1e-300:
            raise BreakdownError("zero contraction vector")
        xn = y / ny
        trace.iterations += 1
        if min(np.linalg.norm(xn - x), np.linalg.norm(xn + x)) <= tol:
            x = xn
            trace.converged = True
            break
        x = xn
    y = arr
    for _ in range(d - 1):
        y = np.tensordot(y, x, axes=([1], [0]))
    sigma = float(y @ x)
    return x, sigma, trace


@dataclass
class PolarTrace:
    f_values: list = field(default_factory=list)
    rank_deficient: list = field(default_factory=list)
    iterations: int = 0
    converged: bool = False


def run_slroat(A, X0, max_iters: int = 500, tol: float = 1e-13):
    """Polar-decomposition baseline for rank p.

    Each step contracts d-1 modes with every current column and replaces the
    frame by the orthogonal polar factor of the resulting n x p matrix.  No
    monotonicity is claimed; rank-deficient steps are flagged in the trace.
    """
    arr = _as_array(A)
    d = arr.ndim
    X = np.array(_as_array(X0), dtype=float, copy=True)
    n, p = X.shape
    trace = PolarTrace()
    for _ in range(max_iters):
        M = np.empty((n, p))
        for k in range(p):
            y = arr
            for _ in range(d - 1):
                y = np.tensordot(y, X[:, k], axes=([1], [0]))
            M[:, k] = y
        U, s, Vt = np.linalg.svd(M, full_matrices=False)
        deficient = bool(s[-1] <= 1e-12 * max(float(s[0]), 1e-300))
        trace.rank_deficient.append(deficient)
        Xn = U @ Vt
        dg = diag_entries(contract_all(arr, Xn).data)
        trace.f_values.append(float(dg @ dg))
        trace.iterations += 1
        signs = np.sign(np.sum(Xn * X, axis=0))
        signs[signs == 0] = 1.0
        if float(np.linalg.norm(Xn - X * signs)) <= tol:
            X = Xn
            trace.converged = True
            break
        X = Xn
    sigmas = diag_entries(contract_all(arr, X).data).copy()
    return StiefelMatrix(X, validate=False), sigmas, trace
