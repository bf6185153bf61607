"""Cost functions, Riemannian gradients, and stationarity diagnostics.

The objective for a rank-p approximation is the sum of the first p squared
super-diagonal entries of the rotated tensor W = A(Q).  Its Riemannian
gradient on the orthogonal group is Q @ Lambda(Q) for a skew-symmetric
Lambda built from products of near-diagonal entries of W.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .symtensor import (
    OrthoMatrix,
    StiefelMatrix,
    StructuralError,
    SymTensor,
    _as_array,
    contract_all,
)

GAMMA_INFINITE = "infinite"
GAMMA_ZERO_SUBTENSOR = "zero-subtensor"
# Residual allowed in the proportionality hypothesis behind gamma_ij,
# relative to the squared magnitude of the entries involved.
GAMMA_HYPOTHESIS_RTOL = 1e-10
# Cutoff used by the convergence-condition flags and omega.
CONDITION_THRESHOLD = 1e-4


class HypothesisError(ValueError):
    """gamma_ij evaluated at a pair that is not stationary for its plane."""

    def __init__(self, residual: float):
        self.residual = residual
        super().__init__(
            f"stationary-pair hypothesis violated: residual {residual:.3e}"
        )


def _check_pair(n: int, i: int, j: int) -> None:
    if not (0 <= i < j < n):
        raise StructuralError(f"need 0 <= i < j < n={n}, got ({i}, {j})")


def diag_entries(arr: np.ndarray) -> np.ndarray:
    """Vector of super-diagonal entries W[k, k, ..., k]."""
    return np.einsum(arr, [0] * arr.ndim, [0])


def sigma_ij(A, i: int, j: int) -> float:
    """Product W[i,...,i] * W[j,i,...,i] (one j in the first slot)."""
    arr = _as_array(A)
    n, d = arr.shape[0], arr.ndim
    if not (0 <= i < n and 0 <= j < n and i != j):
        raise StructuralError(f"need distinct indices in range, got ({i}, {j})")
    return float(arr[(i,) * d] * arr[(j,) + (i,) * (d - 1)])


def d_ij(A, i: int, j: int) -> float:
    """Skew statistic sigma_ij - sigma_ji for a pair i < j."""
    arr = _as_array(A)
    _check_pair(arr.shape[0], i, j)
    return sigma_ij(arr, i, j) - sigma_ij(arr, j, i)


def lambda_from_rotated(W: np.ndarray, p: int) -> np.ndarray:
    """Skew gradient matrix computed from an already-rotated tensor W = A(Q).

    Entry (i, j) with i < j is -d * d_ij(W) when both indices are kept
    (j < p) and -d * sigma_ij(W) when j is discarded; the lower triangle is
    the negative transpose and the discarded block is identically zero.
    """
    d = W.ndim
    n = W.shape[0]
    dg = diag_entries(W)
    V = np.empty((p, n))
    for i in range(p):
        V[i] = W[(slice(None),) + (i,) * (d - 1)]
    S = dg[:p, None] * V  # S[i, j] = sigma_ij(W)
    L = np.zeros((n, n))
    Spp = S[:, :p]
    L[:p, :p] = -d * (Spp - Spp.T)
    if p < n:
        L[:p, p:] = -d * S[:, p:]
        L[p:, :p] = d * S[:, p:].T
    return L


@dataclass(frozen=True)
class GradientMatrix:
    """Skew matrix Lambda(Q); the Riemannian gradient is Q @ matrix."""

    matrix: np.ndarray
    order_factor: int

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.matrix))

    def riemannian(self, Q) -> np.ndarray:
        return _as_array(Q) @ self.matrix


def lambda_matrix(A, Q, p: int) -> GradientMatrix:
    arr = _as_array(A)
    qm = _as_array(Q)
    if not (1 <= p <= arr.shape[0]):
        raise StructuralError(f"need 1 <= p <= n={arr.shape[0]}, got {p}")
    if qm.shape != (arr.shape[0], arr.shape[0]):
        raise StructuralError(
            f"frame shape {qm.shape} does not match tensor dim {arr.shape[0]}"
        )
    W = contract_all(arr, qm)
    L = lambda_from_rotated(W.data, p)
    L.flags.writeable = False
    return GradientMatrix(matrix=L, order_factor=arr.ndim)


def cost_f(A, Q, p: int) -> float:
    """Sum of the first p squared diagonal entries of A(Q)."""
    arr = _as_array(A)
    if not (1 <= p <= arr.shape[0]):
        raise StructuralError(f"need 1 <= p <= n={arr.shape[0]}, got {p}")
    W = contract_all(arr, _as_array(Q))
    dg = diag_entries(W.data)
    return float(np.sum(dg[:p] ** 2))


def cost_f_stiefel(A, X) -> float:
    """Same objective evaluated through an n x p frame only."""
    arr = _as_array(A)
    xm = _as_array(X)
    W = contract_all(arr, xm)
    dg = diag_entries(W.data)
    return float(np.sum(dg**2))


def stiefel_gradient(A, X) -> np.ndarray:
    """Riemannian gradient of the Stiefel objective at X (an n x p tangent)."""
    arr = _as_array(A)
    xm = _as_array(X)
    n, p = xm.shape
    if arr.shape[0] != n:
        raise StructuralError(f"frame rows {n} do not match tensor dim {arr.shape[0]}")
    d = arr.ndim
    Wt = contract_all(arr, xm).data
    dg = diag_entries(Wt)
    # V[:, j, ..., j] = A contracted with column j on all modes but the first
    V = arr
    for _ in range(d - 1):
        V = np.tensordot(V, xm, axes=([1], [0]))
    G = np.empty((n, p))
    for j in range(p):
        G[:, j] = 2.0 * d * dg[j] * V[(slice(None),) + (j,) * (d - 1)]
    K = np.zeros((p, p))
    for i in range(p):
        for j in range(i + 1, p):
            dij = dg[i] * Wt[(j,) + (i,) * (d - 1)] - Wt[(i,) + (j,) * (d - 1)] * dg[j]
            K[i, j] = -dij
            K[j, i] = dij
    return (np.eye(n) - xm @ xm.T) @ G + d * xm @ K


def gamma_ij(A, i: int, j: int):
    """Stationary diagonal ratio of the (i, j) plane of an order-3 tensor.

    Requires A[i,i,i]*A[i,i,j] == A[i,j,j]*A[j,j,j] within tolerance (the
    first-order stationarity of the plane).  Returns 0.0 for an identically
    zero 2 x 2 x 2 subtensor, the string flag ``GAMMA_INFINITE`` when both
    diagonal entries vanish but the off-diagonal ones do not, and otherwise
    the unique scalar g with (A[i,j,j], A[i,i,j]) = g * (A[i,i,i], A[j,j,j]).
    """
    arr = _as_array(A)
    if arr.ndim != 3:
        raise StructuralError("gamma_ij is defined for order-3 tensors")
    _check_pair(arr.shape[0], i, j)
    aiii = float(arr[i, i, i])
    aiij = float(arr[i, i, j])
    aijj = float(arr[i, j, j])
    ajjj = float(arr[j, j, j])
    scale = max(abs(aiii), abs(aiij), abs(aijj), abs(ajjj))
    residual = abs(aiii * aiij - aijj * ajjj)
    if residual > GAMMA_HYPOTHESIS_RTOL * max(1.0, scale * scale):
        raise HypothesisError(residual)
    if scale == 0.0:
        return 0.0
    if aiii == 0.0 and ajjj == 0.0:
        return GAMMA_INFINITE
    # exact under the hypothesis; least-squares form avoids dividing by a
    # vanishing component
    return (aijj * aiii + aiij * ajjj) / (aiii * aiii + ajjj * ajjj)


@dataclass
class DiagnosticReport:
    """Stationarity diagnostics at a frame Q.

    ``omega`` and the two condition flags describe the rank-2, order-3
    convergence conditions and are None for other (p, order) combinations.
    ``gammas`` maps kept pairs (i, j) that satisfy the stationarity
    hypothesis to their diagonal ratio, the flag string "infinite", or
    "zero-subtensor".
    """

    grad_norm: float
    omega: float | None = None
    gammas: dict | None = None
    condition_coupling_ok: bool | None = None
    condition_diagonal_ok: bool | None = None

    def to_dict(self) -> dict:
        gammas = None
        if self.gammas is not None:
            gammas = {f"{i},{j}": v for (i, j), v in sorted(self.gammas.items())}
        return {
            "grad_norm": self.grad_norm,
            "omega": self.omega,
            "gammas": gammas,
            "condition_52": self.condition_coupling_ok,
            "condition_53": self.condition_diagonal_ok,
        }


def diagnostics(
    A,
    Q,
    p: int,
    threshold: float = CONDITION_THRESHOLD,
    include_omega: bool | None = None,
) -> DiagnosticReport:
    """Gradient norm plus the rank-2 convergence-condition report.

    ``include_omega=None`` computes omega and the condition flags exactly
    when they are defined (order 3, p = 2); passing True for any other case
    raises StructuralError.
    """
    arr = _as_array(A)
    d = arr.ndim
    W = contract_all(arr, _as_array(Q)).data
    L = lambda_from_rotated(W, p)
    grad_norm = float(np.linalg.norm(L))

    supported = d == 3 and p == 2
    if include_omega is None:
        include_omega = supported
    if include_omega and not supported:
        raise StructuralError("omega requires an order-3 tensor and p = 2")

    omega = None
    cond_coupling = None
    cond_diagonal = None
    if include_omega:
        dg = diag_entries(W)
        vals = [abs(W[0, 0, 1]), abs(W[0, 1, 1])]
        vals += [abs(dg[k]) for k in range(2, W.shape[0])]
        omega = float(min(vals))
        cond_coupling = bool(W[0, 0, 1] ** 2 + W[0, 1, 1] ** 2 > threshold)
        cond_diagonal = bool(all(abs(dg[k]) > threshold for k in range(2, W.shape[0])))

    gammas = None
    if d == 3:
        gammas = {}
        for i in range(p):
            for j in range(i + 1, p):
                sub = W[np.ix_([i, j], [i, j], [i, j])]
                try:
                    val = gamma_ij(W, i, j)
                except HypothesisError:
                    continue
                if np.all(sub == 0.0):
                    gammas[(i, j)] = GAMMA_ZERO_SUBTENSOR
                else:
                    gammas[(i, j)] = val

    return DiagnosticReport(
        grad_norm=grad_norm,
        omega=omega,
        gammas=gammas,
        condition_coupling_ok=cond_coupling,
        condition_diagonal_ok=cond_diagonal,
    )
