"""Dense symmetric tensors and orthonormal frames.

A symmetric tensor of order d over R^n is stored as the full dense
(n, ..., n) array; symmetry is enforced on construction and preserved by
every operation in this package.  All indices are 0-based.
"""

from __future__ import annotations

import json
import math
from itertools import permutations

import numpy as np

# Asymmetry accepted on ingestion (relative to the largest entry); inputs
# within this tolerance are re-symmetrized, anything worse is rejected.
INGEST_RTOL = 1e-8
# Frobenius tolerance for orthonormality of frames.
ORTHO_TOL = 1e-10


class StructuralError(ValueError):
    """Shape, index, or symmetry violation in a tensor/matrix input."""


def _as_array(obj) -> np.ndarray:
    if isinstance(obj, SymTensor):
        return obj.data
    if isinstance(obj, (OrthoMatrix, StiefelMatrix)):
        return obj.mat
    return np.asarray(obj, dtype=float)


def _average_over_permutations(arr: np.ndarray) -> np.ndarray:
    d = arr.ndim
    out = np.zeros_like(arr)
    count = 0
    for perm in permutations(range(d)):
        out += arr.transpose(perm)
        count += 1
    return out / count


def _worst_asymmetry(arr: np.ndarray) -> tuple[float, tuple[int, ...]]:
    """Largest |A[idx] - A[perm(idx)]| over all permutations, with its index."""
    worst = 0.0
    where = (0,) * arr.ndim
    for perm in permutations(range(arr.ndim)):
        dev = np.abs(arr - arr.transpose(perm))
        k = np.unravel_index(int(np.argmax(dev)), dev.shape)
        if dev[k] > worst:
            worst = float(dev[k])
            where = k
    return worst, where


class SymTensor:
    """Dense order-d symmetric tensor over R^n, immutable after construction.

    ``data`` is a read-only ndarray with shape ``(n,) * d``.  Construction
    validates that the array is cubical of order >= 2 and symmetric within
    ``INGEST_RTOL`` (relative to the largest entry), then re-symmetrizes so
    downstream code can rely on exact invariance.
    """

    __slots__ = ("data",)

    def __init__(self, data, validate: bool = True):
        arr = np.array(_as_array(data), dtype=float, copy=True)
        if arr.ndim < 2:
            raise StructuralError(f"tensor order must be >= 2, got {arr.ndim}")
        if len(set(arr.shape)) != 1:
            raise StructuralError(f"tensor must be cubical, got shape {arr.shape}")
        if arr.shape[0] < 2:
            raise StructuralError(f"tensor dimension must be >= 2, got {arr.shape[0]}")
        if validate:
            scale = float(np.max(np.abs(arr))) or 1.0
            dev, where = _worst_asymmetry(arr)
            if dev > INGEST_RTOL * scale:
                raise StructuralError(
                    f"input is not symmetric: deviation {dev:.3e} at index {where} "
                    f"exceeds {INGEST_RTOL:.0e} * max|entry|"
                )
            if dev > 0.0:
                arr = _average_over_permutations(arr)
        arr.flags.writeable = False
        self.data = arr

    @property
    def order(self) -> int:
        return self.data.ndim

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def __getitem__(self, idx):
        return self.data[idx]

    def __array__(self, dtype=None, copy=None):
        return self.data if dtype is None else self.data.astype(dtype)

    def __repr__(self):
        return f"SymTensor(order={self.order}, dim={self.dim})"

    def entry(self, *idx) -> float:
        return float(self.data[tuple(idx)])


class OrthoMatrix:
    """Square orthogonal frame Q with ||Q^T Q - I||_F <= ORTHO_TOL."""

    __slots__ = ("mat",)

    def __init__(self, mat, validate: bool = True):
        arr = np.array(_as_array(mat), dtype=float, copy=True)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise StructuralError(f"expected a square matrix, got shape {arr.shape}")
        if validate and self._defect(arr) > ORTHO_TOL:
            raise StructuralError(
                f"matrix is not orthogonal: ||Q^T Q - I||_F = {self._defect(arr):.3e}"
            )
        arr.flags.writeable = False
        self.mat = arr

    @staticmethod
    def _defect(arr: np.ndarray) -> float:
        return float(np.linalg.norm(arr.T @ arr - np.eye(arr.shape[1])))

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def defect(self) -> float:
        """Orthogonality defect ||Q^T Q - I||_F, checkable on demand."""
        return self._defect(self.mat)

    @classmethod
    def identity(cls, n: int) -> "OrthoMatrix":
        return cls(np.eye(n), validate=False)

    def __repr__(self):
        return f"OrthoMatrix(dim={self.dim})"


class StiefelMatrix:
    """n x p frame X with orthonormal columns, ||X^T X - I_p||_F <= ORTHO_TOL."""

    __slots__ = ("mat",)

    def __init__(self, mat, validate: bool = True):
        arr = np.array(_as_array(mat), dtype=float, copy=True)
        if arr.ndim != 2 or arr.shape[1] > arr.shape[0]:
            raise StructuralError(f"expected n x p with p <= n, got shape {arr.shape}")
        if validate:
            defect = float(np.linalg.norm(arr.T @ arr - np.eye(arr.shape[1])))
            if defect > ORTHO_TOL:
                raise StructuralError(
                    f"columns are not orthonormal: ||X^T X - I||_F = {defect:.3e}"
                )
        arr.flags.writeable = False
        self.mat = arr

    @property
    def rows(self) -> int:
        return self.mat.shape[0]

    @property
    def cols(self) -> int:
        return self.mat.shape[1]

    def defect(self) -> float:
        return float(np.linalg.norm(self.mat.T @ self.mat - np.eye(self.cols)))

    def __repr__(self):
        return f"StiefelMatrix(rows={self.rows}, cols={self.cols})"


def random_orthogonal(n: int, seed) -> OrthoMatrix:
    """Orthogonal factor of a seeded Gaussian matrix (QR with positive R diag)."""
    rng = np.random.default_rng(seed)
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    Q = Q * np.sign(np.diag(R))
    return OrthoMatrix(Q, validate=False)


def symmetrize(raw, order: int | None = None, dim: int | None = None) -> SymTensor:
    """Orthogonal projection of ``raw`` onto the symmetric subspace.

    Averages over all index permutations, which is the least-squares nearest
    symmetric tensor.  ``raw`` may be a flat length-n^d array (pass ``order``
    and ``dim``) or an already-shaped cubical array.
    """
    arr = np.asarray(raw, dtype=float)
    if order is not None or dim is not None:
        if order is None or dim is None:
            raise StructuralError("order and dim must be given together")
        if arr.size != dim**order:
            raise StructuralError(
                f"expected {dim**order} entries for order={order}, dim={dim}, got {arr.size}"
            )
        arr = arr.reshape((dim,) * order)
    if arr.ndim < 2 or len(set(arr.shape)) != 1:
        raise StructuralError(f"cannot symmetrize array of shape {arr.shape}")
    return SymTensor(_average_over_permutations(arr), validate=False)


def contract_all(A: SymTensor, M) -> SymTensor:
    """Contract every mode of ``A`` with the columns of ``M``.

    For square orthogonal Q this is the change of frame W = A(Q) with
    W[j,...,j] = sum A[i1,...,id] Q[i1,j] ... Q[id,j]; for an n x p Stiefel
    frame the result has dimension p.  The result is re-symmetrized to kill
    roundoff-level asymmetry.
    """
    arr = _as_array(A)
    mat = _as_array(M)
    if mat.ndim != 2 or mat.shape[0] != arr.shape[0]:
        raise StructuralError(
            f"matrix shape {mat.shape} does not match tensor dim {arr.shape[0]}"
        )
    T = arr
    for _ in range(arr.ndim):
        # contracting the leading mode and appending the new one restores
        # the original axis order after d steps
        T = np.tensordot(T, mat, axes=([0], [0]))
    return SymTensor(_average_over_permutations(T), validate=False)


def subtensor(A: SymTensor, indices) -> SymTensor:
    """Restrict every mode of ``A`` to the strictly increasing ``indices``."""
    arr = _as_array(A)
    idx = list(indices)
    if len(idx) < 2:
        raise StructuralError("subtensor needs at least two indices")
    if any(int(k) != k for k in idx):
        raise StructuralError(f"indices must be integers, got {idx}")
    idx = [int(k) for k in idx]
    if any(a >= b for a, b in zip(idx, idx[1:])):
        raise StructuralError(f"indices must be strictly increasing, got {idx}")
    if idx[0] < 0 or idx[-1] >= arr.shape[0]:
        raise StructuralError(f"indices {idx} out of range for dim {arr.shape[0]}")
    take = np.array(idx)
    return SymTensor(arr[np.ix_(*([take] * arr.ndim))], validate=False)


def frobenius_norm(A) -> float:
    return float(np.linalg.norm(_as_array(A).ravel()))


def random_symmetric(order: int, dim: int, seed, dist: str = "normal") -> SymTensor:
    """Seeded random symmetric tensor.

    ``dist="normal"`` symmetrizes i.i.d. standard normal entries;
    ``dist="uniform"`` symmetrizes i.i.d. uniform [0, 1) entries (all-positive
    tensors, used by the experiment protocols).
    """
    if order < 2 or dim < 2:
        raise StructuralError(f"need order >= 2 and dim >= 2, got {order}, {dim}")
    rng = np.random.default_rng(seed)
    if dist == "normal":
        raw = rng.standard_normal((dim,) * order)
    elif dist == "uniform":
        raw = rng.random((dim,) * order)
    else:
        raise StructuralError(f"unknown dist {dist!r}")
    return symmetrize(raw)


# ---------------------------------------------------------------------------
# JSON tensor files
#
# {"order": d, "dim": n, "entries": {"dense": [... n^d row-major ...]}}
# or
# {"order": d, "dim": n, "entries": {"orbits": [{"index": [i1,...,id],
#                                                "value": v}, ...]}}
# Orbit indices are 0-based; each listed value is written to the full
# permutation orbit of its index, unlisted orbits are zero.

def tensor_to_dict(A: SymTensor) -> dict:
    return {
        "order": A.order,
        "dim": A.dim,
        "entries": {"dense": A.data.ravel().tolist()},
    }


def tensor_from_dict(obj: dict) -> SymTensor:
    try:
        order = int(obj["order"])
        dim = int(obj["dim"])
        entries = obj["entries"]
    except (KeyError, TypeError, ValueError) as exc:
        raise StructuralError(f"malformed tensor object: {exc}") from exc
    if "dense" in entries:
        flat = np.asarray(entries["dense"], dtype=float)
        if flat.size != dim**order:
            raise StructuralError(
                f"dense entry list has {flat.size} values, expected {dim**order}"
            )
        return SymTensor(flat.reshape((dim,) * order))
    if "orbits" in entries:
        arr = np.zeros((dim,) * order)
        seen = set()
        for item in entries["orbits"]:
            idx = tuple(int(k) for k in item["index"])
            if len(idx) != order or min(idx) < 0 or max(idx) >= dim:
                raise StructuralError(f"orbit index {idx} out of range")
            key = tuple(sorted(idx))
            if key in seen:
                raise StructuralError(f"duplicate orbit for index {key}")
            seen.add(key)
            val = float(item["value"])
            for perm in set(permutations(idx)):
                arr[perm] = val
        return SymTensor(arr, validate=False)
    raise StructuralError('tensor "entries" must contain "dense" or "orbits"')


def save_tensor(A: SymTensor, path) -> None:
    with open(path, "w") as fh:
        json.dump(tensor_to_dict(A), fh)


def load_tensor(path) -> SymTensor:
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise StructuralError(f"invalid JSON in {path}: {exc}") from exc
    return tensor_from_dict(obj)
