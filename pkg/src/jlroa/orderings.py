"""Pair orderings for sweeps: construction, the nested-block test, and the
equivalence search that certifies an ordering rearranges into nested-block
form by the four order-preserving moves.

The sweep pair set for rank p over dimension n is
C = {(i, j) : 0 <= i < j < n, i < p}, of size N = p(2n - p - 1)/2.
An ordering has the nested-block property when its consecutive blocks of
sizes n-1, n-2, ..., n-p each share a common index; such orderings admit
the rigidity property that a product of plane rotations over the ordering
can only equal the identity when every angle is zero.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass

import numpy as np

from .rotations import givens_array
from .symtensor import StructuralError

MOVE_SWAP = "swap"
MOVE_ROTATE_LEFT = "rotate-left"
MOVE_ROTATE_RIGHT = "rotate-right"
MOVE_REVERSE = "reverse"

# Exhaustive class enumeration is the default up to this many pairs.
EXHAUSTIVE_BOUND = 12


def pair_set(n: int, p: int) -> list[tuple[int, int]]:
    """The sweep pair set in row-major order."""
    if not (1 <= p <= n):
        raise StructuralError(f"need 1 <= p <= n, got p={p}, n={n}")
    return [(i, j) for i in range(p) for j in range(i + 1, n)]


@dataclass(frozen=True)
class PairOrdering:
    """A permutation of the sweep pair set, driving one sweep."""

    n: int
    p: int
    pairs: tuple

    def __post_init__(self):
        expected = pair_set(self.n, self.p)
        got = [tuple(int(v) for v in pr) for pr in self.pairs]
        if sorted(got) != expected:
            raise StructuralError(
                f"pairs are not a permutation of the sweep set for n={self.n}, p={self.p}"
            )
        object.__setattr__(self, "pairs", tuple(got))

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def to_json(self) -> str:
        return json.dumps([[i, j] for i, j in self.pairs])

    @classmethod
    def from_json(cls, text: str, n: int, p: int) -> "PairOrdering":
        try:
            raw = json.loads(text)
            pairs = tuple((int(a), int(b)) for a, b in raw)
        except (ValueError, TypeError) as exc:
            raise StructuralError(f"malformed ordering JSON: {exc}") from exc
        return cls(n=n, p=p, pairs=pairs)


def cyclic_ordering(n: int, p: int) -> PairOrdering:
    """Row-major sweep: (0,1), (0,2), ..., (0,n-1), (1,2), ..., (p-1,n-1)."""
    return PairOrdering(n=n, p=p, pairs=tuple(pair_set(n, p)))


def random_ordering(n: int, p: int, seed) -> PairOrdering:
    """Uniform seeded shuffle of the sweep pair set."""
    base = pair_set(n, p)
    rng = np.random.default_rng(seed)
    perm = rng.permutation(len(base))
    return PairOrdering(n=n, p=p, pairs=tuple(base[k] for k in perm))


def in_sigma0(P: PairOrdering) -> bool:
    """True when consecutive blocks of sizes n-1, ..., n-p each share an index."""
    pos = 0
    for blk in range(1, P.p + 1):
        size = P.n - blk
        if size == 0:
            continue
        block = P.pairs[pos : pos + size]
        pos += size
        common = set(block[0])
        for pr in block[1:]:
            common &= set(pr)
            if not common:
                return False
    return pos == len(P.pairs)


@dataclass(frozen=True)
class Move:
    kind: str
    position: int | None = None

    def to_dict(self) -> dict:
        return {"move": self.kind, "position": self.position}


@dataclass(frozen=True)
class SigmaSearchResult:
    """Outcome of the nested-block equivalence search.

    ``status`` is "yes" (with a replayable ``witness``), "no" (the entire
    equivalence class was enumerated without a hit), or "unknown" (the
    depth limit truncated the search).
    """

    status: str
    witness: tuple | None
    explored: int


def _moves_from(state: tuple):
    N = len(state)
    for pos in range(N - 1):
        a, b = state[pos], state[pos + 1]
        if not (set(a) & set(b)):
            successor = list(state)
            successor[pos], successor[pos + 1] = successor[pos + 1], successor[pos]
            yield Move(MOVE_SWAP, pos), tuple(successor)
    yield Move(MOVE_ROTATE_LEFT), state[1:] + state[:1]
    yield Move(MOVE_ROTATE_RIGHT), state[-1:] + state[:-1]
    yield Move(MOVE_REVERSE), tuple(reversed(state))


def apply_move(P: PairOrdering, move: Move) -> PairOrdering:
    state = P.pairs
    if move.kind == MOVE_SWAP:
        pos = move.position
        if pos is None or not (0 <= pos < len(state) - 1):
            raise StructuralError(f"bad swap position {pos}")
        if set(state[pos]) & set(state[pos + 1]):
            raise StructuralError(f"pairs at {pos} share an index, cannot swap")
        s = list(state)
        s[pos], s[pos + 1] = s[pos + 1], s[pos]
        return PairOrdering(n=P.n, p=P.p, pairs=tuple(s))
    if move.kind == MOVE_ROTATE_LEFT:
        return PairOrdering(n=P.n, p=P.p, pairs=state[1:] + state[:1])
    if move.kind == MOVE_ROTATE_RIGHT:
        return PairOrdering(n=P.n, p=P.p, pairs=state[-1:] + state[:-1])
    if move.kind == MOVE_REVERSE:
        return PairOrdering(n=P.n, p=P.p, pairs=tuple(reversed(state)))
    raise StructuralError(f"unknown move {move.kind!r}")


def replay_witness(P: PairOrdering, moves) -> PairOrdering:
    for mv in moves:
        P = apply_move(P, mv)
    return P


def replay_angles(thetas, moves) -> list[float]:
    """Transform an angle list alongside a witness so the rotation product
    is preserved: swaps and rotations permute the angles, a reversal also
    negates them (the reversed product is the transpose of the original)."""
    out = list(thetas)
    for mv in moves:
        if mv.kind == MOVE_SWAP:
            pos = mv.position
            out[pos], out[pos + 1] = out[pos + 1], out[pos]
        elif mv.kind == MOVE_ROTATE_LEFT:
            out = out[1:] + out[:1]
        elif mv.kind == MOVE_ROTATE_RIGHT:
            out = out[-1:] + out[:-1]
        elif mv.kind == MOVE_REVERSE:
            out = [-t for t in reversed(out)]
        else:
            raise StructuralError(f"unknown move {mv.kind!r}")
    return out


def equivalent_to_sigma0(
    P: PairOrdering,
    depth_limit: int | None = None,
    exhaustive_bound: int = EXHAUSTIVE_BOUND,
) -> SigmaSearchResult:
    """Breadth-first search of the move-equivalence class for a nested-block
    member.

    Below ``exhaustive_bound`` pairs the class is enumerated completely, so
    "no" is definitive.  Larger problems honour ``depth_limit`` (number of
    BFS levels) and report "unknown" when it truncates the search.
    """
    start = P.pairs
    if in_sigma0(P):
        return SigmaSearchResult(status="yes", witness=(), explored=1)
    exhaustive = len(start) <= exhaustive_bound
    if not exhaustive and depth_limit is None:
        depth_limit = 20
    seen = {start}
    parent: dict = {}
    frontier = deque([start])
    depth = 0
    while frontier:
        if not exhaustive and depth >= depth_limit:
            return SigmaSearchResult(status="unknown", witness=None, explored=len(seen))
        next_frontier = deque()
        while frontier:
            state = frontier.popleft()
            for mv, nxt in _moves_from(state):
                if nxt in seen:
                    continue
                seen.add(nxt)
                parent[nxt] = (state, mv)
                if in_sigma0(PairOrdering(n=P.n, p=P.p, pairs=nxt)):
                    moves = []
                    cur = nxt
                    while cur != start:
                        prev, m = parent[cur]
                        moves.append(m)
                        cur = prev
                    return SigmaSearchResult(
                        status="yes", witness=tuple(reversed(moves)), explored=len(seen)
                    )
                next_frontier.append(nxt)
        frontier = next_frontier
        depth += 1
    return SigmaSearchResult(status="no", witness=None, explored=len(seen))


def verify_identity_decomposition(P: PairOrdering, thetas) -> float:
    """Frobenius residual of prod_k G(i_k, j_k, theta_k) against the identity."""
    angles = list(thetas)
    if len(angles) != len(P.pairs):
        raise StructuralError(
            f"got {len(angles)} angles for {len(P.pairs)} pairs"
        )
    prod = np.eye(P.n)
    for (i, j), t in zip(P.pairs, angles):
        prod = prod @ givens_array(P.n, i, j, float(t))
    return float(np.linalg.norm(prod - np.eye(P.n)))
