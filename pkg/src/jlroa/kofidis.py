"""The Kofidis-Regalia 3x3x3x3 test tensor.

A classic hard instance for the symmetric higher-order power method: the
power iteration's weight never settles on this tensor, while plane-rotation
sweeps converge.  Fifteen orbit values define the tensor completely (every
size-4 multiset over three indices); keys below are sorted 0-based index
tuples and each value fills its whole permutation orbit.
"""

from __future__ import annotations

import numpy as np

from .symtensor import SymTensor

KOFIDIS_ORBITS = {
    (0, 0, 0, 0): 0.2883,
    (0, 0, 1, 1): -0.2485,
    (0, 1, 1, 1): 0.2972,
    (0, 2, 2, 2): -0.3619,
    (1, 1, 2, 2): 0.2127,
    (0, 0, 0, 1): -0.0031,
    (0, 0, 1, 2): -0.2939,
    (0, 1, 1, 2): 0.1862,
    (1, 1, 1, 1): 0.1241,
    (1, 2, 2, 2): 0.2727,
    (0, 0, 0, 2): 0.1973,
    (0, 0, 2, 2): 0.3847,
    (0, 1, 2, 2): 0.0919,
    (1, 1, 1, 2): -0.3420,
    (2, 2, 2, 2): -0.3054,
}


def kofidis_tensor() -> SymTensor:
    arr = np.zeros((3, 3, 3, 3))
    for idx in np.ndindex(*arr.shape):
        arr[idx] = KOFIDIS_ORBITS[tuple(sorted(idx))]
    return SymTensor(arr, validate=False)
