"""Reference matrices and vectors printed in the source material."""

import numpy as np

GRID_2X2_E01 = np.array(
    [
        [-1, 0, 0, 0, 0, 0, -1, 0, 0, 0, 0, 0],
        [0, -1, 0, 0, 0, 0, 1, -1, 0, 0, 0, 0],
        [0, 0, -1, 0, 0, 0, 0, 1, 0, 0, 0, 0],
        [1, 0, 0, -1, 0, 0, 0, 0, -1, 0, 0, 0],
        [0, 1, 0, 0, -1, 0, 0, 0, 1, -1, 0, 0],
        [0, 0, 1, 0, 0, -1, 0, 0, 0, 1, 0, 0],
        [0, 0, 0, 1, 0, 0, 0, 0, 0, 0, -1, 0],
        [0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 1, -1],
        [0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 1],
    ]
)

GRID_2X2_E12 = np.array(
    [
        [1, 0, 0, 0],
        [-1, 1, 0, 0],
        [0, -1, 0, 0],
        [0, 0, 1, 0],
        [0, 0, -1, 1],
        [0, 0, 0, -1],
        [-1, 0, 0, 0],
        [0, -1, 0, 0],
        [1, 0, -1, 0],
        [0, 1, 0, -1],
        [0, 0, 1, 0],
        [0, 0, 0, 1],
    ]
)

HOLE_E01 = np.array(
    [
        [-1, -1, -1, 0, 0, 0, 0, 0, 0, 0, 0, 0],
        [1, 0, 0, -1, -1, 0, 0, 0, 0, 0, 0, 0],
        [0, 0, 1, 0, 0, -1, -1, 0, 0, 0, 0, 0],
        [0, 0, 0, 1, 0, 1, 0, -1, 0, 0, 0, 0],
        [0, 0, 0, 0, 0, 0, 1, 0, -1, -1, 0, 0],
        [0, 0, 0, 0, 0, 0, 0, 1, 1, 0, -1, 0],
        [0, 1, 0, 0, 0, 0, 0, 0, 0, 1, 0, -1],
        [0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 1, 1],
    ]
)

HOLE_E12 = np.array(
    [
        [1, 0, 0, 0],
        [0, -1, 0, 0],
        [-1, 1, 0, 0],
        [1, 0, -1, 0],
        [0, 0, 1, 0],
        [-1, 0, 0, 0],
        [0, 1, 0, 0],
        [0, 0, -1, 0],
        [0, 0, 0, 1],
        [0, 1, 0, -1],
        [0, 0, -1, 1],
        [0, 0, 0, -1],
    ]
)

HOLE_HARMONIC_CHAIN = np.array([1, -1, 0, 0, 1, 1, -1, 1, -1, 0, 0, -1])
