import numpy as np


def decaying_field(grid, rng, width=1.2, centre_scale=0.7):
    """Random smooth field: a random complex polynomial times a Gaussian envelope."""
    Q, P = grid.mesh()
    c = rng.normal(size=6) + 1j * rng.normal(size=6)
    q0, p0 = rng.normal(scale=centre_scale, size=2)
    x, y = Q - q0, P - p0
    poly = c[0] + c[1] * x + c[2] * y + c[3] * x * y + c[4] * x * x + c[5] * y * y
    return poly * np.exp(-(x * x + y * y) / (2 * width**2))
