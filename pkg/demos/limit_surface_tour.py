"""Limit-surface correction on a gradient-line contact.

Rotating a slider about its centre of pressure gives a tangential force when
the pressure is asymmetric.  The distributed model and the reduced model with
a pre-computed limit surface both capture it; the ellipsoid approximation
returns none.  Run with ``python demos/limit_surface_tour.py``.
"""
import math

import numpy as np

from planar_friction import (
    P1,
    DistributedModel,
    ReducedModel,
    ScalingMatrices,
    discretize,
    find_zero_tangential_cor,
    gradient_line,
    precompute,
)


def main():
    grid = discretize(gradient_line(0.02), 21)
    print(f"equivalent radius r = {grid.r * 1e3:.3f} mm")

    table = precompute(grid, 20)
    s = ScalingMatrices.from_grid(grid)
    models = {
        "distributed": DistributedModel(grid, P1),
        "reduced (limit surface)": ReducedModel(s, P1, "ls", table),
        "reduced (ellipsoid)": ReducedModel(s, P1, "ellipsoid"),
    }
    twist = (0.0, 0.0, 1.0)
    for name, m in models.items():
        if isinstance(m, DistributedModel):
            f = m.steady_state(twist)
        else:
            f = m.wrench(m.steady_state(twist), np.zeros(3), twist, 1.0)
        print(f"{name:25s} |f_t| = {math.hypot(f[0], f[1]):.4f} N   tau = {f[2] * 1e3:+.4f} mN m")

    # rotating about this point instead cancels the tangential force
    p_s = find_zero_tangential_cor(grid)
    print(f"zero-tangential CoR p_s = ({p_s[0] * 1e3:.3f}, {p_s[1] * 1e3:.3f}) mm")


if __name__ == "__main__":
    main()
