"""Solving the equation by Newton continuation: a manufactured 1D study.

Pick phi* = 0.01 cos(2 pi x), compute A = forward(phi*) in closed form,
then hand only A to the solver and watch it walk t from 0 to 1, starting
at the trivial solution of t = 0.  The recovered perturbation matches
phi* to solver accuracy; the trace records the whole path.
"""

import numpy as np

from abreu import SolverConfig, continuity_solve, make_grid, sup_norm
from abreu.grid import ScalarField

grid = make_grid(1, [64])
x = grid.axis_coordinates(0)
eps = 0.01
delta = 4 * np.pi**2 * eps
g = 1.0 / (1.0 - delta * np.cos(2 * np.pi * x))
rhs = -delta * (2 * np.pi) ** 2 * g**2 * (
    np.cos(2 * np.pi * x) - 2 * delta * np.sin(2 * np.pi * x) ** 2 * g
)
A = ScalarField(grid, rhs - rhs.mean())
phi_star = eps * np.cos(2 * np.pi * x)

print(f"right-hand side: sup|A| = {np.max(np.abs(rhs)):.3f}, mean 0")
print("continuation trace (step doubles after easy Newton convergence):")
P, trace = continuity_solve(A, cfg=SolverConfig())
for s in trace.steps:
    print(f"  t={s.t:5.3f}  newton_iters={s.newton_iterations}  "
          f"residual={s.final_residual_norm:.2e}  "
          f"det in [{s.det_min:.4f}, {s.det_max:.4f}]  "
          f"margin={s.convexity_margin:.4f}  F={s.functional_value:+.6e}")

err = np.max(np.abs(P.perturbation.values - phi_star))
print(f"\nrecovered perturbation vs phi*: max error {err:.3e}")

# the determinant stays uniformly pinched along the whole path, which is
# exactly what the a-priori bounds promise for solutions driven by this A
det_lo = min(s.det_min for s in trace.steps)
det_hi = max(s.det_max for s in trace.steps)
print(f"determinant range along the path: [{det_lo:.4f}, {det_hi:.4f}]")

# uniqueness: a different admissible starting guess lands on the same
# solution (the functional is convex along linear paths)
bump = ScalarField(grid, 0.002 * np.cos(4 * np.pi * x))
P2, _ = continuity_solve(A, initial_perturbation=bump)
print(f"noisy start vs flat start: solutions differ by "
      f"{sup_norm(P.perturbation - P2.perturbation):.3e}")
