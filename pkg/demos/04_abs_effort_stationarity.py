"""
Stationarity with a kink
========================

H(u) = |u| + a u on U = [-1, 1]. The subdifferential at 0 is [a - 1, a + 1];
it contains 0 exactly when |a| <= 1, so u = 0 is optimal for |a| < 1. Past
that, the linear term wins and the minimizer jumps to the bound -sign(a).
Brute force over a 2001-point grid confirms each case.
"""
import numpy as np

from twinpmp import brute_force_argmin, hamiltonian_u_subdifferential, minimize_hamiltonian
from twinpmp.equivalence import check_theorem2_pointwise
from twinpmp.fixtures import abs_effort_spec

zero, one = np.zeros(1), np.ones(1)
print(f"{'a':>6} {'dH(0)':>16} {'match':>6} {'cone':>6} {'argmin':>7} {'grid argmin':>12}")
for a in (-1.5, -1.01, -0.99, -0.5, 0.0, 0.5, 0.99, 1.01, 1.5):
    plant, model = abs_effort_spec(a), abs_effort_spec(a, beta=1.0)
    match, cone = check_theorem2_pointwise(plant, model, 0.0, zero, one, zero, one, zero)
    g = hamiltonian_u_subdifferential(plant, 0.0, zero, zero, one)
    u = minimize_hamiltonian(plant, 0.0, zero, None, one).minimizer[0]
    pts, _ = brute_force_argmin(plant, 0.0, zero, None, one, 2001)
    print(f"{a:6.2f} {f'[{g.lo[0]:.2f}, {g.hi[0]:.2f}]':>16} {match!s:>6} {cone!s:>6} "
          f"{u:7.2f} {pts[0, 0]:12.2f}")

# a mismatched pair: same kink, different linear coefficient
match, _ = check_theorem2_pointwise(abs_effort_spec(2.0), abs_effort_spec(0.5, beta=1.0),
                                    0.0, zero, one, zero, one, zero)
print(f"\na_plant=2, a_model=0.5: subgradients match at 0? {match}")
