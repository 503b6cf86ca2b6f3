"""
Same control from a wrong model
===============================

An unstable scalar plant (a=0.3, b=1.3) is controlled using a stable model
(a=-0.6, b=0.7). A strong square-wave excitation d(t) = +-200 pushes both
unconstrained minimizers far outside |u| <= 0.05, so both problems pick the
same bang-bang control even though their Hamiltonian gradients disagree.

Run:  python3 demos/01_bang_bang_equivalence.py [out_dir]
"""
import sys
from pathlib import Path

import numpy as np

from twinpmp import closed_loop_coupled_run, solve_p1
from twinpmp.equivalence import check_theorem3_conditions, saturation_profile
from twinpmp.fixtures import benchmark_scenario

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo-out")

sc = benchmark_scenario()

# plant-optimal control, as if the plant were known
p1 = solve_p1(sc)
print(f"plant sweep: converged={p1.converged} after {p1.iterations} iterations, cost {p1.total_cost:.4f}")

# model-based control, with the model state pulled toward the measured plant state
run = closed_loop_coupled_run(sc)
p2 = run.solution
print(f"model sweep: converged={p2.converged}, {run.outer_iterations} outer passes")

rep = check_theorem3_conditions(sc, p1, p2)
print(f"\nverdict: {rep.verdict}")
print(f"max |u_plant - u_model|        = {rep.control_sup_distance:.3g}")
print(f"max |x_plant - x_model|        = {rep.state_sup_distance:.3f}   (trajectories differ)")
res = rep.gradient_match_residual.values[:, 0]
print(f"gradient mismatch, min .. max  = {res.min():.1f} .. {res.max():.1f}")
print(f"nodes where both saturate      = {rep.both_saturated_fraction:.1%}")

# where the unconstrained minimizers sit relative to the bounds
unc = np.c_[p1.unconstrained_control.values, p2.unconstrained_control.values]
print(f"|u_uncon| ranges: plant {np.abs(unc[:, 0]).min():.0f}..{np.abs(unc[:, 0]).max():.0f}, "
      f"model {np.abs(unc[:, 1]).min():.0f}..{np.abs(unc[:, 1]).max():.0f} (bound 0.05)")
prof = saturation_profile(p1, sc.control_set).values[:, 0]
print(f"plant side: {np.sum(prof < 0)} nodes at lo, {np.sum(prof > 0)} at hi, {np.sum(prof == 0)} interior")

# the three figures (controls overlay, unconstrained minimizers, states) plus CSV traces
from twinpmp import SweepSettings  # noqa: E402
from twinpmp.cli import run_experiment, write_artifacts  # noqa: E402

write_artifacts(run_experiment(sc, SweepSettings(), tol=1e-9), out)
print(f"\nwrote traces and plots to {out}/")
