"""
No bounds, quadratic effort
===========================

With U = R and effort r u^2 / 2 the minimizer is -(b lambda + d) / r, so the
controls can only agree if the gradients agree. A model equal to the plant does
exactly that; a mismatched one does not, and nothing else rescues it.
"""
from twinpmp import closed_loop_coupled_run, solve_p1
from twinpmp.equivalence import check_theorem3_conditions
from twinpmp.fixtures import unbounded_quadratic_scenario

for matched in (True, False):
    sc = unbounded_quadratic_scenario(matched=matched)
    p1 = solve_p1(sc)
    run = closed_loop_coupled_run(sc)
    rep = check_theorem3_conditions(sc, p1, run.solution)
    label = "matched model" if matched else "mismatched model"
    print(f"{label:>17}: {rep.verdict.value:<26} max|du| = {rep.control_sup_distance:.3g}, "
          f"sufficient conditions hold: {rep.theorem3_sufficient_holds}")
