"""Finite network games converging to a graphon game, in both directions.

Direction one: interval-average the graphon game's equilibrium onto growing
finite games built from kernel averages; the coarsened profiles are epsilon_n
equilibria with epsilon_n shrinking.  Direction two: solve each finite game
independently; the solutions settle toward a limit that certifies as an
equilibrium of the graphon game.  Together these witness that graphon
equilibria are exactly the limits of asymptotic network equilibria.
"""

from graphon_games import (
    ExperimentPlan,
    GridSpec,
    LQParams,
    SeparablePowerGraphon,
    lq_game,
    run_characterization_suite,
    run_coarsened_equilibrium_experiment,
    run_limit_equilibrium_experiment,
)

game = lq_game(SeparablePowerGraphon(0.5), LQParams(0.5, 4.0), GridSpec(768))
plan = ExperimentPlan(game, n_list=(8, 16, 32, 64, 128, 256),
                      alt_n_list=(12, 24, 48, 96, 192), alt_grid=768)


def show_rows(rows):
    print(f"{'n':>5s} {'kernel L1':>10s} {'profile L1':>11s} {'epsilon_n':>10s}")
    for row in rows:
        print(f"{row.n:5d} {row.w_l1_error:10.2e} {row.profile_l1:11.2e} "
              f"{row.epsilon_n:10.2e}")


print("== coarsened equilibria stay approximate equilibria ==")
coarse = run_coarsened_equilibrium_experiment(plan)
show_rows(coarse.rows)
print(f"passed: {coarse.passed} (epsilon at n=256 is {coarse.epsilon_at_max_n:.2e})")

print()
print("== independently solved finite games settle on the equilibrium ==")
limit = run_limit_equilibrium_experiment(plan)
show_rows(limit.rows)
print(f"L1 distance of the limit to the closed-form equilibrium: "
      f"{limit.l1_to_reference:.2e}")
print(f"epsilon* of the limit in the graphon game: {limit.epsilon_star_in_target:.2e}")
print(f"passed: {limit.passed}")

print()
print("== the full suite on two sequences (dyadic and multiples of 3) ==")
report = run_characterization_suite(plan)
print(f"dyadic coarsened passed:      {report.primary_coarsened.passed}")
print(f"3-adic coarsened passed:      {report.alt_coarsened.passed}")
print(f"dyadic limit certified:       {report.primary_limit.passed}")
print(f"3-adic limit certified:       {report.alt_limit.passed}")
print(f"L1 gap between the two limit profiles: {report.cross_l1:.2e}")
print(f"suite passed: {report.passed}")
