"""Published simulation results used as reproduction targets.

Keys are (design, gamma, n). Coverage values are for nominal 0.95 intervals.
"""

SCENARIOS = [
    (design, gamma, n)
    for design in ("srswor", "stratified_srswor")
    for gamma in (0.0, 1.0)
    for n in (40, 80)
]

COVERAGE_95 = {
    ("srswor", 0.0, 40): {"b2_Ha(0.75)": 0.981, "b2_cal(0.75)": 0.967, "b3_Ha": 0.957, "b3_cal": 0.925},
    ("srswor", 0.0, 80): {"b2_Ha(0.75)": 0.976, "b2_cal(0.75)": 0.966, "b3_Ha": 0.961, "b3_cal": 0.945},
    ("srswor", 1.0, 40): {"b2_Ha(0.75)": 0.987, "b2_cal(0.75)": 0.971, "b3_Ha": 0.953, "b3_cal": 0.934},
    ("srswor", 1.0, 80): {"b2_Ha(0.75)": 0.963, "b2_cal(0.75)": 0.958, "b3_Ha": 0.938, "b3_cal": 0.944},
    ("stratified_srswor", 0.0, 40): {"b2_Ha(0.75)": 0.971, "b2_cal(0.75)": 0.968, "b3_Ha": 0.965, "b3_cal": 0.956},
    ("stratified_srswor", 0.0, 80): {"b2_Ha(0.75)": 0.964, "b2_cal(0.75)": 0.957, "b3_Ha": 0.964, "b3_cal": 0.960},
    ("stratified_srswor", 1.0, 40): {"b2_Ha(0.75)": 0.977, "b2_cal(0.75)": 0.986, "b3_Ha": 0.962, "b3_cal": 0.960},
    ("stratified_srswor", 1.0, 80): {"b2_Ha(0.75)": 0.966, "b2_cal(0.75)": 0.965, "b3_Ha": 0.943, "b3_cal": 0.950},
}

RMSE = {
    ("srswor", 0.0, 40): {"mean_Ha": 0.337, "mean_cal": 0.156},
    ("srswor", 0.0, 80): {"mean_Ha": 0.24, "mean_cal": 0.113},
    ("srswor", 1.0, 40): {"mean_Ha": 0.403, "mean_cal": 0.355},
    ("srswor", 1.0, 80): {"mean_Ha": 0.291, "mean_cal": 0.259},
    ("stratified_srswor", 0.0, 40): {"mean_Ha": 0.226, "mean_cal": 0.163},
    ("stratified_srswor", 0.0, 80): {"mean_Ha": 0.153, "mean_cal": 0.111},
    ("stratified_srswor", 1.0, 40): {"mean_Ha": 0.334, "mean_cal": 0.327},
    ("stratified_srswor", 1.0, 80): {"mean_Ha": 0.246, "mean_cal": 0.239},
}

POPULATION_SKEWNESS = {0.0: {"b2(0.25)": 0.040, "b3": 0.226}, 1.0: {"b2(0.25)": 0.321, "b3": 0.455}}

# Population seed used for reproduction runs. It is the seed in 1..5000 whose
# realizations (same seed for both gamma) come closest, in max abs deviation,
# to POPULATION_SKEWNESS; see scripts/select_population_seed.py. Coverage was
# not consulted.
REPRODUCTION_SEED = 1137
SEED_SEARCH_RANGE = range(1, 5001)
