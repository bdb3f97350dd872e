"""Parameter sets and printed values of the published tables and figures."""

# (p_A, p_B, Bahadur nu*, Neyman)
TABLE1 = (
    (0.5, 0.8, 0.518, 0.556),
    (0.5, 0.65, 0.504, 0.512),
    (0.6, 0.75, 0.510, 0.531),
    (0.7, 0.75, 0.505, 0.514),
    (0.7, 0.85, 0.521, 0.562),
    (0.7, 0.9, 0.535, 0.604),
    (0.85, 0.95, 0.541, 0.621),
    (0.5, 0.9, 0.542, 0.625),
)

# (p_A, p_B, p0, Bahadur, Pitman)
TABLE2 = (
    (0.1, 0.3, 0.28, 0.420, 0.396),
    (0.2, 0.35, 0.3, 0.460, 0.456),
    (0.22, 0.33, 0.3, 0.471, 0.468),
    (0.25, 0.35, 0.33, 0.479, 0.476),
    (0.2, 0.4, 0.33, 0.455, 0.449),
    (0.1, 0.4, 0.3, 0.400, 0.380),
)

# (F_A, F_B, Bahadur, Neyman); gamma rows as (shape, second argument)
TABLE3_POISSON = (
    (1.0, 2.0, 0.471, 0.414),
    (2.0, 3.0, 0.483, 0.449),
    (3.0, 4.0, 0.488, 0.464),
    (4.0, 5.0, 0.491, 0.472),
)
TABLE3_GAMMA = (
    ((0.5, 0.5), (0.5, 0.6), 0.515, 0.590),
    ((0.5, 0.5), (0.5, 0.7), 0.528, 0.662),
    ((0.5, 0.5), (0.5, 0.8), 0.539, 0.719),
    ((0.5, 0.5), (0.5, 0.9), 0.549, 0.764),
)

# two-sided Wald test, p_B = p_A + 0.2 over p_A in [0.5, 0.75]
FIGURE1 = {"1a": 200, "1b": 500}
FIGURE1_K = 1.96
FIGURE1_PA_RANGE = (0.5, 0.75)
FIGURE1_SHIFT = 0.2
FIGURE1_STEPS = (0.01, 0.025, 0.05)

FIGURE3_N = 500
FIGURE3_PAIR = (0.7, 0.9)
FIGURE3_K = 1.96
FIGURE3_MARKERS = {"balanced": 0.5, "bahadur": 0.5349374, "neyman": 0.6043561}
FIGURE3_FIT_WINDOW = (0.4, 0.7)
