"""Default numerical settings, kept in one place so runs are reproducible."""

# relaxation
RHO = 5.0

# solver
EPSILON = 1e-5
MAX_ITERS = 10_000
WOLFE_C1 = 1e-4
WOLFE_C2 = 0.9
NONMONOTONE_MEMORY = 5
NONMONOTONE_DECAY = 0.85
CURVATURE_FLOOR = 1e-10
CONJUGACY_XI = 1e-4
DELTA_FLOOR = 1e-10
BB_SAFE = (1e-30, 1e30)
BB_CLAMP = (1e-5, 1e5)
ETA_CLAMP = (0.1, 10.0)
POWELL_RESTART = 0.2
LS_MAX_EVALS = 60
LS_EXPAND = 4.0
ALPHA_MAX = 1e10
# approximate Wolfe fallback: trusted only while phi(alpha) <= phi(0) + this * |phi(0)|
APPROX_WOLFE_EPS = 1e-10

# rounding
PLANES = 100
KEEP = 10
AUGMENTATION_FACTOR = 1.1
MAX_AUGMENTATIONS = 8

# recursion
MAX_DEPTH = 32
MAX_REFINE_SWEEPS = 50
