"""Constants for hyperbolic-blowup."""

# Grid defaults
DEFAULT_Z_MIN = -40.0
EULER_OMEGA_CEILING = 3.0  # Euler window: Zmin = DEFAULT_Z_MIN - 2 * ceiling * amplitude * t_final
DEFAULT_Z_MAX_MARGIN = 1.0  # Zmax = strip.z1_max + margin
DEFAULT_N_Z1 = 2048
DEFAULT_N_U = 257
AXIS_MASS_NODES = 257  # composite Simpson nodes for axis_mass
AXIS_SCAN_NODES = 2049  # z1 scan used to certify the Z1/Z2 thresholds
AXIS_SCAN_DEPTH = 60.0  # scan starts this far left of the support edge

# Integrator defaults
DEFAULT_TOL = 1e-8
DEFAULT_DT_MIN = 1e-10
DEFAULT_DT_INITIAL = 1e-3
DEFAULT_PHI_THRESHOLD = 50.0
DEFAULT_T_FINAL = 50.0
FRONT_EDGE_CELLS = 5  # front_hit_left_edge once F2 is this close to Zmin
STEP_SAFETY = 0.9
STEP_GROWTH_MAX = 5.0
STEP_SHRINK_MIN = 0.2
INVARIANT_SLACK = 10.0  # multiples of tol tolerated by the invariant checks

# Sampling defaults
DEFAULT_SAMPLE_DT = 0.5
DEFAULT_PHI_GROWTH = 0.05  # extra sample once phi_left grows by this fraction

# Tail bound
TAIL_WARNING_RATIO = 1e-6

# Diagnostics
SCAN_REFINEMENT = 4  # u-scan refinement of the quadrature nodes
GOLDEN_ITERATIONS = 60
GROWTH_FIT_MIN_SAMPLES = 10
BLOWUP_FIT_DECADE = 10.0  # fit over phi_left >= phi_final / decade
BLOWUP_FIT_MIN_SAMPLES = 3
BLOWUP_GROWTH_RATIO = 2.0  # late/early phi_left growth rate required over the fit decade
GROWTH_FIT_START_FRACTION = 0.2  # manifest growth fits start at this fraction of the stop time
KN_GRID_NODES = 129

# Picard defaults
DEFAULT_PICARD_N_T = 256
DEFAULT_PICARD_MAX_ITER = 50
DEFAULT_PICARD_GAP_TOL = 1e-10
DEFAULT_PICARD_CEILING = 1e6
DEFAULT_PICARD_WINDOW = 0.5
PICARD_COMPARE_SAMPLES = 16  # evolver samples used for the cross-method check

# Output
SIGNIFICANT_DIGITS = 17
SERIES_HEADER = ("t", "phi_left", "sup_omega", "bkm", "F1", "F2", "delta", "gamma_est", "tail_bound")
SNAPSHOT_HEADER = ("z1", "z2", "omega", "rho")
SNAPSHOT_Z1_STRIDE = 16
SNAPSHOT_U_STRIDE = 8

# Exit codes
EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3
