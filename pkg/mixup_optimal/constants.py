"""Fixed constants for mixup-optimal.

Numerical defaults used across the package.  Runtime overrides go through
:class:`~mixup_optimal.config.ExperimentConfig` or keyword arguments; do not
modify these values in place.
"""

# ---------------------------------------------------------------------------
# Mixing distributions
# ---------------------------------------------------------------------------

# Smallest Beta(α, α) parameter the limit oracle is validated for
MIN_SUPPORTED_ALPHA: float = 0.5

# Lentz continued fraction for the regularized incomplete beta function
BETACF_EPS: float = 1e-15
BETACF_TINY: float = 1e-300
BETACF_MAX_ITER: int = 20_000

# Tolerance for "integrates to one" and symmetry checks on tabulated densities
DENSITY_MASS_TOL: float = 1e-10

# Gauss–Legendre nodes used when integrating against the mixing density
DEFAULT_QUADRATURE_NODES: int = 64
MIN_QUADRATURE_NODES: int = 16

# Half-width of the Beta quadrature window, in standard deviations
QUADRATURE_SIGMA_WINDOW: float = 12.0

# ---------------------------------------------------------------------------
# Oracle
# ---------------------------------------------------------------------------

# tol_line default = TOL_LINE_SCALE * dataset diameter
TOL_LINE_SCALE: float = 1e-9

# Boundary-grid cells between progress log lines
GRID_LOG_EVERY: int = 256

# ---------------------------------------------------------------------------
# Recovery
# ---------------------------------------------------------------------------

# Largest m accepted by the unlabeled brute-force search
MAX_UNLABELED_POINTS: int = 7

# Relative residual above which labeled midpoints are inconsistent
MIDPOINT_RESIDUAL_TOL: float = 1e-6

# ---------------------------------------------------------------------------
# Training
# ---------------------------------------------------------------------------

ADAM_LR: float = 1e-3
ADAM_BETA1: float = 0.9
ADAM_BETA2: float = 0.999
ADAM_EPS: float = 1e-8

DEFAULT_HIDDEN_UNITS: int = 512
MOONS_HIDDEN_UNITS: int = 500

# Epoch defaults: alternating-line datasets / two moons
DEFAULT_EPOCHS: int = 3000
MOONS_EPOCHS: int = 1500

# Mixed examples drawn per full-batch Mixup step (at least m)
MIXUP_SAMPLES_PER_STEP: int = 1024

# Tolerance on soft labels lying in the probability simplex
SIMPLEX_TOL: float = 1e-9

# ---------------------------------------------------------------------------
# Linear
# ---------------------------------------------------------------------------

LINEAR_MAX_ITERS: int = 20_000
LINEAR_GRAD_TOL: float = 1e-10

# Armijo sufficient-decrease constant and backtracking factor
ARMIJO_C: float = 1e-4
BACKTRACK_FACTOR: float = 0.5

# Largest n for the exhaustive active-set hard-margin solver
MAX_ACTIVE_SET_POINTS: int = 12

# ---------------------------------------------------------------------------
# Datasets
# ---------------------------------------------------------------------------

IDX_IMAGES_MAGIC: int = 0x00000803
IDX_LABELS_MAGIC: int = 0x00000801

MNIST_BASE_URL: str = "https://ossci-datasets.s3.amazonaws.com/mnist/"
MNIST_FILES: dict[str, str] = {
    "train_images": "train-images-idx3-ubyte.gz",
    "train_labels": "train-labels-idx1-ubyte.gz",
    "test_images": "t10k-images-idx3-ubyte.gz",
    "test_labels": "t10k-labels-idx1-ubyte.gz",
}

# HTTP timeout in seconds for dataset downloads
DOWNLOAD_TIMEOUT: int = 120

# ---------------------------------------------------------------------------
# CLI / environment
# ---------------------------------------------------------------------------

ENV_OUTPUT_ROOT: str = "MIXUP_OPTIMAL_OUTPUT_ROOT"
ENV_MNIST_DIR: str = "MIXUP_OPTIMAL_MNIST_DIR"
ENV_LOG_LEVEL: str = "MIXUP_OPTIMAL_LOG_LEVEL"
ENV_RUN_EXPERIMENTS: str = "MIXUP_OPTIMAL_RUN_EXPERIMENTS"
DEFAULT_OUTPUT_ROOT: str = "runs"

EXIT_OK: int = 0
EXIT_CONFIG_ERROR: int = 2
EXIT_NUMERIC_FAILURE: int = 3

# Salt for matplotlib's SVG ids so repeated runs are byte-identical
SVG_HASHSALT: str = "mixup-optimal"
