"""Constants for the nuclear_levy library."""

from __future__ import annotations

from typing import Final

DOMAIN: Final = 'nuclear_levy'

ENV_OUTPUT_DIR: Final = 'NUCLEAR_LEVY_OUTPUT_DIR'
DEFAULT_OUTPUT_DIR: Final = 'output'

# numerical tolerances
QUAD_EPSABS: Final = 1e-12
QUAD_EPSREL: Final = 1e-12
QUAD_LIMIT: Final = 200
QUAD_REPORT_TOLERANCE: Final = 1e-8  # reported quadrature error must stay below this
PSD_FLOOR: Final = -1e-10
SYMMETRY_TOLERANCE: Final = 1e-12
IDENTITY_TOLERANCE: Final = 1e-10
SEMIGROUP_TOLERANCE: Final = 1e-12
GRID_TOLERANCE: Final = 1e-9  # relative to the horizon

# statistical thresholds
KS_LEVEL: Final = 0.01
CHI2_LEVEL: Final = 0.01
SE_BAND: Final = 4.0  # moment and independence bands in standard errors
ECF_BAND: Final = 5.0  # empirical CF band is ECF_BAND / sqrt(N)
MIN_ECF_REPLICAS: Final = 1000
MIN_INDEPENDENCE_REPLICAS: Final = 10_000
MIN_EXPECTED_BIN: Final = 5.0  # chi-square bins are merged until this expectation

# premise probing for the Fernique/Minlos checks
PROBE_COUNT: Final = 256
FERNIQUE_MAX_EPSILON: Final = 0.25

# simulation defaults
DEFAULT_BLOCK_SIZE: Final = 1024
DEFAULT_WORKERS: Final = 1
DEFAULT_SHELLS: Final = 12

# component tags for jump records
LARGE_TAG: Final = -1

# config keys
CONF_TRIPLET: Final = 'triplet'
CONF_SIM: Final = 'sim'
CONF_TESTS: Final = 'tests'
CONF_CF: Final = 'cf'
CONF_OUTPUT_DIR: Final = 'output_dir'

# exit codes
EXIT_PASS: Final = 0
EXIT_FAIL: Final = 1
EXIT_INCONCLUSIVE: Final = 2
EXIT_USAGE: Final = 64

# csv number format: 17 significant digits round-trips a double
CSV_FLOAT_FORMAT: Final = '.17g'
