from .experiment import (
    CurvePoint,
    ExperimentSpec,
    curve_csv,
    first_crossing,
    parse_range,
    power_utilization,
    run_confidence_curve,
)
from .seeding import SEED_SCHEME, derive_seed
