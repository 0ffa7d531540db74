"""Weighted series of radial stretches with runtime distortion verification."""

from .analysis import (
    CalibrationResult,
    DistortionFields,
    DistortionReport,
    ExponentEstimate,
    RStarPlan,
    ScaleLadder,
    StretchBoundReport,
    calibrate_stretch_constant,
    check_determinant_bound,
    check_operator_norm_bound,
    check_pk_chain,
    check_stretch_bound,
    default_ladder,
    distortion_fields_many,
    distortion_report,
    estimate_exponent,
    predict_r_star,
    split_tail_check,
)
from .backend import BACKEND_NAME
from .composite import (
    LambdaSet,
    MapConfig,
    WeightDecomposition,
    eval_map,
    eval_map_many,
    jac_direct_sum_many,
    jac_map,
    weight_decomposition,
    weight_fields_many,
)
from .errors import (
    AllRungsDegenerateError,
    DegeneratePointError,
    IndexOutOfRangeError,
    NoConvergenceError,
    NonFiniteError,
    OnLambdaError,
    ParseError,
    QcsError,
    SpectrumOutOfRangeError,
    ValidationError,
)
from .field import FieldGrid, GridAxis, RunManifest, config_digest, load_config, sweep_distortion
from .stretch import (
    StretchParams,
    eval_stretch,
    eval_stretch_many,
    jac_stretch,
    jac_stretch_eigenvalues,
)
from .symmat import (
    ElemSymPolys,
    Spectrum,
    SymMatrix,
    determinant,
    eigen_sym,
    elem_sym_polys,
    esp_batch,
    esp_values,
    operator_norm,
)

__version__ = "0.1.0"
