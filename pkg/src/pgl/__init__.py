"""p-normed spaces from finite generator data.

Certified norms, operator bounds, amalgams, push-outs, extension towers, and
the machinery to verify every isometry claim numerically.
"""

from .certs import Certificate, replay_verdict
from .core import (
    Exponent,
    GeneratedSpace,
    HaydonFamily,
    NormValue,
    eval_norm,
    haydon_norm_power,
    haydon_separation_check,
    haydon_separation_threshold,
    norm_oracle,
)
from .errors import (
    CatalogTooCoarseError,
    CertificationError,
    ConditioningError,
    DimensionMismatchError,
    ExponentMismatchError,
    PglError,
    SizeCapError,
    SpanError,
    TowerError,
)

__version__ = "0.1.0"

__all__ = [
    "Certificate",
    "replay_verdict",
    "Exponent",
    "GeneratedSpace",
    "HaydonFamily",
    "NormValue",
    "eval_norm",
    "haydon_norm_power",
    "haydon_separation_check",
    "haydon_separation_threshold",
    "norm_oracle",
    "PglError",
    "CatalogTooCoarseError",
    "CertificationError",
    "ConditioningError",
    "DimensionMismatchError",
    "ExponentMismatchError",
    "SizeCapError",
    "SpanError",
    "TowerError",
    "__version__",
]
