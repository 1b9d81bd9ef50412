"""Feature registry, subfeature derivation, and probability estimation."""

from riskgate.featurekit.catalog import (
    FeatureCatalog,
    FeatureDescriptor,
    builtin_catalog,
)
from riskgate.featurekit.derive import (
    LookupTableMissing,
    UnknownDerivationRule,
    derive_subfeatures,
    enrich_dataset,
)
from riskgate.featurekit.iplookup import PrefixTable
from riskgate.featurekit.probability import (
    SmoothingConfig,
    WeightSumInvalid,
    p_feature_weighted,
    p_global,
    p_user,
)
from riskgate.featurekit.uaparse import parse_user_agent

__all__ = [
    "FeatureCatalog",
    "FeatureDescriptor",
    "LookupTableMissing",
    "PrefixTable",
    "SmoothingConfig",
    "UnknownDerivationRule",
    "WeightSumInvalid",
    "builtin_catalog",
    "derive_subfeatures",
    "enrich_dataset",
    "p_feature_weighted",
    "p_global",
    "p_user",
    "parse_user_agent",
]
