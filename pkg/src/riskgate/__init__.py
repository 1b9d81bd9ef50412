"""riskgate: risk-based authentication engine and evaluation workbench."""

from riskgate.core import (
    MISSING,
    DatasetMeta,
    HistoryStore,
    HistoryView,
    LoginEvent,
    build_store,
    load_dataset,
    save_dataset,
)
from riskgate.engines import (
    Decision,
    ExtendConfig,
    RiskVerdict,
    SimpleConfig,
    decide,
    score_extend,
    score_simple,
)
from riskgate.featurekit import (
    FeatureCatalog,
    FeatureDescriptor,
    PrefixTable,
    SmoothingConfig,
    builtin_catalog,
    derive_subfeatures,
    enrich_dataset,
)
from riskgate.synth import (
    PoolEntry,
    PopulationConfig,
    World,
    generate_population,
    generate_world,
    sample_attack,
    sample_attacks,
)

__version__ = "0.1.0"

__all__ = [
    "Decision",
    "DatasetMeta",
    "ExtendConfig",
    "FeatureCatalog",
    "FeatureDescriptor",
    "HistoryStore",
    "HistoryView",
    "LoginEvent",
    "MISSING",
    "PoolEntry",
    "PopulationConfig",
    "PrefixTable",
    "RiskVerdict",
    "SimpleConfig",
    "SmoothingConfig",
    "World",
    "build_store",
    "builtin_catalog",
    "decide",
    "derive_subfeatures",
    "enrich_dataset",
    "generate_population",
    "generate_world",
    "load_dataset",
    "sample_attack",
    "sample_attacks",
    "save_dataset",
    "score_extend",
    "score_simple",
]
