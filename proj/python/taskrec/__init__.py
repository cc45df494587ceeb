"""Task recommendation from implicit completion counts.

Thin python surface over the C++ core: interaction/feature containers, the
feat-nnls and ifts models, the als-neg and feat-reg baselines, and the
holdout/MPR/PR evaluation protocol.
"""

from ._taskrec import (
    ConfidenceWeights,
    EvalReport,
    FeatModel,
    HoldoutSplit,
    IdMap,
    IdMaps,
    InteractionMatrix,
    LatentModel,
    NnlsResult,
    PreferenceMatrix,
    SimilarityMatrix,
    SyntheticTruth,
    TaskFeatureMatrix,
    build_confidence,
    build_preference,
    fit_feat_nnls,
    fit_feature_reg,
    fit_ifts,
    fit_implicit_als_neg,
    generate_synthetic,
    init_factors,
    load_features,
    load_model,
    load_observations,
    mpr,
    nnls,
    percentile_ranks,
    pr_curve,
    predict_feat,
    predict_latent,
    run_protocol,
    save_model,
    spd_solve,
    split_holdout,
    task_similarity_matrix,
)

__version__ = "0.1.0"

__all__ = [
    "ConfidenceWeights",
    "EvalReport",
    "FeatModel",
    "HoldoutSplit",
    "IdMap",
    "IdMaps",
    "InteractionMatrix",
    "LatentModel",
    "NnlsResult",
    "PreferenceMatrix",
    "SimilarityMatrix",
    "SyntheticTruth",
    "TaskFeatureMatrix",
    "build_confidence",
    "build_preference",
    "fit_feat_nnls",
    "fit_feature_reg",
    "fit_ifts",
    "fit_implicit_als_neg",
    "generate_synthetic",
    "init_factors",
    "load_features",
    "load_model",
    "load_observations",
    "mpr",
    "nnls",
    "percentile_ranks",
    "pr_curve",
    "predict_feat",
    "predict_latent",
    "run_protocol",
    "save_model",
    "spd_solve",
    "split_holdout",
    "task_similarity_matrix",
]
