"""Exploratory landscape analysis: samples, six feature sets, cleaning,
normalization, PCA and t-SNE."""
from .features import (
    ALL_FEATURES,
    FEATURE_NAMES,
    DegenerateSample,
    SingularFit,
    compute_features,
    features_disp,
    features_distr,
    features_ic,
    features_meta,
    features_nbc,
    features_pca,
)
from .pipeline import (
    EverythingDropped,
    FeatureMatrix,
    FeatureVector,
    ParseError,
    PcaModel,
    RankTooLow,
    clean_features,
    denormalize,
    embedding_csv,
    export_features,
    import_features,
    normalize,
    parse_features,
    pca_fit,
)
from .sample import Sample, draw_sample
from .tsne import PerplexityTooLarge, tsne_embed


def problem_features(problem, n=None, seed=0, suite="", problem_id=None) -> FeatureVector:
    """Sample ``problem`` and compute every feature set."""
    s = draw_sample(problem, n, seed)
    pid = problem_id if problem_id is not None else f"p{problem.problem_index:04d}"
    return FeatureVector(suite, pid, compute_features(s.points, s.values))


__all__ = [
    "ALL_FEATURES",
    "DegenerateSample",
    "EverythingDropped",
    "FEATURE_NAMES",
    "FeatureMatrix",
    "FeatureVector",
    "ParseError",
    "PcaModel",
    "PerplexityTooLarge",
    "RankTooLow",
    "Sample",
    "SingularFit",
    "clean_features",
    "compute_features",
    "denormalize",
    "draw_sample",
    "embedding_csv",
    "export_features",
    "features_disp",
    "features_distr",
    "features_ic",
    "features_meta",
    "features_nbc",
    "features_pca",
    "import_features",
    "normalize",
    "parse_features",
    "pca_fit",
    "problem_features",
    "tsne_embed",
]
