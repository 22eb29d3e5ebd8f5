"""Weekly sector-index price modeling: Johnson SB response transform,
pairwise-interaction OLS with backward elimination, diagnostics and CV."""

from .dataset import Dataset, ObservationRow, ScalerParams, SplitSpec, load_csv, split, standardize
from .johnson import JohnsonSbParams, fit_sb, forward, inverse
from .regress import FittedModel, ModelSpec, TermId, build_design, fit_model, fit_ols, predict_price, predict_transformed

__version__ = "0.1.0"
