"""Base predictors, classifiers, and the remote-predictor client."""

from .base import (FittedModel, FunctionPredictor, MeanPredictor,
                   PredictiveDistribution, Predictor, QUANTILE_GRID)
from .gbrt import GbrtModel, GbrtPredictor, fit_gbrt
from .gpr import (DEFAULT_NOISE_GRID, GprModel, GprNumericalError, GprPredictor,
                  fit_gpr, fit_gpr_fixed, log_marginal_likelihood)
from .kernels import KERNEL_FAMILIES, make_kernel, median_heuristic, rbf_gram
from .knn import KnnModel, fit_knn_cv, knn_classify, knn_grid
from .krr import KrrModel, KrrPredictor, fit_krr
from .lasso import LassoModel, LassoPredictor, fit_lasso_cv, kkt_violation, soft_threshold
from .lda import LdaModel, bayes_classify, fit_lda, lda_classify
from .remote import (RemoteError, RemotePredictor, RemoteProtocolError,
                     RemoteServerError, RemoteTimeoutError, RemoteTransportError,
                     remote_health, remote_predict)

__all__ = [
    "Predictor", "FittedModel", "PredictiveDistribution", "QUANTILE_GRID",
    "FunctionPredictor", "MeanPredictor",
    "fit_gpr", "fit_gpr_fixed", "log_marginal_likelihood", "GprModel",
    "GprPredictor", "GprNumericalError", "DEFAULT_NOISE_GRID", "KERNEL_FAMILIES",
    "make_kernel", "median_heuristic", "rbf_gram",
    "fit_krr", "KrrModel", "KrrPredictor",
    "fit_lasso_cv", "LassoModel", "LassoPredictor", "kkt_violation", "soft_threshold",
    "fit_gbrt", "GbrtModel", "GbrtPredictor",
    "fit_knn_cv", "knn_classify", "knn_grid", "KnnModel",
    "fit_lda", "lda_classify", "bayes_classify", "LdaModel",
    "remote_predict", "remote_health", "RemotePredictor", "RemoteError",
    "RemoteTransportError", "RemoteTimeoutError", "RemoteServerError",
    "RemoteProtocolError",
]
