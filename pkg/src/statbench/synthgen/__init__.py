"""Seeded generators for every synthetic data-generating process in the workbench."""

from .semisup import gen_semisup
from .causal import CateOracle, CausalDataset, gen_cate
from .shift import CovShiftBundle, gen_covshift
from .noisylabels import NoisyLabelBundle, gen_labelnoise
from .sparse import SparseLinearDesign, gen_sparse_linear
from .probes import FunctionProbe, gen_function_probe

__all__ = [
    "gen_semisup",
    "gen_cate", "CateOracle", "CausalDataset",
    "gen_covshift", "CovShiftBundle",
    "gen_labelnoise", "NoisyLabelBundle",
    "gen_sparse_linear", "SparseLinearDesign",
    "gen_function_probe", "FunctionProbe",
]
