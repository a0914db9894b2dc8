"""Average-case reductions and statistical tests for planted submatrix detection."""

from subred.pairs import (
    BernoulliPair,
    ComputablePair,
    ExponentQuery,
    GaussianPair,
    PairGrid,
    chernoff_exponent,
    divergences,
    llr,
    log_mgf,
    pair_from_config,
    uc_membership,
)
from subred.sampler import (
    GraphSample,
    MatrixSample,
    derived_rng,
    sample_er,
    sample_pds,
    sample_planted_vector,
    sample_submatrix,
)
from subred.kernel import KernelSpec, delta_bound, exact_output_law, homogeneous_delta, mrk_map
from subred.clone import CloneChannel, clone_graph, make_channel
from subred.reduction import ReductionConfig, embed_diagonal, to_submatrix, tv_guarantee
from subred.detect import MaxTest, SearchTest, SumTest, estimate_error
from subred.oracle import FiniteLaw, chi2_mixture_exact, tv_exact

__version__ = "0.1.0"
