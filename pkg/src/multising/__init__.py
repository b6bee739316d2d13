"""Joint Bayesian structure learning for multiple Ising models.

Grouped binary data get one conditional-independence graph per group;
a Markov-random-field prior on the edge indicators shares information
across groups. Two MCMC engines explore graph space: a fully Bayesian
one driven by Laplace-approximated marginal likelihoods and a faster
quasi-likelihood one that samples the parameters alongside the graphs.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    DataError,
    LaplaceNonConvergence,
    NumericalError,
)
from .ising import (
    BinaryDataset,
    CanonicalParams,
    GroupedData,
    MarginalCounts,
    cell_index,
    config_logweights,
    exact_cell_probs,
    gibbs_sample,
    ising_loglik,
    ising_moments,
    log_psi,
    marginal_counts,
    node_conditional_loglik,
    quasi_loglik,
)
from .pairs import pair_count, pair_index, pair_list, row_slice
from .priors import (
    CouplingState,
    DyHyper,
    MrfHyper,
    SpikeSlabHyper,
    default_dy_hyper,
    dy_log_kernel,
    mrf_edge_logprob,
    mrf_graph_logprob,
    mrf_pseudo_loglik,
    nu_logpdf,
    spike_slab_logpdf,
    theta_prior_logpdf,
)
from .coupling import CouplingConfig, NuProposal, ThetaProposal
from .chain import ChainOutput
from .fb import FbConfig, laplace_log_normconst, log_marginal, run_fb_chain
from .ab import AbConfig, run_ab_chain
from .summaries import (
    PpiTable,
    SelectedGraphs,
    chain_correlation,
    expected_fdr,
    f1,
    mcc,
    per_group_scores,
    ppi,
    quantile_graphs,
    sec_matrix,
    select_graphs,
    theta_ppi,
)
from .simulate import (
    Scenario,
    barabasi_albert,
    build_scenario,
    graphs_to_params,
    replicate_study,
    simulate_dataset,
)
from .runners import RunConfig, RunResult, engine_chain, read_ppi_csv, run
from .ingest import IngestSpec, ingest, read_grouped_csv, write_grouped_csv
from .exports import export_graphs, read_edge_list, write_edge_list

__all__ = [
    "__version__",
    "AbConfig",
    "BinaryDataset",
    "CanonicalParams",
    "ChainOutput",
    "ConfigError",
    "CouplingConfig",
    "CouplingState",
    "DataError",
    "DyHyper",
    "FbConfig",
    "GroupedData",
    "IngestSpec",
    "LaplaceNonConvergence",
    "MarginalCounts",
    "MrfHyper",
    "NumericalError",
    "NuProposal",
    "PpiTable",
    "RunConfig",
    "RunResult",
    "Scenario",
    "SelectedGraphs",
    "SpikeSlabHyper",
    "ThetaProposal",
    "barabasi_albert",
    "build_scenario",
    "cell_index",
    "chain_correlation",
    "config_logweights",
    "default_dy_hyper",
    "dy_log_kernel",
    "engine_chain",
    "exact_cell_probs",
    "expected_fdr",
    "export_graphs",
    "f1",
    "gibbs_sample",
    "graphs_to_params",
    "ingest",
    "ising_loglik",
    "ising_moments",
    "laplace_log_normconst",
    "log_marginal",
    "log_psi",
    "marginal_counts",
    "mcc",
    "mrf_edge_logprob",
    "mrf_graph_logprob",
    "mrf_pseudo_loglik",
    "node_conditional_loglik",
    "nu_logpdf",
    "pair_count",
    "pair_index",
    "pair_list",
    "per_group_scores",
    "ppi",
    "quantile_graphs",
    "quasi_loglik",
    "read_edge_list",
    "read_grouped_csv",
    "read_ppi_csv",
    "replicate_study",
    "row_slice",
    "run",
    "run_ab_chain",
    "run_fb_chain",
    "sec_matrix",
    "select_graphs",
    "simulate_dataset",
    "spike_slab_logpdf",
    "theta_ppi",
    "theta_prior_logpdf",
    "write_edge_list",
    "write_grouped_csv",
]
