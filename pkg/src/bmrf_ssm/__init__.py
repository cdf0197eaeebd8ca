"""Binary Markov random fields: self-avoiding-tree marginals and strong spatial mixing."""

__version__ = "0.1.0"

from bmrf_ssm.errors import (  # noqa: E402
    BmrfError,
    DomainError,
    InputError,
    ParseError,
    PreconditionError,
    ResourceError,
    SemanticError,
)
from bmrf_ssm.graph import (  # noqa: E402
    Graph,
    GraphMetrics,
    complete_graph,
    cycle_graph,
    edge_compare,
    generate,
    gnp,
    grid_graph,
    max_avg_degree,
    max_path_density,
    path_graph,
    regular_tree,
    sphere,
)
from bmrf_ssm.model import (  # noqa: E402
    Bmrf,
    DecayBound,
    ModelSummary,
    PairPotential,
    VertexPotential,
    Verdict,
    check_conditions,
    decay_bound,
    edge_transfer,
    make_ising,
    ssm_threshold,
    summarize,
)
from bmrf_ssm.sawtree import BuildLimits, SawTree, build, export_dot, stats  # noqa: E402
from bmrf_ssm.inference import (  # noqa: E402
    LogPartition,
    MarginalResult,
    exact_marginal,
    exact_partition,
    saw_marginal,
    tree_marginal,
    truncated_marginal,
)
from bmrf_ssm.verify import (  # noqa: E402
    CheckReport,
    SsmExperiment,
    SsmReport,
    random_suite,
    run_experiment,
    verify_inequalities,
)
