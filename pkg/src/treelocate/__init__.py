"""Source localization for SI outbreaks on tree networks.

Simulate infection spread with independent random edge delays, reduce
the observer set to a statistically sufficient subset, and estimate the
unknown source by sup-norm fitting of analytic Laplace transforms to
the observed infection times. The ``treelocate`` CLI reproduces the
benchmark experiments.
"""

from .delays import (
    AbsoluteCauchy,
    DelayModel,
    Exponential,
    PositiveNormal,
    Uniform,
    delay_from_spec,
    per_edge_models,
)
from .estimate import (
    EstimateReport,
    GridSpec,
    check_estimate,
    edge_distance_error,
    hat_estimate,
    sup_distance,
)
from .hypoexp import conditional_tilt_factor, hypoexp_density, hypoexp_log_density
from .reduction import (
    EquivalenceClass,
    StarArrangement,
    equivalence_classes,
    feasible_candidates,
    feasible_classes,
    star_arrangement_of,
    sufficient_observers,
)
from .rng import trial_rng
from .simulate import (
    FullInfection,
    Graph,
    Observation,
    TransmissionTree,
    TriangleCensus,
    build_graph,
    observe,
    simulate_graph_first_passage,
    simulate_tree,
    simulate_tree_batch,
    triangle_census,
    triangle_conditional_mean_times,
    triangle_graph,
    triangle_tree_probabilities,
)
from .special import cosine_integral, sine_integral
from .transforms import (
    PathIncidenceMatrix,
    candidate_laplace,
    check_statistic,
    conditional_laplace_exponential,
    empirical_laplace,
    hajek_combine,
    incidence_matrix,
)
from .tree import (
    Tree,
    build_tree,
    diameter,
    edge_distance,
    leaves,
    path,
    path_nodes,
    path_tree,
    prufer_decode,
    prufer_encode,
    random_tree_prufer,
    read_edge_list,
    star_tree,
)

__version__ = "0.1.0"
