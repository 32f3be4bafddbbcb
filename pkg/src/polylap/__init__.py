"""Discrete variational calculus for poly-Laplacian systems on finite graphs.

The library represents finite weighted graphs, evaluates the discrete
operators and Sobolev norms built on them, assembles the coupled energy
functionals with locally-defined nonlinear terms made global by cut-off
splicing, evaluates the closed-form parameter thresholds and solution
bounds of the superlinear theory, and finds weak solutions numerically:
a mountain-pass path deformation for the superlinear regime and seeded
multi-start descent for the sublinear one.
"""

from .bounds import (
    AnchorRayMaxima,
    BaselinePair,
    BoundsReport,
    InequalitySides,
    RingEstimate,
    SolutionNormBounds,
    anchor_ray_maxima,
    compute_bounds,
    mountain_pass_level_bound,
    mountain_ring_estimate,
    norm_equivalence_estimate,
    power_sum_bound,
    small_sphere_radius,
    solution_norm_bounds,
)
from .calculus import (
    EmbeddingConstants,
    embedding_constants,
    gamma,
    grad_len,
    integral,
    laplacian,
    lp_norm,
    m_grad_len,
    p_laplacian,
    poly_laplacian,
    sobolev_norm,
    sobolev_power,
    sup_norm,
    sup_norm_pair,
)
from .energy import (
    Problem,
    ProblemError,
    ResidualNorms,
    SystemParams,
    eval_energy,
    gradient,
    parse_problem,
    residual_norms,
    transfers_to_original,
)
from .graph import (
    GraphError,
    GraphStats,
    SystemState,
    VertexFunction,
    WeightedGraph,
    degree,
    graph_stats,
    parse_graph,
    parse_vertex_function,
    serialize_graph,
    serialize_vertex_function,
)
from .nonlinearity import (
    CheckRecord,
    GrowthMeta,
    GrowthReport,
    NonlinearityDef,
    builtin_example51,
    builtin_example52,
    builtin_names,
    check_growth,
    get_builtin,
    modify_sublinear,
    modify_superlinear,
    rho,
    rho_partials,
    tau,
    tau_partials,
)
from .solver import (
    SolveConfig,
    SolveResult,
    SweepRow,
    descend,
    minimize,
    mountain_pass,
    newton_refine,
    result_to_row,
    sweep_lambda,
    sweep_to_csv,
)

__version__ = "0.1.0"
