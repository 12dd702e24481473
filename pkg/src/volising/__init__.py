"""Ising interaction networks inferred from binarized traded volumes."""

from .errors import (
    EmptyDatasetError,
    ParseError,
    SingularMatrixError,
    UndefinedSimilarityError,
    ValidationError,
    VolisingError,
)
from .ingest import (
    TradeTick,
    VolumeGrid,
    average_volume_rate,
    clip_and_grid,
    clip_grid,
    load_grid,
    parse_ticks,
    read_tickers,
    write_ticks,
)
from .binarize import (
    MappingParams,
    SpinMatrix,
    build_spin_matrix,
    filter_degenerate,
    read_spins,
    threshold_spins,
    window_sums,
    write_spins,
)
from .stats import (
    MomentSet,
    compute_moments,
    connected_corr,
    corr_derivative,
    magnetizations,
    significance_floor,
)
from .infer import (
    CouplingModel,
    infer_asynchronous,
    infer_equilibrium,
    infer_fields,
    infer_synchronous,
    invert_c0,
)
from .analyze import (
    coupling_histogram,
    mean_abs_coupling,
    periodogram,
    random_similarity_baseline,
    rescale_to_mean,
    rescale_to_std,
    similarity_q,
    spectral_summary,
)
from .netexport import EdgeList, from_edge_list_json, to_dot, to_edge_list_json, top_edges
from .synth import (
    IsingModel,
    random_model,
    sample_equilibrium_glauber,
    simulate_asynchronous,
    simulate_synchronous,
    synth_market_volumes,
)

__version__ = "0.1.0"
