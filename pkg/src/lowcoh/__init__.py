"""Low-coherence pilot/beam codebook design for compressive mmWave channel
estimation.

The package designs transmit/receive training codebooks as column partitions
of a DFT matrix, orders the columns and picks pilot subsets to minimize the
mutual coherence of the stacked sensing operator, and evaluates the resulting
designs with an OMP channel estimator in a Monte-Carlo harness.
"""

__version__ = "0.1.0"

from .numerics import (
    Coherence,
    DegenerateColumnError,
    DimensionError,
    dft_matrix,
    kron,
    mutual_coherence,
    quantize_phases,
)
from .channel import (
    AngleDictionary,
    ChannelRealization,
    PathSet,
    angle_grid,
    array_response,
    build_dictionary,
    generate_channel,
    kron_dictionary,
    sparsify_on_grid,
)
from .codebook import (
    BeamCodebook,
    DegenerateDesignError,
    DesignResult,
    PilotCodebook,
    PilotConstraintError,
    combiner_codebook,
    fast_coherence,
    greedy_order,
    partition_codebook,
    pilot_codebook,
    random_permutation_design,
    s_matrix,
    select_pilots_and_order,
)
from .sensing import (
    MeasurementSet,
    SensingSystem,
    SnapshotSchedule,
    assemble_phi,
    build_schedule,
    build_system,
    equivalent_matrix,
    measure,
)
from .estimator import Estimate, OmpConfig, nmse, omp, reconstruct
from .harness import (
    ConfigError,
    SystemConfig,
    run_coherence_distribution,
    run_design,
    run_nmse_sweep,
    reproduce,
)
