"""Energy-space walks on a truncated ladder.

Classical birth-death-lazy transport, its collision-model embedding with a
tunable ancilla coherence ``mu``, and the distance diagnostics used to tell
population equilibration apart from convergence of the full state.
"""
from .classical import (
    KrausSet,
    TransitionMatrix,
    boundary_cumsum,
    build_transition_matrix,
    cesaro_average,
    classical_step,
    classical_trajectory,
    detailed_balance_rates,
    effective_temperature,
    gibbs_populations,
    kraus_operators,
    spectral_gap,
    stationary_closed_form,
    stationary_numeric,
    unitality_defect,
)
from .collision import (
    AncillaState,
    ChannelConfig,
    ancilla_state,
    build_collision_unitary,
    channel_fixed_point,
    coherent_part,
    collision_step_closed,
    collision_step_dilated,
    first_order_state,
)
from .diagnostics import (
    DiagnosticsSeries,
    GibbsMatch,
    asymptotic_deviation,
    fit_decay_rate,
    gibbs_match,
    run_classical_trajectory,
    run_quantum_trajectory,
    thermal_distance,
    total_variation,
    trace_distance,
)
from .ladder import (
    DensityOperator,
    EnergySpectrum,
    LadderOperators,
    PopulationVector,
    TransitionRates,
    dephase,
    embed_diagonal,
    extract_populations,
    gaussian_population,
    ladder_operators,
    make_uniform_spectrum,
)

__version__ = "0.1.0"
