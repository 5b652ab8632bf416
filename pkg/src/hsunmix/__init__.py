"""Semiblind hyperspectral unmixing robust to spectral-library mismatch.

The pipeline: estimate the signal subspace of the observations, prune
the spectral library by robust subspace residues, initialize abundances
with collaborative sparse regression, then refine with the
dictionary-adjusted nonconvex solver that lets each library column
drift inside a mismatch ball.
"""

from .bench import (
    ExperimentConfig,
    load_config,
    run_benchmark,
    run_trial,
    summary_rows,
)
from .csr import CsrParams, CsrResult, csr_solve, group_shrink
from .danser import (
    DanserParams,
    DanserState,
    UnmixResult,
    objective,
    phi_p,
    solve,
    update_C_row,
    update_Dprime,
    update_H,
    update_weights,
)
from .errors import InputDataError, NumericalError
from .metrics import Summary, TrialOutcome, aggregate, detection, sre_db
from .mio import (
    load_scene,
    read_dictionary,
    read_json,
    read_matrix,
    save_scene,
    write_dictionary,
    write_json,
    write_matrix,
)
from .pruning import (
    PruneResult,
    RobustnessBudget,
    SpectralDictionary,
    epsilon_from_alpha,
    music_residue,
    prune,
    rmusic_residue,
    solve_eta_star,
)
from .simulate import (
    SceneSpec,
    SyntheticScene,
    dmer_of,
    generate,
    snr_of,
    synthetic_library,
)
from .subspace import (
    SignalSubspace,
    estimate_order,
    estimate_subspace,
    project_complement,
)

__version__ = "0.1.0"

__all__ = [
    "CsrParams",
    "CsrResult",
    "DanserParams",
    "DanserState",
    "ExperimentConfig",
    "InputDataError",
    "NumericalError",
    "PruneResult",
    "RobustnessBudget",
    "SceneSpec",
    "SignalSubspace",
    "SpectralDictionary",
    "Summary",
    "SyntheticScene",
    "TrialOutcome",
    "UnmixResult",
    "aggregate",
    "csr_solve",
    "detection",
    "dmer_of",
    "epsilon_from_alpha",
    "estimate_order",
    "estimate_subspace",
    "generate",
    "group_shrink",
    "load_config",
    "load_scene",
    "music_residue",
    "objective",
    "phi_p",
    "project_complement",
    "prune",
    "read_dictionary",
    "read_json",
    "read_matrix",
    "rmusic_residue",
    "run_benchmark",
    "run_trial",
    "save_scene",
    "snr_of",
    "solve",
    "solve_eta_star",
    "sre_db",
    "summary_rows",
    "synthetic_library",
    "write_dictionary",
    "write_json",
    "write_matrix",
    "update_C_row",
    "update_Dprime",
    "update_H",
    "update_weights",
    "__version__",
]
