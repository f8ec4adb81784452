"""
Analysis Module

Numerical core: DAE models, eigendecomposition, small-signal analysis,
companion matrices of integration methods, deformation metrics and the
time-domain simulator.
"""

from .dae_model import (
    BUILTIN_MODELS,
    DaeModel,
    JacobianSet,
    StationaryPoint,
    build_builtin,
    builtin_smib,
    builtin_smib3,
    builtin_stiff_chain,
    eval_residuals,
    find_equilibrium,
    jacobian_to_dict,
    jacobians,
    linear_dae,
    load_linear_model,
)
from .eigen_core import Spectrum, cluster_degenerate, eig_full
from .sssa import (
    ParticipationMatrix,
    damping_ratio,
    normalize_columns,
    participation_matrix,
    reduce_state_matrix,
    stiffness_ratio,
)
from .discretization import CompanionMatrix, commutator_defect, companion_matrix, spectral_radius
from .deformation import (
    DeformationReport,
    HmaxResult,
    ModePairing,
    deformation_report,
    eig_deformation,
    hmax,
    hmax_table,
    pair_modes,
    pf_deformation,
    stiffness_experiment,
    sweep,
)
from .simulator import Trajectory, linear_reference, simulate, step_dirk, step_heun, step_theta

__all__ = [
    'BUILTIN_MODELS', 'DaeModel', 'JacobianSet', 'StationaryPoint', 'build_builtin',
    'builtin_smib', 'builtin_smib3', 'builtin_stiff_chain', 'eval_residuals',
    'find_equilibrium', 'jacobian_to_dict', 'jacobians', 'linear_dae', 'load_linear_model',
    'Spectrum', 'cluster_degenerate', 'eig_full',
    'ParticipationMatrix', 'damping_ratio', 'normalize_columns', 'participation_matrix',
    'reduce_state_matrix', 'stiffness_ratio',
    'CompanionMatrix', 'commutator_defect', 'companion_matrix', 'spectral_radius',
    'DeformationReport', 'HmaxResult', 'ModePairing', 'deformation_report', 'eig_deformation',
    'hmax', 'hmax_table', 'pair_modes', 'pf_deformation', 'stiffness_experiment', 'sweep',
    'Trajectory', 'linear_reference', 'simulate', 'step_dirk', 'step_heun', 'step_theta',
]
