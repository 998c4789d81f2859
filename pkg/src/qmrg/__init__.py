"""Mode-by-mode renormalization group flows for one-dimensional quantum mechanics."""

__version__ = "0.1.0"

from .errors import ConvergenceError, DomainError, LogDomainError
from .lattice import (LatticeConfig, frequency_product_log, matsubara_frequencies_sq,
                      matsubara_frequency_sq)
from .series import CouplingVector, gaussian_smear, jet_log1p, jet_multiply
from .wh_flow import (FlowState, FlowTrace, continuum_wh_flow, ground_state_energy,
                      perturbative_effective_potential, run_flow, wh_step)
from .exact import (HarmonicSpec, classical_partition_function_log,
                    harmonic_effective_constant, harmonic_partition_function_log)
from .oracle import (OracleResult, schrodinger_ground_energy, single_mode_step_oracle,
                     small_lattice_effective_potential)
from .fk_rg import (GridPotential, TrialFrequencyField, fk_variational_energy,
                    run_variational_flow, self_consistent_frequency, smeared_potential,
                    variational_rg_step)

__all__ = [name for name in dir() if not name.startswith("_")]
