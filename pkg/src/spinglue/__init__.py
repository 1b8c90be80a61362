"""spinglue: glue gapped 1D spin-chain ground states out of block ground
states with quasi-adiabatic sweeps, and verify every step against exact
diagonalization.
"""

__version__ = "0.1.0"

from .chain import (ChainHamiltonian, LocalTerm, SupportInterval, assemble_chain,
                    build_local_term, build_model, embed_operator, heisenberg_chain,
                    partial_trace, reduced_density, spectral_norm, tfim_family,
                    transverse_field_ising)
from .exact import (EigenDecomposition, OverlapReport, DegenerateGroundStateError,
                    eigendecompose, ground_and_gap, heisenberg_evolve, load_decomposition,
                    mp_resolvent, overlap_x, save_decomposition, spectral_function)
from .filters import Filter, cached_filter, filter_kernel_weight, make_filter
from .adiabatic import (ErrorCertificate, GapCollapseError, HamiltonianPath,
                        error_certificate, evolve_path, exact_adiabatic_generator,
                        ground_state_path, linear_path, measure_transport_error,
                        q_projector, qa_generator_quadrature, qa_generator_spectral,
                        transport_state)
from .gluing import (AncillaPath, EngineParams, EpsilonBudget, GluingError,
                     GluingStage, LocalCircuit, SplitSystem, build_ancilla_path,
                     circuit_from_json, circuit_to_json, effective_two_level,
                     epsilon_budget, glue_once, iterate_gluing, load_circuit,
                     save_circuit, split, truncation_distance)
from .lieb_robinson import (LRFit, LRSample, fill_bounds, fit_lr_constants,
                            lr_commutator_scan, synthetic_samples)
from .circuit import (Observable, apply_circuit_dense, fidelity, light_cone_stages,
                      local_expectation, min_phase_distance)

__all__ = [name for name in dir() if not name.startswith("_")]
