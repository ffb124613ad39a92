"""Continuous-time Markov chain random compiler for Hamiltonian simulation."""
from .bounds import BoundInputs, bound_balanced_qnode, bound_general_p, bound_two_node
from .channels import (averaged_channel_map, averaged_channel_ode, bias_norm, channel_distance_lb,
                       exact_channel, mc_channel)
from .compiler import (CostModel, GateSequence, compile_sequence, gate_cost, lambda_for_target_error,
                       renormalize_decomposition)
from .markov import (BalancedScheme, RateMatrix, Realization, WeightSchedule, balanced_rates,
                     occupancy_solution, sample_realization, validate_rate_matrix)
from .quantum import (PauliTerm, matexp_hermitian, pauli_to_dense, schatten_norm, state_metrics,
                      time_ordered_unitary)

__version__ = "0.1.0"
