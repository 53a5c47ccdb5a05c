"""Quantum-circuit simulation of transport equations on dyadic grids.

The package covers every stage of the numerical scheme: grid encoding, finite
differences in Fourier-diagonal form, Walsh synthesis of diagonal unitaries, a
statevector simulator, state preparation, product-formula evolution,
measurement protocols and the classical reference solutions used to check them.
"""
__version__ = "0.1.0"

from .grid import (CapacityError, DegenerateNormError, GridMismatchError, GridSpec, StateVector,
                   build_grid, encode_function, norm2, vector_error)
from .expr import (ExprArityError, ExprDomainError, ExprError, ExprSyntaxError, TransportProblem,
                   check_constraint, eval_expr, parse_expr)
from .fd import FdScheme, apply_stencil, derivative_eigenvalues, fd_coefficients, operator_norm_Dj
from .walsh import (WalshSeries, fwht, m_walsh_series, multidim_walsh_series, sparse_walsh_series,
                    walsh_coefficients, walsh_function)
from .circuit import GateList, gate_metrics, simulate, synthesize_walsh_circuit
from .stateprep import closed_form_success, exact_load, two_diagonal_prep
from .evolution import StepPlan, evolve, trotter_step
from .measurement import Observable, expectation, hadamard_test, qae, swap_test
from .reference import (characteristics_boltzmann2d, discretization_bound, liouville_problem_lotka,
                        operator_norm_bound, rk4_lotka_volterra, run_sweep, vector_norm_bound)
