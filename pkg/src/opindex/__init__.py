"""Index theory of operators on the line: symbols, discretised operators,
Toeplitz indices, the gamma homomorphism on sequence space, and K-theory
six-term sequences over the integers."""

__version__ = "0.1.0"

from .errors import (CorroborationError, GridIncommensurableError, InconsistentDiagramError,
                     NotFredholmError, NotInCSError, NotInvertibleError, NotTraceReadyError,
                     OpIndexError, SupportLeakError, UndersampledLoopError)
from .symbols import (GeneratorWord, MCPoint, MSharpPoint, SampledLoop, ScalarFn,
                      SemiperiodicSymbol, builtin, fourier_op, mult_op, sigma_A, sigma_C,
                      sigma_winding, standard_bc, winding_number)
from .discretize import (DiscreteOperator, GridSpec, assemble, fredholm_index_estimate,
                         word_index)
from .toeplitz import CircleSymbol, cayley_transform, toeplitz_index
from .gamma import (SeqOperator, delta0_exponential, delta1_table, gamma_word, trace_index,
                    y_op)
from .lattice import (FgAbGroup, LatticeMap, SixTermDiagram, check_exact, smith_normal_form,
                      solve_unknown)
