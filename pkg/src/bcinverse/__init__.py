"""Half-line inverse problems toolkit: dynamical, spectral, scattering and
acoustic data for -y'' + q y on x > 0, and recovery of q from the response
function through Krein equations."""

__version__ = "0.1.0"

from .errors import *  # noqa: E402,F401,F403
from .numerics import (Grid1D, KernelMatrix, SampledFunction, solve_fredholm2,  # noqa: E402
                       sine_kernel)
from .potentials import PRESETS, PotentialSpec  # noqa: E402
from .dynamics import (ResponseFunction, apply_control, apply_control_adjoint,  # noqa: E402
                       apply_response, connecting_kernel, response_function, solve_goursat)
from .spectral import (RegularizedSpectralMeasure, build_sigma_d,  # noqa: E402
                       connecting_kernel_from_sigma, dirichlet_eigendata, reference_eigendata,
                       response_from_sigma)
from .scattering import (ScatteringData, jost_solution, parseval_check,  # noqa: E402
                         response_from_scattering, scattering_data, scattering_matrix)
from .weyl import WeylSamples, a_amplitude, weyl_from_response, weyl_reference  # noqa: E402
from .acoustic import (AcousticResponse, acoustic_connecting_check,  # noqa: E402
                       acoustic_krein_solve, p_from_phase, scattering_matrix_from_p,
                       simulate_acoustic_response)
from .inversion import krein_solve, recover_potential  # noqa: E402
from .kernels import BACKEND  # noqa: E402
