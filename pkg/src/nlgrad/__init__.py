"""
Nonlocal gradients with a scalable horizon on periodic grids.

Radial kernels (:mod:`nlgrad.kernels`), their Fourier symbols
(:mod:`nlgrad.profile`), spectral operators (:mod:`nlgrad.operator`), the
localization / fractionalization experiments (:mod:`nlgrad.analysis`), energy
minimization (:mod:`nlgrad.solver`) and the ``nlgrad`` command line
(:mod:`nlgrad.cli`).
"""

__version__ = "0.1.0"

from .errors import *  # noqa: E402,F401,F403
from .kernels import (CutoffSpec, Family, Kernel, KernelSpec, Regime, ScaledKernel,  # noqa: E402
                      check_hypotheses, limit_exponent, make_kernel, scale_kernel)
from .grid import Field, Grid, VectorField, inner, lp_norm  # noqa: E402
from .profile import SymbolTable, multiplier_scan, symbol, symbol_table  # noqa: E402
from .operator import (OperatorHandle, apply_P, apply_Q, apply_divergence,  # noqa: E402
                       apply_gradient, classical_gradient, direct_gradient_oracle,
                       make_operator, riesz_gradient)
from .analysis import (TestFunction, fractionalization_error, localization_rate,  # noqa: E402
                       multiplier_uniformity, poincare_scan)
from .solver import (Energy, energy_gradient, energy_value, gamma_sweep_diverging,  # noqa: E402
                     gamma_sweep_vanishing, minimize)
