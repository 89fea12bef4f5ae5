"""Phase-space numerics: Wigner transforms, Wigner kernels and metaplectic propagation.

The subpackages follow the data flow: :mod:`grid` samples states,
:mod:`symplectic` builds linear flows, :mod:`wigner` and :mod:`quantize`
move between states, phase space and operators, :mod:`fio` realises
metaplectic operators, :mod:`wigkernel` lifts operators to phase space and
:mod:`propagate` runs Schrodinger experiments on top of all of them.
"""
from ._backend import NAME as BACKEND
from .fio import (CausticError, DoubleCausticError, QuadraticPhase, TypeIFIO, apply_type1,
                  apply_type2, metaplectic_apply, phase_from_symplectic)
from .grid import (GridError, GridSpec, SampledState, SupportError, fourier, inner,
                   inverse_fourier, make_gaussian, spike)
from .propagate import (CauchyProblem, Flow, PropagationResult, caustic_times, compare,
                        evolve_perturbed, evolve_quadratic, propagate, transport_wigner)
from .quantize import OperatorMatrix, Symbol, kn_apply, make_symbol, materialize, weyl_apply
from .symplectic import (NotSymplecticError, free_particle_flow, harmonic_flow, is_symplectic,
                         magnetic_flow)
from .wigkernel import (KernelGuardError, WignerKernel, graph_concentration, kernel_from_operator,
                        type1_kernel_direct)
from .wigner import BandLimitError, PhaseSpaceFunction, cross_wigner, wigner

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "BandLimitError", "CauchyProblem", "CausticError", "DoubleCausticError", "Flow",
    "GridError", "GridSpec", "KernelGuardError", "NotSymplecticError", "OperatorMatrix",
    "PhaseSpaceFunction", "PropagationResult", "QuadraticPhase", "SampledState", "SupportError",
    "Symbol", "TypeIFIO", "WignerKernel", "apply_type1", "apply_type2", "caustic_times", "compare",
    "cross_wigner", "evolve_perturbed", "evolve_quadratic", "fourier", "free_particle_flow",
    "graph_concentration", "harmonic_flow", "inner", "inverse_fourier", "is_symplectic",
    "kernel_from_operator", "kn_apply", "magnetic_flow", "make_gaussian", "make_symbol",
    "materialize", "metaplectic_apply", "phase_from_symplectic", "propagate", "spike",
    "transport_wigner", "type1_kernel_direct", "weyl_apply", "wigner",
]
