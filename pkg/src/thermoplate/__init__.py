"""Spectral harness for a semilinear thermoelastic plate with fading thermal memory.

Submodules load lazily so the command-line entry point can set BLAS thread
limits before numpy is imported.
"""
from importlib import import_module

__version__ = "0.1.0"

_EXPORTS = {
    "DomainSpec": "spectral", "ModalBasis": "spectral", "SpectralField": "spectral",
    "build_basis": "spectral",
    "MemoryKernel": "kernel", "build_quadrature": "kernel", "make_exponential": "kernel",
    "make_table": "kernel", "verify_assumptions": "kernel",
    "HistoryField": "history", "init_history": "history",
    "Nonlinearity": "stationary", "cubic": "stationary", "find_equilibria": "stationary",
    "solve_steady": "stationary",
    "ModelParams": "dynamics", "NumericalFailure": "dynamics", "SchemeConfig": "dynamics",
    "StateVector": "dynamics", "decompose": "dynamics", "random_state": "dynamics",
    "simulate": "dynamics", "step": "dynamics",
}
__all__ = sorted(_EXPORTS)


def __getattr__(name):
    mod = _EXPORTS.get(name)
    if mod is None:
        raise AttributeError(f"module 'thermoplate' has no attribute {name!r}")
    return getattr(import_module(f".{mod}", __name__), name)
