"""conespec: low-energy spectral measures, resolvents and propagator decay
for Schroedinger operators on metric cones and radially perturbed conic
models.

The numeric kernels live in a compiled extension with a pure-Python twin;
``conespec.backend()`` reports which one is active.
"""

from conespec._backend import BACKEND

__version__ = "0.1.0"


def backend():
    """Name of the active numeric backend ('compiled' or 'python')."""
    return BACKEND


__all__ = ["backend", "__version__"]
