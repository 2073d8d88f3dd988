"""Numerical tools for entanglement between convex cones.

Modules: ``jordan`` (Euclidean Jordan algebras), ``cones`` (membership,
isotropic maps, certificates), ``compalg`` (composition algebras and the
distillation protocol), ``hurwitz`` (witness tensors), ``psdmaps`` (maps on
Hermitian matrices), ``norms`` (tensor norms and tau bounds), ``sinkhorn``
(scaling on symmetric cones) and ``cli``.
"""
from .linmap import ConeHandle, LinearMapDense

__version__ = "0.1.0"

__all__ = ["ConeHandle", "LinearMapDense", "__version__"]
