"""Mean-field resolvent amplitudes for two soluble two-particle models.

Subpackages build the self-consistent mean-field systems for a free pair and
for a pair with a separable bound-state potential, derive their governing
polynomial conditions by exact elimination, track every solution branch in
the complex energy plane, classify physical branches, locate threshold
singularities, and validate against independent resolvent quadrature.
"""

__version__ = "0.1.0"
