"""Characteristic time operators built from discrete Hamiltonian spectra.

The subpackages cover spectra and their summability conditions
(:mod:`spectra`, :mod:`conditions`), the operator itself (:mod:`timeop`),
exact commutator verification (:mod:`ccr`), spectral diagnostics of
truncations (:mod:`sa_analysis`) and the configuration-space kernel
(:mod:`kernel`).
"""

__version__ = "0.1.0"
