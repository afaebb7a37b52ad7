"""Numerics for the 3D quadratic fractional Schrodinger equation ``(d_t + i D^alpha) u = c u conj(u)``.

Submodules
----------
grid
    Periodic grids, spectral fields, Littlewood-Paley shells, basic norms.
paraproduct
    Bilinear multipliers, paraproduct pieces and the normal form.
resonance
    Phase function, symbol-class checks and dyadic decay constants.
radial
    Radial oracle for the linear propagator.
norms
    Weighted W/U norms, diagnostics and decay fits.
evolution
    Profile-frame integration of the original and transformed systems.
scattering
    Forward scattering diagnostics and the final-data iteration.
cli
    Configuration-driven experiment runner.
"""

__version__ = "0.1.0"
