"""Coarse combinatorial model of the Teichmuller space of symmetric
model surfaces: slopes, horoballs, augmented markings, projections,
thresholded distance formulas, fixed-point search, barycenters, and the
flat slit-torus experiment."""

__version__ = "0.1.0"
