"""2-D ground-penetrating SAR workbench.

Forward simulation of scalar-wave scattering by a buried penetrable target
under a rough air-soil interface (method of fundamental solutions), plus the
inverse pipeline: PCA ground-bounce removal, Kirchhoff migration, and
reflectivity-spectrum extraction.
"""

__version__ = "0.1.0"
