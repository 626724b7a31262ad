"""Jacobi set extraction and simplification for PL scalar field pairs."""

from .core_mesh import TriMesh, ScalarField, CriticalPoint, LevelPolyline

__all__ = [
    "TriMesh",
    "ScalarField",
    "CriticalPoint",
    "LevelPolyline",
]

__version__ = "0.1.0"
