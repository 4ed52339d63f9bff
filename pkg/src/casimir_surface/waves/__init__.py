"""Spherical partial waves and the scattering (TGTG) energy."""

from .expansion import expansion_constant, green_series, verify_pw_expansion
from .functions import OUTGOING, REGULAR, PartialWaveIndex, spherical_wave, wave, wave_indices
from .scattering import ScatteringError, adaptive_scattering_energy, scattering_energy, translation_blocks
from .tmatrix import TMatrix, sphere_tmatrix, tmatrix_from_surface
from .translation import TranslationAccuracyError, TranslationMatrix, translation_matrix

__all__ = [
    "OUTGOING",
    "REGULAR",
    "PartialWaveIndex",
    "ScatteringError",
    "TMatrix",
    "TranslationAccuracyError",
    "TranslationMatrix",
    "adaptive_scattering_energy",
    "expansion_constant",
    "green_series",
    "scattering_energy",
    "sphere_tmatrix",
    "spherical_wave",
    "tmatrix_from_surface",
    "translation_blocks",
    "translation_matrix",
    "verify_pw_expansion",
    "wave",
    "wave_indices",
]
