"""Long-time asymptotics of u_tt = u_xx + (u^2)_xx + u_xxxx in the sector 0 <= t/x <= tau_max.

Pipeline: initial data -> spectral data (r1, r2) on the unit-circle arc ->
scalar parametrix quantities -> leading-order oscillatory asymptotics,
plus independent checks of every exact identity the construction uses.
"""

from .asymptotics import AsymptoticResult, SectorAsymptotics, SectorError, u_leading
from .phase import DEFAULT_TAU_MAX, PhaseContext, phase, phase21_dk, saddle_points
from .scattering import (InitialData, SpectralData, computed_spectral, family_data, gaussian_fixture,
                         reflection, synthetic_spectral, table_data)

__all__ = [
    "AsymptoticResult", "DEFAULT_TAU_MAX", "InitialData", "PhaseContext", "SectorAsymptotics", "SectorError",
    "SpectralData", "computed_spectral", "family_data", "gaussian_fixture", "phase", "phase21_dk", "reflection",
    "saddle_points", "synthetic_spectral", "table_data", "u_leading",
]
