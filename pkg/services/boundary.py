import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable

import numpy as np
import pandas as pd

from config.settings import Settings
from services.statsErrors import DomainError, require
from utils.validators import validate_positive_int, validate_positive_real


class Region(str, Enum):
    """Clasificación de un punto (γ, α, r) respecto de la frontera"""

    DETECTABLE = "detectable"
    UNDETECTABLE = "undetectable"
    ON_BOUNDARY = "on_boundary"


def _check_gamma(gamma: float) -> None:
    if not 0.0 <= gamma < 1.0:
        raise DomainError(f"gamma debe estar en [0, 1) (recibido {gamma})")


@dataclass(frozen=True)
class BoundaryPoint:
    """Punto (γ, α, r) con α en ((1+γ)/2, 1)"""

    gamma: float
    alpha: float
    r: float

    def __post_init__(self):
        _check_gamma(self.gamma)
        if not (1.0 + self.gamma) / 2.0 < self.alpha < 1.0:
            raise DomainError(
                f"alpha debe estar en ({(1 + self.gamma) / 2:g}, 1) (recibido {self.alpha})"
            )
        require(validate_positive_real(self.r, "r"))


def rho_star(alpha: float) -> float:
    """
    Frontera de detección ρ*(α) para α ∈ (1/2, 1)

    (1 - √(1-α))² si α >= 3/4; α - 1/2 si α < 3/4.
    """
    if not 0.5 < alpha < 1.0:
        raise DomainError(f"rho_star requiere alpha en (1/2, 1) (recibido {alpha})")

    if alpha >= 0.75:
        return (1.0 - math.sqrt(1.0 - alpha)) ** 2
    return alpha - 0.5


def rho_star_gamma(alpha: float, gamma: float) -> float:
    """
    Frontera de detección ρ*_γ(α) para α ∈ [(1+γ)/2, 1)

    (√(1-γ) - √(1-α))² si α >= (3+γ)/4; α - 1/2 - γ/2 en otro caso.
    """
    _check_gamma(gamma)
    if not (1.0 + gamma) / 2.0 <= alpha < 1.0:
        raise DomainError(
            f"rho_star_gamma requiere alpha en [{(1 + gamma) / 2:g}, 1) para gamma = {gamma:g} (recibido {alpha})"
        )

    if alpha >= (3.0 + gamma) / 4.0:
        return (math.sqrt(1.0 - gamma) - math.sqrt(1.0 - alpha)) ** 2
    # 2α reproduce 1+γ exactamente en el extremo izquierdo
    return (2.0 * alpha - (1.0 + gamma)) / 2.0


def classify(point: BoundaryPoint) -> Region:
    """Detectable si r > ρ*_γ(α), indetectable si r < ρ*_γ(α)"""
    difference = point.r - rho_star_gamma(point.alpha, point.gamma)
    if abs(difference) <= Settings.BOUNDARY_TOLERANCE:
        return Region.ON_BOUNDARY
    return Region.DETECTABLE if difference > 0 else Region.UNDETECTABLE


def region_of(p: int, N: int, s: int, r: float) -> BoundaryPoint:
    """
    Traduce un experimento finito a (γ, α, r) con N = p^(1-γ), s = p^(1-α)

    Returns:
        BoundaryPoint: Punto equivalente (falla si cae fuera del dominio)
    """
    require(validate_positive_int(p, "p", minimum=2))
    require(validate_positive_int(N, "N"))
    require(validate_positive_int(s, "s"))
    log_p = math.log(p)
    return BoundaryPoint(gamma=1.0 - math.log(N) / log_p, alpha=1.0 - math.log(s) / log_p, r=r)


def alpha_grid(start: float, stop: float, step: float) -> np.ndarray:
    """Grilla inclusiva de α sin acumulación de error de redondeo"""
    require(validate_positive_real(step, "step"))
    if stop < start:
        raise DomainError(f"Grilla vacía: stop = {stop} < start = {start}")
    count = int(math.floor((stop - start) / step + 1e-6)) + 1
    return np.round(start + step * np.arange(count), 12)


def boundary_table(gamma: float, alphas: Iterable[float]) -> pd.DataFrame:
    """
    Curvas (alpha, rho_star, rho_star_gamma) sobre una grilla de α

    Raises:
        DomainError: si algún α cae fuera del dominio de ρ*_γ o de ρ*
    """
    alphas = [float(alpha) for alpha in alphas]
    if not alphas:
        raise DomainError("La grilla de alpha está vacía")

    return pd.DataFrame({
        "alpha": alphas,
        "rho_star": [rho_star(alpha) for alpha in alphas],
        "rho_star_gamma": [rho_star_gamma(alpha, gamma) for alpha in alphas],
    })
