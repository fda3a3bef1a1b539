import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
import pandas as pd

from config.settings import Settings
from services.coreMath import ComplexSeries
from services.statsErrors import DomainError, require
from utils.validators import validate_positive_int


# Filas de U por bloque en la suma directa
_DIRECT_BLOCK_ROWS = 1024


class QMode(str, Enum):
    """Reglas para elegir el largo q de la transformada"""

    THEORY = "theory"
    SIMULATION = "simulation"
    STANDARD = "standard"
    FULL = "full"


@dataclass(frozen=True, eq=False)
class Periodogram:
    """Periodograma sobre-muestreado: v = U y e intensidades I = |v|²"""

    q: int
    N: int
    v: np.ndarray
    intensities: np.ndarray

    def __post_init__(self):
        v = np.array(self.v, dtype=np.complex128).reshape(-1)
        intensities = np.array(self.intensities, dtype=float).reshape(-1)
        if v.size != self.q or intensities.size != self.q:
            raise DomainError(f"El periodograma debe tener q = {self.q} entradas")
        v.setflags(write=False)
        intensities.setflags(write=False)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "intensities", intensities)

    @classmethod
    def from_spectrum(cls, v: np.ndarray, N: int) -> "Periodogram":
        """Construye el periodograma a partir de v, calculando I = |v|²"""
        v = np.asarray(v, dtype=np.complex128).reshape(-1)
        return cls(int(v.size), int(N), v, v.real ** 2 + v.imag ** 2)

    @property
    def magnitudes(self) -> np.ndarray:
        return np.sqrt(self.intensities)


def q_rule(N: int, mode, p: Optional[int] = None) -> int:
    """
    Largo de la transformada según la regla elegida

    Args:
        N (int): Largo de la serie (>= 2)
        mode (QMode | str): theory (N⌊ln N + 1⌋), simulation (2N⌊ln N + 1⌋),
            standard (N) o full (p)
        p (int): Tamaño de la grilla, requerido en modo full

    Returns:
        int: q
    """
    require(validate_positive_int(N, "N", minimum=2))
    try:
        mode = QMode(mode)
    except ValueError as e:
        raise DomainError(f"Modo de q desconocido: {mode}") from e

    factor = math.floor(math.log(N) + 1)
    if mode is QMode.THEORY:
        return N * factor
    if mode is QMode.SIMULATION:
        return 2 * N * factor
    if mode is QMode.STANDARD:
        return N

    if p is None:
        raise DomainError("El modo full requiere p")
    require(validate_positive_int(p, "p"))
    return int(p)


def direct_transform(samples: np.ndarray, q: int) -> np.ndarray:
    """
    v_m = (1/√N) Σ_j e^{+2πi(m-1)(j-1)/q} y_j por suma directa, costo O(Nq)

    Las fases se reducen módulo q en aritmética entera antes de exponenciar.
    """
    y = np.asarray(samples, dtype=np.complex128).reshape(-1)
    N = y.size
    j = np.arange(N, dtype=np.int64)
    v = np.empty(q, dtype=np.complex128)

    for start in range(0, q, _DIRECT_BLOCK_ROWS):
        m = np.arange(start, min(start + _DIRECT_BLOCK_ROWS, q), dtype=np.int64)
        phases = np.mod(np.outer(m, j), q) / q
        v[start:start + m.size] = np.exp(2j * np.pi * phases) @ y

    return v / math.sqrt(N)


def fast_transform(samples: np.ndarray, q: int) -> np.ndarray:
    """
    Misma transformada vía FFT de largo q de la serie rellenada con ceros

    Si q < N la serie se pliega módulo q antes de transformar. El exponente
    positivo corresponde a q * ifft.
    """
    y = np.asarray(samples, dtype=np.complex128).reshape(-1)
    N = y.size
    folded = np.zeros(q, dtype=np.complex128)
    if N <= q:
        folded[:N] = y
    else:
        np.add.at(folded, np.arange(N) % q, y)

    return np.fft.ifft(folded) * (q / math.sqrt(N))


def oversampled_transform(y: ComplexSeries, q: int, method: str = "auto") -> Periodogram:
    """
    Calcula el periodograma sobre-muestreado de largo q

    Args:
        y (ComplexSeries): Serie observada
        q (int): Largo de la transformada
        method (str): auto (FFT desde Settings.FFT_THRESHOLD), fft o direct

    Returns:
        Periodogram: v e intensidades
    """
    require(validate_positive_int(q, "q"))
    q = int(q)

    if method == "auto":
        method = "fft" if q >= Settings.FFT_THRESHOLD else "direct"

    if method == "fft":
        v = fast_transform(y.samples, q)
    elif method == "direct":
        v = direct_transform(y.samples, q)
    else:
        raise DomainError(f"Método de transformada desconocido: {method}")

    return Periodogram.from_spectrum(v, y.length)


def cross_correlation(m1: int, m2: int, N: int, q: int) -> complex:
    """
    Correlación ξ entre los ruidos w_{m1} y w_{m2} bajo la nula

    ξ = (1 - e^{2πiN(m1-m2)/q}) / (N (1 - e^{2πi(m1-m2)/q})); vale exactamente
    0 cuando N(m1-m2)/q es entero y 1 cuando m1 ≡ m2 (mod q).
    """
    require(validate_positive_int(N, "N"))
    require(validate_positive_int(q, "q"))

    lag = (int(m1) - int(m2)) % q
    if lag == 0:
        return 1.0 + 0.0j

    n_lag = (N * lag) % q
    numerator = 1.0 - np.exp(2j * np.pi * n_lag / q)
    denominator = N * (1.0 - np.exp(2j * np.pi * lag / q))
    return complex(numerator / denominator)


def periodogram_to_frame(periodogram: Periodogram) -> pd.DataFrame:
    """Tabla (m, re_v, im_v, I) con m 1-based"""
    return pd.DataFrame({
        "m": np.arange(1, periodogram.q + 1),
        "re_v": periodogram.v.real,
        "im_v": periodogram.v.imag,
        "I": periodogram.intensities,
    })
