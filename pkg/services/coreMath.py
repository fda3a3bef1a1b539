import hashlib
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple, Union

import numpy as np

from services.statsErrors import DomainError, require
from utils.validators import (
    validate_positive_int,
    validate_positive_real,
    validate_unit_interval,
)


ArrayLike = Union[float, np.ndarray]

_SEED_MASK = (1 << 64) - 1


def _label_key(label: str) -> int:
    digest = hashlib.blake2b(label.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


@dataclass(frozen=True)
class RngHandle:
    """
    Identificador de un flujo aleatorio reproducible

    Un flujo queda determinado por (master_seed, label, stream_index, path);
    la semilla efectiva se obtiene hasheando esa tupla con SeedSequence, así
    que dos handles iguales generan exactamente la misma secuencia.
    """

    master_seed: int
    stream_index: int = 0
    label: str = ""
    path: Tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not 0 <= int(self.master_seed) <= _SEED_MASK:
            raise DomainError(f"master_seed debe ser un entero de 64 bits sin signo (recibido {self.master_seed})")
        require(validate_positive_int(self.stream_index, "stream_index", minimum=0))
        for key in self.path:
            require(validate_positive_int(key, "clave de sub-flujo", minimum=0))

    def substream(self, *keys: int) -> "RngHandle":
        """Deriva un sub-flujo independiente agregando claves al camino"""
        return replace(self, path=self.path + tuple(int(k) for k in keys))

    def with_stream(self, stream_index: int) -> "RngHandle":
        """Mismo experimento, otro índice de flujo"""
        return replace(self, stream_index=int(stream_index), path=())

    def generator(self) -> np.random.Generator:
        """Construye un Generator nuevo posicionado al inicio del flujo"""
        sequence = np.random.SeedSequence(
            entropy=[int(self.master_seed), _label_key(self.label)],
            spawn_key=(int(self.stream_index),) + self.path,
        )
        return np.random.default_rng(sequence)


@dataclass(frozen=True, eq=False)
class ComplexSeries:
    """Serie compleja finita (observación y o ruido z) con su escala nominal"""

    samples: np.ndarray
    sigma: Optional[float] = None

    def __post_init__(self):
        samples = np.array(self.samples, dtype=np.complex128).reshape(-1)
        if samples.size < 1:
            raise DomainError("Una serie compleja necesita al menos una muestra")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    @property
    def length(self) -> int:
        return int(self.samples.size)

    def __len__(self) -> int:
        return self.length

    def scaled(self, factor: float) -> "ComplexSeries":
        """Serie multiplicada por una constante (la escala nominal también)"""
        sigma = None if self.sigma is None else self.sigma * abs(factor)
        return ComplexSeries(self.samples * factor, sigma)


def sample_complex_normal(n: int, sigma: float, rng: RngHandle) -> ComplexSeries:
    """
    Muestrea n variables normales complejas circulares independientes

    Las partes real e imaginaria son normales independientes de media 0 y
    varianza sigma²/2, de modo que E|z|² = sigma².

    Args:
        n (int): Cantidad de muestras
        sigma (float): Escala del ruido
        rng (RngHandle): Flujo aleatorio

    Returns:
        ComplexSeries: Serie de ruido de largo n
    """
    require(validate_positive_int(n, "n"))
    require(validate_positive_real(sigma, "sigma"))

    parts = rng.generator().standard_normal((2, int(n))) * (sigma / math.sqrt(2.0))
    return ComplexSeries(parts[0] + 1j * parts[1], sigma)


def tail_prob(t: ArrayLike) -> ArrayLike:
    """
    Cola de |z| para z normal compleja estándar: P(|z| >= t) = exp(-t²)

    Args:
        t (float | np.ndarray): Umbral(es) no negativo(s)

    Returns:
        float | np.ndarray: Probabilidad de cola
    """
    values = np.asarray(t, dtype=float)
    if np.any(values < 0) or np.any(np.isnan(values)):
        raise DomainError("tail_prob requiere t >= 0")

    result = np.exp(-values * values)
    return float(result) if result.ndim == 0 else result


def noncentral_tail_upper(t: float, mu_abs: float) -> float:
    """Cota superior exp(-((t - |mu|)_+)²) de P(|mu + z| > t)"""
    require(validate_positive_real(t, "t", allow_zero=True))
    require(validate_positive_real(mu_abs, "mu_abs", allow_zero=True))

    excess = max(float(t) - float(mu_abs), 0.0)
    return math.exp(-excess * excess)


def circle_distance(a: ArrayLike, b: ArrayLike) -> ArrayLike:
    """
    Distancia en el círculo unitario: d(a, b) = min(|a - b|, 1 - |a - b|)

    Args:
        a, b (float | np.ndarray): Puntos en [0, 1]

    Returns:
        float | np.ndarray: Distancia en [0, 1/2]
    """
    left = np.asarray(a, dtype=float)
    right = np.asarray(b, dtype=float)
    if np.any((left < 0) | (left > 1)) or np.any((right < 0) | (right > 1)):
        raise DomainError("circle_distance requiere argumentos en [0, 1]")

    gap = np.abs(left - right)
    result = np.minimum(gap, 1.0 - gap)
    return float(result) if result.ndim == 0 else result


def chord_length(a: float, b: float) -> float:
    """Largo de la cuerda |1 - e^{2πi(a-b)}| = 2 sin(π d(a, b))"""
    for value, name in ((a, "a"), (b, "b")):
        require(validate_unit_interval(value, name))

    return 2.0 * math.sin(math.pi * circle_distance(a, b))


def chord_bounds_hold(a: float, b: float) -> bool:
    """Verifica 4 d(a, b) <= |1 - e^{2πi(a-b)}| <= 2π d(a, b)"""
    distance = circle_distance(a, b)
    chord = chord_length(a, b)
    return 4.0 * distance <= chord <= 2.0 * math.pi * distance
