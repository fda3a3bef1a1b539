import math
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from config.settings import Settings
from services.coreMath import ComplexSeries, RngHandle, sample_complex_normal
from services.statsErrors import DomainError, SamplerExhaustedError, require
from utils.logger import app_logger
from utils.validators import (
    validate_even_length,
    validate_positive_int,
    validate_positive_real,
    validate_support,
)


# Claves de sub-flujo
SUPPORT_STREAM = 1
PHASE_STREAM = 2
NOISE_STREAM = 3

PHASE_UNIFORM = "uniform"
PHASE_FIXED = "fixed"

SUPPORT_AUTO = "auto"
SUPPORT_REJECTION = "rejection"
SUPPORT_GAPS = "gaps"

# Por encima de este producto la reducción modular exacta desborda int64
_EXACT_INT_LIMIT = 1 << 62


@dataclass(frozen=True, eq=False)
class SparseSpectrum:
    """
    Espectro disperso sobre la grilla extendida de tamaño p

    Los índices del soporte son 1-based (τ_1 < ... < τ_s); s = 0 es la nula.
    """

    p: int
    support: np.ndarray
    amplitudes: np.ndarray

    def __post_init__(self):
        require(validate_positive_int(self.p, "p"))
        support = np.array(self.support, dtype=np.int64).reshape(-1)
        amplitudes = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        require(validate_support(support.tolist(), int(self.p)))
        if support.size != amplitudes.size:
            raise DomainError(
                f"El soporte ({support.size}) y las amplitudes ({amplitudes.size}) deben tener el mismo largo"
            )
        support.setflags(write=False)
        amplitudes.setflags(write=False)
        object.__setattr__(self, "p", int(self.p))
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "amplitudes", amplitudes)

    @classmethod
    def null(cls, p: int) -> "SparseSpectrum":
        """Espectro vacío: genera la hipótesis nula"""
        return cls(p, np.empty(0, dtype=np.int64), np.empty(0, dtype=np.complex128))

    @property
    def s(self) -> int:
        return int(self.support.size)

    @property
    def is_null(self) -> bool:
        return self.s == 0

    def atom(self, index: int) -> "SparseSpectrum":
        """Sub-espectro con un único átomo"""
        return SparseSpectrum(self.p, self.support[index:index + 1], self.amplitudes[index:index + 1])


@dataclass(frozen=True)
class AlternativeParams:
    """
    Parámetros de una alternativa del espacio Γ(p, N, s, r)

    min_sep en None usa la separación teórica ln²N / N; 0 deja el soporte
    uniforme sin restricción. s = 0 o r = 0 describen la nula.

    support_method "auto" sortea por rechazo cuando la separación es 0 y por
    brechas cuando es positiva; ambos métodos dan la ley uniforme sobre los
    soportes separados.
    """

    p: int
    N: int
    s: int
    r: float
    alpha: Optional[float] = None
    gamma: Optional[float] = None
    min_sep: Optional[float] = None
    phase_mode: str = PHASE_UNIFORM
    fixed_phase: float = 0.0
    support_method: str = SUPPORT_AUTO

    def __post_init__(self):
        require(validate_positive_int(self.p, "p"))
        require(validate_positive_int(self.N, "N"))
        require(validate_positive_int(self.s, "s", minimum=0))
        require(validate_positive_real(self.r, "r", allow_zero=True))
        if self.s > self.p:
            raise DomainError(f"s ({self.s}) no puede superar p ({self.p})")
        if self.min_sep is not None:
            require(validate_positive_real(self.min_sep, "min_sep", allow_zero=True))
        if self.phase_mode not in (PHASE_UNIFORM, PHASE_FIXED):
            raise DomainError(f"Modo de fase desconocido: {self.phase_mode}")
        if self.support_method not in (SUPPORT_AUTO, SUPPORT_REJECTION, SUPPORT_GAPS):
            raise DomainError(f"Método de soporte desconocido: {self.support_method}")

    @classmethod
    def from_exponents(cls, p: int, gamma: float, alpha: float, r: float, **kwargs) -> "AlternativeParams":
        """
        Construye los parámetros a partir de N = p^(1-γ) y s = p^(1-α)

        Args:
            p (int): Tamaño de la grilla
            gamma (float): Exponente de N, en [0, 1)
            alpha (float): Exponente de rareza
            r (float): Intensidad de la señal

        Returns:
            AlternativeParams: Parámetros con N y s redondeados
        """
        if not 0.0 <= gamma < 1.0:
            raise DomainError(f"gamma debe estar en [0, 1) (recibido {gamma})")
        N = max(1, int(round(p ** (1.0 - gamma))))
        s = int(round(p ** (1.0 - alpha)))
        return cls(p=p, N=N, s=s, r=r, alpha=alpha, gamma=gamma, **kwargs)

    @property
    def is_null(self) -> bool:
        return self.s == 0 or self.r == 0

    @property
    def separation(self) -> float:
        if self.min_sep is not None:
            return float(self.min_sep)
        return theoretical_separation(self.N)

    @property
    def resolved_support_method(self) -> str:
        if self.support_method != SUPPORT_AUTO:
            return self.support_method
        return SUPPORT_GAPS if self.separation > 0 else SUPPORT_REJECTION

    @property
    def amplitude(self) -> float:
        return amplitude_from_r(self.r, self.p, self.N)


def theoretical_separation(N: int) -> float:
    """Separación mínima teórica ln²(N) / N"""
    require(validate_positive_int(N, "N"))
    return math.log(N) ** 2 / N


def min_separation(spectrum: SparseSpectrum) -> float:
    """
    Separación mínima Δ(τ) con la brecha circular τ_{s+1} = τ_1 + p

    Args:
        spectrum (SparseSpectrum): Espectro con s >= 1

    Returns:
        float: Menor brecha dividida por p, en (0, 1/s]
    """
    if spectrum.is_null:
        raise DomainError("min_separation requiere un soporte no vacío")

    support = spectrum.support
    wrap_gap = int(support[0]) + spectrum.p - int(support[-1])
    gaps = np.diff(support)
    smallest = min(int(gaps.min()), wrap_gap) if gaps.size else wrap_gap
    return smallest / spectrum.p


def sample_support(p: int, s: int, min_sep: float, rng: RngHandle, max_attempts: Optional[int] = None,
                   method: str = SUPPORT_REJECTION) -> np.ndarray:
    """
    Sortea un soporte uniforme entre los que cumplen la separación min_sep

    Con method="rejection" usa estadísticos de orden de uniformes con rechazo:
    cada intento usa su propio sub-flujo y se acepta cuando los índices son
    distintos y la separación mínima es al menos min_sep. Con method="gaps"
    el sorteo es directo y no consume intentos.

    Args:
        p (int): Tamaño de la grilla
        s (int): Cantidad de índices
        min_sep (float): Separación mínima exigida
        rng (RngHandle): Flujo aleatorio
        max_attempts (int): Tope de intentos (Settings.SUPPORT_MAX_ATTEMPTS)
        method (str): rejection o gaps

    Returns:
        np.ndarray: Índices 1-based estrictamente crecientes

    Raises:
        DomainError: si la separación pedida es infactible
        SamplerExhaustedError: si no se acepta ningún sorteo dentro del tope
    """
    require(validate_positive_int(p, "p"))
    require(validate_positive_int(s, "s"))
    require(validate_positive_real(min_sep, "min_sep", allow_zero=True))
    if s > p:
        raise DomainError(f"s ({s}) no puede superar p ({p})")
    if s * min_sep >= 1.0:
        raise DomainError(f"Separación infactible: s * min_sep = {s * min_sep:.4f} >= 1")

    if method == SUPPORT_GAPS:
        return _sample_support_by_gaps(p, s, min_sep, rng)
    if method != SUPPORT_REJECTION:
        raise DomainError(f"Método de soporte desconocido: {method}")

    cap = Settings.SUPPORT_MAX_ATTEMPTS if max_attempts is None else int(max_attempts)

    for attempt in range(cap):
        draws = rng.substream(attempt).generator().integers(1, p + 1, size=s)
        support = np.sort(draws)
        if s > 1 and np.any(np.diff(support) == 0):
            continue
        candidate = SparseSpectrum(p, support, np.zeros(s, dtype=np.complex128))
        if min_separation(candidate) >= min_sep:
            if attempt > 0:
                app_logger.debug(f"Soporte aceptado tras {attempt + 1} intentos (p={p}, s={s})")
            return candidate.support

    raise SamplerExhaustedError(
        f"No se obtuvo un soporte con separación >= {min_sep:.6g} en {cap} intentos (p={p}, s={s})"
    )


def _sample_support_by_gaps(p: int, s: int, min_sep: float, rng: RngHandle) -> np.ndarray:
    """
    Sorteo exacto por brechas circulares de al menos g índices

    Un ancla uniforme en la grilla es siempre átomo; los s - 1 restantes se
    ubican tras ella con y_i = x_i - g - (i-1)(g-1) elegidos sin reposición
    en {0, ..., p - 2g - (s-2)(g-1)}. Cada soporte separado se obtiene desde
    sus s anclas posibles con igual probabilidad.
    """
    gap = max(1, math.ceil(min_sep * p))
    while gap > 1 and (gap - 1) / p >= min_sep:
        gap -= 1
    while gap / p < min_sep:
        gap += 1
    if s * gap > p:
        raise DomainError(f"Separación infactible en la grilla: s * g = {s * gap} > p = {p}")

    generator = rng.substream(0).generator()
    anchor = int(generator.integers(0, p))
    others = s - 1
    offsets = np.zeros(1, dtype=np.int64)
    if others > 0:
        span = p - 2 * gap - (others - 1) * (gap - 1) + 1
        chosen = np.sort(generator.choice(span, size=others, replace=False)).astype(np.int64)
        offsets = np.concatenate([offsets, chosen + gap + np.arange(others, dtype=np.int64) * (gap - 1)])

    support = np.sort((anchor + offsets) % p) + 1
    app_logger.debug(f"Soporte por brechas: g = {gap} (p={p}, s={s})")
    return support


def equispaced_support(p: int, s: int, offset: int = 1) -> np.ndarray:
    """Soporte determinista τ_l = offset + floor(l p / s), l = 0..s-1"""
    require(validate_positive_int(p, "p"))
    require(validate_positive_int(s, "s"))
    if s > p or offset < 1 or offset + ((s - 1) * p) // s > p:
        raise DomainError(f"offset {offset} deja índices fuera de [1, {p}]")
    return offset + (np.arange(s, dtype=np.int64) * p) // s


def amplitude_from_r(r: float, p: int, N: int) -> float:
    """Amplitud común A = sqrt(r p ln(p) / N)"""
    require(validate_positive_real(r, "r"))
    require(validate_positive_int(p, "p", minimum=2))
    require(validate_positive_int(N, "N"))
    return math.sqrt(r * p * math.log(p) / N)


def make_alternative(params: AlternativeParams, rng: RngHandle) -> SparseSpectrum:
    """
    Genera un espectro alternativo con módulo común A y fases aleatorias

    Args:
        params (AlternativeParams): Parámetros de la alternativa
        rng (RngHandle): Flujo aleatorio

    Returns:
        SparseSpectrum: Espectro alternativo (vacío si params es la nula)
    """
    if params.is_null:
        return SparseSpectrum.null(params.p)

    support = sample_support(params.p, params.s, params.separation, rng.substream(SUPPORT_STREAM),
                             method=params.resolved_support_method)

    if params.phase_mode == PHASE_FIXED:
        phases = np.full(params.s, params.fixed_phase)
    else:
        phases = rng.substream(PHASE_STREAM).generator().uniform(0.0, 2.0 * math.pi, size=params.s)

    amplitudes = params.amplitude * np.exp(1j * phases)
    return SparseSpectrum(params.p, support, amplitudes)


def synthesize(spectrum: SparseSpectrum, N: int, sigma: float, rng: Optional[RngHandle] = None) -> ComplexSeries:
    """
    Sintetiza y_j = (1/√p) Σ_l e^{-2πi(j-1)(τ_l-1)/p} β̃_l + z_j

    Suma directa sobre los s átomos (costo O(Ns)); sigma = 0 devuelve la media.

    Args:
        spectrum (SparseSpectrum): Espectro a sintetizar
        N (int): Largo de la serie
        sigma (float): Escala del ruido (>= 0)
        rng (RngHandle): Flujo aleatorio, requerido si sigma > 0

    Returns:
        ComplexSeries: Observación y
    """
    require(validate_positive_int(N, "N"))
    require(validate_positive_real(sigma, "sigma", allow_zero=True))

    mean = np.zeros(N, dtype=np.complex128)
    if not spectrum.is_null:
        p = spectrum.p
        offsets = spectrum.support - 1
        j = np.arange(N, dtype=np.int64)
        if N * p < _EXACT_INT_LIMIT:
            fractions = np.mod(np.outer(j, offsets), p) / p
        else:
            fractions = np.mod(np.outer(j, offsets / p), 1.0)
        mean = np.exp(-2j * np.pi * fractions) @ spectrum.amplitudes / math.sqrt(p)

    if sigma == 0:
        return ComplexSeries(mean, 0.0)

    if rng is None:
        raise DomainError("synthesize con sigma > 0 requiere un RngHandle")

    noise = sample_complex_normal(N, sigma, rng.substream(NOISE_STREAM))
    return ComplexSeries(mean + noise.samples, sigma)


def _grid_offsets(tau: int, p: int, q: int, m: np.ndarray) -> Tuple[np.ndarray, Optional[int]]:
    """
    (m-1)/q - (τ-1)/p reducido a [0, 1)

    Devuelve (numeradores enteros, q*p) cuando la aritmética exacta cabe en
    int64 y (fracciones, None) en caso contrario.
    """
    if q * p < _EXACT_INT_LIMIT:
        numerators = np.mod(m * p - (tau - 1) * q, q * p)
        return numerators, q * p
    return np.mod(m / q - (tau - 1) / p, 1.0), None


def _geometric_sum(delta: np.ndarray, N: int, denominator: Optional[int]) -> np.ndarray:
    """Σ_{j=0}^{N-1} e^{2πi j δ} por forma cerrada, con suma explícita cerca de δ ∈ ℤ"""
    if denominator is not None:
        fraction = delta / denominator
        if N * denominator < _EXACT_INT_LIMIT:
            n_fraction = np.mod(N * delta, denominator) / denominator
        else:
            n_fraction = np.mod(N * fraction, 1.0)
    else:
        fraction = delta
        n_fraction = np.mod(N * delta, 1.0)

    denom = 1.0 - np.exp(2j * np.pi * fraction)
    result = np.empty(fraction.shape, dtype=np.complex128)
    singular = np.abs(denom) < Settings.GEOMETRIC_SUM_EPS
    regular = ~singular
    result[regular] = (1.0 - np.exp(2j * np.pi * n_fraction[regular])) / denom[regular]

    if np.any(singular):
        j = np.arange(N)
        result[singular] = np.exp(2j * np.pi * np.outer(fraction[singular], j)).sum(axis=1)
    return result


def mean_spectrum(spectrum: SparseSpectrum, N: int, q: int) -> np.ndarray:
    """
    Espectro medio θ = U X β̃ en la grilla sobre-muestreada de largo q

    θ_m = (1/√(Np)) Σ_l β̃_l Σ_j e^{2πi(j-1)((m-1)/q - (τ_l-1)/p)}, evaluado
    átomo por átomo con la suma geométrica cerrada (costo O(qs)).

    Args:
        spectrum (SparseSpectrum): Espectro disperso
        N (int): Largo de la serie
        q (int): Largo de la transformada

    Returns:
        np.ndarray: θ complejo de largo q
    """
    require(validate_positive_int(N, "N"))
    require(validate_positive_int(q, "q"))

    theta = np.zeros(q, dtype=np.complex128)
    m = np.arange(q, dtype=np.int64)
    scale = 1.0 / math.sqrt(N * spectrum.p)

    for tau, beta in zip(spectrum.support.tolist(), spectrum.amplitudes):
        delta, denominator = _grid_offsets(tau, spectrum.p, q, m)
        theta += scale * beta * _geometric_sum(delta, N, denominator)

    return theta


def nearest_grid_index(tau: int, p: int, q: int) -> int:
    """Índice m (1-based) cuyo (m-1)/q está más cerca de (τ-1)/p en el círculo"""
    nearest = (2 * (tau - 1) * q + p) // (2 * p)
    return int(nearest % q) + 1


def _grid_distances(tau: int, p: int, q: int) -> np.ndarray:
    m = np.arange(q, dtype=np.int64)
    delta, denominator = _grid_offsets(tau, p, q, m)
    if denominator is not None:
        return np.minimum(delta, denominator - delta) / denominator
    return np.minimum(delta, 1.0 - delta)


def peak_deviation(spectrum: SparseSpectrum, N: int, q: int) -> np.ndarray:
    """
    Desvío de cada pico respecto de su valor ideal, en módulo

    Para cada átomo ν devuelve | |θ_{m_ν}| - √(N/p)|β̃_ν| | con m_ν el índice
    de grilla más cercano.
    """
    theta = mean_spectrum(spectrum, N, q)
    ideal = math.sqrt(N / spectrum.p) * np.abs(spectrum.amplitudes)
    peaks = np.array(
        [abs(theta[nearest_grid_index(tau, spectrum.p, q) - 1]) for tau in spectrum.support.tolist()]
    )
    return np.abs(peaks - ideal)


def off_peak_maximum(spectrum: SparseSpectrum, N: int, q: int, radius: Optional[float] = None) -> float:
    """
    Máximo de |θ_m| lejos de todos los átomos

    Args:
        spectrum (SparseSpectrum): Espectro disperso
        N (int): Largo de la serie
        q (int): Largo de la transformada
        radius (float): Distancia mínima a cada átomo (por defecto √(ln N)/N)

    Returns:
        float: Máximo fuera de los entornos; 0.0 si no queda ningún índice
    """
    radius = math.sqrt(math.log(N)) / N if radius is None else radius
    theta = mean_spectrum(spectrum, N, q)
    far = np.ones(q, dtype=bool)
    for tau in spectrum.support.tolist():
        far &= _grid_distances(tau, spectrum.p, q) >= radius

    if not np.any(far):
        return 0.0
    return float(np.abs(theta[far]).max())


def complexify(u) -> ComplexSeries:
    """
    Complejifica una serie real de largo 2n: y_t = u_t + i u_{t+n}

    Args:
        u (Sequence[float]): Serie real de largo par

    Returns:
        ComplexSeries: Serie compleja de largo n
    """
    values = np.asarray(u, dtype=float).reshape(-1)
    require(validate_even_length(values.size))

    half = values.size // 2
    return ComplexSeries(values[:half] + 1j * values[half:])


def spectrum_to_record(spectrum: SparseSpectrum) -> Dict:
    """Registro serializable (p, soporte, pares [re, im])"""
    return {
        "p": spectrum.p,
        "support": [int(tau) for tau in spectrum.support],
        "amplitudes": [[float(beta.real), float(beta.imag)] for beta in spectrum.amplitudes],
    }


def spectrum_from_record(record: Dict) -> SparseSpectrum:
    """Inverso de spectrum_to_record"""
    try:
        amplitudes = [complex(re, im) for re, im in record["amplitudes"]]
        return SparseSpectrum(int(record["p"]), record["support"], amplitudes)
    except (KeyError, TypeError, ValueError) as e:
        raise DomainError(f"Registro de espectro inválido: {e}") from e
