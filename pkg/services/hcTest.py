import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Dict, Optional, Tuple

import numpy as np

from services.coreMath import ComplexSeries, tail_prob
from services.periodogram import Periodogram, oversampled_transform
from services.statsErrors import DomainError, UndefinedStatisticError, logs_failures, require
from utils.validators import validate_positive_int, validate_positive_real


class StatisticForm(str, Enum):
    """Forma del estadístico HC*"""

    INTERVAL = "interval"
    PVALUE = "pvalue"


@dataclass(frozen=True)
class SigmaMode:
    """Normalización del ruido: escala conocida o estimada por media cuadrática"""

    kind: str
    value: Optional[float] = None

    KNOWN = "known"
    ESTIMATED = "estimated"

    def __post_init__(self):
        if self.kind == self.KNOWN:
            require(validate_positive_real(self.value, "sigma"))
        elif self.kind == self.ESTIMATED:
            if self.value is not None:
                raise DomainError("El modo estimated no lleva valor")
        else:
            raise DomainError(f"Modo de sigma desconocido: {self.kind}")

    @classmethod
    def known(cls, sigma: float = 1.0) -> "SigmaMode":
        return cls(cls.KNOWN, float(sigma))

    @classmethod
    def estimated(cls) -> "SigmaMode":
        return cls(cls.ESTIMATED)

    @classmethod
    def parse(cls, text: str) -> "SigmaMode":
        """Interpreta 'known:VALOR', 'known' (σ = 1) o 'estimated'"""
        text = text.strip().lower()
        if text == cls.ESTIMATED:
            return cls.estimated()
        if text == cls.KNOWN:
            return cls.known()
        if text.startswith(cls.KNOWN + ":"):
            try:
                return cls.known(float(text.split(":", 1)[1]))
            except ValueError as e:
                raise DomainError(f"Valor de sigma inválido: {text}") from e
        raise DomainError(f"Modo de sigma desconocido: {text}")

    @property
    def is_known(self) -> bool:
        return self.kind == self.KNOWN

    def __str__(self) -> str:
        return f"known:{self.value:g}" if self.is_known else self.ESTIMATED


@dataclass(frozen=True)
class HCResult:
    """Resultado del test OPHC"""

    hc_star: float
    argmax: float
    q: int
    form: StatisticForm
    threshold_used: float
    reject: bool
    empirical_pvalue: Optional[float] = None

    def with_empirical_pvalue(self, pvalue: float) -> "HCResult":
        if not 0.0 < pvalue <= 1.0:
            raise DomainError(f"p-valor empírico fuera de (0, 1]: {pvalue}")
        return replace(self, empirical_pvalue=float(pvalue))

    def to_record(self) -> Dict:
        """Registro plano para imprimir o exportar"""
        return {
            "hc_star": self.hc_star,
            "argmax": self.argmax,
            "q": self.q,
            "form": StatisticForm(self.form).value,
            "threshold_used": self.threshold_used,
            "reject": self.reject,
            "empirical_pvalue": self.empirical_pvalue,
        }


def theoretical_threshold(N: int) -> float:
    """Umbral teórico T = ln²N"""
    require(validate_positive_int(N, "N", minimum=2))
    return math.log(N) ** 2


def _standardize(counts: np.ndarray, tails: np.ndarray, q: int) -> np.ndarray:
    variances = q * tails * (1.0 - tails)
    return (counts - q * tails) / np.sqrt(variances)


def hc_at(t: float, periodogram: Periodogram) -> float:
    """
    HC(t) = (Σ_m 1{√I_m >= t} - qΨ̄(t)) / √(qΨ̄(t)(1 - Ψ̄(t)))

    Args:
        t (float): Umbral positivo
        periodogram (Periodogram): Periodograma normalizado

    Returns:
        float: Conteo de excedencias estandarizado

    Raises:
        UndefinedStatisticError: si la varianza se anula numéricamente
    """
    require(validate_positive_real(t, "t"))

    tail = tail_prob(t)
    q = periodogram.q
    if not q * tail * (1.0 - tail) > 0.0:
        raise UndefinedStatisticError(f"HC(t) no está definido en t = {t:g} para q = {q}")

    count = int(np.count_nonzero(periodogram.intensities >= t * t))
    return float(_standardize(np.array([count]), np.array([tail]), q)[0])


def default_interval(N: int) -> Tuple[float, float]:
    """Intervalo [1, √(ln(N/3))]"""
    require(validate_positive_int(N, "N"))
    if N <= 3 * math.e:
        raise DomainError(f"El intervalo [1, √(ln(N/3))] es vacío para N = {N}")
    return 1.0, math.sqrt(math.log(N / 3.0))


@logs_failures
def hc_star_interval(periodogram: Periodogram, a: Optional[float] = None, b: Optional[float] = None,
                     include_endpoints: bool = True) -> HCResult:
    """
    Supremo exacto de HC(t) sobre t ∈ [a, b]

    HC(t) sólo salta en t = √I_m y crece con t mientras el conteo es
    constante, así que el supremo se alcanza en t = a, en los puntos
    muestrales dentro de (a, b] o en t = b. Con include_endpoints=False sólo
    se evalúan los puntos muestrales (equivale a la forma por p-valores).

    Args:
        periodogram (Periodogram): Periodograma normalizado
        a (float): Extremo izquierdo (por defecto 1)
        b (float): Extremo derecho (por defecto √(ln(N/3)))
        include_endpoints (bool): Evaluar también t = a y t = b

    Returns:
        HCResult: Estadístico con argmax = umbral t del máximo (sin decisión)
    """
    if a is None or b is None:
        default_a, default_b = default_interval(periodogram.N)
        a = default_a if a is None else a
        b = default_b if b is None else b

    require(validate_positive_real(a, "a"))
    require(validate_positive_real(b, "b"))
    if b < a:
        raise DomainError(f"Intervalo inválido: b = {b:g} < a = {a:g}")

    q = periodogram.q
    tail_b = tail_prob(b)
    if not q * tail_b * (1.0 - tail_b) > 0.0:
        raise UndefinedStatisticError(f"b = {b:g} está fuera del dominio de HC(t) para q = {q}")

    intensities = np.sort(periodogram.intensities)
    lower, upper = a * a, b * b

    inside = intensities[(intensities > lower) & (intensities <= upper)]
    candidates = np.unique(inside)
    tails = np.exp(-candidates)
    thresholds = np.sqrt(candidates)

    if include_endpoints:
        candidates = np.concatenate(([lower], candidates, [upper]))
        tails = np.concatenate(([tail_prob(a)], tails, [tail_b]))
        thresholds = np.concatenate(([a], thresholds, [b]))

    if candidates.size == 0:
        raise UndefinedStatisticError("No hay puntos muestrales en (a, b]")

    counts = q - np.searchsorted(intensities, candidates, side="left")
    values = _standardize(counts, tails, q)
    best = int(np.argmax(values))

    return HCResult(
        hc_star=float(values[best]),
        argmax=float(thresholds[best]),
        q=q,
        form=StatisticForm.INTERVAL,
        threshold_used=math.inf,
        reject=False,
    )


@logs_failures
def hc_star_pvalues(periodogram: Periodogram) -> HCResult:
    """
    HC* por p-valores ordenados

    HC* = max_{m: 1/q <= P_(m) < 1/2} (m - qP_(m)) / √(qP_(m)(1 - P_(m))),
    con P_m = e^{-|v_m|²}.

    Args:
        periodogram (Periodogram): Periodograma normalizado (q >= 2)

    Returns:
        HCResult: Estadístico con argmax = índice de orden m (sin decisión)

    Raises:
        UndefinedStatisticError: si el conjunto admisible es vacío
    """
    q = periodogram.q
    require(validate_positive_int(q, "q", minimum=2))

    pvalues = np.sort(np.exp(-periodogram.intensities), kind="stable")
    ranks = np.arange(1, q + 1)
    admissible = (pvalues >= 1.0 / q) & (pvalues < 0.5)
    if not np.any(admissible):
        raise UndefinedStatisticError("HC* indefinido: no hay p-valores en [1/q, 1/2)")

    values = _standardize(ranks[admissible], pvalues[admissible], q)
    best = int(np.argmax(values))

    return HCResult(
        hc_star=float(values[best]),
        argmax=float(ranks[admissible][best]),
        q=q,
        form=StatisticForm.PVALUE,
        threshold_used=math.inf,
        reject=False,
    )


def estimate_sigma(y: ComplexSeries) -> float:
    """
    Estima σ por la media cuadrática: √((1/N) Σ |y_t|²)

    Raises:
        DomainError: si la serie es idénticamente cero
    """
    samples = y.samples
    mean_square = float(np.mean(samples.real ** 2 + samples.imag ** 2))
    if mean_square <= 0.0:
        raise DomainError("No se puede estimar sigma de una serie idénticamente nula")
    return math.sqrt(mean_square)


def _normalize(y: ComplexSeries, sigma_mode: SigmaMode) -> ComplexSeries:
    sigma = sigma_mode.value if sigma_mode.is_known else estimate_sigma(y)
    return ComplexSeries(y.samples / sigma, 1.0)


def compute_hc_star(periodogram: Periodogram, form=StatisticForm.PVALUE,
                    interval: Optional[Tuple[float, float]] = None) -> HCResult:
    """Evalúa HC* en la forma pedida, sin decisión"""
    form = StatisticForm(form)
    if form is StatisticForm.PVALUE:
        return hc_star_pvalues(periodogram)
    a, b = interval if interval is not None else (None, None)
    return hc_star_interval(periodogram, a, b)


def ophc_statistic(y: ComplexSeries, q: int, sigma_mode: SigmaMode, form=StatisticForm.PVALUE,
                   interval: Optional[Tuple[float, float]] = None) -> HCResult:
    """Normaliza, transforma y calcula HC* (sin decisión)"""
    periodogram = oversampled_transform(_normalize(y, sigma_mode), q)
    return compute_hc_star(periodogram, form, interval)


def ophc_test(y: ComplexSeries, q: int, sigma_mode: SigmaMode, form=StatisticForm.PVALUE, *,
              threshold: float, interval: Optional[Tuple[float, float]] = None) -> HCResult:
    """
    Test OPHC completo: rechaza H0 si y sólo si HC* > umbral

    Args:
        y (ComplexSeries): Serie observada
        q (int): Largo de la transformada
        sigma_mode (SigmaMode): σ conocido o estimado
        form (StatisticForm): interval o pvalue
        threshold (float): Umbral de decisión, calibrado con calibrate_null o
            el conservador theoretical_threshold(N)
        interval (Tuple[float, float]): (a, b) para la forma interval

    Returns:
        HCResult: Estadístico, umbral usado y decisión
    """
    if threshold is None or not math.isfinite(float(threshold)):
        raise DomainError("El umbral de decisión debe ser finito")
    threshold = float(threshold)

    statistic = ophc_statistic(y, q, sigma_mode, form, interval)
    return replace(statistic, threshold_used=threshold, reject=statistic.hc_star > threshold)
