import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from functools import partial
from operator import itemgetter
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from config.settings import Settings
from services.coreMath import RngHandle
from services.hcTest import SigmaMode, StatisticForm, ophc_statistic
from services.periodogram import QMode, q_rule
from services.signalModel import (
    AlternativeParams,
    SparseSpectrum,
    make_alternative,
    synthesize,
)
from services.statsErrors import (
    DomainError,
    ExperimentError,
    OphcError,
    UndefinedStatisticError,
    logs_failures,
    require,
)
from utils.helpers import code_version
from utils.logger import LoggerSetup, log_experiment
from utils.validators import (
    validate_positive_int,
    validate_positive_real,
    validate_probability_level,
)


CALIBRATION_LABEL = "calibration"
FRESH_NULL_LABEL = "fresh-null"
POWER_LABEL = "power"
FIXED_SPECTRUM_LABEL = "fixed-spectrum"

mc_logger = LoggerSetup.get_logger("montecarlo")

# Los ensayos de potencia usan índices de flujo disjuntos de los de calibración
POWER_STREAM_OFFSET = 1 << 40
SPECTRUM_STREAM = 10

SIGMA_MODES = (SigmaMode.KNOWN, SigmaMode.ESTIMATED)
DEFAULT_Q_MODES = (QMode.SIMULATION, QMode.STANDARD, QMode.FULL)

POWER_COLUMNS = ["q", "q_mode", "sigma_mode", "trials", "rejections", "power", "threshold"]


@dataclass(frozen=True)
class ExperimentConfig:
    """Descripción completa de un experimento de Monte Carlo"""

    p: int = Settings.DEFAULT_P
    N: int = Settings.DEFAULT_N
    s: int = Settings.DEFAULT_S
    r: float = Settings.DEFAULT_R
    q_mode: QMode = QMode.SIMULATION
    sigma_mode: str = SigmaMode.KNOWN
    statistic_form: StatisticForm = StatisticForm.PVALUE
    trials: int = Settings.DEFAULT_TRIALS
    level: float = Settings.DEFAULT_LEVEL
    master_seed: int = Settings.DEFAULT_SEED
    min_sep: float = 0.0
    fixed_spectrum: bool = False
    q: Optional[int] = None
    sigma: float = 1.0

    def __post_init__(self):
        try:
            object.__setattr__(self, "q_mode", QMode(self.q_mode))
            object.__setattr__(self, "statistic_form", StatisticForm(self.statistic_form))
        except ValueError as e:
            raise DomainError(str(e)) from e

        if self.sigma_mode not in SIGMA_MODES:
            raise DomainError(f"sigma_mode debe ser uno de {SIGMA_MODES} (recibido {self.sigma_mode})")

        require(validate_positive_int(self.p, "p", minimum=2))
        require(validate_positive_int(self.N, "N", minimum=2))
        require(validate_positive_int(self.s, "s", minimum=0))
        require(validate_positive_real(self.r, "r", allow_zero=True))
        require(validate_positive_int(self.trials, "trials"))
        require(validate_probability_level(self.level))
        require(validate_positive_real(self.min_sep, "min_sep", allow_zero=True))
        require(validate_positive_real(self.sigma, "sigma"))
        if self.q is not None:
            require(validate_positive_int(self.q, "q"))

    @property
    def resolved_q(self) -> int:
        """q explícito o derivado de q_mode"""
        if self.q is not None:
            return int(self.q)
        return q_rule(self.N, self.q_mode, self.p)

    @property
    def sigma_normalization(self) -> SigmaMode:
        if self.sigma_mode == SigmaMode.KNOWN:
            return SigmaMode.known(self.sigma)
        return SigmaMode.estimated()

    def alternative_params(self) -> AlternativeParams:
        return AlternativeParams(p=self.p, N=self.N, s=self.s, r=self.r, min_sep=self.min_sep)

    def to_document(self) -> str:
        """Documento JSON con los nombres de campo exactos y la versión"""
        document = asdict(self)
        document["q_mode"] = self.q_mode.value
        document["statistic_form"] = self.statistic_form.value
        document["version"] = code_version()
        return json.dumps(document, indent=2, sort_keys=False)

    @classmethod
    def from_document(cls, text: str) -> "ExperimentConfig":
        try:
            document = json.loads(text)
        except json.JSONDecodeError as e:
            raise DomainError(f"Documento de experimento inválido: {e}") from e
        document.pop("version", None)
        return cls(**document)


@dataclass(frozen=True, eq=False)
class CalibrationResult:
    """Umbral calibrado por Monte Carlo y muestras nulas de HC*"""

    N: int
    q: int
    form: StatisticForm
    level: float
    threshold: float
    null_samples: np.ndarray
    trials: int
    master_seed: int
    undefined_trials: int = 0

    def to_record(self) -> Dict:
        return {
            "N": self.N,
            "q": self.q,
            "form": StatisticForm(self.form).value,
            "level": self.level,
            "threshold": self.threshold,
            "trials": self.trials,
            "seed": self.master_seed,
            "version": code_version(),
        }


@dataclass(frozen=True, eq=False)
class PowerRow:
    """Fila de la tabla de potencias"""

    q: int
    q_mode: str
    sigma_mode: str
    trials: int
    rejections: int
    power: float
    threshold: float
    hc_samples: np.ndarray = field(default_factory=lambda: np.empty(0))
    undefined_trials: int = 0

    def __post_init__(self):
        if not 0 <= self.rejections <= self.trials:
            raise DomainError(f"rechazos ({self.rejections}) fuera de [0, {self.trials}]")

    def to_record(self) -> Dict:
        return {
            "q": self.q,
            "q_mode": self.q_mode,
            "sigma_mode": self.sigma_mode,
            "trials": self.trials,
            "rejections": self.rejections,
            "power": self.power,
            "threshold": self.threshold,
        }


@dataclass(frozen=True, eq=False)
class Histogram:
    """Histograma de HC* con bordes compartidos por todas las series"""

    q: int
    edges: np.ndarray
    counts: Dict[str, np.ndarray]

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame({
            "q": self.q,
            "bin_left": self.edges[:-1],
            "bin_right": self.edges[1:],
        })
        for name, values in self.counts.items():
            frame[name] = values
        return frame


@dataclass(frozen=True, eq=False)
class PowerTable:
    """Resultado agregado de la comparación entre reglas de q"""

    config: ExperimentConfig
    rows: List[PowerRow]
    histograms: List[Histogram]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([row.to_record() for row in self.rows], columns=POWER_COLUMNS)

    def histogram_frame(self) -> pd.DataFrame:
        if not self.histograms:
            return pd.DataFrame(columns=["q", "bin_left", "bin_right"])
        return pd.concat([histogram.to_frame() for histogram in self.histograms], ignore_index=True)

    def power_of(self, q_mode, sigma_mode: str) -> float:
        q_mode = QMode(q_mode)
        for row in self.rows:
            if row.q_mode == q_mode.value and row.sigma_mode == sigma_mode:
                return row.power
        raise KeyError(f"No hay fila para q_mode={q_mode.value}, sigma_mode={sigma_mode}")


def empirical_pvalue(observed: float, null_samples: Sequence[float]) -> float:
    """
    p-valor de Monte Carlo (1 + #{nulas >= observado}) / (B + 1)

    Raises:
        DomainError: si no hay muestras nulas
    """
    samples = np.asarray(null_samples, dtype=float).reshape(-1)
    if samples.size == 0:
        raise DomainError("empirical_pvalue requiere al menos una muestra nula")
    return (1.0 + np.count_nonzero(samples >= observed)) / (samples.size + 1.0)


def order_statistic_threshold(samples: Sequence[float], level: float) -> float:
    """Cuantil empírico (1 - level): el estadístico de orden ⌈(1 - level) B⌉"""
    require(validate_probability_level(level))
    ordered = np.sort(np.asarray(samples, dtype=float))
    if ordered.size == 0:
        raise DomainError("No hay muestras para calcular el cuantil")
    rank = math.ceil(round((1.0 - level) * ordered.size, 9))
    rank = min(max(rank, 1), ordered.size)
    return float(ordered[rank - 1])


def build_histograms(q: int, samples_by_name: Dict[str, np.ndarray], bins: Optional[int] = None) -> Histogram:
    """
    Histograma de bins iguales sobre el rango conjunto de todas las series

    Args:
        q (int): Largo de la transformada de la celda
        samples_by_name (Dict[str, np.ndarray]): Series de HC* por nombre
        bins (int): Cantidad de bins (Settings.HISTOGRAM_BINS)

    Returns:
        Histogram: Bordes y conteos por serie
    """
    bins = Settings.HISTOGRAM_BINS if bins is None else int(bins)
    require(validate_positive_int(bins, "bins"))

    arrays = [np.asarray(values, dtype=float) for values in samples_by_name.values()]
    pooled = np.concatenate(arrays) if arrays else np.empty(0)
    if pooled.size == 0:
        low, high = 0.0, 1.0
    else:
        low, high = float(pooled.min()), float(pooled.max())
    if low == high:
        low, high = low - 0.5, high + 0.5

    edges = np.linspace(low, high, bins + 1)
    counts = {
        name: np.histogram(np.asarray(values, dtype=float), bins=edges)[0]
        for name, values in samples_by_name.items()
    }
    return Histogram(q=int(q), edges=edges, counts=counts)


def _null_trial(index: int, N: int, q: int, form: StatisticForm, master_seed: int, label: str,
                sigma_mode: SigmaMode) -> Tuple[int, float]:
    handle = RngHandle(master_seed, index, label)
    y = synthesize(SparseSpectrum.null(N), N, 1.0, handle)
    try:
        return index, ophc_statistic(y, q, sigma_mode, form).hc_star
    except UndefinedStatisticError:
        return index, math.nan


def _alternative_trial(index: int, config: ExperimentConfig, q: int, label: str,
                       fixed: Optional[SparseSpectrum]) -> Tuple[int, float]:
    handle = RngHandle(config.master_seed, POWER_STREAM_OFFSET + index, label)
    spectrum = fixed
    if spectrum is None:
        spectrum = make_alternative(config.alternative_params(), handle.substream(SPECTRUM_STREAM))
    y = synthesize(spectrum, config.N, config.sigma, handle)
    try:
        return index, ophc_statistic(y, q, config.sigma_normalization, config.statistic_form).hc_star
    except UndefinedStatisticError:
        return index, math.nan


def run_trials(trial: Callable[[int], Tuple[int, float]], indices: Iterable[int],
               workers: Optional[int] = None) -> np.ndarray:
    """
    Ejecuta ensayos independientes y devuelve sus valores ordenados por índice

    Cada ensayo depende sólo de su índice, así que el resultado no cambia
    con la cantidad de procesos ni con el orden de ejecución.
    """
    indices = list(indices)
    workers = Settings.WORKERS if workers is None else int(workers)

    if workers <= 1 or len(indices) < 2:
        results = [trial(index) for index in indices]
    else:
        chunksize = max(1, len(indices) // (4 * workers))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(trial, indices, chunksize=chunksize))

    results.sort(key=itemgetter(0))
    return np.array([value for _, value in results], dtype=float)


def _drop_undefined(values: np.ndarray, allow_undefined: bool, context: str) -> Tuple[np.ndarray, int]:
    undefined = np.flatnonzero(np.isnan(values))
    if undefined.size and not allow_undefined:
        preview = ", ".join(str(i) for i in undefined[:10])
        raise ExperimentError(
            f"{context}: {undefined.size} ensayos con HC* indefinido (índices: {preview})",
            failures=[f"{context}: ensayo {i}" for i in undefined],
        )
    if undefined.size:
        mc_logger.warning(f"{context}: se excluyen {undefined.size} ensayos con HC* indefinido")
    return values[~np.isnan(values)], int(undefined.size)


def _calibration_label(N: int, q: int, form: StatisticForm, sigma_mode: SigmaMode, base: str) -> str:
    return f"{base}|N={N}|q={q}|form={form.value}|sigma={sigma_mode}"


@logs_failures
def calibrate_null(N: int, q: int, statistic_form=StatisticForm.PVALUE, trials: Optional[int] = None,
                   level: Optional[float] = None, master_seed: Optional[int] = None,
                   sigma_mode: Optional[SigmaMode] = None, workers: Optional[int] = None,
                   allow_undefined: bool = False) -> CalibrationResult:
    """
    Calibra el umbral del test simulando B series nulas (σ = 1)

    El ensayo t usa el índice de flujo t, por lo que el resultado no depende
    del orden de evaluación.

    Args:
        N (int): Largo de la serie
        q (int): Largo de la transformada
        statistic_form (StatisticForm): interval o pvalue
        trials (int): B, cantidad de ensayos nulos
        level (float): Nivel del test
        master_seed (int): Semilla maestra
        sigma_mode (SigmaMode): Normalización usada (por defecto σ = 1 conocido)
        workers (int): Procesos paralelos (Settings.WORKERS)
        allow_undefined (bool): Excluir ensayos indefinidos en lugar de abortar

    Returns:
        CalibrationResult: Umbral (estadístico de orden ⌈(1-level)B⌉) y muestras
    """
    trials = Settings.DEFAULT_TRIALS if trials is None else trials
    level = Settings.DEFAULT_LEVEL if level is None else level
    master_seed = Settings.DEFAULT_SEED if master_seed is None else master_seed
    sigma_mode = SigmaMode.known(1.0) if sigma_mode is None else sigma_mode
    form = StatisticForm(statistic_form)

    require(validate_positive_int(N, "N", minimum=2))
    require(validate_positive_int(q, "q"))
    require(validate_positive_int(trials, "trials"))
    require(validate_probability_level(level))

    if trials < 20.0 / level:
        mc_logger.warning(
            f"Resolución gruesa del cuantil: B = {trials} < 20/level = {20.0 / level:.0f}"
        )

    label = _calibration_label(N, q, form, sigma_mode, CALIBRATION_LABEL)
    trial = partial(_null_trial, N=N, q=q, form=form, master_seed=master_seed, label=label,
                    sigma_mode=sigma_mode)
    values = run_trials(trial, range(trials), workers)
    samples, undefined = _drop_undefined(values, allow_undefined, f"calibración q={q}")
    if samples.size == 0:
        raise ExperimentError(f"calibración q={q}: ningún ensayo produjo un HC* definido")
    threshold = order_statistic_threshold(samples, level)

    log_experiment("CALIBRACION_NULA", master_seed, {
        "N": N, "q": q, "form": form.value, "trials": trials, "level": level,
        "threshold": round(threshold, 6), "undefined": undefined,
    })

    return CalibrationResult(
        N=N, q=q, form=form, level=level, threshold=threshold, null_samples=samples,
        trials=trials, master_seed=master_seed, undefined_trials=undefined,
    )


def null_rejection_rate(N: int, q: int, threshold: float, statistic_form=StatisticForm.PVALUE,
                        trials: Optional[int] = None, master_seed: Optional[int] = None,
                        sigma_mode: Optional[SigmaMode] = None, workers: Optional[int] = None) -> float:
    """Tasa de rechazo de un lote nulo nuevo, disjunto de la calibración"""
    trials = Settings.DEFAULT_TRIALS if trials is None else trials
    master_seed = Settings.DEFAULT_SEED if master_seed is None else master_seed
    sigma_mode = SigmaMode.known(1.0) if sigma_mode is None else sigma_mode
    form = StatisticForm(statistic_form)

    label = _calibration_label(N, q, form, sigma_mode, FRESH_NULL_LABEL)
    trial = partial(_null_trial, N=N, q=q, form=form, master_seed=master_seed, label=label,
                    sigma_mode=sigma_mode)
    values, _ = _drop_undefined(run_trials(trial, range(trials), workers), False, f"nula nueva q={q}")
    return float(np.count_nonzero(values > threshold)) / values.size


@logs_failures
def estimate_power(config: ExperimentConfig, threshold: float, workers: Optional[int] = None,
                   allow_undefined: bool = False) -> PowerRow:
    """
    Estima la potencia del test contra alternativas aleatorias

    En cada ensayo se sortean soporte, fases y ruido nuevos; en modo
    fixed_spectrum el espectro se sortea una sola vez.

    Args:
        config (ExperimentConfig): Experimento (q, σ, forma, B, semilla)
        threshold (float): Umbral calibrado para (N, q, forma)
        workers (int): Procesos paralelos

    Returns:
        PowerRow: Rechazos, potencia y muestras de HC* bajo la alternativa
    """
    q = config.resolved_q
    label = (f"{POWER_LABEL}|p={config.p}|N={config.N}|s={config.s}|r={config.r!r}|q={q}"
             f"|sigma={config.sigma_mode}|form={config.statistic_form.value}")

    fixed = None
    if config.fixed_spectrum:
        fixed = make_alternative(config.alternative_params(), RngHandle(config.master_seed, 0, FIXED_SPECTRUM_LABEL))

    trial = partial(_alternative_trial, config=config, q=q, label=label, fixed=fixed)
    values = run_trials(trial, range(config.trials), workers)
    samples, undefined = _drop_undefined(values, allow_undefined, f"potencia q={q} sigma={config.sigma_mode}")
    if samples.size == 0:
        raise ExperimentError(f"potencia q={q}: ningún ensayo produjo un HC* definido")

    rejections = int(np.count_nonzero(samples > threshold))
    power = rejections / samples.size

    mc_logger.info(
        f"Potencia q={q} ({config.q_mode.value}), sigma={config.sigma_mode}: "
        f"{rejections}/{samples.size} = {power:.3f}"
    )

    return PowerRow(
        q=q, q_mode=config.q_mode.value, sigma_mode=config.sigma_mode, trials=int(samples.size),
        rejections=rejections, power=power, threshold=float(threshold), hc_samples=samples,
        undefined_trials=undefined,
    )


def compare_q_modes(base_config: ExperimentConfig, q_modes: Optional[Sequence] = None,
                    sigma_modes: Optional[Sequence[str]] = None, workers: Optional[int] = None) -> PowerTable:
    """
    Compara potencias entre reglas de q y modos de σ

    Por cada q se calibra una vez (σ = 1 conocido) y ese umbral se usa para
    los dos modos de σ; las alternativas se sortean de nuevo en cada celda.

    Args:
        base_config (ExperimentConfig): Parámetros comunes (p, N, s, r, B, ...)
        q_modes (Sequence[QMode]): Reglas a comparar (simulation, standard, full)
        sigma_modes (Sequence[str]): known y/o estimated
        workers (int): Procesos paralelos

    Returns:
        PowerTable: Una fila por (q, σ) e histogramas por q

    Raises:
        ExperimentError: si alguna celda falla (la tabla parcial va en .partial)
    """
    q_modes = [QMode(mode) for mode in (q_modes or DEFAULT_Q_MODES)]
    sigma_modes = list(sigma_modes or SIGMA_MODES)
    rows: List[PowerRow] = []
    histograms: List[Histogram] = []
    failures: List[str] = []

    for q_mode in q_modes:
        cell_config = replace(base_config, q_mode=q_mode, q=None)
        try:
            q = cell_config.resolved_q
            calibration = calibrate_null(
                base_config.N, q, base_config.statistic_form, base_config.trials, base_config.level,
                base_config.master_seed, SigmaMode.known(1.0), workers,
            )
        except OphcError as e:
            failures.append(f"q_mode={q_mode.value}: {e}")
            continue

        samples = {"null": calibration.null_samples}
        for sigma_mode in sigma_modes:
            try:
                row = estimate_power(replace(cell_config, sigma_mode=sigma_mode), calibration.threshold, workers)
            except OphcError as e:
                failures.append(f"q_mode={q_mode.value}, sigma_mode={sigma_mode}: {e}")
                continue
            rows.append(row)
            samples[sigma_mode] = row.hc_samples

        histograms.append(build_histograms(q, samples))

    table = PowerTable(config=base_config, rows=rows, histograms=histograms)

    log_experiment("COMPARACION_Q", base_config.master_seed, {
        "cells": len(rows), "failures": len(failures),
        "powers": {f"{row.q_mode}/{row.sigma_mode}": round(row.power, 3) for row in rows},
    })

    if failures:
        raise ExperimentError(f"{len(failures)} celdas fallaron", failures=failures, partial=table)
    return table
