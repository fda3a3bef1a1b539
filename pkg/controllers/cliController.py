import argparse
import json
import sys
from typing import List, Optional

from config.settings import Settings
from services.boundary import alpha_grid, boundary_table
from services.coreMath import RngHandle
from services.hcTest import SigmaMode, StatisticForm, estimate_sigma, ophc_test, theoretical_threshold
from services.monteCarlo import (
    DEFAULT_Q_MODES,
    SIGMA_MODES,
    SPECTRUM_STREAM,
    ExperimentConfig,
    build_histograms,
    calibrate_null,
    compare_q_modes,
    empirical_pvalue,
)
from services.periodogram import QMode, oversampled_transform, periodogram_to_frame, q_rule
from services.signalModel import (
    AlternativeParams,
    complexify,
    make_alternative,
    spectrum_to_record,
    synthesize,
)
from services.statsErrors import DomainError, ExperimentError, OphcError
from utils.helpers import sibling_path
from utils.logger import LoggerSetup, log_experiment
from utils.seriesFile import SeriesFile


EXIT_ACCEPT = 0
EXIT_OK = 0
EXIT_REJECT = 1
EXIT_ERROR = 2

cli_logger = LoggerSetup.get_logger("cli")


class _ArgumentParser(argparse.ArgumentParser):
    """ArgumentParser que señala los errores de uso con código 2 sin salir del proceso"""

    def error(self, message):
        raise DomainError(f"{self.prog}: {message}")


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"se esperaba un entero positivo (recibido {text})")
    return value


def _q_mode_list(text: str) -> List[QMode]:
    try:
        return [QMode(item.strip()) for item in text.split(",") if item.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e))


def _sigma_mode_list(text: str) -> List[str]:
    modes = [item.strip() for item in text.split(",") if item.strip()]
    unknown = [mode for mode in modes if mode not in SIGMA_MODES]
    if unknown:
        raise argparse.ArgumentTypeError(f"modos de sigma desconocidos: {', '.join(unknown)}")
    return modes


class CliController:
    """Controlador de la línea de comandos: un sub-comando por operación"""

    def __init__(self):
        self.parser = self.build_parser()

    def build_parser(self) -> argparse.ArgumentParser:
        parser = _ArgumentParser(
            prog=Settings.APP_NAME,
            description="Test OPHC de componentes periódicas dispersas en series complejas",
        )
        commands = parser.add_subparsers(dest="command", parser_class=_ArgumentParser)
        commands.required = True

        test = commands.add_parser("test", help="Aplica el test OPHC a un archivo de serie")
        test.add_argument("series", help="Archivo index,re,im")
        self._add_q_arguments(test)
        test.add_argument("--p", type=_positive_int, help="Tamaño de la grilla (modo full)")
        test.add_argument("--sigma", default="known:1", help="known:VALOR o estimated")
        test.add_argument("--form", choices=[f.value for f in StatisticForm], default=None)
        source = test.add_mutually_exclusive_group(required=True)
        source.add_argument("--threshold", type=float, help="Umbral explícito")
        source.add_argument("--threshold-file", help="Registro escrito por calibrate")
        source.add_argument("--theory-threshold", action="store_true", help="Usa T = ln²N")
        test.add_argument("--null-samples", help="Muestras nulas para el p-valor empírico")
        test.set_defaults(handler=self.cmd_test)

        calibrate = commands.add_parser("calibrate", help="Calibra el umbral por Monte Carlo")
        calibrate.add_argument("--n", type=_positive_int, default=Settings.DEFAULT_N)
        self._add_q_arguments(calibrate)
        calibrate.add_argument("--p", type=_positive_int, default=Settings.DEFAULT_P)
        calibrate.add_argument("--form", choices=[f.value for f in StatisticForm], default=StatisticForm.PVALUE.value)
        calibrate.add_argument("--trials", type=_positive_int, default=Settings.DEFAULT_TRIALS)
        calibrate.add_argument("--level", type=float, default=Settings.DEFAULT_LEVEL)
        calibrate.add_argument("--seed", type=int, default=Settings.DEFAULT_SEED)
        calibrate.add_argument("--workers", type=_positive_int, default=None)
        calibrate.add_argument("--out", default=f"{Settings.OUTPUT_DIR}/calibration.txt")
        calibrate.set_defaults(handler=self.cmd_calibrate)

        power = commands.add_parser("power", help="Compara potencias entre reglas de q")
        power.add_argument("--n", type=_positive_int, default=Settings.DEFAULT_N)
        power.add_argument("--p", type=_positive_int, default=Settings.DEFAULT_P)
        power.add_argument("--s", type=int, default=Settings.DEFAULT_S)
        power.add_argument("--r", type=float, default=Settings.DEFAULT_R)
        power.add_argument("--q-modes", type=_q_mode_list, default=list(DEFAULT_Q_MODES))
        power.add_argument("--sigma-modes", type=_sigma_mode_list, default=list(SIGMA_MODES))
        power.add_argument("--form", choices=[f.value for f in StatisticForm], default=StatisticForm.PVALUE.value)
        power.add_argument("--level", type=float, default=Settings.DEFAULT_LEVEL)
        power.add_argument("--trials", type=_positive_int, default=Settings.DEFAULT_TRIALS)
        power.add_argument("--seed", type=int, default=Settings.DEFAULT_SEED)
        power.add_argument("--min-sep", type=float, default=0.0)
        power.add_argument("--fixed-spectrum", action="store_true")
        power.add_argument("--workers", type=_positive_int, default=None)
        power.add_argument("--out", default=f"{Settings.OUTPUT_DIR}/power.csv")
        power.set_defaults(handler=self.cmd_power)

        boundary = commands.add_parser("boundary", help="Curvas de frontera de detección")
        boundary.add_argument("--gamma", type=float, default=0.3)
        boundary.add_argument("--alpha-start", type=float, default=None)
        boundary.add_argument("--alpha-stop", type=float, default=0.999)
        boundary.add_argument("--alpha-step", type=float, default=0.001)
        boundary.add_argument("--out", default=None, help="CSV de salida (stdout si se omite)")
        boundary.set_defaults(handler=self.cmd_boundary)

        complexify_cmd = commands.add_parser("complexify", help="Complejifica una serie real de largo par")
        complexify_cmd.add_argument("series", help="Archivo de una columna de reales")
        complexify_cmd.add_argument("--out", required=True)
        complexify_cmd.set_defaults(handler=self.cmd_complexify)

        simulate = commands.add_parser("simulate", help="Genera una serie sintética (nula o alternativa)")
        simulate.add_argument("--n", type=_positive_int, default=Settings.DEFAULT_N)
        simulate.add_argument("--p", type=_positive_int, default=Settings.DEFAULT_P)
        simulate.add_argument("--s", type=int, default=0)
        simulate.add_argument("--r", type=float, default=Settings.DEFAULT_R)
        simulate.add_argument("--noise", type=float, default=1.0, help="Escala σ del ruido")
        simulate.add_argument("--min-sep", type=float, default=0.0)
        simulate.add_argument("--seed", type=int, default=Settings.DEFAULT_SEED)
        simulate.add_argument("--stream", type=int, default=0)
        simulate.add_argument("--out", required=True)
        simulate.set_defaults(handler=self.cmd_simulate)

        periodogram = commands.add_parser("periodogram", help="Exporta el periodograma sobre-muestreado")
        periodogram.add_argument("series", help="Archivo index,re,im")
        self._add_q_arguments(periodogram)
        periodogram.add_argument("--p", type=_positive_int, help="Tamaño de la grilla (modo full)")
        periodogram.add_argument("--sigma", default="known:1", help="known:VALOR o estimated")
        periodogram.add_argument("--out", required=True)
        periodogram.set_defaults(handler=self.cmd_periodogram)

        return parser

    @staticmethod
    def _add_q_arguments(parser: argparse.ArgumentParser) -> None:
        group = parser.add_mutually_exclusive_group()
        group.add_argument("--q", type=_positive_int, help="Largo explícito de la transformada")
        group.add_argument("--q-mode", choices=[mode.value for mode in QMode], help="Regla para q")

    @staticmethod
    def _resolve_q(args, N: int, fallback: Optional[int] = None) -> int:
        if args.q is not None:
            return args.q
        if args.q_mode is not None:
            return q_rule(N, args.q_mode, getattr(args, "p", None))
        if fallback is not None:
            return fallback
        return q_rule(N, QMode.SIMULATION)

    def dispatch(self, argv: Optional[List[str]] = None) -> int:
        """
        Ejecuta un sub-comando

        Args:
            argv (List[str]): Argumentos (sys.argv[1:] si se omite)

        Returns:
            int: Código de salida (test: 0 acepta, 1 rechaza; 2 error)
        """
        try:
            args = self.parser.parse_args(argv)
            return args.handler(args)
        except ExperimentError as e:
            for failure in e.failures[:10]:
                cli_logger.error(f"  {failure}")
            return self._fail(e)
        except (OphcError, OSError, ValueError) as e:
            return self._fail(e)

    @staticmethod
    def _fail(error: Exception) -> int:
        cli_logger.error(str(error))
        print(f"error: {error}", file=sys.stderr)
        return EXIT_ERROR

    def cmd_test(self, args) -> int:
        """Aplica el test a una serie; 0 acepta, 1 rechaza"""
        series = SeriesFile.read(args.series)
        N = series.length

        record = {}
        if args.threshold_file:
            record = SeriesFile.read_record(args.threshold_file)
            if "threshold" not in record:
                raise DomainError(f"{args.threshold_file}: falta la clave 'threshold'")
            if "N" in record and int(record["N"]) != N:
                cli_logger.warning(
                    f"El umbral fue calibrado con N = {record['N']} y la serie tiene N = {N}"
                )

        q = self._resolve_q(args, N, int(record["q"]) if "q" in record else None)
        form = StatisticForm(args.form or record.get("form", StatisticForm.PVALUE.value))
        if record and "q" in record and int(record["q"]) != q:
            cli_logger.warning(f"El umbral fue calibrado con q = {record['q']} y se usa q = {q}")

        if args.threshold is not None:
            threshold = args.threshold
        elif record:
            threshold = float(record["threshold"])
        else:
            threshold = theoretical_threshold(N)

        result = ophc_test(series, q, SigmaMode.parse(args.sigma), form, threshold=threshold)

        if args.null_samples:
            null_samples = SeriesFile.read_samples(args.null_samples)
            result = result.with_empirical_pvalue(empirical_pvalue(result.hc_star, null_samples))

        print(SeriesFile.format_record(result.to_record()), end="")
        cli_logger.info(
            f"Test OPHC: HC* = {result.hc_star:.4f}, umbral = {result.threshold_used:.4f}, "
            f"{'rechaza' if result.reject else 'acepta'} H0"
        )
        return EXIT_REJECT if result.reject else EXIT_ACCEPT

    def cmd_calibrate(self, args) -> int:
        """Calibra el umbral nulo y escribe registro, histograma y muestras"""
        q = self._resolve_q(args, args.n)
        calibration = calibrate_null(
            args.n, q, args.form, args.trials, args.level, args.seed, workers=args.workers,
        )

        record = calibration.to_record()
        SeriesFile.write_record(args.out, record)
        SeriesFile.write_frame(
            sibling_path(args.out, ".hist.csv"),
            build_histograms(q, {"null": calibration.null_samples}).to_frame(),
        )
        SeriesFile.write_samples(sibling_path(args.out, ".samples.csv"), calibration.null_samples)

        print(SeriesFile.format_record(record), end="")
        return EXIT_OK

    def cmd_power(self, args) -> int:
        """Tabla de potencias por (q, σ) con histogramas y documento del experimento"""
        config = ExperimentConfig(
            p=args.p, N=args.n, s=args.s, r=args.r, statistic_form=args.form, trials=args.trials,
            level=args.level, master_seed=args.seed, min_sep=args.min_sep, fixed_spectrum=args.fixed_spectrum,
        )
        table = compare_q_modes(config, args.q_modes, args.sigma_modes, workers=args.workers)

        frame = table.to_frame()
        SeriesFile.write_frame(args.out, frame)
        SeriesFile.write_frame(sibling_path(args.out, ".hist.csv"), table.histogram_frame())
        with open(sibling_path(args.out, ".config.json"), "w", encoding="utf-8") as handle:
            handle.write(config.to_document())

        print(frame.to_csv(index=False), end="")
        return EXIT_OK

    def cmd_boundary(self, args) -> int:
        """CSV (alpha, rho_star, rho_star_gamma) sobre una grilla de α"""
        start = args.alpha_start
        if start is None:
            start = max((1.0 + args.gamma) / 2.0, 0.5) + args.alpha_step
        table = boundary_table(args.gamma, alpha_grid(start, args.alpha_stop, args.alpha_step))

        if args.out:
            SeriesFile.write_frame(args.out, table)
        else:
            print(table.to_csv(index=False), end="")
        return EXIT_OK

    def cmd_complexify(self, args) -> int:
        """Convierte una serie real de largo 2n en una compleja de largo n"""
        series = complexify(SeriesFile.read_real_column(args.series))
        SeriesFile.write(args.out, series)
        cli_logger.info(f"Serie complejificada: {series.length} muestras en {args.out}")
        return EXIT_OK

    def cmd_simulate(self, args) -> int:
        """Escribe una serie sintética y el registro JSON de su espectro"""
        params = AlternativeParams(p=args.p, N=args.n, s=args.s, r=args.r, min_sep=args.min_sep)
        handle = RngHandle(args.seed, args.stream, "simulate")
        spectrum = make_alternative(params, handle.substream(SPECTRUM_STREAM))
        series = synthesize(spectrum, args.n, args.noise, handle)

        SeriesFile.write(args.out, series)
        with open(sibling_path(args.out, ".spectrum.json"), "w", encoding="utf-8") as out:
            json.dump(spectrum_to_record(spectrum), out)

        log_experiment("SIMULACION", args.seed, {"N": args.n, "p": args.p, "s": spectrum.s, "r": args.r})
        return EXIT_OK

    def cmd_periodogram(self, args) -> int:
        """Exporta (m, re_v, im_v, I) de la serie normalizada"""
        series = SeriesFile.read(args.series)
        q = self._resolve_q(args, series.length)
        sigma_mode = SigmaMode.parse(args.sigma)
        sigma = sigma_mode.value if sigma_mode.is_known else None
        if sigma is None:
            sigma = estimate_sigma(series)

        periodogram = oversampled_transform(series.scaled(1.0 / sigma), q)
        SeriesFile.write_frame(args.out, periodogram_to_frame(periodogram))
        return EXIT_OK
