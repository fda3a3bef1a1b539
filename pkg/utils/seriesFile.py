import math
import os
from typing import Dict, Tuple

import numpy as np
import pandas as pd

from services.coreMath import ComplexSeries
from services.statsErrors import SeriesFormatError
from utils.helpers import float_format


class SeriesFile:
    """Lectura y escritura de los archivos del toolkit (series, registros, tablas)"""

    # Columnas requeridas en el CSV de series
    REQUIRED_COLUMNS = ['index', 're', 'im']

    # Columna de las muestras nulas de HC*
    SAMPLES_COLUMN = 'hc_star'

    @classmethod
    def validate_file(cls, file_path: str) -> Tuple[bool, str, pd.DataFrame]:
        """
        Valida un archivo de serie "index,re,im"

        Args:
            file_path (str): Ruta del archivo a validar

        Returns:
            Tuple[bool, str, pd.DataFrame]: (es_válido, mensaje, dataframe con re/im numéricos)
        """
        try:
            df = cls._read_text_frame(file_path)
        except SeriesFormatError as e:
            return False, str(e), None

        if df.empty:
            return False, "El archivo está vacío.", None

        is_valid, message = cls._validate_columns(df)
        if not is_valid:
            return False, message, None

        try:
            parsed = pd.DataFrame({
                'index': cls._parse_column(df['index'], int, 'index'),
                're': cls._parse_column(df['re'], float, 're'),
                'im': cls._parse_column(df['im'], float, 'im'),
            })
        except SeriesFormatError as e:
            return False, str(e), None

        is_valid, message = cls._validate_indices(parsed['index'].to_numpy())
        if not is_valid:
            return False, message, None

        return True, f"Serie válida. {len(parsed)} muestras.", parsed

    @classmethod
    def read(cls, file_path: str) -> ComplexSeries:
        """
        Lee una serie compleja

        Raises:
            SeriesFormatError: si el archivo no es una serie válida
        """
        is_valid, message, df = cls.validate_file(file_path)
        if not is_valid:
            raise SeriesFormatError(f"{file_path}: {message}")

        return ComplexSeries(df['re'].to_numpy() + 1j * df['im'].to_numpy())

    @classmethod
    def write(cls, file_path: str, series: ComplexSeries) -> None:
        """Escribe una serie con precisión suficiente para releerla bit a bit"""
        samples = series.samples
        df = pd.DataFrame({
            'index': np.arange(1, samples.size + 1),
            're': samples.real,
            'im': samples.imag,
        })
        cls.write_frame(file_path, df)

    @classmethod
    def read_real_column(cls, file_path: str) -> np.ndarray:
        """
        Lee una columna de reales (con o sin encabezado)

        Raises:
            SeriesFormatError: si está vacía o alguna fila no es numérica
        """
        df = cls._read_text_frame(file_path, header=None)
        if df.empty:
            raise SeriesFormatError(f"{file_path}: el archivo está vacío")
        if df.shape[1] != 1:
            raise SeriesFormatError(f"{file_path}: se esperaba una sola columna (hay {df.shape[1]})")

        column = df.iloc[:, 0]
        first_row = 1
        try:
            float(column.iloc[0])
        except ValueError:
            # Encabezado
            column = column.iloc[1:]
            first_row = 2

        values = cls._parse_column(column.reset_index(drop=True), float, 'valor', first_row=first_row)
        if values.size == 0:
            raise SeriesFormatError(f"{file_path}: el archivo no tiene valores")
        return values

    @classmethod
    def write_frame(cls, file_path: str, df: pd.DataFrame) -> None:
        """Escribe una tabla CSV con el formato de flotantes del toolkit"""
        cls._ensure_parent(file_path)
        df.to_csv(file_path, index=False, float_format=float_format())

    @classmethod
    def write_record(cls, file_path: str, record: Dict) -> None:
        """Escribe un registro key=value (una clave por línea)"""
        cls._ensure_parent(file_path)
        with open(file_path, "w", encoding="utf-8") as handle:
            handle.write(cls.format_record(record))

    @classmethod
    def format_record(cls, record: Dict) -> str:
        lines = []
        for key, value in record.items():
            if isinstance(value, float):
                value = float_format() % value
            lines.append(f"{key}={value}")
        return "\n".join(lines) + "\n"

    @classmethod
    def read_record(cls, file_path: str) -> Dict[str, str]:
        """
        Lee un registro key=value

        Raises:
            SeriesFormatError: si alguna línea no tiene la forma key=value
        """
        record = {}
        with open(file_path, "r", encoding="utf-8") as handle:
            for row, line in enumerate(handle, start=1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise SeriesFormatError(f"{file_path}: se esperaba key=value", row=row)
                key, value = line.split("=", 1)
                record[key.strip()] = value.strip()
        return record

    @classmethod
    def write_samples(cls, file_path: str, samples: np.ndarray) -> None:
        """Escribe las muestras nulas de HC* (una por fila)"""
        cls.write_frame(file_path, pd.DataFrame({cls.SAMPLES_COLUMN: np.asarray(samples, dtype=float)}))

    @classmethod
    def read_samples(cls, file_path: str) -> np.ndarray:
        """Lee un archivo de muestras nulas escrito por write_samples"""
        df = cls._read_text_frame(file_path)
        if cls.SAMPLES_COLUMN not in df.columns:
            raise SeriesFormatError(f"{file_path}: falta la columna '{cls.SAMPLES_COLUMN}'")
        values = cls._parse_column(df[cls.SAMPLES_COLUMN], float, cls.SAMPLES_COLUMN)
        if values.size == 0:
            raise SeriesFormatError(f"{file_path}: no hay muestras nulas")
        return values

    @classmethod
    def _read_text_frame(cls, file_path: str, header="infer") -> pd.DataFrame:
        try:
            return pd.read_csv(file_path, dtype=str, keep_default_na=False, header=header)
        except pd.errors.EmptyDataError:
            raise SeriesFormatError(f"{file_path}: el archivo está vacío")
        except pd.errors.ParserError as e:
            raise SeriesFormatError(f"{file_path}: CSV mal formado ({e})")

    @classmethod
    def _validate_columns(cls, df: pd.DataFrame) -> Tuple[bool, str]:
        """Valida que las columnas sean exactamente index,re,im"""
        columns = [str(col).strip() for col in df.columns]
        if columns != cls.REQUIRED_COLUMNS:
            return False, f"Encabezado inválido: se esperaba {','.join(cls.REQUIRED_COLUMNS)} y se encontró {','.join(columns)}"
        return True, "Columnas correctas"

    @classmethod
    def _parse_column(cls, column: pd.Series, cast, name: str, first_row: int = 2) -> np.ndarray:
        """
        Convierte una columna de texto celda por celda

        float() de Python redondea correctamente, así que los valores escritos
        con 17 dígitos significativos se recuperan bit a bit. El número de
        fila reportado es la línea del archivo.
        """
        values = []
        for position, text in enumerate(column.tolist()):
            try:
                value = cast(str(text).strip())
            except ValueError:
                raise SeriesFormatError(f"valor inválido en '{name}': {text!r}", row=position + first_row)
            if cast is float and not math.isfinite(value):
                raise SeriesFormatError(f"valor no finito en '{name}': {text!r}", row=position + first_row)
            values.append(value)
        return np.array(values, dtype=float if cast is float else np.int64)

    @classmethod
    def _validate_indices(cls, indices: np.ndarray) -> Tuple[bool, str]:
        """Valida que los índices sean contiguos desde 1"""
        expected = np.arange(1, indices.size + 1)
        mismatch = np.flatnonzero(indices != expected)
        if mismatch.size:
            first = int(mismatch[0])
            return False, f"Fila {first + 2}: índice {indices[first]} (se esperaba {first + 1})"
        return True, "Índices contiguos"

    @staticmethod
    def _ensure_parent(file_path: str) -> None:
        parent = os.path.dirname(os.path.abspath(file_path))
        os.makedirs(parent, exist_ok=True)
