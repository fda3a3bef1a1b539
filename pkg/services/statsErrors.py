from functools import wraps
from typing import Callable, List, Optional, Tuple
from utils.logger import app_logger


class OphcError(Exception):
    """Excepción base del toolkit OPHC"""
    pass


class DomainError(OphcError, ValueError):
    """Argumento fuera del dominio de la operación"""
    pass


class UndefinedStatisticError(OphcError):
    """El estadístico no está definido para los datos recibidos"""
    pass


class SamplerExhaustedError(OphcError):
    """El muestreador de soportes agotó el máximo de intentos"""
    pass


class SeriesFormatError(OphcError):
    """Archivo de entrada mal formado"""

    def __init__(self, message: str, row: Optional[int] = None):
        super().__init__(message if row is None else f"Fila {row}: {message}")
        self.row = row


class ExperimentError(OphcError):
    """Fallas agregadas de un experimento de Monte Carlo"""

    def __init__(self, message: str, failures: Optional[List[str]] = None, partial=None):
        super().__init__(message)
        self.failures = list(failures or [])
        self.partial = partial


def require(check: Tuple[bool, str]) -> None:
    """
    Convierte el resultado de un validador en una excepción

    Args:
        check (Tuple[bool, str]): (es_válido, mensaje) de utils.validators

    Raises:
        DomainError: si la validación falla
    """
    is_valid, message = check
    if not is_valid:
        raise DomainError(message)


def logs_failures(func: Callable) -> Callable:
    """
    Decorador que registra en el log las fallas del toolkit y las propaga

    Usage:
        @logs_failures
        def operacion(...):
            ...
    """
    @wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except OphcError as e:
            app_logger.error(f"{func.__name__}: {str(e)}")
            raise

    return wrapper
