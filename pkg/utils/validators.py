import math
from typing import Sequence, Tuple


def validate_positive_int(value, name: str, minimum: int = 1) -> Tuple[bool, str]:
    """
    Valida que un valor sea un entero mayor o igual a un mínimo

    Args:
        value: Valor a validar
        name (str): Nombre del parámetro (para el mensaje)
        minimum (int): Valor mínimo permitido

    Returns:
        Tuple[bool, str]: (es_válido, mensaje_error)
    """
    if isinstance(value, bool):
        return False, f"{name} debe ser un entero"

    try:
        as_int = int(value)
    except (TypeError, ValueError):
        return False, f"{name} debe ser un entero"

    if as_int != value:
        return False, f"{name} debe ser un entero (recibido {value})"

    if as_int < minimum:
        return False, f"{name} debe ser >= {minimum} (recibido {value})"

    return True, f"{name} válido"


def validate_positive_real(value, name: str, allow_zero: bool = False) -> Tuple[bool, str]:
    """
    Valida que un valor sea un real finito positivo (o no negativo)

    Args:
        value: Valor a validar
        name (str): Nombre del parámetro
        allow_zero (bool): Si True, acepta el cero

    Returns:
        Tuple[bool, str]: (es_válido, mensaje_error)
    """
    try:
        as_float = float(value)
    except (TypeError, ValueError):
        return False, f"{name} debe ser numérico"

    if not math.isfinite(as_float):
        return False, f"{name} debe ser finito"

    if allow_zero and as_float < 0:
        return False, f"{name} no puede ser negativo (recibido {value})"

    if not allow_zero and as_float <= 0:
        return False, f"{name} debe ser positivo (recibido {value})"

    return True, f"{name} válido"


def validate_unit_interval(value, name: str) -> Tuple[bool, str]:
    """Valida que un valor esté en el intervalo cerrado [0, 1]"""
    try:
        as_float = float(value)
    except (TypeError, ValueError):
        return False, f"{name} debe ser numérico"

    if not 0.0 <= as_float <= 1.0:
        return False, f"{name} debe estar en [0, 1] (recibido {value})"

    return True, f"{name} válido"


def validate_probability_level(level) -> Tuple[bool, str]:
    """Valida un nivel de significancia en el intervalo abierto (0, 1)"""
    try:
        as_float = float(level)
    except (TypeError, ValueError):
        return False, "El nivel debe ser numérico"

    if not 0.0 < as_float < 1.0:
        return False, f"El nivel debe estar en (0, 1) (recibido {level})"

    return True, "Nivel válido"


def validate_support(support: Sequence[int], p: int) -> Tuple[bool, str]:
    """
    Valida un soporte: índices estrictamente crecientes dentro de [1, p]

    Args:
        support (Sequence[int]): Índices 1-based
        p (int): Tamaño de la grilla

    Returns:
        Tuple[bool, str]: (es_válido, mensaje_error)
    """
    previous = 0
    for position, index in enumerate(support):
        if index < 1 or index > p:
            return False, f"El índice {index} (posición {position}) está fuera de [1, {p}]"
        if index <= previous:
            return False, f"El soporte debe ser estrictamente creciente (posición {position})"
        previous = index

    return True, "Soporte válido"


def validate_even_length(length: int) -> Tuple[bool, str]:
    """Valida que una longitud sea par y positiva"""
    if length <= 0:
        return False, "La serie real está vacía"

    if length % 2 != 0:
        return False, f"La serie real debe tener longitud par (recibido {length})"

    return True, "Longitud válida"
