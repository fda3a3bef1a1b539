import os
from config.settings import Settings


def code_version() -> str:
    """Cadena de versión con la que se estampan las salidas"""
    return f"{Settings.APP_NAME}-{Settings.APP_VERSION}"


def float_format() -> str:
    """Formato printf con los dígitos significativos de las series"""
    return f"%.{Settings.SERIES_PRECISION}g"


def sibling_path(path: str, suffix: str) -> str:
    """
    Construye una ruta hermana reemplazando la extensión

    Args:
        path (str): Ruta base (por ejemplo, salida.txt)
        suffix (str): Sufijo nuevo (por ejemplo, .hist.csv)

    Returns:
        str: Ruta con el sufijo aplicado
    """
    root, _ = os.path.splitext(path)
    return root + suffix
