import os
import sys

from loguru import logger

from config.settings import Settings
from utils.helpers import code_version


CONSOLE_FORMAT = (
    "<green>{time:HH:mm:ss}</green> | "
    "<level>{level: <8}</level> | "
    "<cyan>{extra[component]}</cyan> | "
    "<level>{message}</level>"
)

FILE_FORMAT = (
    "{time:YYYY-MM-DD HH:mm:ss.SSS} | {level: <8} | {extra[component]} | "
    "{name}:{function}:{line} | {message}"
)


class LoggerSetup:
    """Sinks de loguru para la línea de comandos y las corridas de Monte Carlo"""

    _configured = False

    @classmethod
    def setup(cls):
        """Configura los sinks una sola vez por proceso"""
        if cls._configured:
            return

        logger.remove()
        logger.configure(extra={"component": Settings.APP_NAME})

        # stdout queda reservado para los registros de los comandos
        logger.add(sys.stderr, colorize=True, format=CONSOLE_FORMAT, level=Settings.LOG_LEVEL)

        if Settings.LOG_TO_FILE:
            os.makedirs(os.path.dirname(Settings.LOG_FILE_PATH) or ".", exist_ok=True)

            logger.add(
                Settings.LOG_FILE_PATH,
                rotation=Settings.LOG_MAX_SIZE,
                retention=Settings.LOG_BACKUP_COUNT,
                compression="zip",
                format=FILE_FORMAT,
                level="DEBUG",
                encoding="utf-8",
                enqueue=True
            )

            # Fallos de ensayos y comandos
            logger.add(
                os.path.join(Settings.LOGS_DIR, "errors.log"),
                rotation="1 week",
                retention="1 month",
                format=FILE_FORMAT,
                level="ERROR",
                backtrace=Settings.is_development(),
                diagnose=Settings.is_development(),
                encoding="utf-8",
                enqueue=True
            )

        cls._configured = True
        logger.debug(f"Logging listo para {code_version()} (nivel {Settings.LOG_LEVEL})")

    @classmethod
    def get_logger(cls, component: str = None):
        """
        Logger ligado a un componente del toolkit

        Args:
            component (str): Nombre corto que aparece en cada línea (cli, montecarlo, ...)

        Returns:
            Logger: Instancia de loguru con el campo extra 'component'
        """
        if not cls._configured:
            cls.setup()

        return logger.bind(component=component or Settings.APP_NAME)


app_logger = LoggerSetup.get_logger()


def log_experiment(action: str, seed: int, details: dict):
    """
    Estampa una corrida con su semilla maestra y la versión del código

    Args:
        action (str): Operación ejecutada (CALIBRACION_NULA, COMPARACION_Q, SIMULACION)
        seed (int): Semilla maestra de la corrida
        details (dict): Parámetros que identifican la corrida
    """
    app_logger.bind(component="experimento").info(
        f"{action} | semilla={seed} | version={code_version()} | {details}"
    )
