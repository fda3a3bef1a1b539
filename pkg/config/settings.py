import os
from dotenv import load_dotenv


load_dotenv()


def _env_bool(name: str, default: str) -> bool:
    return os.getenv(name, default).strip().lower() in ("1", "true", "yes", "on")


class Settings:
    """Configuraciones generales del toolkit OPHC"""

    # Información de la aplicación
    APP_NAME = os.getenv("OPHC_APP_NAME", "ophc")
    APP_VERSION = os.getenv("OPHC_APP_VERSION", "1.0.0")
    ENVIRONMENT = os.getenv("OPHC_ENVIRONMENT", "development")

    # Logging
    LOG_LEVEL = os.getenv("OPHC_LOG_LEVEL", "INFO")
    LOG_TO_FILE = _env_bool("OPHC_LOG_TO_FILE", "true")
    LOG_MAX_SIZE = 10 * 1024 * 1024  # 10 MB
    LOG_BACKUP_COUNT = 5

    # Experimento por defecto (configuración de la sección de simulaciones)
    DEFAULT_N = int(os.getenv("OPHC_DEFAULT_N", "1000"))
    DEFAULT_P = int(os.getenv("OPHC_DEFAULT_P", "1000000"))
    DEFAULT_S = int(os.getenv("OPHC_DEFAULT_S", "20"))
    DEFAULT_R = float(os.getenv("OPHC_DEFAULT_R", "0.3"))
    DEFAULT_LEVEL = float(os.getenv("OPHC_DEFAULT_LEVEL", "0.05"))
    DEFAULT_TRIALS = int(os.getenv("OPHC_DEFAULT_TRIALS", "1000"))
    DEFAULT_SEED = int(os.getenv("OPHC_DEFAULT_SEED", "20150907"))

    # Rendimiento
    WORKERS = int(os.getenv("OPHC_WORKERS", "1"))
    FFT_THRESHOLD = int(os.getenv("OPHC_FFT_THRESHOLD", "4096"))

    # Muestreo del soporte
    SUPPORT_MAX_ATTEMPTS = int(os.getenv("OPHC_SUPPORT_MAX_ATTEMPTS", "10000"))

    # Tolerancias numéricas
    BOUNDARY_TOLERANCE = 1e-12
    GEOMETRIC_SUM_EPS = 1e-12

    # Salidas
    HISTOGRAM_BINS = int(os.getenv("OPHC_HISTOGRAM_BINS", "50"))
    SERIES_PRECISION = 17  # dígitos significativos, suficiente para ida y vuelta exacta

    # Paths
    BASE_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    LOGS_DIR = os.getenv("OPHC_LOGS_DIR", os.path.join(BASE_DIR, "logs"))
    OUTPUT_DIR = os.getenv("OPHC_OUTPUT_DIR", os.path.join(BASE_DIR, "output"))
    LOG_FILE_PATH = os.getenv("OPHC_LOG_FILE_PATH", os.path.join(LOGS_DIR, "ophc.log"))

    @classmethod
    def ensure_directories(cls):
        """Asegura que los directorios necesarios existan"""
        directories = [cls.LOGS_DIR, cls.OUTPUT_DIR]
        for directory in directories:
            os.makedirs(directory, exist_ok=True)

    @classmethod
    def is_development(cls):
        """Verifica si está en entorno de desarrollo"""
        return cls.ENVIRONMENT.lower() == "development"
