from .logger import LoggerSetup, app_logger, log_experiment

__all__ = [
    'LoggerSetup',
    'app_logger',
    'log_experiment'
]
