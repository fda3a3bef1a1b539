from .hcTest import ophc_test, HCResult, SigmaMode, StatisticForm
from .monteCarlo import ExperimentConfig, calibrate_null, compare_q_modes, estimate_power

__all__ = [
    'ophc_test',
    'HCResult',
    'SigmaMode',
    'StatisticForm',
    'ExperimentConfig',
    'calibrate_null',
    'compare_q_modes',
    'estimate_power'
]
