from .drift_tests import (Verdict, DriftTestReport, ConditionalDriftReport, drift_statistics,
                          supermartingale_test, local_martingale_drift_test,
                          conditional_supermartingale_test, REPORT_COLUMNS)
from .strategies import (StrategyFamily, fraction_family, constant_fraction_wealth,
                         constant_fraction_log_wealth)
from .deflators import DeflatorReport, LogWealthReport, deflator_check, log_wealth_bound_check

__all__ = [
    'Verdict',
    'DriftTestReport',
    'ConditionalDriftReport',
    'drift_statistics',
    'supermartingale_test',
    'local_martingale_drift_test',
    'conditional_supermartingale_test',
    'REPORT_COLUMNS',
    'StrategyFamily',
    'fraction_family',
    'constant_fraction_wealth',
    'constant_fraction_log_wealth',
    'DeflatorReport',
    'LogWealthReport',
    'deflator_check',
    'log_wealth_bound_check',
]
