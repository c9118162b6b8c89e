"""Box-Jenkins ARIMA toolkit for weekly count series."""
from .arima import ArimaFit, ArimaSpec, fit, kalman_loglik, one_step_forecasts, simulate
from .correlogram import Correlogram, acf, pacf, significant_lags
from .pipeline import PipelineConfig, PipelineReport, run_pipeline, select_by_aic
from .series import (
    TimeSeries,
    TransformPipeline,
    boxcox,
    difference,
    integrate,
    inv_boxcox,
    select_lambda,
    split_holdout,
)
from .stattests import TestReport, adf_test, ljung_box, normal_qq_points, shapiro_wilk

__version__ = "0.1.0"
