"""Measure identifiers, their ranking direction and per-task-type defaults."""

from __future__ import annotations

PREDICTIVE_ACCURACY = "predictive_accuracy"
F_MEASURE_MACRO = "f_measure_macro"
AREA_UNDER_ROC_CURVE = "area_under_roc_curve"
ROOT_MEAN_SQUARED_ERROR = "root_mean_squared_error"
MEAN_ABSOLUTE_ERROR = "mean_absolute_error"

# True: higher is better; False: lower is better
HIGHER_IS_BETTER = {
    PREDICTIVE_ACCURACY: True,
    F_MEASURE_MACRO: True,
    AREA_UNDER_ROC_CURVE: True,
    ROOT_MEAN_SQUARED_ERROR: False,
    MEAN_ABSOLUTE_ERROR: False,
}

CLASSIFICATION_MEASURES = [
    PREDICTIVE_ACCURACY,
    F_MEASURE_MACRO,
    AREA_UNDER_ROC_CURVE,
]

REGRESSION_MEASURES = [
    ROOT_MEAN_SQUARED_ERROR,
    MEAN_ABSOLUTE_ERROR,
]


class UnknownMeasure(KeyError):
    code = "unknown_measure"

    def __init__(self, measure_id: str):
        super().__init__(measure_id)
        self.measure_id = measure_id

    def __str__(self) -> str:
        return f"unknown measure {self.measure_id!r}"


def ranking_direction(measure_id: str) -> bool:
    """True if larger values of the measure rank higher."""
    try:
        return HIGHER_IS_BETTER[measure_id]
    except KeyError:
        raise UnknownMeasure(measure_id) from None
