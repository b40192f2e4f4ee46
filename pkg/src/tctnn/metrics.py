"""Prediction error metrics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

REGIONS = ("forecast-only", "full")


@dataclass
class MetricsReport:
    mae: float
    rmse: float
    region: str
    count: int

    def to_dict(self) -> dict:
        return {"mae": self.mae, "rmse": self.rmse, "region": self.region, "count": self.count}


def metrics(prediction: np.ndarray, truth: np.ndarray, region: str = "full") -> MetricsReport:
    """Mean absolute and root mean squared entrywise error.

    The caller slices both arrays to the region it wants scored; ``region`` is
    recorded as a label only.
    """
    prediction = np.asarray(prediction, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if prediction.shape != truth.shape:
        raise ValueError(f"shape mismatch: {prediction.shape} vs {truth.shape}")
    if prediction.size == 0:
        raise ValueError("empty evaluation region")
    if region not in REGIONS:
        raise ValueError(f"unknown region {region!r}; expected one of {REGIONS}")
    err = (prediction - truth).ravel()
    return MetricsReport(
        mae=float(np.abs(err).mean()),
        rmse=float(np.sqrt((err ** 2).mean())),
        region=region,
        count=err.size,
    )


__all__ = ["MetricsReport", "metrics", "REGIONS"]
