"""Feature pipeline: impute, normalize, then encode, fitted on train rows only.

The numerical block is imputed, normalized, and (optionally) replaced by a
binned encoding; the categorical block is imputed and encoded under the
chosen policy. Ordinal category indices are standard-scaled so that every
downstream model sees comparably scaled inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset, DatasetInfo
from .encode_cat import (
    DEFAULT_N_BUCKETS,
    CategoricalEncoder,
    fit_categorical_encoder,
)
from .encode_num import DEFAULT_N_BINS, NumericEncoder, fit_numeric_encoder
from .errors import FitError
from .preprocess import (
    FittedImputer,
    FittedNormalizer,
    fit_imputer,
    fit_normalizer,
)


@dataclass(frozen=True)
class PipelineConfig:
    normalization: str = "standard"
    num_nan_policy: str = "mean"
    cat_nan_policy: str = "most_frequent"
    num_policy: str = "none"
    cat_policy: str = "onehot"
    n_bins: int = DEFAULT_N_BINS
    n_buckets: int = DEFAULT_N_BUCKETS


class FeaturePipeline:
    """Fit once on the training part of a dataset, then transform any rows."""

    def __init__(self, config: PipelineConfig | None = None, seed: int = 0):
        self.config = config or PipelineConfig()
        self.seed = seed
        self._imputer: FittedImputer | None = None
        self._normalizer: FittedNormalizer | None = None
        self._num_encoder: NumericEncoder | None = None
        self._cat_encoder: CategoricalEncoder | None = None
        self._ordinal_scaler: FittedNormalizer | None = None

    @property
    def is_fitted(self) -> bool:
        return self._imputer is not None

    def fit_transform_train(self, dataset: Dataset, info: DatasetInfo) -> np.ndarray:
        """Fit every stage on the train rows and return their encoded matrix."""
        cfg = self.config
        num = dataset.part_num("train")
        cat = dataset.part_cat("train")
        labels = dataset.part_labels("train")

        self._imputer = fit_imputer(
            num, cat, num_policy=cfg.num_nan_policy, cat_policy=cfg.cat_nan_policy
        )
        num, cat = self._imputer.transform(num, cat)

        if num.shape[1]:
            self._normalizer = fit_normalizer(num, cfg.normalization)
            num = self._normalizer.transform(num)
            self._num_encoder = fit_numeric_encoder(
                num, cfg.num_policy, targets=labels, task=info.task, n_bins=cfg.n_bins
            )
            if self._num_encoder is not None:
                num = self._num_encoder.transform(num)

        if cat.shape[1]:
            self._cat_encoder, cat_block = fit_categorical_encoder(
                cat,
                cfg.cat_policy,
                targets=labels,
                task=info.task,
                class_count=info.class_count,
                seed=self.seed,
                n_buckets=cfg.n_buckets,
            )
            if cfg.cat_policy == "ordinal":
                self._ordinal_scaler = fit_normalizer(cat_block, "standard")
                cat_block = self._ordinal_scaler.transform(cat_block)
        else:
            cat_block = np.empty((len(labels), 0))
        return np.hstack([num, cat_block])

    def transform(self, num: np.ndarray, cat: np.ndarray) -> np.ndarray:
        """Encode rows with inference semantics (no row identity)."""
        if not self.is_fitted:
            raise FitError("pipeline is not fitted")
        num, cat = self._imputer.transform(num, cat)
        if self._normalizer is not None:
            num = self._normalizer.transform(num)
        if self._num_encoder is not None:
            num = self._num_encoder.transform(num)
        if self._cat_encoder is not None:
            cat_block = self._cat_encoder.transform(cat)
            if self._ordinal_scaler is not None:
                cat_block = self._ordinal_scaler.transform(cat_block)
        else:
            cat_block = np.empty((num.shape[0], 0))
        return np.hstack([num, cat_block])

    def transform_part(self, dataset: Dataset, part: str) -> np.ndarray:
        return self.transform(dataset.part_num(part), dataset.part_cat(part))

    def state(self) -> tuple:
        """The fitted stages, for equality and persistence checks."""
        return (
            self.config,
            self.seed,
            self._imputer,
            self._normalizer,
            self._num_encoder,
            self._cat_encoder,
            self._ordinal_scaler,
        )
