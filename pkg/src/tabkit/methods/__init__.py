"""Method registry: model-type tokens mapped to their classes.

New methods register by name at import time (or at startup via
:func:`register_method`) and immediately become available to the runner and
the CLI.
"""

from __future__ import annotations

from ..errors import TabkitError
from .base import Method, MethodConfig, Prediction
from .classical import (
    DummyMethod,
    KNNMethod,
    LinearRegressionMethod,
    LinearSVMMethod,
    LogisticRegressionMethod,
    NaiveBayesMethod,
    NCMMethod,
)
from .mlp import MLPMethod, MLPNetwork
from .tree import CARTMethod, GBDTMethod, RandomForestMethod

_REGISTRY: dict[str, type[Method]] = {}


def register_method(name: str, cls: type[Method]) -> None:
    _REGISTRY[name] = cls


def get_method(name: str) -> type[Method]:
    try:
        return _REGISTRY[name]
    except KeyError:
        known = ", ".join(sorted(_REGISTRY))
        raise TabkitError(
            f"unknown model_type {name!r}; registered: {known}"
        ) from None


def registered_methods() -> tuple[str, ...]:
    return tuple(sorted(_REGISTRY))


def methods_in_family(deep: bool) -> tuple[str, ...]:
    return tuple(
        sorted(name for name, cls in _REGISTRY.items() if cls.is_deep == deep)
    )


for _name, _cls in {
    "dummy": DummyMethod,
    "knn": KNNMethod,
    "ncm": NCMMethod,
    "naive_bayes": NaiveBayesMethod,
    "linear_regression": LinearRegressionMethod,
    "logreg": LogisticRegressionMethod,
    "svm": LinearSVMMethod,
    "cart": CARTMethod,
    "random_forest": RandomForestMethod,
    "gbdt": GBDTMethod,
    "mlp": MLPMethod,
}.items():
    register_method(_name, _cls)

__all__ = [
    "Method",
    "MethodConfig",
    "Prediction",
    "MLPNetwork",
    "get_method",
    "register_method",
    "registered_methods",
    "methods_in_family",
]
