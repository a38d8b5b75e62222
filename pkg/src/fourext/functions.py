"""Registry of the standard test functions.

Each entry evaluates in double precision (numpy arrays) or in extended
precision (object arrays with an :class:`fourext._mp.Namespace`), and carries
the location of its nearest singularity so that convergence rates can be
predicted without locating singularities numerically.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

from .core import NP, AnalyticityInfo, analyticity_rate
from .errors import DomainError


@dataclass(frozen=True)
class TestFunction:
    name: str
    formula: str
    evaluator: Callable
    singularity: Optional[Union[complex, str]]
    real: bool = True

    def __call__(self, x, ns=NP):
        return self.evaluator(x, ns)

    def analyticity(self, T: float) -> AnalyticityInfo:
        return analyticity_rate(self.singularity, T)


def _oscil(x, ns):
    return ns.exp(ns.j * 25 * ns.sqrt(5) * ns.pi * x)


def _cosh40(x, ns):
    return 1 + ns.cosh(40 * x) / ns.cosh(40)


REGISTRY = {
    f.name: f
    for f in (
        TestFunction("runge16", "1/(1+16x^2)", lambda x, ns: 1 / (1 + 16 * x * x), 0.25j),
        TestFunction("runge25", "1/(1+25x^2)", lambda x, ns: 1 / (1 + 25 * x * x), 0.2j),
        TestFunction("runge100", "1/(1+100x^2)", lambda x, ns: 1 / (1 + 100 * x * x), 0.1j),
        TestFunction("pole87", "1/(8-7x)", lambda x, ns: 1 / (8 - 7 * x), 8 / 7),
        TestFunction("pole101", "1/(101-100x)", lambda x, ns: 1 / (101 - 100 * x), 1.01),
        TestFunction("cosh40", "1+cosh(40x)/cosh(40)", _cosh40, None),
        TestFunction("absx7", "|x|^7", lambda x, ns: ns.abs(x) ** 7, "nonanalytic"),
        TestFunction("oscil", "exp(25 sqrt(5) pi i x)", _oscil, None, real=False),
        TestFunction("expx", "exp(x)", lambda x, ns: ns.exp(x), None),
        TestFunction("linear", "x", lambda x, ns: x * 1, None),
    )
}


def get_function(name: str) -> TestFunction:
    """Look up a registry entry by name."""
    try:
        return REGISTRY[name]
    except KeyError:
        raise DomainError(f"unknown function {name!r}; choose from {sorted(REGISTRY)}") from None
