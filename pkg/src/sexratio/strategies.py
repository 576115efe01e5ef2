"""Stopping rules for a family's sequence of children.

The walk after ``k`` children has ``S`` = boys minus girls, ``X`` girls and
``Y`` boys.  Each rule is a small frozen dataclass; ``spec.stops(k, S)``
evaluates its stop event (scalar or vectorised over numpy arrays) and
:func:`should_stop` is the checked entry point.

Text forms (used by the CLI and config files)::

    pboys:2  pboysmore:1  sqrt:0.5  doubling
    girlsbound:loglog:1.5  girlsbound:plain:1.0
    childbound:loglog:1.2  childbound:plain:1.0
"""
from __future__ import annotations

import enum
import math
import numbers
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, ParameterError

# kernel codes
K_PBOYS, K_PBOYSMORE, K_SQRT, K_GIRLS, K_CHILDREN, K_DOUBLING = range(6)
FORM_PLAIN, FORM_LOGLOG = 0, 1
_FORMS = {"plain": FORM_PLAIN, "loglog": FORM_LOGLOG}


class Finiteness(enum.Enum):
    ALMOST_SURELY_FINITE = "almost-surely-finite"
    POSITIVE_NON_TERMINATION = "positive-non-termination"
    UNCLASSIFIED = "unclassified"


def boundary(x, c: float, form: int):
    """``h(x) = c*sqrt(x)`` or ``c*sqrt(x*log(log(x)))`` (zero below 3)."""
    x = np.asarray(x, dtype=np.float64)
    if form == FORM_PLAIN:
        return c * np.sqrt(x)
    safe = np.where(x >= 3.0, x, 3.0)
    return np.where(x >= 3.0, c * np.sqrt(safe * np.log(np.log(safe))), 0.0)


@dataclass(frozen=True)
class StrategySpec:
    """Common behaviour; use one of the concrete subclasses."""

    kind = -1

    def stops(self, k, s):
        raise NotImplementedError

    def finiteness(self) -> Finiteness:
        raise NotImplementedError

    @property
    def level_type(self) -> bool:
        """True when the rule reads ``S_k >= g(k)`` with ``g`` non-decreasing."""
        return self.kind in (K_PBOYSMORE, K_SQRT, K_CHILDREN, K_DOUBLING)

    def kernel_args(self):
        """``(kind, p, c, form)`` as consumed by the numba kernels."""
        return (self.kind, float(getattr(self, "p", 0)), float(getattr(self, "c", 0.0)),
                getattr(self, "form", FORM_PLAIN))


def _check_p(p):
    if isinstance(p, bool) or not isinstance(p, numbers.Integral) or p < 1:
        raise ParameterError(f"p must be a positive integer, got {p!r}")


def _check_c(c):
    if isinstance(c, bool) or not isinstance(c, numbers.Real) or not (math.isfinite(c) and c > 0):
        raise ParameterError(f"c must be a positive real, got {c!r}")


def _check_form(form):
    if form not in (FORM_PLAIN, FORM_LOGLOG):
        raise ParameterError(f"unknown boundary form {form!r}")


@dataclass(frozen=True)
class PBoys(StrategySpec):
    """Stop at the p-th boy."""

    p: int
    kind = K_PBOYS

    def __post_init__(self):
        _check_p(self.p)

    def stops(self, k, s):
        return (np.asarray(k) + np.asarray(s)) == 2 * self.p

    def finiteness(self):
        return Finiteness.ALMOST_SURELY_FINITE

    def __str__(self):
        return f"pboys:{self.p}"


@dataclass(frozen=True)
class PBoysMore(StrategySpec):
    """Stop once boys outnumber girls by p."""

    p: int
    kind = K_PBOYSMORE

    def __post_init__(self):
        _check_p(self.p)

    def stops(self, k, s):
        return np.asarray(s) == self.p

    def finiteness(self):
        return Finiteness.ALMOST_SURELY_FINITE

    def __str__(self):
        return f"pboysmore:{self.p}"


@dataclass(frozen=True)
class SqrtBoundary(StrategySpec):
    """Stop once the boy surplus reaches ``c*sqrt(k)``."""

    c: float
    kind = K_SQRT

    def __post_init__(self):
        _check_c(self.c)

    def stops(self, k, s):
        return np.asarray(s) >= self.c * np.sqrt(np.asarray(k, dtype=np.float64))

    def finiteness(self):
        return Finiteness.ALMOST_SURELY_FINITE

    def __str__(self):
        return f"sqrt:{self.c!r}"


@dataclass(frozen=True)
class GirlsBoundary(StrategySpec):
    """Stop once the boy surplus reaches ``h(X_k)``, a function of the girls."""

    c: float
    form: int = FORM_LOGLOG
    kind = K_GIRLS

    def __post_init__(self):
        _check_c(self.c)
        _check_form(self.form)

    def stops(self, k, s):
        s = np.asarray(s)
        x = (np.asarray(k) - s) // 2
        return s >= boundary(x, self.c, self.form)

    def finiteness(self):
        if self.form == FORM_PLAIN:
            return Finiteness.ALMOST_SURELY_FINITE
        return _threshold_class(self.c, 2.0)

    def __str__(self):
        return f"girlsbound:{_form_name(self.form)}:{self.c!r}"


@dataclass(frozen=True)
class ChildrenBoundary(StrategySpec):
    """Stop once the boy surplus reaches ``h(k)``, a function of family size."""

    c: float
    form: int = FORM_LOGLOG
    kind = K_CHILDREN

    def __post_init__(self):
        _check_c(self.c)
        _check_form(self.form)

    def stops(self, k, s):
        return np.asarray(s) >= boundary(k, self.c, self.form)

    def finiteness(self):
        if self.form == FORM_PLAIN:
            return Finiteness.ALMOST_SURELY_FINITE
        return _threshold_class(self.c, math.sqrt(2.0))

    def __str__(self):
        return f"childbound:{_form_name(self.form)}:{self.c!r}"


@dataclass(frozen=True)
class Doubling(StrategySpec):
    """Stop once there are at least twice as many boys as girls."""

    kind = K_DOUBLING

    def stops(self, k, s):
        # Y >= 2X  <=>  3S >= k
        return 3 * np.asarray(s) >= np.asarray(k)

    def finiteness(self):
        return Finiteness.POSITIVE_NON_TERMINATION

    def __str__(self):
        return "doubling"


def _threshold_class(c, threshold):
    if c < threshold:
        return Finiteness.ALMOST_SURELY_FINITE
    if c > threshold:
        return Finiteness.POSITIVE_NON_TERMINATION
    return Finiteness.UNCLASSIFIED


def _form_name(form):
    return "plain" if form == FORM_PLAIN else "loglog"


def should_stop(spec: StrategySpec, k: int, s: int, x: int, y: int) -> bool:
    """Whether ``spec`` stops after child ``k`` with surplus ``s``, ``x`` girls, ``y`` boys."""
    if k < 1 or x < 0 or y < 0 or x + y != k or y - x != s:
        raise ContractError(f"inconsistent walk state k={k} S={s} X={x} Y={y}")
    return bool(spec.stops(k, s))


def finiteness_class(spec: StrategySpec) -> Finiteness:
    return spec.finiteness()


def parse_strategy(text: str) -> StrategySpec:
    """Inverse of ``str(spec)``."""
    parts = text.strip().lower().split(":")
    name, args = parts[0], parts[1:]
    try:
        if name == "doubling" and not args:
            return Doubling()
        if name in ("pboys", "pboysmore") and len(args) == 1:
            p = int(args[0])
            return PBoys(p) if name == "pboys" else PBoysMore(p)
        if name == "sqrt" and len(args) == 1:
            return SqrtBoundary(float(args[0]))
        if name in ("girlsbound", "childbound") and len(args) in (1, 2):
            form = _FORMS[args[0]] if len(args) == 2 else FORM_LOGLOG
            c = float(args[-1])
            cls = GirlsBoundary if name == "girlsbound" else ChildrenBoundary
            return cls(c, form)
    except (KeyError, ValueError) as exc:
        if isinstance(exc, ParameterError):
            raise
        raise ParameterError(f"cannot parse strategy {text!r}: {exc}") from None
    raise ParameterError(f"cannot parse strategy {text!r}")
