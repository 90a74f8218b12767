"""Sign plus natural-log magnitude representation for very large/small numbers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any


@dataclass(frozen=True)
class LogValue:
    """A real number stored as ``sign * exp(log_abs)``.

    ``log_abs`` is ignored (and normalised to ``-inf``) when ``sign == 0``.
    ``meta`` carries advisory diagnostics (e.g. validity warnings) and does
    not take part in equality.
    """

    sign: int
    log_abs: float
    meta: dict[str, Any] = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        if self.sign not in (-1, 0, 1):
            raise ValueError(f"sign must be -1, 0 or +1, got {self.sign!r}")
        if self.sign == 0:
            object.__setattr__(self, "log_abs", -math.inf)
        elif math.isnan(self.log_abs):
            raise ValueError("log_abs is NaN")

    @classmethod
    def from_real(cls, x: float) -> LogValue:
        if x == 0:
            return cls(0, -math.inf)
        return cls(1 if x > 0 else -1, math.log(abs(x)))

    @classmethod
    def from_log(cls, log_abs: float, sign: int = 1) -> LogValue:
        if log_abs == -math.inf:
            return cls(0, -math.inf)
        return cls(sign, log_abs)

    @classmethod
    def zero(cls, **meta: Any) -> LogValue:
        return cls(0, -math.inf, dict(meta))

    @classmethod
    def one(cls) -> LogValue:
        return cls(1, 0.0)

    def to_real(self) -> float:
        """Convert back to a float; overflows to ``±inf`` and underflows to 0."""
        if self.sign == 0:
            return 0.0
        if self.log_abs > 709.78:
            return self.sign * math.inf
        return self.sign * math.exp(self.log_abs)

    @property
    def log10_abs(self) -> float:
        return self.log_abs / math.log(10.0)

    def with_meta(self, **meta: Any) -> LogValue:
        return LogValue(self.sign, self.log_abs, {**self.meta, **meta})

    def __mul__(self, other: LogValue | float) -> LogValue:
        if not isinstance(other, LogValue):
            other = LogValue.from_real(other)
        sign = self.sign * other.sign
        if sign == 0:
            return LogValue.zero()
        return LogValue(sign, self.log_abs + other.log_abs)

    __rmul__ = __mul__

    def __truediv__(self, other: LogValue | float) -> LogValue:
        if not isinstance(other, LogValue):
            other = LogValue.from_real(other)
        if other.sign == 0:
            raise ZeroDivisionError("division by a zero LogValue")
        if self.sign == 0:
            return LogValue.zero()
        return LogValue(self.sign * other.sign, self.log_abs - other.log_abs)

    def __pow__(self, exponent: float) -> LogValue:
        if self.sign == 0:
            if exponent > 0:
                return LogValue.zero()
            raise ZeroDivisionError("0 raised to a non-positive power")
        if self.sign < 0 and float(exponent) != int(exponent):
            raise ValueError("fractional power of a negative LogValue")
        sign = 1 if self.sign > 0 or int(exponent) % 2 == 0 else -1
        return LogValue(sign, self.log_abs * exponent)

    def __neg__(self) -> LogValue:
        return LogValue(-self.sign, self.log_abs, self.meta)

    def __float__(self) -> float:
        return self.to_real()

    def to_dict(self) -> dict[str, Any]:
        value = self.to_real()
        d: dict[str, Any] = {
            "sign": self.sign,
            "log_abs": None if self.sign == 0 else self.log_abs,
            "log10_abs": None if self.sign == 0 else self.log10_abs,
            "value": value if math.isfinite(value) else None,
        }
        if self.meta:
            d["meta"] = dict(self.meta)
        return d
