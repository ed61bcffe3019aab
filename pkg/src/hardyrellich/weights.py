"""Two-exponent weight family c(s) = s^delta (a + b s)^(delta'-delta) and its calculus."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "WeightParams",
    "weight_value",
    "weight_derivative",
    "weight_log_derivative",
    "weight_asymptotics_check",
]


@dataclass(frozen=True)
class WeightParams:
    """Parameters of the weight c(s) = s^delta (a + b s)^(delta'-delta).

    delta governs the power behaviour at the boundary (s -> 0) and delta_prime
    the behaviour at infinity:

        c(s)/s^delta  -> a^(delta'-delta)   as s -> 0,
        c(s)/s^delta' -> b^(delta'-delta)   as s -> infinity.

    The exponent on (a + b s) is delta' - delta; this is the sign convention
    needed for the asymptotics above.  With a = b = 1 and delta = delta' the
    weight reduces to the plain power s^delta.
    """

    delta: float = 0.0
    delta_prime: float = 0.0
    a: float = 1.0
    b: float = 1.0

    def __post_init__(self):
        if self.delta < 0 or self.delta_prime < 0:
            raise ValueError("weight exponents must be nonnegative")
        if self.a <= 0 or self.b <= 0:
            raise ValueError("weight coefficients a, b must be positive")

    @property
    def wedge(self) -> float:
        """min(delta, delta')."""
        return min(self.delta, self.delta_prime)

    @property
    def vee(self) -> float:
        """max(delta, delta')."""
        return max(self.delta, self.delta_prime)

    @property
    def is_pure_power(self) -> bool:
        return self.delta == self.delta_prime

    def value(self, s):
        return weight_value(self, s)

    def derivative(self, s):
        return weight_derivative(self, s)

    def log_derivative(self, s):
        return weight_log_derivative(self, s)

    def to_json(self) -> dict:
        return {
            "delta": self.delta,
            "delta_prime": self.delta_prime,
            "a": self.a,
            "b": self.b,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "WeightParams":
        return cls(
            delta=float(obj["delta"]),
            delta_prime=float(obj["delta_prime"]),
            a=float(obj.get("a", 1.0)),
            b=float(obj.get("b", 1.0)),
        )


def weight_value(w: WeightParams, s):
    """Evaluate c(s) = s^delta (a + b s)^(delta'-delta) for s >= 0.

    At s = 0 the boundary limit is used: 0 when delta > 0, a^(delta'-delta)
    when delta = 0.  Negative s raises.
    """
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr < 0):
        raise ValueError("weight evaluated at negative s")
    with np.errstate(divide="ignore"):
        out = np.where(
            s_arr > 0,
            np.power(np.where(s_arr > 0, s_arr, 1.0), w.delta)
            * np.power(w.a + w.b * s_arr, w.delta_prime - w.delta),
            0.0 if w.delta > 0 else w.a ** (w.delta_prime - w.delta),
        )
    return out if s_arr.ndim else float(out)


def weight_derivative(w: WeightParams, s):
    """c'(s) = s^(delta-1) (a + b s)^(delta'-delta-1) (a delta + b delta' s), s > 0."""
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr <= 0):
        raise ValueError("weight derivative requires s > 0")
    out = (
        np.power(s_arr, w.delta - 1.0)
        * np.power(w.a + w.b * s_arr, w.delta_prime - w.delta - 1.0)
        * (w.a * w.delta + w.b * w.delta_prime * s_arr)
    )
    return out if s_arr.ndim else float(out)


def weight_log_derivative(w: WeightParams, s):
    """s c'(s)/c(s) = (a delta + b delta' s)/(a + b s), s > 0.

    Lies between min(delta, delta') and max(delta, delta') for every s > 0.
    """
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr <= 0):
        raise ValueError("weight log-derivative requires s > 0")
    out = (w.a * w.delta + w.b * w.delta_prime * s_arr) / (w.a + w.b * s_arr)
    return out if s_arr.ndim else float(out)


def weight_asymptotics_check(w: WeightParams, direction: str, n_points: int = 12):
    """Ratio sequence probing the weight's boundary or infinity asymptotics.

    direction="zero":     returns (s_i, c(s_i)/s_i^delta) on a geometric grid
                          descending to 1e-8; the limit is a^(delta'-delta).
    direction="infinity": returns (s_i, c(s_i)/s_i^delta') ascending to 1e8;
                          the limit is b^(delta'-delta).
    """
    if direction == "zero":
        s = np.geomspace(1.0, 1e-8, n_points)
        ratios = weight_value(w, s) / np.power(s, w.delta)
        limit = w.a ** (w.delta_prime - w.delta)
    elif direction == "infinity":
        s = np.geomspace(1.0, 1e8, n_points)
        ratios = weight_value(w, s) / np.power(s, w.delta_prime)
        limit = w.b ** (w.delta_prime - w.delta)
    else:
        raise ValueError("direction must be 'zero' or 'infinity'")
    return s, ratios, limit
