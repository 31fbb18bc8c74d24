"""Per-arm response distributions and running-mean bookkeeping.

Every response is produced from exactly one uniform double taken from the
generator (inverse-CDF sampling), so a stream of ``k`` responses always
consumes ``k`` uniforms regardless of the distribution family. This is what
lets a trial pre-draw its per-arm uniforms in one block and still be
reproduced draw-for-draw by the single-draw API.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

NORMAL = "normal"
BERNOULLI = "bernoulli"

# Keep inverse-CDF inputs inside the open interval (0, 1).
_U_LO = 2.0 ** -54
_U_HI = 1.0 - 2.0 ** -53


@dataclass(frozen=True)
class ResponseModel:
    """Outcome distribution of one arm.

    Use :meth:`normal` or :meth:`bernoulli` rather than the raw constructor.
    For ``kind == "normal"`` the parameters are mean and standard deviation;
    for ``kind == "bernoulli"`` ``mean`` is the success probability and
    ``sd`` is unused.
    """

    kind: str
    mean: float
    sd: float = 0.0

    def __post_init__(self) -> None:
        if self.kind == NORMAL:
            if not math.isfinite(self.mean):
                raise ValueError(f"normal mean must be finite, got {self.mean}")
            if not (self.sd > 0 and math.isfinite(self.sd)):
                raise ValueError(f"normal sd must be > 0, got {self.sd}")
        elif self.kind == BERNOULLI:
            if not 0.0 <= self.mean <= 1.0:
                raise ValueError(f"success probability must lie in [0, 1], got {self.mean}")
        else:
            raise ValueError(f"unknown response family {self.kind!r}")

    @classmethod
    def normal(cls, mean: float, sd: float) -> "ResponseModel":
        return cls(NORMAL, float(mean), float(sd))

    @classmethod
    def bernoulli(cls, p: float) -> "ResponseModel":
        return cls(BERNOULLI, float(p), 0.0)

    @property
    def true_mean(self) -> float:
        return self.mean

    @property
    def true_sd(self) -> float:
        if self.kind == NORMAL:
            return self.sd
        return math.sqrt(self.mean * (1.0 - self.mean))

    def shifted(self, c: float) -> "ResponseModel":
        """Same family with the location moved by ``c`` (normal only)."""
        if self.kind != NORMAL:
            raise ValueError("only normal models can be shifted")
        return ResponseModel.normal(self.mean + c, self.sd)

    def transform(self, u):
        """Map uniforms in [0, 1) to responses; works on scalars and arrays."""
        if self.kind == BERNOULLI:
            return (np.asarray(u) < self.mean).astype(float)
        z = ndtri(np.clip(u, _U_LO, _U_HI))
        return self.mean + self.sd * z

    def __str__(self) -> str:
        if self.kind == NORMAL:
            return f"Normal({self.mean:g}, sd={self.sd:g})"
        return f"Bernoulli({self.mean:g})"


def draw(model: ResponseModel, rng: np.random.Generator) -> float:
    """One response from ``model``; consumes exactly one uniform from ``rng``."""
    return float(model.transform(rng.random()))


def draw_many(model: ResponseModel, rng: np.random.Generator, size: int) -> np.ndarray:
    """``size`` responses, identical to ``size`` successive :func:`draw` calls."""
    return model.transform(rng.random(size))


@dataclass(frozen=True)
class ArmState:
    """Running count, sum and mean of the responses seen from one arm.

    The mean is recomputed as ``sum / count`` on every update so that two
    arms with equal rational sample means compare exactly equal.
    """

    count: int = 0
    sum: float = 0.0

    @property
    def mean(self) -> float:
        if self.count == 0:
            return math.nan
        return self.sum / self.count

    @property
    def defined(self) -> bool:
        return self.count > 0


def update(state: ArmState, x: float) -> ArmState:
    return ArmState(state.count + 1, state.sum + float(x))
