"""Response distributions described by mean, variance and log-MGF."""

from __future__ import annotations

import math
import types
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .numerics import DomainError, Interval, REAL_LINE

KINDS = ("bernoulli", "poisson", "gamma", "normal")

# Philox is a counter-based 64-bit generator (Random123 family).
RNG_ALGORITHM = "Philox4x64-10"


@dataclass(frozen=True)
class SuccessPair:
    """Success probabilities of arms A and B."""

    p_A: float
    p_B: float

    def __post_init__(self):
        for name in ("p_A", "p_B"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise DomainError(f"{name} must lie in (0, 1), got {v}")

    def swapped(self) -> "SuccessPair":
        return SuccessPair(self.p_B, self.p_A)

    def reflected(self) -> "SuccessPair":
        """Failures relabelled as successes with the arms exchanged."""
        return SuccessPair(1.0 - self.p_B, 1.0 - self.p_A)


@dataclass(frozen=True)
class MgfModel:
    """A response distribution exposed through its cumulant generating function.

    ``params`` holds the canonical parameters: ``p`` (Bernoulli), ``lam``
    (Poisson), ``shape``/``scale`` (Gamma), ``mu``/``var`` (Normal).
    Build instances with :func:`make_model`.
    """

    kind: str
    params: Mapping[str, float] = field(hash=False)

    @property
    def mean(self) -> float:
        p = self.params
        if self.kind == "bernoulli":
            return p["p"]
        if self.kind == "poisson":
            return p["lam"]
        if self.kind == "gamma":
            return p["shape"] * p["scale"]
        return p["mu"]

    @property
    def variance(self) -> float:
        p = self.params
        if self.kind == "bernoulli":
            return p["p"] * (1.0 - p["p"])
        if self.kind == "poisson":
            return p["lam"]
        if self.kind == "gamma":
            return p["shape"] * p["scale"] ** 2
        return p["var"]

    @property
    def sd(self) -> float:
        return math.sqrt(self.variance)

    @property
    def mgf_domain(self) -> Interval:
        if self.kind == "gamma":
            return Interval(-math.inf, 1.0 / self.params["scale"])
        return REAL_LINE

    def log_mgf(self, t: float) -> float:
        """``log E[exp(t X)]``; ``+inf`` outside :attr:`mgf_domain`."""
        p = self.params
        if self.kind == "bernoulli":
            # log(1 + p (e^t - 1)): exactly 0 at t = 0; log-sum form once e^t overflows
            q = p["p"]
            if t < 700.0:
                return math.log1p(q * math.expm1(t))
            return math.log(q) + t + math.log1p(math.exp(math.log1p(-q) - math.log(q) - t))
        if self.kind == "poisson":
            try:
                return p["lam"] * math.expm1(t)
            except OverflowError:
                return math.inf
        if self.kind == "gamma":
            st = p["scale"] * t
            if st >= 1.0:
                return math.inf
            return -p["shape"] * math.log1p(-st)
        return p["mu"] * t + 0.5 * p["var"] * t * t

    def describe(self) -> str:
        body = ",".join(f"{k}={v:g}" for k, v in self.params.items())
        return f"{self.kind}:{body}"


_ALIASES = {
    "bernoulli": {"p": "p"},
    "poisson": {"lambda": "lam", "lam": "lam"},
    "gamma": {"shape": "shape", "k": "shape", "scale": "scale", "theta": "scale", "rate": "rate"},
    "normal": {"mu": "mu", "mean": "mu", "var": "var", "sigma2": "var", "sd": "sd"},
}


def make_model(kind: str, **params: float) -> MgfModel:
    """Validate parameters and build an :class:`MgfModel`.

    Gamma accepts either ``scale`` or ``rate`` (with ``shape``); Normal
    accepts ``var`` or ``sd``.
    """
    kind = kind.lower()
    if kind not in KINDS:
        raise DomainError(f"unknown model kind {kind!r}; expected one of {KINDS}")
    aliases = _ALIASES[kind]
    canon: dict[str, float] = {}
    for key, value in params.items():
        if key not in aliases:
            raise DomainError(f"unknown parameter {key!r} for {kind}")
        canon[aliases[key]] = float(value)

    if kind == "bernoulli":
        if set(canon) != {"p"} or not 0.0 < canon["p"] < 1.0:
            raise DomainError(f"bernoulli needs p in (0, 1), got {params}")
    elif kind == "poisson":
        if set(canon) != {"lam"} or not canon["lam"] > 0.0:
            raise DomainError(f"poisson needs lambda > 0, got {params}")
    elif kind == "gamma":
        if "rate" in canon:
            if "scale" in canon:
                raise DomainError("give gamma either scale or rate, not both")
            rate = canon.pop("rate")
            if not rate > 0.0:
                raise DomainError(f"gamma rate must be > 0, got {rate}")
            canon["scale"] = 1.0 / rate
        if set(canon) != {"shape", "scale"} or not (canon["shape"] > 0.0 and canon["scale"] > 0.0):
            raise DomainError(f"gamma needs shape > 0 and scale > 0, got {params}")
        canon = {"shape": canon["shape"], "scale": canon["scale"]}
    else:
        if "sd" in canon:
            if "var" in canon:
                raise DomainError("give normal either var or sd, not both")
            canon["var"] = canon.pop("sd") ** 2
        if set(canon) != {"mu", "var"} or not canon["var"] > 0.0 or not math.isfinite(canon["mu"]):
            raise DomainError(f"normal needs finite mu and var > 0, got {params}")
        canon = {"mu": canon["mu"], "var": canon["var"]}
    return MgfModel(kind, types.MappingProxyType(canon))


def parse_model(text: str, gamma_param: str = "scale") -> MgfModel:
    """Parse a model string such as ``gamma:shape=0.5,scale=0.5``.

    Positional shorthand is accepted too (``poisson:2``, ``gamma:0.5,0.6``);
    the second positional gamma argument is read as a scale or a rate
    according to ``gamma_param``.
    """
    if gamma_param not in ("scale", "rate"):
        raise DomainError(f"gamma_param must be 'scale' or 'rate', got {gamma_param!r}")
    kind, _, body = text.strip().partition(":")
    kind = kind.lower()
    if kind not in KINDS:
        raise DomainError(f"unknown model kind in {text!r}")
    positional = {
        "bernoulli": ("p",),
        "poisson": ("lambda",),
        "gamma": ("shape", gamma_param),
        "normal": ("mu", "var"),
    }[kind]
    params: dict[str, float] = {}
    parts = [s for s in body.split(",") if s.strip()]
    for i, part in enumerate(parts):
        key, eq, value = part.partition("=")
        if eq:
            key = key.strip()
        else:
            if i >= len(positional):
                raise DomainError(f"too many values in {text!r}")
            key, value = positional[i], key
        try:
            params[key] = float(value)
        except ValueError:
            raise DomainError(f"bad number {value!r} in {text!r}") from None
    return make_model(kind, **params)


def tilted(model: MgfModel, s: float) -> MgfModel:
    """Exponentially tilted model with density proportional to ``e^{s x}`` times the original."""
    if not math.isfinite(model.log_mgf(s)):
        raise DomainError(f"tilt {s} lies outside the MGF domain of {model.describe()}")
    p = model.params
    if model.kind == "bernoulli":
        q = p["p"] * math.exp(s)
        return make_model("bernoulli", p=q / (1.0 - p["p"] + q))
    if model.kind == "poisson":
        return make_model("poisson", lam=p["lam"] * math.exp(s))
    if model.kind == "gamma":
        return make_model("gamma", shape=p["shape"], scale=p["scale"] / (1.0 - p["scale"] * s))
    return make_model("normal", mu=p["mu"] + p["var"] * s, var=p["var"])


def bernoulli_pair(pair: SuccessPair) -> tuple[MgfModel, MgfModel]:
    return make_model("bernoulli", p=pair.p_A), make_model("bernoulli", p=pair.p_B)


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Seeded Philox generator; distinct ``stream`` values give independent streams."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(stream),))
    return np.random.Generator(np.random.Philox(ss))


def sample(model: MgfModel, rng: np.random.Generator, m: int) -> np.ndarray:
    """``m`` independent draws from ``model``."""
    if m < 1:
        raise DomainError("need m >= 1")
    p = model.params
    if model.kind == "bernoulli":
        return (rng.random(m) < p["p"]).astype(np.float64)
    if model.kind == "poisson":
        return rng.poisson(p["lam"], m).astype(np.float64)
    if model.kind == "gamma":
        return rng.gamma(p["shape"], p["scale"], m)
    return rng.normal(p["mu"], math.sqrt(p["var"]), m)


def sample_means(model: MgfModel, rng: np.random.Generator, m: int, reps: int) -> np.ndarray:
    """Means of ``m`` draws, repeated ``reps`` times, via each family's sum distribution."""
    p = model.params
    if model.kind == "bernoulli":
        total = rng.binomial(m, p["p"], reps).astype(np.float64)
    elif model.kind == "poisson":
        total = rng.poisson(m * p["lam"], reps).astype(np.float64)
    elif model.kind == "gamma":
        total = rng.gamma(m * p["shape"], p["scale"], reps)
    else:
        return rng.normal(p["mu"], math.sqrt(p["var"] / m), reps)
    return total / m
