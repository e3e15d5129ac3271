"""Initial/boundary densities f, including degenerate sentinels.

Proper variants (Gaussian, Cauchy, Uniform, Mixture) are ordinary densities
evaluated pointwise.  Two structural sentinels exist purely as exact
benchmarks and are never evaluated pointwise:

    PointMass(xi0)     an atom; integrals against it collapse to a single
                       kernel evaluation
    ImproperUniform()  f == 1 (non-normalizable); the mixture field is
                       identically 1 and the compound density reduces to the
                       bare kernel family

The textual descriptor grammar used by the CLI:

    gaussian:mu=<r>,sigma=<r>
    cauchy:mu=<r>,gamma=<r>
    uniform:a=<r>,b=<r>
    pointmass:xi0=<r>
    improper-uniform
    mix:<w>*<desc>|<w>*<desc>[|...]      (components must be proper, non-mix)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist

import numpy as np

__all__ = [
    "Gaussian",
    "Cauchy",
    "Uniform",
    "Mixture",
    "PointMass",
    "ImproperUniform",
    "SourceSpec",
    "InvalidSourceError",
    "SourceEvaluationError",
    "validate",
    "source_pdf",
    "effective_support",
    "is_proper",
    "heavy_tail_params",
    "parse_source",
    "source_descriptor",
]

WEIGHT_SUM_TOL = 1e-12


class InvalidSourceError(ValueError):
    """A source specification violates its structural invariants."""


class SourceEvaluationError(TypeError):
    """Pointwise evaluation requested for a sentinel (PointMass/ImproperUniform)."""


@dataclass(frozen=True)
class Gaussian:
    mu: float
    sigma: float


@dataclass(frozen=True)
class Cauchy:
    mu: float
    gamma: float


@dataclass(frozen=True)
class Uniform:
    a: float
    b: float


@dataclass(frozen=True)
class Mixture:
    components: tuple[tuple[float, "SourceSpec"], ...]


@dataclass(frozen=True)
class PointMass:
    xi0: float


@dataclass(frozen=True)
class ImproperUniform:
    pass


SourceSpec = Gaussian | Cauchy | Uniform | Mixture | PointMass | ImproperUniform


def validate(spec: SourceSpec) -> None:
    """Check structural invariants; raise InvalidSourceError naming the violation."""
    if isinstance(spec, Gaussian):
        if not spec.sigma > 0:
            raise InvalidSourceError("sigma must be positive")
    elif isinstance(spec, Cauchy):
        if not spec.gamma > 0:
            raise InvalidSourceError("gamma must be positive")
    elif isinstance(spec, Uniform):
        if not spec.a < spec.b:
            raise InvalidSourceError("uniform bounds must satisfy a < b")
    elif isinstance(spec, Mixture):
        if not spec.components:
            raise InvalidSourceError("mixture must have at least one component")
        total = 0.0
        for weight, comp in spec.components:
            if not weight > 0:
                raise InvalidSourceError("mixture weights must be positive")
            if isinstance(comp, (PointMass, ImproperUniform, Mixture)):
                raise InvalidSourceError(
                    "mixture components must be proper non-mixture densities"
                )
            validate(comp)
            total += weight
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise InvalidSourceError("weights must sum to 1")
    elif isinstance(spec, PointMass):
        if not math.isfinite(spec.xi0):
            raise InvalidSourceError("xi0 must be finite")
    elif isinstance(spec, ImproperUniform):
        pass
    else:
        raise InvalidSourceError(f"unknown source spec {spec!r}")


def is_proper(spec: SourceSpec) -> bool:
    return not isinstance(spec, (PointMass, ImproperUniform))


def source_pdf(spec: SourceSpec, xi):
    """f(xi) >= 0 for proper specs; array-ready.  Sentinels are rejected."""
    xi = np.asarray(xi, dtype=float)
    if isinstance(spec, Gaussian):
        z = (xi - spec.mu) / spec.sigma
        return np.exp(-0.5 * z * z) / (spec.sigma * math.sqrt(2.0 * math.pi))
    if isinstance(spec, Cauchy):
        return spec.gamma / (math.pi * ((xi - spec.mu) ** 2 + spec.gamma**2))
    if isinstance(spec, Uniform):
        inside = (xi >= spec.a) & (xi <= spec.b)
        return np.where(inside, 1.0 / (spec.b - spec.a), 0.0)
    if isinstance(spec, Mixture):
        total = np.zeros_like(xi)
        for weight, comp in spec.components:
            total = total + weight * source_pdf(comp, xi)
        return total
    raise SourceEvaluationError(
        f"{type(spec).__name__} has no pointwise density; handle it structurally"
    )


def _gaussian_halfwidth(sigma: float, tail_tol: float) -> float:
    # two-sided: mass tail_tol/2 in each tail
    return sigma * NormalDist().inv_cdf(1.0 - tail_tol / 2.0)


def _cauchy_halfwidth(gamma: float, tail_tol: float) -> float:
    return gamma * math.tan(math.pi * (0.5 - tail_tol / 2.0))


def effective_support(spec: SourceSpec, tail_tol: float) -> tuple[float, float]:
    """Interval outside which the f-mass is below tail_tol.

    Exact endpoints for Uniform, quantile-based for Gaussian/Cauchy, the hull
    for mixtures, a single point for PointMass and (-inf, inf) for
    ImproperUniform.
    """
    if not 0.0 < tail_tol <= 1e-2:
        raise ValueError(f"tail_tol must be in (0, 1e-2], got {tail_tol}")
    if isinstance(spec, Gaussian):
        half = _gaussian_halfwidth(spec.sigma, tail_tol)
        return spec.mu - half, spec.mu + half
    if isinstance(spec, Cauchy):
        half = _cauchy_halfwidth(spec.gamma, tail_tol)
        return spec.mu - half, spec.mu + half
    if isinstance(spec, Uniform):
        return spec.a, spec.b
    if isinstance(spec, Mixture):
        # per-component tol keeps total outside-mass <= sum(w_i) * tail_tol = tail_tol
        los, his = zip(*(effective_support(c, tail_tol) for _, c in spec.components))
        return min(los), max(his)
    if isinstance(spec, PointMass):
        return spec.xi0, spec.xi0
    return -math.inf, math.inf


def heavy_tail_params(spec: SourceSpec) -> tuple[float, float] | None:
    """(location, scale) of the heaviest-tailed Cauchy factor, if any."""
    if isinstance(spec, Cauchy):
        return spec.mu, spec.gamma
    if isinstance(spec, Mixture):
        widest = None
        for _, comp in spec.components:
            if isinstance(comp, Cauchy):
                if widest is None or comp.gamma > widest[1]:
                    widest = (comp.mu, comp.gamma)
        return widest
    return None


# ---------------------------------------------------------------------------
# descriptor grammar


def _parse_kv(body: str, fields: tuple[str, ...], kind: str) -> dict[str, float]:
    out: dict[str, float] = {}
    for item in body.split(","):
        if "=" not in item:
            raise InvalidSourceError(f"bad {kind} parameter {item!r}: expected key=value")
        key, _, raw = item.partition("=")
        key = key.strip()
        if key not in fields:
            raise InvalidSourceError(f"unknown {kind} parameter {key!r}")
        try:
            out[key] = float(raw)
        except ValueError:
            raise InvalidSourceError(f"{kind} parameter {key} is not a number: {raw!r}")
    missing = [f for f in fields if f not in out]
    if missing:
        raise InvalidSourceError(f"{kind} descriptor missing {', '.join(missing)}")
    return out


def _parse_simple(text: str) -> SourceSpec:
    kind, _, body = text.partition(":")
    kind = kind.strip().lower()
    if kind == "improper-uniform":
        return ImproperUniform()
    if kind == "gaussian":
        kv = _parse_kv(body, ("mu", "sigma"), kind)
        return Gaussian(kv["mu"], kv["sigma"])
    if kind == "cauchy":
        kv = _parse_kv(body, ("mu", "gamma"), kind)
        return Cauchy(kv["mu"], kv["gamma"])
    if kind == "uniform":
        kv = _parse_kv(body, ("a", "b"), kind)
        return Uniform(kv["a"], kv["b"])
    if kind == "pointmass":
        kv = _parse_kv(body, ("xi0",), kind)
        return PointMass(kv["xi0"])
    raise InvalidSourceError(f"unknown source kind {kind!r}")


def parse_source(text: str) -> SourceSpec:
    """Parse a descriptor string; the result is validated before returning."""
    text = text.strip()
    if text.lower().startswith("mix:"):
        comps = []
        for part in text[4:].split("|"):
            weight_str, star, desc = part.partition("*")
            if not star:
                raise InvalidSourceError(f"bad mixture component {part!r}: expected w*<desc>")
            try:
                weight = float(weight_str)
            except ValueError:
                raise InvalidSourceError(f"bad mixture weight {weight_str!r}")
            comps.append((weight, _parse_simple(desc)))
        spec: SourceSpec = Mixture(tuple(comps))
    else:
        spec = _parse_simple(text)
    validate(spec)
    return spec


def source_descriptor(spec: SourceSpec) -> str:
    """Inverse of parse_source, used to echo configuration into reports."""
    if isinstance(spec, Gaussian):
        return f"gaussian:mu={spec.mu:g},sigma={spec.sigma:g}"
    if isinstance(spec, Cauchy):
        return f"cauchy:mu={spec.mu:g},gamma={spec.gamma:g}"
    if isinstance(spec, Uniform):
        return f"uniform:a={spec.a:g},b={spec.b:g}"
    if isinstance(spec, PointMass):
        return f"pointmass:xi0={spec.xi0:g}"
    if isinstance(spec, ImproperUniform):
        return "improper-uniform"
    parts = [f"{w:g}*{source_descriptor(c)}" for w, c in spec.components]
    return "mix:" + "|".join(parts)
