"""Named distribution families and the ``name:key=value`` spec grammar."""

from __future__ import annotations

import inspect
import math
import re
from pathlib import Path
from typing import Callable

import numpy as np

from .dist import ExplicitDistribution, InvalidDistribution, read_csv

_REGISTRY: dict[str, Callable[..., ExplicitDistribution]] = {}


def _family(fn):
    _REGISTRY[fn.__name__.removeprefix("_")] = fn
    return fn


def _need(cond: bool, msg: str) -> None:
    if not cond:
        raise InvalidDistribution(msg)


@_family
def _uniform(n: int) -> ExplicitDistribution:
    """Uniform over n labels."""
    _need(n >= 1, "uniform needs n >= 1")
    return ExplicitDistribution.from_masses(np.full(n, 1.0 / n))


@_family
def _point(n: int = 1) -> ExplicitDistribution:
    """Point mass on label 0, padded with n-1 zero-mass labels."""
    _need(n >= 1, "point needs n >= 1")
    m = np.zeros(n)
    m[0] = 1.0
    return ExplicitDistribution.from_masses(m)


@_family
def _two_level(n: int, heavy: int = 1, heavy_mass: float = 0.5) -> ExplicitDistribution:
    """`heavy` labels of mass `heavy_mass` each, the rest uniform."""
    _need(n >= 1 and 0 <= heavy <= n, "two_level needs 0 <= heavy <= n")
    _need(0 <= heavy_mass and heavy * heavy_mass <= 1 + 1e-15, "heavy mass exceeds 1")
    rest = 1.0 - heavy * heavy_mass
    if heavy == n:
        _need(abs(rest) <= 1e-12, "heavy labels must carry all mass when heavy == n")
        return ExplicitDistribution.from_masses(np.full(n, 1.0 / n))
    m = np.full(n, rest / (n - heavy))
    m[:heavy] = heavy_mass
    return ExplicitDistribution.from_masses(m)


@_family
def _zipf(n: int, s: float = 1.0) -> ExplicitDistribution:
    """Masses proportional to 1/i^s."""
    _need(n >= 1 and s >= 0, "zipf needs n >= 1, s >= 0")
    return ExplicitDistribution.from_weights(np.arange(1, n + 1, dtype=float) ** -s)


@_family
def _geometric(n: int, ratio: float = 0.5) -> ExplicitDistribution:
    """Masses proportional to ratio^i, i = 0..n-1."""
    _need(n >= 1 and 0 < ratio <= 1, "geometric needs n >= 1, 0 < ratio <= 1")
    return ExplicitDistribution.from_weights(ratio ** np.arange(n, dtype=float))


@_family
def _paired_flat(j: int) -> ExplicitDistribution:
    """2j labels of equal mass, read as j pairs."""
    _need(j >= 1, "paired_flat needs j >= 1")
    return ExplicitDistribution.from_masses(np.full(2 * j, 1.0 / (2 * j)))


@_family
def _paired(j: int, seed: int = 0, spread: float = 4.0) -> ExplicitDistribution:
    """j pairs with mu(2j) <= mu(2j-1) <= sqrt(2) mu(2j); pair weights vary by up to `spread`."""
    _need(j >= 1 and spread >= 1, "paired needs j >= 1, spread >= 1")
    rng = np.random.default_rng(seed)
    low = rng.uniform(1.0, spread, size=j)
    ratio = rng.uniform(1.0, math.sqrt(2.0), size=j)
    w = np.empty(2 * j)
    w[0::2] = low * ratio
    w[1::2] = low
    return ExplicitDistribution.from_weights(w)


@_family
def _friendly(n: int, spread: float = 0.3) -> ExplicitDistribution:
    """Deviations linear in [-spread, spread]; friendly while spread <= 6/13."""
    _need(n >= 1 and 0 <= spread < 1, "friendly needs n >= 1, 0 <= spread < 1")
    delta = np.linspace(spread, -spread, n) if n > 1 else np.zeros(1)
    return ExplicitDistribution.from_weights(1.0 + delta)


@_family
def _unfriendly(n: int, zeros: int = 1) -> ExplicitDistribution:
    """Uniform over n - zeros labels plus `zeros` zero-mass labels."""
    _need(0 <= zeros < n, "unfriendly needs 0 <= zeros < n")
    m = np.zeros(n)
    m[: n - zeros] = 1.0 / (n - zeros)
    return ExplicitDistribution.from_masses(m)


@_family
def _dusted(n: int, k: int = 1, light: float = 0.1) -> ExplicitDistribution:
    """n - k equal labels plus k light labels at `light` times their mass."""
    _need(0 <= k < n and 0 <= light, "dusted needs 0 <= k < n, light >= 0")
    w = np.ones(n)
    w[n - k:] = light
    return ExplicitDistribution.from_weights(w)


@_family
def _step(n: int, high: int = 1, ratio: float = 2.0) -> ExplicitDistribution:
    """`high` labels at `ratio` times the mass of the other n - high."""
    _need(0 <= high <= n and ratio > 0, "step needs 0 <= high <= n, ratio > 0")
    w = np.ones(n)
    w[:high] = ratio
    return ExplicitDistribution.from_weights(w)


def zoo_names() -> list[str]:
    return sorted(_REGISTRY)


def zoo_doc(name: str) -> str:
    fn = _REGISTRY[name]
    return f"{name}{inspect.signature(fn)}: {inspect.getdoc(fn)}"


def zoo(name: str, **params) -> ExplicitDistribution:
    """Build a named family member; parameters are keyword-only."""
    try:
        fn = _REGISTRY[name]
    except KeyError:
        raise InvalidDistribution(f"unknown distribution {name!r}; known: {', '.join(zoo_names())}") from None
    sig = inspect.signature(fn)
    unknown = set(params) - set(sig.parameters)
    if unknown:
        raise InvalidDistribution(f"{name}: unknown parameter(s) {sorted(unknown)}")
    try:
        return fn(**params)
    except TypeError as exc:
        raise InvalidDistribution(f"{name}: {exc}") from None


class SpecError(InvalidDistribution):
    def __init__(self, text: str, pos: int, msg: str):
        super().__init__(f"{msg} at position {pos}: {text!r}")
        self.pos = pos


_KEY = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


def _coerce(name: str, key: str, raw: str):
    fn = _REGISTRY[name]
    param = inspect.signature(fn).parameters.get(key)
    kind = param.annotation if param is not None else "float"
    if kind in (int, "int"):
        return int(raw)
    return float(raw)


def parse_dist_spec(s: str) -> ExplicitDistribution:
    """Parse ``name:key=value,...`` or ``@file.csv``."""
    text = s.strip()
    if text.startswith("@"):
        path = Path(text[1:])
        if not path.is_file():
            raise SpecError(s, 1, f"no such file {str(path)!r}")
        return read_csv(path)
    name, _, rest = text.partition(":")
    if not _KEY.fullmatch(name):
        raise SpecError(s, 0, "expected a distribution name")
    if name not in _REGISTRY:
        raise SpecError(s, 0, f"unknown distribution {name!r}")
    params = {}
    pos = len(name) + 1
    if rest:
        for item in rest.split(","):
            key, eq, raw = item.partition("=")
            key = key.strip()
            if not eq or not _KEY.fullmatch(key) or not raw.strip():
                raise SpecError(s, pos, "expected key=value")
            try:
                params[key] = _coerce(name, key, raw.strip())
            except ValueError:
                raise SpecError(s, pos + len(key) + 1, f"bad value for {key!r}") from None
            pos += len(item) + 1
    return zoo(name, **params)
