"""Block-fading link models: transmit power -> per-slot channel service probability.

A link can carry one task (or result) in a slot when the received SNR
``P * g / N0`` exceeds the threshold ``gamma``. With ``F`` the CDF of the
squared channel gain ``g`` this happens with probability
``1 - F(gamma * N0 / P)``. Under Rayleigh fading the gain is exponential and
the probability collapses to ``exp(-Gamma / P)`` with
``Gamma = gamma * N0 / mean_gain``.

All powers are in watts.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import DomainError, UnachievableError

__all__ = [
    "Link",
    "RayleighChannel",
    "CdfChannel",
    "TableCdf",
    "service_probability",
    "inverse_service_probability",
    "gamma_from_physical",
    "exponential_cdf",
]

_INVERSE_RTOL = 1e-10


class Link(enum.Enum):
    """The four orthogonal links. There is no direct source-to-higher link."""

    SR = "sr"  # source -> relay
    RS = "rs"  # relay -> source
    RH = "rh"  # relay -> higher station
    HR = "hr"  # higher station -> relay


def _as_link(link) -> Link:
    if isinstance(link, Link):
        return link
    try:
        return Link(str(link).lower())
    except ValueError:
        raise DomainError(f"unknown link {link!r}") from None


def gamma_from_physical(gamma_thr: float, mean_gain: float, noise: float) -> float:
    """Effective Rayleigh threshold ``gamma * N0 / mean_gain`` in watts."""
    for name, v in (("gamma_thr", gamma_thr), ("mean_gain", mean_gain), ("noise", noise)):
        if not v > 0:
            raise DomainError(f"{name} must be positive, got {v!r}")
    return gamma_thr * noise / mean_gain


def _check_power(power):
    p = np.asarray(power, dtype=float)
    if np.any(~(p > 0)):
        raise DomainError(f"power must be positive, got {power!r}")
    return p


def _scalarize(x):
    return float(x) if np.ndim(x) == 0 else x


@dataclass(frozen=True)
class RayleighChannel:
    """Rayleigh fading on every link, described by its effective thresholds (W)."""

    gamma_sr: float
    gamma_rs: float
    gamma_rh: float
    gamma_hr: float

    def __post_init__(self):
        for link in Link:
            g = self.gamma(link)
            if not (g > 0 and math.isfinite(g)):
                raise DomainError(f"gamma_{link.value} must be positive and finite, got {g!r}")

    @classmethod
    def uniform(cls, gamma: float) -> "RayleighChannel":
        return cls(gamma, gamma, gamma, gamma)

    def gamma(self, link) -> float:
        return getattr(self, f"gamma_{_as_link(link).value}")

    def service_probability(self, link, power):
        p = _check_power(power)
        with np.errstate(over="ignore"):  # tiny powers give exp(-inf) = 0
            return _scalarize(np.exp(-self.gamma(link) / p))

    def sup_probability(self, link) -> float:
        return 1.0

    def inverse_service_probability(self, link, q: float) -> float:
        if not 0.0 < q < 1.0:
            raise UnachievableError(f"q={q!r} is not achievable on a Rayleigh link")
        return -self.gamma(link) / math.log(q)


def exponential_cdf(mean_gain: float = 1.0) -> Callable:
    """CDF of an exponential squared gain (Rayleigh amplitude)."""
    if not mean_gain > 0:
        raise DomainError("mean_gain must be positive")

    def cdf(g):
        g = np.asarray(g, dtype=float)
        return _scalarize(-np.expm1(-np.maximum(g, 0.0) / mean_gain))

    return cdf


@dataclass(frozen=True)
class TableCdf:
    """Piecewise-linear CDF through tabulated ``(g, F(g))`` points.

    Below the first abscissa the CDF is interpolated from ``(0, 0)`` unless the
    table already starts at ``g = 0``; above the last point it stays at the last
    tabulated value.
    """

    points: tuple

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
            raise DomainError("gain_cdf needs at least two [g, F(g)] pairs")
        g, f = pts[:, 0], pts[:, 1]
        if np.any(g < 0) or np.any(np.diff(g) <= 0):
            raise DomainError("gain_cdf abscissae must be nonnegative and strictly increasing")
        if np.any(np.diff(f) < 0) or f.min() < 0 or f.max() > 1:
            raise DomainError("gain_cdf values must be nondecreasing within [0, 1]")
        if g[0] > 0:
            pts = np.vstack([[0.0, 0.0], pts])
        object.__setattr__(self, "_g", pts[:, 0].copy())
        object.__setattr__(self, "_f", pts[:, 1].copy())

    @classmethod
    def from_pairs(cls, pairs: Sequence[Sequence[float]]) -> "TableCdf":
        return cls(tuple(tuple(map(float, p)) for p in pairs))

    def __call__(self, g):
        return _scalarize(np.interp(g, self._g, self._f))


@dataclass(frozen=True)
class CdfChannel:
    """Arbitrary fading: one squared-gain CDF per link plus SNR threshold and noise.

    ``cdfs`` maps each :class:`Link` to a nondecreasing, numpy-vectorized callable
    with range in [0, 1].
    """

    cdfs: Mapping
    snr_threshold: float
    noise_w: float
    _scale: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not (self.snr_threshold > 0 and self.noise_w > 0):
            raise DomainError("snr_threshold and noise_w must be positive")
        cdfs = {_as_link(k): v for k, v in dict(self.cdfs).items()}
        missing = [l.value for l in Link if l not in cdfs]
        if missing:
            raise DomainError(f"missing CDF for links {missing}")
        object.__setattr__(self, "cdfs", cdfs)
        object.__setattr__(self, "_scale", self.snr_threshold * self.noise_w)

    @classmethod
    def same_for_all(cls, cdf: Callable, snr_threshold: float, noise_w: float) -> "CdfChannel":
        return cls({l: cdf for l in Link}, snr_threshold, noise_w)

    def service_probability(self, link, power):
        p = _check_power(power)
        f = np.asarray(self.cdfs[_as_link(link)](self._scale / p), dtype=float)
        return _scalarize(1.0 - f)

    def sup_probability(self, link) -> float:
        # limit P -> inf, i.e. CDF evaluated at 0+
        return float(1.0 - self.cdfs[_as_link(link)](0.0))

    def inverse_service_probability(self, link, q: float) -> float:
        link = _as_link(link)
        if not 0.0 < q < self.sup_probability(link):
            raise UnachievableError(
                f"q={q!r} is outside the achievable range (0, {self.sup_probability(link)!r}) "
                f"on link {link.value}"
            )

        def excess(p):
            return self.service_probability(link, p) - q

        lo, hi = self._scale * 1e-6, self._scale * 1e6
        for _ in range(60):
            if excess(lo) < 0:
                break
            lo *= 1e-3
        else:
            raise UnachievableError(f"could not bracket q={q!r} from below on link {link.value}")
        for _ in range(60):
            if excess(hi) >= 0:
                break
            hi *= 1e3
        else:
            raise UnachievableError(f"q={q!r} not reached at any tested power on link {link.value}")
        # smallest P with q^t(P) >= q
        while hi - lo > _INVERSE_RTOL * hi:
            mid = 0.5 * (lo + hi)
            if excess(mid) >= 0:
                hi = mid
            else:
                lo = mid
        return hi


def service_probability(model, link, power):
    """Per-slot probability that ``link`` can carry one transmission at ``power``."""
    return model.service_probability(link, power)


def inverse_service_probability(model, link, q: float) -> float:
    """Power (W) at which ``link`` reaches service probability ``q``."""
    return model.inverse_service_probability(link, q)


def channel_from_dict(spec: Mapping) -> RayleighChannel | CdfChannel:
    """Build a channel model from its JSON description.

    ``{"type": "rayleigh", "gamma_sr": ..., ...}`` or
    ``{"type": "table", "gain_cdf": [[g, F], ...], "snr_threshold": .., "noise_w": ..}``.
    For tables ``gain_cdf`` may also be a mapping from link name to its own table.
    """
    kind = spec.get("type")
    if kind == "rayleigh":
        if "gamma" in spec and not any(f"gamma_{l.value}" in spec for l in Link):
            return RayleighChannel.uniform(float(spec["gamma"]))
        try:
            return RayleighChannel(*(float(spec[f"gamma_{l.value}"]) for l in Link))
        except KeyError as e:
            raise DomainError(f"{e.args[0]} required for rayleigh channel") from None
    if kind == "table":
        for key in ("gain_cdf", "snr_threshold", "noise_w"):
            if key not in spec:
                raise DomainError(f"{key} required for table channel")
        table = spec["gain_cdf"]
        if isinstance(table, Mapping):
            cdfs = {_as_link(k): TableCdf.from_pairs(v) for k, v in table.items()}
        else:
            cdf = TableCdf.from_pairs(table)
            cdfs = {l: cdf for l in Link}
        return CdfChannel(cdfs, float(spec["snr_threshold"]), float(spec["noise_w"]))
    raise DomainError(f"unknown channel type {kind!r}")


def channel_to_dict(model) -> dict:
    if isinstance(model, RayleighChannel):
        return {"type": "rayleigh", **{f"gamma_{l.value}": model.gamma(l) for l in Link}}
    if isinstance(model, CdfChannel) and all(isinstance(c, TableCdf) for c in model.cdfs.values()):
        return {
            "type": "table",
            "gain_cdf": {l.value: [list(p) for p in model.cdfs[l].points] for l in Link},
            "snr_threshold": model.snr_threshold,
            "noise_w": model.noise_w,
        }
    raise DomainError("only Rayleigh and tabulated channels are serializable")
