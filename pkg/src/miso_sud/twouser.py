"""Closed-form two-user machinery.

For two users the per-transmitter problem of maximizing own-signal power at a
fixed interference level has an explicit solution, so the whole rate region
boundary is a two-angle sweep.  This module also carries the
interference-limited variant, the scalar-channel sum-rate maximum, and the
frequency-division baseline with its beats-zero-forcing threshold.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .numlin import FeasibilityError, unitary_completion
from .region import MisoNetwork, RegionSample, rate_from_sinr
from .mreduce import SphericalParams

__all__ = [
    "TwoUserChannel",
    "AngleParams",
    "RatePair",
    "max_signal_given_interference",
    "two_user_region",
    "interference_limited_region",
    "scalar_sud_sum_rate",
    "fdm_region",
    "fdm_beats_zf_condition",
    "fdm_zf_threshold",
]


@dataclass(frozen=True)
class TwoUserChannel:
    """Two-user network: h1, h4 direct and h2, h3 cross channel vectors.

    Receiver 1 sees h1 from its own transmitter and h2 from the other;
    receiver 2 sees h4 from its own and h3 from transmitter 1.  Noise is
    unit variance, so p1, p2 are noise-normalized budgets.
    """

    h1: np.ndarray
    h2: np.ndarray
    h3: np.ndarray
    h4: np.ndarray
    p1: float
    p2: float
    field: str = "complex"

    def __post_init__(self):
        vecs = {k: np.atleast_1d(np.asarray(getattr(self, k))) for k in ("h1", "h2", "h3", "h4")}
        if vecs["h1"].size != vecs["h3"].size:
            raise ValueError("h1 and h3 must share transmitter 1's dimension")
        if vecs["h2"].size != vecs["h4"].size:
            raise ValueError("h2 and h4 must share transmitter 2's dimension")
        if self.p1 < 0 or self.p2 < 0:
            raise ValueError("powers must be non-negative")
        if self.field not in ("real", "complex"):
            raise ValueError("field must be 'real' or 'complex'")
        if self.field == "real" and any(np.iscomplexobj(v) for v in vecs.values()):
            raise ValueError("real-field channel has complex entries")
        for k, v in vecs.items():
            object.__setattr__(self, k, v)
        object.__setattr__(self, "p1", float(self.p1))
        object.__setattr__(self, "p2", float(self.p2))

    @property
    def prefactor(self) -> float:
        return 0.5 if self.field == "real" else 1.0

    def as_network(self) -> MisoNetwork:
        return MisoNetwork(
            channels=(
                np.stack([self.h1, self.h3], axis=1),
                np.stack([self.h2, self.h4], axis=1),
            ),
            powers=(self.p1, self.p2),
            field=self.field,
        )


def _pair_angle(direct, cross) -> float:
    """Angle in [0, pi/2] via the modulus inner product; 0 if a norm vanishes."""
    nd = float(np.linalg.norm(direct))
    nc = float(np.linalg.norm(cross))
    if nd == 0.0 or nc == 0.0:
        return 0.0
    c = abs(complex(np.vdot(cross, direct))) / (nd * nc)
    return float(np.arccos(np.clip(c, 0.0, 1.0)))


@dataclass(frozen=True)
class AngleParams:
    """Channel angles theta_i in [0, pi/2] plus sweep angles psi_i."""

    theta1: float
    theta2: float
    psi1: float = 0.0
    psi2: float = 0.0

    @classmethod
    def from_channel(cls, ch: TwoUserChannel, psi1: float = 0.0, psi2: float = 0.0):
        return cls(
            theta1=_pair_angle(ch.h1, ch.h3),
            theta2=_pair_angle(ch.h4, ch.h2),
            psi1=float(psi1),
            psi2=float(psi2),
        )


class RatePair(NamedTuple):
    r1: float
    r2: float


def max_signal_given_interference(h1, h3, p: float, z: float):
    """Largest own-signal power at interference level exactly z squared.

    Maximizes |h1' gamma|^2 over ||gamma||^2 <= p subject to |h3' gamma| = z
    (the constraint is vacuous when h3 = 0, where z must be 0).  Returns
    (gamma, value); the optimal covariance is the rank-one gamma gamma'.
    """
    h1 = np.atleast_1d(np.asarray(h1))
    h3 = np.atleast_1d(np.asarray(h3))
    if h1.size != h3.size:
        raise ValueError("h1 and h3 must have equal dimension")
    if p < 0:
        raise FeasibilityError("power budget must be non-negative")
    if z < 0:
        raise FeasibilityError("interference level must be non-negative")
    n3 = float(np.linalg.norm(h3))
    n1 = float(np.linalg.norm(h1))
    tol = 1e-9 * max(1.0, np.sqrt(p) * max(n3, 1.0))
    cplx = np.iscomplexobj(h1) or np.iscomplexobj(h3)
    dtype = complex if cplx else float

    if n3 == 0.0:
        if z > tol:
            raise FeasibilityError("nonzero interference required through a zero channel")
        if n1 == 0.0:
            return np.zeros(h1.size, dtype=dtype), 0.0
        gamma = (np.sqrt(p) / n1) * h1.astype(dtype)
        return gamma, p * n1**2

    if z > np.sqrt(p) * n3 + tol:
        raise FeasibilityError("interference level exceeds the power budget times the cross gain")
    a = min(z / n3, np.sqrt(p))

    u3 = unitary_completion(h3)
    h1_hat = u3.conj().T @ h1.astype(dtype)
    lead = complex(h1_hat[0])
    rest = h1_hat[1:]
    nrest = float(np.linalg.norm(rest))
    b = np.sqrt(max(p - a * a, 0.0))

    gamma_hat = np.zeros(h1.size, dtype=dtype)
    k = lead / abs(lead) if abs(lead) > 0.0 else 1.0
    if not cplx:
        k = float(np.real(k))
    gamma_hat[0] = a * k
    if nrest > 0.0:
        gamma_hat[1:] = (b / nrest) * rest
    value = (a * abs(lead) + b * nrest) ** 2
    gamma = u3 @ gamma_hat
    if not cplx:
        gamma = np.real(gamma)
    return gamma, float(value)


def _sweep_tables(ch: TwoUserChannel, bar1: float, bar2: float,
                  grid1: int, grid2: int):
    if grid1 < 2 or grid2 < 2:
        raise ValueError("grid sizes must be at least 2")
    psis1 = np.linspace(0.0, bar1, grid1)
    psis2 = np.linspace(0.0, bar2, grid2)
    n3 = float(np.linalg.norm(ch.h3))
    n2 = float(np.linalg.norm(ch.h2))
    t1 = [max_signal_given_interference(ch.h1, ch.h3, ch.p1, np.sqrt(ch.p1) * n3 * np.sin(ps))
          for ps in psis1]
    t2 = [max_signal_given_interference(ch.h4, ch.h2, ch.p2, np.sqrt(ch.p2) * n2 * np.sin(ps))
          for ps in psis2]
    z1sq = ch.p1 * n3**2 * np.sin(psis1) ** 2
    z2sq = ch.p2 * n2**2 * np.sin(psis2) ** 2
    return psis1, psis2, t1, t2, z1sq, z2sq


def _assemble(ch: TwoUserChannel, bars, grid1: int, grid2: int,
              nats: bool = False) -> list:
    psis1, psis2, t1, t2, z1sq, z2sq = _sweep_tables(ch, bars[0], bars[1], grid1, grid2)
    pref = ch.prefactor
    out = []
    for i1, ps1 in enumerate(psis1):
        g1, v1 = t1[i1]
        for i2, ps2 in enumerate(psis2):
            g2, v2 = t2[i2]
            r1 = rate_from_sinr(v1 / (1.0 + z2sq[i2]), pref, nats)
            r2 = rate_from_sinr(v2 / (1.0 + z1sq[i1]), pref, nats)
            inter = np.array([[v1, z1sq[i1]], [z2sq[i2], v2]])
            out.append(RegionSample(
                params=(SphericalParams((float(ps1),)), SphericalParams((float(ps2),))),
                rates=(float(r1), float(r2)),
                beamformers=(g1, g2),
                interference=inter,
            ))
    return out


def two_user_region(ch: TwoUserChannel, grid1: int = 181, grid2: int = 181,
                    nats: bool = False) -> list:
    """Sample the full rate region boundary sweep.

    psi_i spans [0, pi/2 - theta_i] uniformly; each of the grid1*grid2
    samples carries both beamformers, both rates, and the signal and
    interference powers behind them.
    """
    angles = AngleParams.from_channel(ch)
    bars = (np.pi / 2 - angles.theta1, np.pi / 2 - angles.theta2)
    return _assemble(ch, bars, grid1, grid2, nats)


def interference_limited_region(ch: TwoUserChannel, q1: float, q2: float,
                                grid1: int = 181, grid2: int = 181,
                                nats: bool = False) -> list:
    """Region sweep with per-receiver interference caps q1, q2.

    The caps shrink the sweep ranges to psi_i in [0, min(pi/2 - theta_i,
    asin(sqrt(q_i / (p_i ||h_cross||^2))))].  Both cross channels must be
    nonzero for the caps to be meaningful.
    """
    if q1 < 0 or q2 < 0:
        raise ValueError("interference caps must be non-negative")
    n3 = float(np.linalg.norm(ch.h3))
    n2 = float(np.linalg.norm(ch.h2))
    if n3 == 0.0 or n2 == 0.0:
        raise FeasibilityError("interference-limited sweep needs nonzero cross channels")
    angles = AngleParams.from_channel(ch)
    bars = []
    for theta, q, p, nc in ((angles.theta1, q1, ch.p1, n3), (angles.theta2, q2, ch.p2, n2)):
        if p == 0.0:
            bars.append(np.pi / 2 - theta)
            continue
        cap = np.arcsin(np.sqrt(np.clip(q / (p * nc**2), 0.0, 1.0)))
        bars.append(min(np.pi / 2 - theta, cap))
    return _assemble(ch, tuple(bars), grid1, grid2, nats)


def scalar_sud_sum_rate(p1: float, p2: float, a: float, b: float,
                        nats: bool = False):
    """Maximum treat-interference-as-noise sum rate of the scalar channel.

    Direct gains are 1, cross power gains a (into receiver 1) and b (into
    receiver 2).  The maximum is attained at one of three power corners;
    returns (rate, corner) with ties broken toward both-users-on.
    """
    if min(p1, p2, a, b) < 0:
        raise ValueError("powers and gains must be non-negative")

    def f(x, y):
        return (rate_from_sinr(x / (1.0 + a * y), 1.0, nats)
                + rate_from_sinr(y / (1.0 + b * x), 1.0, nats))

    corners = [(p1, p2), (0.0, p2), (p1, 0.0)]
    vals = [f(x, y) for x, y in corners]
    best = int(np.argmax(vals))
    return float(vals[best]), corners[best]


def fdm_region(ch: TwoUserChannel, grid: int = 101, nats: bool = False) -> list:
    """Frequency-division baseline: bandwidth split alpha against 1 - alpha.

    Each user transmits over its fraction with the matched filter and no
    interference; the endpoints are the single-user corners.
    """
    if grid < 2:
        raise ValueError("grid must be at least 2")
    pref = ch.prefactor
    g1 = ch.p1 * float(np.linalg.norm(ch.h1)) ** 2
    g2 = ch.p2 * float(np.linalg.norm(ch.h4)) ** 2
    out = []
    for alpha in np.linspace(0.0, 1.0, grid):
        r1 = alpha * rate_from_sinr(g1 / alpha, pref, nats) if alpha > 0.0 else 0.0
        beta = 1.0 - alpha
        r2 = beta * rate_from_sinr(g2 / beta, pref, nats) if beta > 0.0 else 0.0
        out.append(RatePair(float(r1), float(r2)))
    return out


def fdm_zf_threshold(p: float) -> float:
    """Cross-channel alignment below which half-band FDM beats zero forcing.

    Evaluated as sqrt(2 / (1 + sqrt(1 + 2p))), algebraically equal to
    sqrt((sqrt(1 + 2p) - 1) / p) but stable for small p.
    """
    if p <= 0:
        raise ValueError("power must be positive")
    return float(np.sqrt(2.0 / (1.0 + np.sqrt(1.0 + 2.0 * p))))


def fdm_beats_zf_condition(theta: float, p: float) -> bool:
    """True when the zero-forcing corner falls inside the FDM region.

    For the symmetric unit-gain channel at angle theta, zero forcing keeps
    sin(theta) of each direct channel, so FDM wins at small angles.
    """
    if not 0.0 <= theta <= np.pi / 2 + 1e-12:
        raise ValueError("theta must lie in [0, pi/2]")
    return bool(np.sin(theta) <= fdm_zf_threshold(p))
