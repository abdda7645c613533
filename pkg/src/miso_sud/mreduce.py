"""Dimension reduction for per-transmitter covariance optimization.

A transmitter with t antennas facing m-1 interference constraints never
needs more than mbar = min(t, m-1) effective dimensions: an accumulated
block-unitary change of basis compresses every interfering cross channel
into a leading mbar-dimensional block, leaving the own channel split into a
low part (seen by the constraints) and a residual that is interference-free.
Rank-one covariances of the reduced block are parametrized by spherical
angles; the lift back to full dimension fills in the residual direction
optimally via the bordered completion of :mod:`miso_sud.rankone`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .numlin import hermitize, unitary_completion
from .rankone import CompletionInput, lemma5_complete

__all__ = [
    "ReducedFrame",
    "SphericalParams",
    "reduce_interference_frame",
    "spherical_rank_one",
    "lift_covariance",
    "powers_closed_form",
    "gamma_from_angles",
    "rank_one_table",
    "best_rank_one_sweep",
]


@dataclass(frozen=True)
class SphericalParams:
    """Sweep angles of one transmitter: mbar polar angles plus phases.

    psi entries sweep [0, pi] in region sweeps (any real value is legal,
    pinned constructions use negatives for obtuse channel angles); omega
    holds one phase per coordinate and stays all-zero for real channels.
    """

    psi: tuple
    omega: tuple

    def __init__(self, psi, omega=None):
        psi = tuple(float(v) for v in np.atleast_1d(psi)) if np.ndim(psi) else (float(psi),)
        if omega is None:
            omega = (0.0,) * len(psi)
        else:
            omega = tuple(float(v) for v in np.atleast_1d(omega))
        if len(omega) != len(psi):
            raise ValueError("psi and omega must have equal length")
        object.__setattr__(self, "psi", psi)
        object.__setattr__(self, "omega", omega)

    @property
    def mbar(self) -> int:
        return len(self.psi)


@dataclass(frozen=True)
class ReducedFrame:
    """Reduced basis of one transmitter's covariance problem.

    transform is the accumulated t x t unitary T; in the new basis the j-th
    interfering vector is (hj_low[j]; 0) and the own channel is
    (h_low; h_hat), so ||h_low||^2 + ||h_hat||^2 = ||h_own||^2.
    """

    transform: np.ndarray
    h_low: np.ndarray
    h_hat: np.ndarray
    hj_low: tuple
    mbar: int

    @property
    def dim(self) -> int:
        return self.transform.shape[0]


def reduce_interference_frame(h_own, h_interf) -> ReducedFrame:
    """Compress interference constraints into a leading mbar-dim block.

    Step j applies a block unitary that is the identity on the first j-1
    coordinates and rotates the tail of interferer j onto its first tail
    coordinate, which leaves earlier interferers untouched and produces the
    upper-triangular support pattern.
    """
    h_own = np.atleast_1d(np.asarray(h_own))
    vecs = [np.atleast_1d(np.asarray(v)) for v in h_interf]
    t = h_own.size
    for v in vecs:
        if v.size != t:
            raise ValueError("all channel vectors must share the transmitter dimension")
    m1 = len(vecs)
    mbar = min(t, m1)
    cplx = np.iscomplexobj(h_own) or any(np.iscomplexobj(v) for v in vecs)
    dtype = complex if cplx else float
    transform = np.eye(t, dtype=dtype)
    own = h_own.astype(dtype)
    work = [v.astype(dtype) for v in vecs]

    if mbar > 0:
        for j in range(min(m1, t)):
            tail = work[j][j:]
            u = unitary_completion(tail)
            uh = u.conj().T
            own[j:] = uh @ own[j:]
            for k in range(j, m1):
                work[k][j:] = uh @ work[k][j:]
            transform[:, j:] = transform[:, j:] @ u

    return ReducedFrame(
        transform=transform,
        h_low=own[:mbar].copy(),
        h_hat=own[mbar:].copy(),
        hj_low=tuple(v[:mbar].copy() for v in work),
        mbar=mbar,
    )


def gamma_from_angles(psis: np.ndarray, omegas=None) -> np.ndarray:
    """Unit-ball direction vectors from spherical angles, vectorized.

    Rows of ``psis`` (n x mbar) produce rows gamma with
    gamma_k = exp(i*omega_k) * sin(psi_k) * prod_{j<k} cos(psi_j),
    so |gamma| <= 1 always.  The signed cosine product (rather than
    sqrt(1 - sum |gamma_j|^2)) keeps full sign coverage when phases are
    pinned to zero for real channels and reproduces the printed two-angle
    covariance entrywise.
    """
    psis = np.atleast_2d(np.asarray(psis, dtype=float))
    sinp = np.sin(psis)
    cosp = np.cos(psis)
    lead = np.cumprod(cosp, axis=1)
    lead = np.concatenate([np.ones((psis.shape[0], 1)), lead[:, :-1]], axis=1)
    gam = sinp * lead
    if omegas is not None:
        om = np.atleast_2d(np.asarray(omegas, dtype=float))
        if np.any(om != 0.0):
            gam = gam * np.exp(1j * om)
    return gam


def spherical_rank_one(p: float, params: SphericalParams):
    """Rank-one reduced covariance S11 = P * gamma gamma^H from sweep angles."""
    if p < 0:
        raise ValueError("power must be non-negative")
    gam = gamma_from_angles(np.asarray(params.psi), np.asarray(params.omega))[0]
    s11 = p * np.outer(gam, gam.conj())
    return gam, hermitize(s11)


def lift_covariance(frame: ReducedFrame, s11, p: float) -> np.ndarray:
    """Lift a reduced covariance to the full antenna basis.

    The residual direction h_hat receives the unused trace budget through
    the bordered completion, so the own-signal power meets the completion
    bound while every interference power is fixed by S11 alone.
    """
    s11 = np.atleast_2d(np.asarray(s11))
    if s11.shape[0] != frame.mbar:
        raise ValueError("S11 must be mbar x mbar")
    comp = CompletionInput(x=frame.h_low, y=frame.h_hat, k11=s11, p=p)
    k = lemma5_complete(comp)
    t = frame.transform
    return hermitize(t @ k @ t.conj().T, tol=1e-6)


def powers_closed_form(norm0, norm1, norm2, theta01, theta12, theta02, p, psi1, psi2):
    """Signal and interference powers of the two-angle rank-one sweep.

    Angles are the pairwise channel angles of the own vector (0) and the two
    interfered receivers' cross vectors (1, 2); theta_hat is the angle
    between the residuals of vectors 0 and 2 after projecting vector 1 out,
    recovered spherically from the three pairwise angles with a pi/2
    fallback when the configuration degenerates.
    """
    s01, s12 = np.sin(theta01), np.sin(theta12)
    denom = s01 * s12
    if denom <= 1e-12:
        theta_hat = np.pi / 2
    else:
        arg = (np.cos(theta02) - np.cos(theta01) * np.cos(theta12)) / denom
        theta_hat = np.arccos(np.clip(arg, -1.0, 1.0))
    sp1, cp1 = np.sin(psi1), np.cos(psi1)
    sp2, cp2 = np.sin(psi2), np.cos(psi2)
    inline = np.cos(theta01) * sp1 + s01 * np.cos(theta_hat) * cp1 * sp2
    resid = s01 * np.sin(theta_hat) * abs(cp1 * cp2)
    signal = p * norm0**2 * (abs(inline) + resid) ** 2
    z1sq = p * norm1**2 * sp1**2
    z2sq = p * norm2**2 * (np.cos(theta12) * sp1 + s12 * cp1 * sp2) ** 2
    return signal, z1sq, z2sq


def rank_one_table(frame: ReducedFrame, p: float, psi_axes, omega_axes=None):
    """Cartesian sweep table over one transmitter's spherical parameters.

    Returns (angles, gammas, signal, zsq, beams):
      angles: (n, k) rows of swept values, psi axes first then omega axes,
              lexicographic with the first axis slowest;
      gammas: (n, mbar) reduced directions;
      signal: (n,) own-signal power after the optimal lift;
      zsq:    (n, len(hj_low)) interference powers at each constrained rx;
      beams:  (n, t) full-dimension beamformers realizing those powers.
    """
    axes = [np.atleast_1d(np.asarray(a, dtype=float)) for a in psi_axes]
    n_psi = len(axes)
    if n_psi != frame.mbar:
        raise ValueError("need one psi axis per reduced dimension")
    use_omega = omega_axes is not None
    if use_omega:
        oaxes = [np.atleast_1d(np.asarray(a, dtype=float)) for a in omega_axes]
        if len(oaxes) != frame.mbar:
            raise ValueError("need one omega axis per reduced dimension")
        axes = axes + oaxes
    if axes:
        mesh = np.meshgrid(*axes, indexing="ij")
        angles = np.stack([g.ravel() for g in mesh], axis=1)
    else:
        angles = np.zeros((1, 0))
    psis = angles[:, :n_psi]
    omegas = angles[:, n_psi:] if use_omega else None
    gam = gamma_from_angles(psis, omegas) if frame.mbar else np.zeros((angles.shape[0], 0))

    own_proj = gam @ frame.h_low.conj() if frame.mbar else np.zeros(angles.shape[0])
    hat_norm = float(np.linalg.norm(frame.h_hat))
    slack = np.sqrt(np.maximum(1.0 - np.sum(np.abs(gam) ** 2, axis=1), 0.0))
    signal = p * (np.abs(own_proj) + hat_norm * slack) ** 2
    if frame.hj_low:
        cross = np.stack([v.conj() for v in frame.hj_low], axis=1)
        zsq = p * np.abs(gam @ cross) ** 2
    else:
        zsq = np.zeros((angles.shape[0], 0))

    # beamformer realizing the lift: reduced part sqrt(P)*gamma, residual part
    # phase-aligned with the own-signal contribution
    t = frame.dim
    cplx = np.iscomplexobj(gam) or np.iscomplexobj(frame.transform)
    kappa = np.zeros((angles.shape[0], t), dtype=complex if cplx else float)
    kappa[:, : frame.mbar] = np.sqrt(p) * gam
    if t > frame.mbar and hat_norm > 0.0:
        mag = np.abs(own_proj)
        if cplx:
            align = np.where(mag > 0.0, own_proj / np.where(mag > 0.0, mag, 1.0), 1.0)
        else:
            align = np.where(own_proj < 0.0, -1.0, 1.0)
        resid = (np.sqrt(p) * slack * align)[:, None] * (frame.h_hat / hat_norm)
        kappa[:, frame.mbar:] = resid
    beams = kappa @ frame.transform.T
    return angles, gam, signal, zsq, beams


def best_rank_one_sweep(h_own, caps, p, grid: int = 0, rounds: int = 12,
                        complex_phases: bool = False):
    """Best rank-one own-signal power under upper interference caps, by sweep.

    caps is a list of (cross_vector, bound) pairs treated as upper limits on
    the interference power.  A coarse grid over the reduced spherical
    parameters seeds several well-separated incumbents; each is refined by
    a deterministic shrinking-box zoom and then a smooth constrained local
    step, which tracks optima that sit on cap boundaries where axis-aligned
    grids lose linear accuracy.  Returns (value, angles, beam).
    """
    vecs = [np.asarray(v) for v, _ in caps]
    bounds = np.array([float(b) for _, b in caps])
    frame = reduce_interference_frame(h_own, vecs)
    mbar = frame.mbar
    tol = 1e-9 * max(1.0, float(bounds.max()) if bounds.size else 1.0)
    n_axes = mbar * (2 if complex_phases and mbar > 1 else 1)
    if grid <= 0:
        grid = {0: 2, 1: 41, 2: 41, 3: 15, 4: 11}.get(min(n_axes, 4), 7)
    zoom_pts = 9 if n_axes <= 2 else (5 if n_axes == 3 else 3)
    n_seeds = 1 if n_axes <= 2 else (4 if n_axes == 3 else 6)
    use_omega = complex_phases and mbar > 1

    def evaluate(psi_axes, omega_axes):
        angles, _, signal, zsq, beams = rank_one_table(frame, p, psi_axes, omega_axes)
        feas = np.all(zsq <= bounds[None, :] + tol, axis=1) if bounds.size else np.ones(
            angles.shape[0], dtype=bool
        )
        if not np.any(feas):
            return None
        idx = int(np.flatnonzero(feas)[np.argmax(signal[feas])])
        return signal[idx], angles[idx], beams[idx]

    psi_axes = [np.linspace(0.0, np.pi, grid)] * mbar
    omega_axes = None
    if use_omega:
        omega_axes = [np.zeros(1)] + [np.linspace(0.0, 2 * np.pi, grid, endpoint=False)] * (
            mbar - 1
        )
    spacing = np.array(
        [np.pi / max(grid - 1, 1)] * mbar
        + ([2 * np.pi / grid] * mbar if use_omega else [])
    )

    def top_candidates():
        angles, _, signal, zsq, beams = rank_one_table(frame, p, psi_axes, omega_axes)
        feas = np.all(zsq <= bounds[None, :] + tol, axis=1) if bounds.size else np.ones(
            angles.shape[0], dtype=bool
        )
        if not np.any(feas):
            # psi = 0 is always feasible (zero interference); the grid
            # contains it, so reaching here means caps are negative or
            # numerics broke
            raise ValueError("no feasible sweep point under the given caps")
        order = np.flatnonzero(feas)
        order = order[np.argsort(signal[order])][::-1]
        chosen = []
        for j in order:
            far = True
            for c in chosen:
                delta = np.abs(angles[j] - angles[c])
                if use_omega:
                    w = delta[mbar:]
                    delta[mbar:] = np.minimum(w, 2 * np.pi - w)
                # seeds two coarse cells apart count as distinct basins
                if float(np.max(delta / spacing)) < 2.0:
                    far = False
                    break
            if far:
                chosen.append(j)
                if len(chosen) == n_seeds:
                    break
        return [(float(signal[j]), angles[j], beams[j]) for j in chosen]

    def table_at(x):
        psi_ax = [np.array([v]) for v in x[:mbar]]
        om_ax = None
        if use_omega:
            om_ax = [np.zeros(1)] + [np.array([v]) for v in x[mbar:]]
        _, _, sig, zs, beams = rank_one_table(frame, p, psi_ax, om_ax)
        return float(sig[0]), zs[0], beams[0]

    def polish(seed):
        free = mbar + (mbar - 1 if use_omega else 0)
        if free == 0:
            return seed
        center = seed[1]
        if use_omega:
            x0 = np.concatenate([center[:mbar], center[mbar + 1:]])
        else:
            x0 = np.array(center[:mbar], dtype=float)
        cons = []
        if bounds.size:
            cons.append({"type": "ineq", "fun": lambda x: bounds - table_at(x)[1]})
        res = minimize(lambda x: -table_at(x)[0], x0, method="SLSQP",
                       constraints=cons, options={"maxiter": 120, "ftol": 1e-12})
        x = np.asarray(res.x, dtype=float)
        if not np.all(np.isfinite(x)):
            return seed
        val, zs, beam = table_at(x)
        if bounds.size and np.any(zs > bounds + tol):
            # walk back toward the feasible start until the caps hold again
            ts = np.linspace(1.0, 0.0, 33)[1:]
            for t in ts:
                xt = x0 + t * (x - x0)
                val, zs, beam = table_at(xt)
                if not bounds.size or np.all(zs <= bounds + tol):
                    x = xt
                    break
            else:
                return seed
        if val <= seed[0]:
            return seed
        if use_omega:
            angles = np.concatenate([x[:mbar], [center[mbar]], x[mbar:]])
        else:
            angles = x
        return val, angles, beam

    best = None
    for seed in top_candidates():
        cur = seed
        width_psi = np.pi / max(grid - 1, 1)
        width_om = 2 * np.pi / grid if use_omega else 0.0
        shrinks = 0
        steps = 0
        while shrinks < rounds and steps < 5 * rounds:
            steps += 1
            center = cur[1]
            z_psi = [center[i] + np.linspace(-width_psi, width_psi, zoom_pts)
                     for i in range(mbar)]
            z_om = None
            if use_omega:
                z_om = [np.atleast_1d(center[mbar])] + [
                    center[mbar + i] + np.linspace(-width_om, width_om, zoom_pts)
                    for i in range(1, mbar)
                ]
            cand = evaluate(z_psi, z_om)
            moved = False
            if cand is not None and cand[0] > cur[0]:
                moved = cand[0] - cur[0] > 1e-6 * max(1.0, abs(cur[0]))
                cur = cand
            if not moved:
                width_psi /= 3.0
                width_om /= 3.0
                shrinks += 1
        cur = polish(cur)
        if best is None or cur[0] > best[0]:
            best = cur
    return best
