"""Bordered quadratic form maximization with a pinned upper-left block.

Given a PSD block K11, vectors x, y and a trace budget P, the largest value
of [x; y]^H K [x; y] over PSD completions K with upper-left block K11 and
trace(K) <= P is

    (sqrt(x^H K11 x) + ||y|| * sqrt(P - trace(K11)))^2

and a completion achieving it never needs rank above max{rank(K11), 1}.
This module evaluates the bound and builds that completion explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numlin import FeasibilityError, eig_hermitian, hermitize

__all__ = ["CompletionInput", "lemma5_bound", "lemma5_complete"]

# relative thresholds for the degenerate-case branches
_XKX_ZERO_REL = 1e-12
_YNORM_ZERO = 1e-12
_EIG_TRUNC_REL = 1e-12


@dataclass(frozen=True)
class CompletionInput:
    """Inputs of the completion problem: blocks sized t1 (x, K11) and t2 (y)."""

    x: np.ndarray
    y: np.ndarray
    k11: np.ndarray
    p: float

    def __post_init__(self):
        x = np.atleast_1d(np.asarray(self.x))
        y = np.atleast_1d(np.asarray(self.y))
        k11 = hermitize(np.atleast_2d(np.asarray(self.k11)))
        if k11.shape[0] != x.size:
            raise ValueError("K11 must be square with the dimension of x")
        lam, _ = eig_hermitian(k11)
        scale = max(1.0, float(lam[-1]) if lam.size else 0.0)
        if lam.size and lam[0] < -1e-9 * scale:
            raise ValueError(f"K11 is not PSD (min eigenvalue {lam[0]:.3e})")
        if np.trace(k11).real > self.p + 1e-12:
            raise FeasibilityError("trace(K11) exceeds the power budget P")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "k11", k11)
        object.__setattr__(self, "p", float(self.p))


def _slack(inp: CompletionInput) -> float:
    # trace slack, clamped so roundoff at the budget cannot go negative
    return max(float(inp.p - np.trace(inp.k11).real), 0.0)


def lemma5_bound(inp: CompletionInput) -> float:
    """Tight upper bound on [x; y]^H K [x; y] over admissible completions."""
    xkx = float(np.real(inp.x.conj() @ inp.k11 @ inp.x))
    xkx = max(xkx, 0.0)
    ynorm = float(np.linalg.norm(inp.y))
    return (np.sqrt(xkx) + ynorm * np.sqrt(_slack(inp))) ** 2


def _sqrt_factor(k11: np.ndarray) -> tuple[np.ndarray, int]:
    """Square root in the form [diag(sqrt(lam_desc)) 0; 0 0] @ Q, rows sorted
    so the r strictly positive eigenvalues come first.  Returns (root, r)."""
    lam, q = eig_hermitian(k11)
    lam, q = lam[::-1], q[:, ::-1]
    lam_max = float(lam[0]) if lam.size else 0.0
    keep = lam > _EIG_TRUNC_REL * max(lam_max, 0.0)
    r = int(np.count_nonzero(keep))
    root = np.zeros_like(q)
    if r:
        root[:r, :] = (np.sqrt(lam[:r])[:, None]) * q[:, :r].conj().T
    return root, r


def lemma5_complete(inp: CompletionInput) -> np.ndarray:
    """Completion K* attaining lemma5_bound without raising rank.

    The three construction branches are keyed on whether x^H K11 x and ||y||
    vanish; in the degenerate branches the optimizer is not unique and the
    rank-minimal choice is returned.
    """
    t1, t2 = inp.x.size, inp.y.size
    cplx = any(np.iscomplexobj(v) for v in (inp.x, inp.y, inp.k11))
    dtype = complex if cplx else float
    out = np.zeros((t1 + t2, t1 + t2), dtype=dtype)
    out[:t1, :t1] = inp.k11
    xkx = max(float(np.real(inp.x.conj() @ inp.k11 @ inp.x)), 0.0)
    ynorm = float(np.linalg.norm(inp.y))
    slack = _slack(inp)
    xkx_floor = _XKX_ZERO_REL * float(np.vdot(inp.x, inp.x).real) * max(
        float(np.trace(inp.k11).real), 0.0
    )

    if ynorm <= _YNORM_ZERO or t2 == 0:
        pass  # zero border: K* = diag(K11, 0)
    elif xkx > xkx_floor and xkx > 0.0:
        scale = np.sqrt(slack) / (ynorm * np.sqrt(xkx))
        k21 = scale * np.outer(inp.y, inp.x.conj() @ inp.k11)
        k22 = (slack / ynorm**2) * np.outer(inp.y, inp.y.conj())
        out[t1:, :t1] = k21
        out[:t1, t1:] = k21.conj().T
        out[t1:, t1:] = k22
    else:
        # x^H K11 x = 0: pour the trace slack onto y through any column of
        # the root whose row index lands in the positive-eigenvalue block
        root, _ = _sqrt_factor(inp.k11)
        first_row = root[0, :] if t1 else np.zeros(0, dtype=dtype)
        k21 = (np.sqrt(slack) / ynorm) * np.outer(inp.y, first_row)
        k22 = (slack / ynorm**2) * np.outer(inp.y, inp.y.conj())
        out[t1:, :t1] = k21
        out[:t1, t1:] = k21.conj().T
        out[t1:, t1:] = k22
    return hermitize(out, tol=1e-6)
