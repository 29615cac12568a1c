"""Hyperbolic splittings, scaling parameters and the coordinate change C0.

For an orbit window the stable/unstable directions are estimated from the
most contracted forward direction and the most expanded backward image of
the finite cocycle (exact eigenvectors are used for the linear model).
The scaling parameters are the truncated series

    S^2(x, xi) = 2 sum_{m>=0} |df^m xi|^2,
    U^2(x, xi) = 2 sum_{m>=0} |df^-m xi|^2,

accepted only when the final summand certifies a geometric tail.  The
change of coordinates C0 has columns e_s / S(e_s) and e_u / U(e_u), which
maps the Euclidean plane isometrically onto the splitting equipped with
the orbit-adapted inner product; C0 is a contraction and the norm of its
inverse obeys the sup-ratio formula

    |C0^{-1}|^2 = sup (S^2(xi_s) + U^2(xi_u)) / |xi_s + xi_u|^2 .

The reduced derivative D0 = C0(fx)^{-1} df C0(x) is block diagonal up to
truncation noise.  Only its diagonal blocks are kept (the measured
off-diagonal mass is reported as a residual); all chart-level machinery
downstream consumes the blocks, never the raw matrix sandwich, which is
what keeps chart-scale arithmetic exact for the linear model.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import NoDominance, TailNotCertified
from .orbits import OrbitWindow, cocycle
from .torus import LinearEndo

TAIL_RATIO_MAX = 0.999
DOMINANCE_GAP = 1e-6


@dataclass(frozen=True)
class Splitting:
    """Unit stable/unstable directions at the present point (d_s = d_u = 1)."""

    e_s: np.ndarray
    e_u: np.ndarray
    d_s: int = 1
    d_u: int = 1

    def angle(self) -> float:
        c = float(np.clip(self.e_s @ self.e_u, -1.0, 1.0))
        return float(np.arccos(abs(c))) if abs(c) < 1.0 else 0.0

    def coords(self, v: np.ndarray) -> Tuple[float, float]:
        """Coefficients (alpha, beta) with v = alpha e_s + beta e_u."""
        B = np.column_stack([self.e_s, self.e_u])
        sol = np.linalg.solve(B, np.asarray(v, float))
        return float(sol[0]), float(sol[1])


def _sign_fix(v: np.ndarray) -> np.ndarray:
    lead = v[0] if v[0] != 0.0 else v[1]
    return v if lead > 0 else -v


def compute_splitting(o: OrbitWindow, n: int) -> Splitting:
    """Stable/unstable directions from the length-n finite cocycle.

    e_s is the most contracted forward singular direction of df^n at the
    present point; e_u is the normalized image of the most expanded
    direction of the backward-window product.  For a linear model the
    closed-form eigenvectors are returned.

    Raises:
        NoDominance: relative singular-value gap below 1e-6.
        WindowExhausted / DegenerateJacobian: propagated from the cocycle.
    """
    if isinstance(o.model, LinearEndo):
        _, _, e_s, e_u = o.model.eigen_data()
        return Splitting(e_s=e_s, e_u=e_u)
    n_back = min(n, o.past_len)
    Mf = cocycle(o, n).matrix
    Mb = cocycle(o.shift(-n_back), n_back).matrix
    Uf, sf, Vtf = np.linalg.svd(Mf)
    Ub, sb, Vtb = np.linalg.svd(Mb)
    if sf[0] <= 0 or (sf[0] - sf[1]) / sf[0] < DOMINANCE_GAP:
        raise NoDominance(f"forward singular gap too small: {sf.tolist()}")
    if sb[0] <= 0 or (sb[0] - sb[1]) / sb[0] < DOMINANCE_GAP:
        raise NoDominance(f"backward singular gap too small: {sb.tolist()}")
    e_s = _sign_fix(Vtf[1])          # most contracted forward direction
    e_u = _sign_fix(Ub[:, 0])        # image of the most expanded direction
    if abs(float(np.cross(e_s, e_u))) < 1e-8:
        raise NoDominance("stable and unstable directions nearly collinear")
    return Splitting(e_s=e_s, e_u=e_u)


def _scaling(o: OrbitWindow, xi: np.ndarray, n: int, forward: bool) -> Tuple[float, float]:
    import math

    xi = np.asarray(xi, float)
    if float(np.linalg.norm(xi)) == 0.0:
        raise ValueError("scaling of the zero vector is undefined")
    v = xi.copy()
    terms = [2.0 * float(v @ v)]
    for m in range(1, n + 1):
        if forward:
            J = o.model.jacobian(o.point(m - 1))
            v = J @ v
        else:
            J = o.model.jacobian(o.point(-m))
            v = np.linalg.solve(J, v)
        terms.append(2.0 * float(v @ v))
    total = math.fsum(terms)
    if n == 0:
        return total, 0.0
    ratio = terms[-1] / terms[-2]
    if not ratio < TAIL_RATIO_MAX:
        raise TailNotCertified(f"final-term ratio {ratio:.6f} >= {TAIL_RATIO_MAX}")
    tail = terms[-1] * ratio / (1.0 - ratio)
    return total, tail


def scaling_S(o: OrbitWindow, xi: np.ndarray, n: int) -> Tuple[float, float]:
    """Truncated S^2(x, xi) with a certified geometric tail bound.

    Returns (value, tail); the untruncated series lies in
    [value, value + tail].  Raises TailNotCertified when the final-term
    contraction ratio is >= 0.999.
    """
    return _scaling(o, xi, n, forward=True)


def scaling_U(o: OrbitWindow, xi: np.ndarray, n: int) -> Tuple[float, float]:
    """Backward analogue of ``scaling_S`` along the stored past."""
    return _scaling(o, xi, n, forward=False)


@dataclass(frozen=True)
class LyapFrame:
    """Scaling data and coordinate change at one orbit window.

    C0's columns span e_s and e_u with lengths 1/s and 1/u, so C0 is a
    contraction (s, u >= sqrt(2)); ``C0_inv_norm`` is its exact operator
    inverse norm, which for an orthogonal splitting equals max(s, u).
    ``tail_bound`` bounds the truncation slack of s^2 and u^2.
    """

    splitting: Splitting
    s: float
    u: float
    C0: np.ndarray
    C0_inv: np.ndarray
    C0_inv_norm: float
    trunc_N: int
    tail_s: float
    tail_u: float

    @property
    def tail_bound(self) -> float:
        return max(self.tail_s, self.tail_u)

    def coords(self, w: np.ndarray) -> np.ndarray:
        """Chart coordinates of a tangent displacement w."""
        return self.C0_inv @ np.asarray(w, float)

    def embed(self, v: np.ndarray) -> np.ndarray:
        """Tangent displacement of chart coordinates v."""
        return self.C0 @ np.asarray(v, float)

    def to_json(self) -> dict:
        return {"e_s": self.splitting.e_s.tolist(),
                "e_u": self.splitting.e_u.tolist(),
                "s": self.s, "u": self.u,
                "C0": self.C0.tolist(),
                "C0_inv_norm": self.C0_inv_norm,
                "trunc_N": self.trunc_N,
                "tail_s": self.tail_s, "tail_u": self.tail_u}


def build_frame(o: OrbitWindow, n: int) -> LyapFrame:
    """Assemble the Lyapunov frame at a window from splitting and scalings."""
    sp = compute_splitting(o, n)
    s2, tail_s = scaling_S(o, sp.e_s, n)
    u2, tail_u = scaling_U(o, sp.e_u, min(n, o.past_len))
    s = float(np.sqrt(s2))
    u = float(np.sqrt(u2))
    C0 = np.column_stack([sp.e_s / s, sp.e_u / u])
    C0_inv = np.linalg.inv(C0)
    inv_norm = float(np.linalg.norm(C0_inv, 2))
    return LyapFrame(splitting=sp, s=s, u=u, C0=C0, C0_inv=C0_inv,
                     C0_inv_norm=inv_norm, trunc_N=n,
                     tail_s=tail_s, tail_u=tail_u)


@dataclass(frozen=True)
class ReducedDerivative:
    """Diagonal blocks of C0(fx)^{-1} df C0(x), plus the dropped mass.

    The full sandwich is block diagonal in exact arithmetic; the computed
    off-diagonal entries are truncation and rounding noise, so they are
    measured into ``offdiag_residual`` and every consumer works with the
    blocks alone.
    """

    D_s: float
    D_u: float
    offdiag_residual: float

    def to_json(self) -> dict:
        return {"D_s": self.D_s, "D_u": self.D_u,
                "offdiag_residual": self.offdiag_residual}


def reduced_between(frame_x: LyapFrame, frame_fx: LyapFrame,
                    J: np.ndarray) -> ReducedDerivative:
    """Reduced derivative blocks between two explicit frames."""
    D = frame_fx.C0_inv @ J @ frame_x.C0
    off = max(abs(float(D[0, 1])), abs(float(D[1, 0])))
    return ReducedDerivative(D_s=float(D[0, 0]), D_u=float(D[1, 1]),
                             offdiag_residual=off)


def reduced_derivative(o: OrbitWindow, n: int) -> ReducedDerivative:
    """Reduced derivative at a window, using frames at x and f(x)."""
    fr0 = build_frame(o, n)
    fr1 = build_frame(o.shift(1), n)
    J = o.model.jacobian(o.point(0))
    return reduced_between(fr0, fr1, J)


def d1_bounds_ok(rd: ReducedDerivative, frame_x: LyapFrame, frame_fx: LyapFrame,
                 d_sing: float, a: float, rel_slack: float = 1e-9) -> dict:
    """Check the reduced-derivative block bounds with certified tails.

    Upper bounds use the certified upper estimates s^2 + tail and
    u^2 + tail, which the untruncated bounds imply; lower bounds are
    sqrt(2)/2 d(x0, S)^a on |D_s| and |D_u^{-1}|.
    """
    s2_hi = frame_x.s ** 2 + frame_x.tail_s
    u2_hi = frame_fx.u ** 2 + frame_fx.tail_u
    lo = np.sqrt(2.0) / 2.0 * d_sing ** a
    up_s = float(np.exp(-1.0 / s2_hi)) * (1.0 + rel_slack)
    up_u = float(np.exp(-1.0 / u2_hi)) * (1.0 + rel_slack)
    abs_ds = abs(rd.D_s)
    abs_du_inv = 1.0 / abs(rd.D_u)
    return {
        "ds_upper_ok": abs_ds <= up_s,
        "ds_lower_ok": abs_ds >= lo * (1.0 - rel_slack),
        "du_upper_ok": abs_du_inv <= up_u,
        "du_lower_ok": abs_du_inv >= lo * (1.0 - rel_slack),
        "abs_ds": abs_ds, "abs_du_inv": abs_du_inv,
        "upper_s": up_s, "upper_u": up_u, "lower": lo,
    }


def frame_csv_rows(tagged_frames) -> list:
    """CSV rows (orbit id, s, u, |C0^{-1}|, D_s, D_u, bound booleans)."""
    rows = [["orbit", "s", "u", "C0_inv_norm", "D_s", "D_u",
             "ds_upper_ok", "du_upper_ok", "ds_lower_ok", "du_lower_ok"]]
    for oid, fr, rd, checks in tagged_frames:
        rows.append([oid, _f(fr.s), _f(fr.u), _f(fr.C0_inv_norm),
                     _f(rd.D_s), _f(rd.D_u),
                     int(checks["ds_upper_ok"]), int(checks["du_upper_ok"]),
                     int(checks["ds_lower_ok"]), int(checks["du_lower_ok"])])
    return rows


def _f(x: float) -> str:
    return format(float(x), ".17g")
