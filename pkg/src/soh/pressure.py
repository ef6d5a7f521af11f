"""Singular congestion pressure and its explicit/implicit splitting.

The base law  p(rho) = (1/rho - 1/rho_star)^(-gamma)  diverges at the
congestion density rho_star.  The stiffened pressure is split into a part
p0 treated explicitly by the scheme and a part p1 treated implicitly:

* split-half mode: p0 = eps*p/2 below the matching density
  rho_star - delta, delta = eps^(1/(gamma+2)), and the quadratic Taylor
  continuation of that half above it.  This keeps p0 (and its first
  derivative) bounded uniformly in eps while p1 = eps*p - p0 inherits the
  pole and stays strictly increasing.
* background mode: p0 = kappa*rho^gamma (finite at rho_star),
  p1 = eps*p(rho).

p1 is evaluated as a difference, never as a separate closed form, so that
p0 + p1 reproduces the full pressure bit-for-bit.

PressureModel instances are immutable after construction and safe to share
across parallel flux loops.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ModelParams, RHO_FLOOR
from .errors import DomainError, NegativePressureError

SPLIT_HALF = "split-half"
BACKGROUND = "background"

# Stopping controls for the scalar inversions.  The residual acceptance
# bound is 1e-12 absolute on pressure; iteration continues below it while
# progress is made so that the outer elliptic Newton sees a smooth,
# machine-accurate rho(p1).
_INVERT_RESIDUAL_TOL = 1e-12
_INVERT_MAX_NEWTON = 100
_INVERT_BISECT_WIDTH = 1e-14


def _as_array(rho):
    arr = np.asarray(rho, dtype=float)
    return arr, (arr.ndim == 0)


@dataclass(frozen=True)
class PressureModel:
    params: ModelParams
    mode: str
    delta: float
    match_rho: float      # rho_star - delta (split-half mode)
    taylor_p: float       # p(match_rho)
    taylor_dp: float      # p'(match_rho)
    taylor_d2p: float     # p''(match_rho)

    # -- base law ---------------------------------------------------------

    def _check_open_domain(self, rho: np.ndarray):
        if np.any(rho <= 0.0) or np.any(rho >= self.params.rho_star):
            raise DomainError("pressure law needs 0 < rho < rho_star")

    def p(self, rho):
        """Base pressure (1/rho - 1/rho_star)^(-gamma); diverges at rho_star."""
        r, scalar = _as_array(rho)
        self._check_open_domain(r)
        s = 1.0 / r - 1.0 / self.params.rho_star
        out = s ** (-self.params.gamma)
        return float(out) if scalar else out

    def dp(self, rho):
        """d/drho of the base pressure."""
        r, scalar = _as_array(rho)
        self._check_open_domain(r)
        g = self.params.gamma
        s = 1.0 / r - 1.0 / self.params.rho_star
        out = g * s ** (-g - 1.0) / r**2
        return float(out) if scalar else out

    def _d2p(self, rho: float) -> float:
        g = self.params.gamma
        s = 1.0 / rho - 1.0 / self.params.rho_star
        return g * (g + 1.0) * s ** (-g - 2.0) / rho**4 - 2.0 * g * s ** (-g - 1.0) / rho**3

    def p_inverse(self, value):
        """Closed-form inverse of the base law for value > 0 (0 maps to 0)."""
        v, scalar = _as_array(value)
        if np.any(v < 0.0):
            raise DomainError("base pressure is nonnegative")
        g = self.params.gamma
        with np.errstate(divide="ignore"):
            s = np.where(v > 0.0, v ** (-1.0 / g), np.inf)
        out = 1.0 / (s + 1.0 / self.params.rho_star)
        return float(out) if scalar else out

    # -- stiffened pressure and split ------------------------------------

    def p_background(self, rho):
        """Background pressure kappa * rho^gamma (finite at rho_star)."""
        r, scalar = _as_array(rho)
        if np.any(r < 0.0):
            raise DomainError("p_background needs rho >= 0")
        out = self.params.kappa * r**self.params.gamma
        return float(out) if scalar else out

    def _dp_background(self, rho):
        r, scalar = _as_array(rho)
        g = self.params.gamma
        out = self.params.kappa * g * r ** (g - 1.0)
        return float(out) if scalar else out

    def p_eps(self, rho):
        """Full stiffened pressure: eps*p, plus the background term in background mode."""
        if self.mode == BACKGROUND:
            r, scalar = _as_array(rho)
            out = self.params.epsilon * self.p(r) + self.p_background(r)
            return float(out) if scalar else out
        return self.params.epsilon * self.p(rho)

    def dp_eps(self, rho):
        """Exact derivative of p_eps."""
        if self.mode == BACKGROUND:
            r, scalar = _as_array(rho)
            out = self.params.epsilon * self.dp(r) + self._dp_background(r)
            return float(out) if scalar else out
        return self.params.epsilon * self.dp(rho)

    def split_p0(self, rho):
        """Explicit (bounded) pressure part; sup over (0, rho_star) is uniform in eps."""
        if self.mode == BACKGROUND:
            return self.p_background(rho)
        r, scalar = _as_array(rho)
        self._check_open_domain(r)
        eps = self.params.epsilon
        below = r <= self.match_rho
        out = np.empty_like(r)
        if np.any(below):
            out[below] = 0.5 * eps * self.p(r[below])
        if not np.all(below):
            d = r[~below] - self.match_rho
            out[~below] = 0.5 * eps * (
                self.taylor_p + self.taylor_dp * d + 0.5 * self.taylor_d2p * d * d
            )
        return float(out) if scalar else out

    def dp0(self, rho):
        """Exact derivative of split_p0."""
        if self.mode == BACKGROUND:
            return self._dp_background(rho)
        r, scalar = _as_array(rho)
        self._check_open_domain(r)
        eps = self.params.epsilon
        below = r <= self.match_rho
        out = np.empty_like(r)
        if np.any(below):
            out[below] = 0.5 * eps * self.dp(r[below])
        if not np.all(below):
            d = r[~below] - self.match_rho
            out[~below] = 0.5 * eps * (self.taylor_dp + self.taylor_d2p * d)
        return float(out) if scalar else out

    def split_p1(self, rho):
        """Implicit (singular) pressure part, as the difference p_eps - p0."""
        r, scalar = _as_array(rho)
        out = self.p_eps(r) - self.split_p0(r)
        return float(out) if scalar else out

    def dp1(self, rho):
        """Exact derivative of split_p1 (> 0 on (0, rho_star))."""
        r, scalar = _as_array(rho)
        out = self.dp_eps(r) - self.dp0(r)
        return float(out) if scalar else out

    # -- monotone inverse of p1 -------------------------------------------

    def _p1_dp1_raw(self, rho: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """split_p1 and its derivative without domain checks (solver hot path)."""
        eps = self.params.epsilon
        g = self.params.gamma
        s = 1.0 / rho - 1.0 / self.params.rho_star
        with np.errstate(invalid="ignore", divide="ignore"):
            base = s ** (-g)
            dbase = g * s ** (-g - 1.0) / (rho * rho)
        if self.mode == BACKGROUND:
            return eps * base, eps * dbase
        above = rho > self.match_rho
        p0 = 0.5 * eps * base
        dp0 = 0.5 * eps * dbase
        if np.any(above):
            d = rho[above] - self.match_rho
            p0[above] = 0.5 * eps * (
                self.taylor_p + self.taylor_dp * d + 0.5 * self.taylor_d2p * d * d
            )
            dp0[above] = 0.5 * eps * (self.taylor_dp + self.taylor_d2p * d)
        return eps * base - p0, eps * dbase - dp0

    def invert_p1(self, y, initial=None):
        """Unique rho in (0, rho_star) with split_p1(rho) = y.

        Safeguarded Newton: any iterate leaving the current bracket inside
        (0, rho_star) falls back to bisection, and converged cells drop out
        of the active set.  The returned density is always strictly below
        rho_star, which is what enforces the congestion bound structurally.
        Negative y signals the negative-pressure instability and aborts.
        """
        yarr, scalar = _as_array(y)
        if not np.all(np.isfinite(yarr)):
            raise DomainError("invert_p1 needs finite pressure values")
        if np.any(yarr < 0.0):
            raise NegativePressureError(
                f"implicit pressure went negative (min {yarr.min():.3e}); "
                "aborting: vacuum/negative-pressure instability"
            )
        rho_star = self.params.rho_star
        eps = self.params.epsilon
        y1 = np.atleast_1d(yarr).astype(float).ravel()
        hi0 = rho_star * (1.0 - 1e-15)

        # Closed-form starting guess from the invertible base law.  In
        # split-half mode it is exact below the matching density; above it,
        # p0 varies little so eps*p ~ y + sup(p0) locates the root well.
        if self.mode == BACKGROUND:
            guess = self.p_inverse(y1 / eps)
        else:
            guess = self.p_inverse(2.0 * y1 / eps)
            y_match = self.split_p1(self.match_rho)
            above = y1 > y_match
            if np.any(above):
                dd = self.delta
                p0_sup = 0.5 * eps * (
                    self.taylor_p + self.taylor_dp * dd + 0.5 * self.taylor_d2p * dd * dd
                )
                guess[above] = self.p_inverse((y1[above] + p0_sup) / eps)
        if initial is not None:
            init = np.broadcast_to(
                np.asarray(initial, dtype=float), np.atleast_1d(yarr).shape
            ).ravel()
            usable = (init > 0.0) & (init < rho_star)
            guess = np.where(usable, init, guess)
        rho = np.clip(guess, 1e-300, hi0)

        lo = np.zeros_like(y1)          # f(lo) <= 0 end of the bracket
        hi = np.full_like(y1, hi0)      # f(hi) >= 0 end
        tol = np.maximum(_INVERT_RESIDUAL_TOL, 8.0 * np.finfo(float).eps * (1.0 + y1))
        width_done = 1e-15 * rho_star

        idx = np.arange(y1.size)
        r, l, h, yv = rho.copy(), lo, hi, y1
        f_floor = 4.0 * np.finfo(float).eps
        for _ in range(_INVERT_MAX_NEWTON):
            p1v, dp1v = self._p1_dp1_raw(r)
            f = p1v - yv
            np.copyto(l, r, where=f < 0.0)
            np.copyto(h, r, where=f >= 0.0)
            # stop at the roundoff floor of the residual evaluation, at a
            # sub-ulp bracket, or deep inside vacuum (floored downstream)
            live = (np.abs(f) > f_floor * (np.abs(p1v) + yv)) \
                & (h - l > width_done) & (r > 1e-12)
            rho[idx] = r
            lo[idx], hi[idx] = l, h
            if not np.any(live):
                idx = idx[:0]
                break
            if not np.all(live):         # compact the active set
                keep = np.nonzero(live)[0]
                idx, r, l, h, yv = idx[keep], r[keep], l[keep], h[keep], yv[keep]
                f, dp1v = f[keep], dp1v[keep]
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                nxt = r - f / dp1v
            bad = ~np.isfinite(nxt) | (nxt <= l) | (nxt >= h)
            nxt = np.where(bad, 0.5 * (l + h), nxt)
            if not np.any(nxt != r):
                rho[idx] = r
                lo[idx], hi[idx] = l, h
                break
            r = nxt
        # Bisect stragglers down to a sub-roundoff bracket width.
        f_all = self.split_p1(np.clip(rho, 1e-300, hi0)) - y1
        remaining = (np.abs(f_all) > tol) & (hi - lo >= _INVERT_BISECT_WIDTH)
        for _ in range(120):
            if not np.any(remaining):
                break
            mid = np.where(remaining, 0.5 * (lo + hi), rho)
            fm = self.split_p1(np.clip(mid, 1e-300, hi0)) - y1
            np.copyto(lo, mid, where=remaining & (fm < 0.0))
            np.copyto(hi, mid, where=remaining & (fm >= 0.0))
            rho = np.where(remaining, mid, rho)
            remaining = remaining & (hi - lo >= _INVERT_BISECT_WIDTH)
        rho = np.minimum(rho, hi0)
        if scalar:
            return float(rho[0])
        return rho.reshape(yarr.shape)

    def drho_dp1(self, rho):
        """Derivative of the inverse map: 1 / p1'(rho), strictly positive."""
        return 1.0 / self.dp1(rho)


def make_pressure(params: ModelParams) -> PressureModel:
    """Build the pressure model matching params (mode follows use_background)."""
    mode = BACKGROUND if params.use_background else SPLIT_HALF
    delta = params.epsilon ** (1.0 / (params.gamma + 2.0))
    match_rho = params.rho_star - delta
    if mode == SPLIT_HALF and match_rho <= 0.0:
        raise DomainError(
            f"matching width delta={delta:.3g} reaches 0: epsilon too large "
            f"for rho_star={params.rho_star}"
        )
    if mode == SPLIT_HALF and match_rho >= params.rho_star:
        raise DomainError(
            f"matching width delta={delta:.3g} underflows below the float "
            f"spacing at rho_star={params.rho_star}"
        )
    probe = PressureModel(params, mode, delta, match_rho, 0.0, 0.0, 0.0)
    if mode == SPLIT_HALF:
        tp = probe.p(match_rho)
        tdp = probe.dp(match_rho)
        td2p = probe._d2p(match_rho)
    else:
        tp = tdp = td2p = 0.0
    return PressureModel(params, mode, delta, match_rho, tp, tdp, td2p)
