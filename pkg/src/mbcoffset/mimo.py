"""Closed-loop assessment of the transformed plant under diagonal integral control.

Loop gain ``L(jw) = P(jw) diag(c_i / jw)``, negative feedback. Loops are
indexed from 1 (tilt) to match the ``l_11``/``l_22`` convention.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import MarginalStabilityError
from .lti import frequency_grid

#: margin search grid, 1e-3 to 1e2 rad/s at 400 points per decade
MARGIN_GRID = np.logspace(-3, 2, 2001)
_XTOL = 1e-9


@dataclass(frozen=True)
class DiagonalController:
    """Pure integrators ``c_i / s`` on each loop; one gain broadcasts to all loops."""

    c_I: float | Sequence[float]

    def __post_init__(self):
        g = np.atleast_1d(np.asarray(self.c_I, dtype=float))
        if not np.all(np.isfinite(g)):
            raise ValueError("integrator gains must be finite")

    def gains(self, m: int = 2) -> np.ndarray:
        g = np.atleast_1d(np.asarray(self.c_I, dtype=float))
        return np.broadcast_to(g, (m,)).copy()


def loop_gain(plant, ctrl: DiagonalController, w):
    """``P(jw) diag(c_I / jw)``; shape ``(m, m)`` or ``(len(w), m, m)``."""
    w_arr = np.asarray(w, dtype=float)
    if np.any(w_arr <= 0):
        raise ValueError("loop gain with integrators requires w > 0")
    P = np.asarray(plant.frf(w_arr), dtype=complex)
    m = P.shape[-1]
    c = ctrl.gains(m) / (1j * w_arr[..., None])
    return P * c[..., None, :]


@dataclass(frozen=True)
class SensitivityResult:
    grid: np.ndarray
    sigma_min: np.ndarray
    sigma_max: np.ndarray


def sensitivity_svd(plant, ctrl: DiagonalController, grid) -> SensitivityResult:
    """Extreme singular values of ``S = (I + L)^{-1}`` over ``grid``."""
    grid = frequency_grid(grid)
    L = loop_gain(plant, ctrl, grid)
    eye = np.eye(L.shape[-1])
    sig_min = np.empty(len(grid))
    sig_max = np.empty(len(grid))
    for k, Lk in enumerate(L):
        sv = np.linalg.svd(eye + Lk, compute_uv=False)
        if sv[-1] <= 1e-13 * max(1.0, sv[0]):
            raise MarginalStabilityError(float(grid[k]))
        # singular values of the inverse are the reciprocals
        sig_max[k], sig_min[k] = 1.0 / sv[-1], 1.0 / sv[0]
    return SensitivityResult(grid, sig_min, sig_max)


def _off_sum(L: np.ndarray, i: int, convention: str) -> np.ndarray:
    if convention == "row":
        mags = np.abs(L[..., i, :])
    elif convention == "column":
        mags = np.abs(L[..., :, i])
    else:
        raise ValueError("convention must be 'row' or 'column'")
    return mags.sum(axis=-1) - mags[..., i]


def _loop_index(L_shape, loop_index: int) -> int:
    m = L_shape[-1]
    if not 1 <= loop_index <= m:
        raise ValueError(f"loop index must be in 1..{m}")
    return loop_index - 1


@dataclass(frozen=True)
class GershgorinBand:
    grid: np.ndarray
    locus: np.ndarray
    radii: np.ndarray

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(["omega", "re", "im", "radius"])
            for w, z, r in zip(self.grid, self.locus, self.radii):
                wr.writerow([repr(float(w)), repr(float(z.real)), repr(float(z.imag)), repr(float(r))])


def gershgorin_bands(plant, ctrl, grid, loop_index: int = 1, convention: str = "row") -> GershgorinBand:
    """Diagonal Nyquist locus ``l_ii`` with radii summing the off-diagonal magnitudes."""
    grid = frequency_grid(grid)
    L = loop_gain(plant, ctrl, grid)
    i = _loop_index(L.shape, loop_index)
    return GershgorinBand(grid, L[:, i, i].copy(), _off_sum(L, i, convention))


class Dominance(NamedTuple):
    dominant: bool
    clearance: float


def diagonal_dominance(band: GershgorinBand) -> Dominance:
    """Whether no Gershgorin circle of the band reaches the -1 point."""
    clearance = float(np.min(np.abs(1.0 + band.locus) - band.radii))
    return Dominance(clearance > 0.0, clearance)


@dataclass(frozen=True)
class MarginReport:
    """Classical and Gershgorin-extended margins of one loop.

    Extended margins are ``None`` when the band covers -1 (no diagonal
    dominance); an absent crossover gives ``inf`` gain margin or ``None``
    phase margin.
    """

    loop: int
    a_m_ext: float | None
    phi_m_ext: float | None
    m_m_ext: float | None
    omega_p: float | None
    omega_g: float | None
    omega_m: float
    dominant: bool
    a_m: float
    phi_m: float | None
    m_m: float
    clearance: float = field(repr=False)

    def to_dict(self) -> dict:
        def enc(x):
            if x is None:
                return None
            if isinstance(x, bool):
                return x
            return "inf" if math.isinf(x) else float(x)

        return {
            "loop": self.loop,
            "A_m_ext": enc(self.a_m_ext),
            "phi_m_ext_deg": enc(self.phi_m_ext),
            "M_m_ext": enc(self.m_m_ext),
            "omega_p": enc(self.omega_p),
            "omega_g": enc(self.omega_g),
            "omega_m": enc(self.omega_m),
            "dominant": self.dominant,
            "A_m": enc(self.a_m),
            "phi_m_deg": enc(self.phi_m),
            "M_m": enc(self.m_m),
        }


def _sign_change_roots(f, grid, values):
    roots = []
    s = np.sign(values)
    for k in np.flatnonzero(s[:-1] * s[1:] < 0):
        roots.append(brentq(f, grid[k], grid[k + 1], xtol=_XTOL * grid[k], rtol=1e-14))
    roots += [float(grid[k]) for k in np.flatnonzero(values == 0)]
    return sorted(roots)


def _refine_min(f, grid, values):
    k = int(np.argmin(values))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    if hi > lo:
        res = minimize_scalar(f, bounds=(lo, hi), method="bounded",
                              options={"xatol": _XTOL * lo})
        if res.fun < values[k]:
            return float(res.x), float(res.fun)
    return float(grid[k]), float(values[k])


def gain_crossovers(plant, ctrl, loop_index: int = 1, grid=MARGIN_GRID) -> list[float]:
    """Frequencies where ``|l_ii(jw)| = 1``, refined by bisection."""
    grid = frequency_grid(grid)
    L = loop_gain(plant, ctrl, grid)
    i = _loop_index(L.shape, loop_index)

    def mag(w):
        return abs(loop_gain(plant, ctrl, w)[i, i]) - 1.0

    return _sign_change_roots(mag, grid, np.abs(L[:, i, i]) - 1.0)


def extended_margins(plant, ctrl, grid=MARGIN_GRID, loop_index: int = 1,
                     convention: str = "row") -> MarginReport:
    """Gain, phase and modulus margins of ``l_ii`` widened by its Gershgorin band.

    Phase crossovers (``arg l_ii = -180 deg``) and gain crossovers
    (``|l_ii| = 1``) are located on ``grid`` and refined by bisection; the
    modulus margin is the minimum of ``|1 + l_ii| - R_i`` over the grid,
    refined locally, and ``omega_m`` is where it occurs.
    """
    grid = frequency_grid(grid)
    L = loop_gain(plant, ctrl, grid)
    i = _loop_index(L.shape, loop_index)

    def lii(w):
        return loop_gain(plant, ctrl, w)[i, i]

    def radius(w):
        return float(_off_sum(loop_gain(plant, ctrl, w), i, convention))

    locus = L[:, i, i]
    radii = _off_sum(L, i, convention)

    # phase crossover: Im(l) = 0 with Re(l) < 0
    a_m, omega_p = math.inf, None
    for w in _sign_change_roots(lambda w: lii(w).imag, grid, locus.imag):
        z = lii(w)
        if z.real < 0 and 1.0 / abs(z) < a_m:
            a_m, omega_p = 1.0 / abs(z), w

    phi_m, omega_g = None, None
    for w in _sign_change_roots(lambda w: abs(lii(w)) - 1.0, grid, np.abs(locus) - 1.0):
        pm = 180.0 + math.degrees(np.angle(lii(w)))
        pm = pm - 360.0 if pm > 180.0 else pm
        if phi_m is None or pm < phi_m:
            phi_m, omega_g = pm, w

    _, m_m = _refine_min(lambda w: abs(1.0 + lii(w)), grid, np.abs(1.0 + locus))
    omega_m, clearance = _refine_min(lambda w: abs(1.0 + lii(w)) - radius(w), grid,
                                     np.abs(1.0 + locus) - radii)
    dominant = clearance > 0.0

    a_ext = phi_ext = m_ext = None
    if dominant:
        if omega_p is None:
            a_ext = math.inf
        else:
            a_ext = a_m / (1.0 + radius(omega_p) / abs(lii(omega_p)))
        if phi_m is not None:
            arg = radius(omega_g) / (2.0 * abs(lii(omega_g)))
            if arg <= 1.0:
                phi_ext = phi_m - 2.0 * math.degrees(math.asin(arg))
        m_ext = clearance

    return MarginReport(loop_index, a_ext, phi_ext, m_ext, omega_p, omega_g, omega_m,
                        dominant, a_m, phi_m, m_m, clearance)


def gain_correction(dc_gain_at_zero: float, dc_gain_at_offset: float, c_I_base: float) -> float:
    """Rescale an integrator gain so the loop crossover is kept when the diagonal DC gain changes."""
    if dc_gain_at_zero <= 0 or dc_gain_at_offset <= 0:
        raise ValueError("DC gains must be positive")
    return c_I_base * dc_gain_at_zero / dc_gain_at_offset


def complementary_sensitivity(plant, ctrl, w):
    L = loop_gain(plant, ctrl, w)
    eye = np.eye(L.shape[-1])
    return L @ np.linalg.inv(eye + L)
