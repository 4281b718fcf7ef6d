"""Fixed-frame 2x2 plant seen through forward/reverse MBC with azimuth offset.

For a rotor whose rotating-frame dynamics reduce to a single effective
transfer function ``H`` (``H1`` for identical decoupled blades, ``H1 - H2``
when every blade pitch also drives the other blades through ``H2``), the
tilt/yaw plant at harmonic ``n`` is::

    P11 = P22 =  (H(s-) p + H(s+) q) / 2
    P12 = -P21 = j (H(s-) p - H(s+) q) / 2

with ``s-+ = s -+ j n omega_r``, ``p = exp(-j n psi_o)`` and ``q = conj(p)``.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import lti
from .errors import DegenerateModelError, PoleEvaluationError
from .lti import ComplexRational, first_order, series, shift_tf

DECOUPLED = "decoupled"
COUPLED = "coupled"


@dataclass(frozen=True)
class RotorModel:
    """Blade pitch to out-of-plane root moment dynamics in the rotating frame."""

    h1: ComplexRational
    h2: ComplexRational | None = None

    def __post_init__(self):
        for tf in (self.h1, self.h2):
            if tf is None:
                continue
            if not tf.is_real():
                raise ValueError("rotor transfer functions must have real coefficients")
            if not tf.is_proper():
                raise ValueError("rotor transfer functions must be proper")

    @property
    def structure(self) -> str:
        return DECOUPLED if self.h2 is None else COUPLED

    @classmethod
    def first_order(cls, K1, tau1, K2=None, tau2=None, actuator_bandwidth=None) -> "RotorModel":
        """First-order blade models, optionally cascaded with a first-order pitch actuator."""
        h1 = first_order(K1, tau1)
        h2 = None
        if K2 is not None:
            h2 = first_order(K2, tau1 if tau2 is None else tau2)
        if actuator_bandwidth is not None:
            if actuator_bandwidth <= 0:
                raise ValueError("actuator bandwidth must be positive")
            act = first_order(1.0, 1.0 / actuator_bandwidth)
            h1 = series(h1, act)
            h2 = None if h2 is None else series(h2, act)
        return cls(h1, h2)

    @classmethod
    def from_dict(cls, d: dict) -> "RotorModel":
        if "K1" not in d or "tau1" not in d:
            raise ValueError("rotor document needs 'K1' and 'tau1'")
        return cls.first_order(
            float(d["K1"]), float(d["tau1"]),
            None if d.get("K2") is None else float(d["K2"]),
            None if d.get("tau2") is None else float(d["tau2"]),
            None if d.get("actuator_bandwidth") is None else float(d["actuator_bandwidth"]),
        )

    @classmethod
    def load(cls, path) -> "RotorModel":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def effective(self) -> ComplexRational:
        return self.h1 if self.h2 is None else h12(self)


@dataclass(frozen=True)
class FRFFunction:
    """Wrap any vectorized ``w -> (..., 2, 2)`` callable as a plant."""

    fn: object

    def frf(self, w):
        return np.asarray(self.fn(np.asarray(w, dtype=float)), dtype=complex)


def h12(rotor: RotorModel) -> ComplexRational:
    """``H1 - H2`` over a common denominator."""
    if rotor.h2 is None:
        raise ValueError("H12 is defined for coupled rotors only")
    return rotor.h1 - rotor.h2


def pq_factors(n: int, psi_o: float) -> tuple[complex, complex]:
    p = complex(np.cos(n * psi_o), -np.sin(n * psi_o))
    return p, p.conjugate()


@dataclass(frozen=True)
class TransformedPlant:
    rotor: RotorModel
    n: int = 1
    omega_r: float = 0.0
    psi_o: float = 0.0

    def __post_init__(self):
        if self.omega_r < 0:
            raise ValueError("rotor speed must be >= 0")
        if int(self.n) != self.n or self.n < 1:
            raise ValueError("harmonic number must be a positive integer")
        object.__setattr__(self, "_h", self.rotor.effective())

    def with_offset(self, psi_o: float) -> "TransformedPlant":
        return TransformedPlant(self.rotor, self.n, self.omega_r, psi_o)

    def frf(self, w):
        """2x2 frequency response at ``w`` rad/s; shape ``(2, 2)`` or ``(len(w), 2, 2)``."""
        return frf(self, w)

    def element_tf(self, row: int, col: int) -> ComplexRational:
        return element_tf(self, row, col)

    def dc_gain(self) -> float:
        """Diagonal gain at w = 0 (real for real-coefficient rotors)."""
        return float(np.real(frf(self, 0.0)[0, 0]))


def frf(plant: TransformedPlant, w):
    w_arr = np.asarray(w, dtype=float)
    shift = plant.n * plant.omega_r
    h = plant._h
    try:
        h_lo = lti.eval_tf(h, 1j * (w_arr - shift))
        h_hi = lti.eval_tf(h, 1j * (w_arr + shift))
    except PoleEvaluationError as exc:
        raise PoleEvaluationError(exc.s, f"shifted plant has a pole at s = {exc.s!r}") from None
    p, q = pq_factors(plant.n, plant.psi_o)
    diag = 0.5 * (h_lo * p + h_hi * q)
    off = 0.5j * (h_lo * p - h_hi * q)
    out = np.stack([np.stack([diag, off], -1), np.stack([-off, diag], -1)], -2)
    return out


def element_tf(plant: TransformedPlant, row: int, col: int) -> ComplexRational:
    """Symbolic (row, col) entry, 1-based, as a complex rational function of s."""
    if row not in (1, 2) or col not in (1, 2):
        raise ValueError("row and col must be 1 or 2")
    shift = plant.n * plant.omega_r
    h_lo = shift_tf(plant._h, -1j * shift)
    h_hi = shift_tf(plant._h, 1j * shift)
    p, q = pq_factors(plant.n, plant.psi_o)
    if row == col:
        tf = h_lo * (0.5 * p) + h_hi * (0.5 * q)
    else:
        tf = h_lo * (0.5j * p) + h_hi * (-0.5j * q)
        if row == 2:
            tf = -tf
    # the p/q weighting can cancel the leading numerator coefficient exactly
    return ComplexRational(lti._trim(tf.num, lti.SQRT_EPS), tf.den)


def analytic_offset_decoupled(tau1: float, omega_r: float, n: int = 1) -> float:
    """Offset nulling the DC tilt/yaw coupling of identical first-order blades."""
    if tau1 < 0 or omega_r < 0:
        raise ValueError("tau1 and omega_r must be >= 0")
    return float(np.arctan(tau1 * n * omega_r) / n)


def analytic_offset_coupled(K1, tau1, K2, tau2, omega_r, n: int = 1) -> float:
    """Offset nulling the DC coupling of first-order diagonal + cross blade models.

    Returns the principal ``atan`` branch. Raises ``DegenerateModelError`` if
    the real part of ``H1 - H2`` at the harmonic vanishes.
    """
    w = n * omega_r
    a1 = 1.0 + (tau1 * w) ** 2
    a2 = 1.0 + (tau2 * w) ** 2
    num = K1 * tau1 * a2 - K2 * tau2 * a1
    den = K1 * a2 - K2 * a1
    if abs(den) <= 1e-12 * (abs(K1 * a2) + abs(K2 * a1)):
        raise DegenerateModelError("Re(H1 - H2) vanishes at the harmonic frequency; offset is +-90 deg")
    return float(np.arctan(w * num / den) / n)


FRF_HEADER = ["omega", "re11", "im11", "re12", "im12", "re21", "im21", "re22", "im22"]


def write_frf_csv(path, w, values):
    """Write an array of 2x2 FRFs as CSV with the columns of ``FRF_HEADER``."""
    w = np.asarray(w, dtype=float)
    values = np.asarray(values).reshape(len(w), 2, 2)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(FRF_HEADER)
        for wi, m in zip(w, values):
            flat = m.ravel()
            row = [wi]
            for z in flat:
                row += [z.real, z.imag]
            wr.writerow([repr(float(x)) for x in row])


def read_frf_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    w = np.array([float(r["omega"]) for r in rows])
    vals = np.empty((len(rows), 2, 2), dtype=complex)
    for k, r in enumerate(rows):
        for i in range(2):
            for j in range(2):
                key = f"{i + 1}{j + 1}"
                vals[k, i, j] = complex(float(r["re" + key]), float(r["im" + key]))
    return w, vals
