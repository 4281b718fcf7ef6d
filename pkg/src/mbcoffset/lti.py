"""Small linear-systems kernel: complex rational transfer functions and
state-space frequency responses.

Polynomial coefficients are stored in ascending powers of ``s`` throughout,
``[c0, c1, c2, ...]`` meaning ``c0 + c1 s + c2 s^2 + ...``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import PoleEvaluationError

SQRT_EPS = 1.5e-8


def _as_poly(c) -> np.ndarray:
    c = np.atleast_1d(np.asarray(c, dtype=complex))
    if c.ndim != 1:
        raise ValueError("polynomial coefficients must be one-dimensional")
    nz = np.flatnonzero(c)
    return c[: nz[-1] + 1] if nz.size else c[:1] * 0


def _trim(c: np.ndarray, tol: float) -> np.ndarray:
    scale = np.max(np.abs(c)) if c.size else 0.0
    keep = np.flatnonzero(np.abs(c) > tol * scale)
    return c[: keep[-1] + 1] if keep.size else c[:1] * 0


def _compose_shift(c: np.ndarray, shift: complex) -> np.ndarray:
    # Horner on polynomials: p(s + shift)
    out = np.array([c[-1]], dtype=complex)
    lin = np.array([shift, 1.0], dtype=complex)
    for coef in c[-2::-1]:
        out = npoly.polyadd(npoly.polymul(out, lin), [coef])
    return out


@dataclass(frozen=True, eq=False)
class ComplexRational:
    """``num(s) / den(s)`` with complex coefficients, ascending powers."""

    num: np.ndarray
    den: np.ndarray

    def __post_init__(self):
        num, den = _as_poly(self.num), _as_poly(self.den)
        if not np.any(den):
            raise ValueError("denominator is the zero polynomial")
        if not (np.all(np.isfinite(num)) and np.all(np.isfinite(den))):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    @classmethod
    def gain(cls, k) -> "ComplexRational":
        return cls([k], [1.0])

    @property
    def num_degree(self) -> int:
        return len(self.num) - 1 if np.any(self.num) else -1

    @property
    def den_degree(self) -> int:
        return len(self.den) - 1

    def is_proper(self) -> bool:
        return self.num_degree <= self.den_degree

    def is_real(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.num.imag) <= tol) and np.all(np.abs(self.den.imag) <= tol))

    def __call__(self, s):
        return eval_tf(self, s)

    def __mul__(self, other):
        return series(self, _coerce(other))

    __rmul__ = __mul__

    def __add__(self, other):
        other = _coerce(other)
        if len(self.den) == len(other.den) and np.array_equal(self.den, other.den):
            return ComplexRational(npoly.polyadd(self.num, other.num), self.den)
        num = npoly.polyadd(npoly.polymul(self.num, other.den), npoly.polymul(other.num, self.den))
        return ComplexRational(num, npoly.polymul(self.den, other.den))

    __radd__ = __add__

    def __neg__(self):
        return ComplexRational(-self.num, self.den)

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) - self

    def normalized(self) -> "ComplexRational":
        """Scale so the highest denominator coefficient is 1."""
        lead = self.den[-1]
        return ComplexRational(self.num / lead, self.den / lead)

    def trimmed(self, tol: float = SQRT_EPS) -> "ComplexRational":
        """Drop high-order coefficients below ``tol`` relative to the largest one."""
        return ComplexRational(_trim(self.num, tol), _trim(self.den, tol))

    def poles(self) -> np.ndarray:
        return roots(self.den) if self.den_degree >= 1 else np.empty(0, complex)

    def zeros(self) -> np.ndarray:
        return roots(self.num) if self.num_degree >= 1 else np.empty(0, complex)

    def minreal(self, tol: float = SQRT_EPS) -> "ComplexRational":
        """Cancel pole/zero pairs closer than ``tol`` (relative to their size)."""
        if self.num_degree < 1 or self.den_degree < 1:
            return self
        zs, ps = list(self.zeros()), list(self.poles())
        kept_z = []
        for z in zs:
            dist = [abs(z - p) for p in ps]
            i = int(np.argmin(dist)) if dist else -1
            if i >= 0 and dist[i] <= tol * max(1.0, abs(z)):
                ps.pop(i)
            else:
                kept_z.append(z)
        num = npoly.polyfromroots(kept_z) * self.num[-1] if kept_z else np.array([self.num[-1]])
        den = npoly.polyfromroots(ps) * self.den[-1] if ps else np.array([self.den[-1]])
        return ComplexRational(num, den)

    def __repr__(self):
        return f"ComplexRational(num={self.num.tolist()}, den={self.den.tolist()})"


def _coerce(x) -> ComplexRational:
    return x if isinstance(x, ComplexRational) else ComplexRational.gain(x)


def _horner(c: np.ndarray, s):
    return npoly.polyval(s, c)


def eval_tf(tf: ComplexRational, s):
    """Evaluate ``tf`` at ``s`` (scalar or array); raises at a pole."""
    s_arr = np.asarray(s, dtype=complex)
    den = _horner(tf.den, s_arr)
    scale = npoly.polyval(np.abs(s_arr), np.abs(tf.den))
    bad = np.abs(den) <= 16 * np.finfo(float).eps * scale
    if np.any(bad):
        raise PoleEvaluationError(s_arr[bad].ravel()[0] if s_arr.ndim else complex(s_arr))
    val = _horner(tf.num, s_arr) / den
    return complex(val) if s_arr.ndim == 0 else val


def shift_tf(tf: ComplexRational, c: complex) -> ComplexRational:
    """``tf(s + c)`` by polynomial composition."""
    if c == 0:
        return tf
    return ComplexRational(_compose_shift(tf.num, c), _compose_shift(tf.den, c))


def first_order(K: float, tau: float) -> ComplexRational:
    """``K / (tau s + 1)``."""
    if tau < 0:
        raise ValueError(f"time constant must be >= 0, got {tau!r}")
    return ComplexRational([K], [1.0, tau])


def series(a: ComplexRational, b: ComplexRational) -> ComplexRational:
    """Cascade ``a * b`` (no cancellation)."""
    return ComplexRational(npoly.polymul(a.num, b.num), npoly.polymul(a.den, b.den))


def roots(p) -> np.ndarray:
    """All roots of an ascending-order polynomial, via companion eigenvalues."""
    c = _as_poly(p)
    if not np.any(c):
        raise ValueError("roots of the zero polynomial are undefined")
    if len(c) < 2:
        raise ValueError("polynomial has degree 0")
    return npoly.polyroots(c)


def log_grid(w_min: float, w_max: float, points: int) -> np.ndarray:
    return frequency_grid(np.logspace(np.log10(w_min), np.log10(w_max), points))


def frequency_grid(values) -> np.ndarray:
    """Validate a grid of angular frequencies: positive and strictly increasing."""
    w = np.atleast_1d(np.asarray(values, dtype=float))
    if w.ndim != 1 or w.size == 0:
        raise ValueError("frequency grid must be a nonempty 1-D sequence")
    if np.any(w <= 0) or np.any(np.diff(w) <= 0):
        raise ValueError("frequency grid must be positive and strictly increasing")
    return w


@dataclass(frozen=True, eq=False)
class StateSpaceModel:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        D = np.atleast_2d(np.asarray(self.D, dtype=float))
        q, p = D.shape
        A = np.asarray(self.A, dtype=float)
        r = A.shape[0] if A.size else 0
        A = A.reshape(r, r)
        B = np.asarray(self.B, dtype=float).reshape(r, p)
        C = np.asarray(self.C, dtype=float).reshape(q, r)
        for name, m in zip("ABCD", (A, B, C, D)):
            if not np.all(np.isfinite(m)):
                raise ValueError(f"matrix {name} has non-finite entries")
        for name, m in zip("ABCD", (A, B, C, D)):
            object.__setattr__(self, name, m)

    @property
    def r(self) -> int:
        return self.A.shape[0]

    @property
    def p(self) -> int:
        return self.B.shape[1]

    @property
    def q(self) -> int:
        return self.C.shape[0]

    def to_dict(self) -> dict:
        return {
            "r": self.r, "p": self.p, "q": self.q,
            "A": self.A.tolist(), "B": self.B.tolist(),
            "C": self.C.tolist(), "D": self.D.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "StateSpaceModel":
        r, p, q = int(d["r"]), int(d["p"]), int(d["q"])
        try:
            return cls(
                np.asarray(d["A"], dtype=float).reshape(r, r),
                np.asarray(d["B"], dtype=float).reshape(r, p),
                np.asarray(d["C"], dtype=float).reshape(q, r),
                np.asarray(d["D"], dtype=float).reshape(q, p),
            )
        except ValueError as exc:
            raise ValueError(f"state-space document inconsistent with r={r}, p={p}, q={q}: {exc}") from None

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=1))

    @classmethod
    def load(cls, path) -> "StateSpaceModel":
        return cls.from_dict(json.loads(Path(path).read_text()))


def ss_freq_response(m: StateSpaceModel, w: float) -> np.ndarray:
    """``C (jwI - A)^{-1} B + D`` by a linear solve."""
    if m.r == 0:
        return m.D.astype(complex)
    s = 1j * w
    resolvent = s * np.eye(m.r) - m.A
    try:
        x = np.linalg.solve(resolvent, m.B.astype(complex))
    except np.linalg.LinAlgError:
        raise PoleEvaluationError(s) from None
    if np.linalg.cond(resolvent) > 1.0 / np.finfo(float).eps:
        raise PoleEvaluationError(s)
    return m.C @ x + m.D


def ss_from_tf(tf: ComplexRational) -> StateSpaceModel:
    """Controllable-canonical realization of a real, proper transfer function."""
    if not tf.is_real():
        raise ValueError("realization requires real coefficients")
    if not tf.is_proper():
        raise ValueError("realization requires a proper transfer function")
    den = tf.den.real / tf.den[-1].real
    num = np.zeros(len(den))
    num[: len(tf.num)] = tf.num.real / tf.den[-1].real
    r = len(den) - 1
    d = num[r]
    if r == 0:
        return StateSpaceModel(np.zeros((0, 0)), np.zeros((0, 1)), np.zeros((1, 0)), [[d]])
    A = np.zeros((r, r))
    A[:-1, 1:] = np.eye(r - 1)
    A[-1, :] = -den[:r]
    Bm = np.zeros((r, 1))
    Bm[-1, 0] = 1.0
    C = (num[:r] - d * den[:r]).reshape(1, r)
    return StateSpaceModel(A, Bm, C, [[d]])
