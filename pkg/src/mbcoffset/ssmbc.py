"""MBC state-coordinate change for azimuth-periodic second-order linear models.

A rotating-frame model at azimuth ``psi`` has states ``[q; dq/dt]`` with
``q = [q_fixed (F); q_rot (3 m)]``; rotating DOFs are grouped by category,
three blades per category. Inputs are blade pitch angles and outputs blade
quantities, each a multiple of three, grouped the same way.

The rotating coordinates are written ``q = Ti q_nr`` with
``Ti = blockdiag(I_F, T^{-1}(psi + psi_o), ...)``; the velocity map picks up
``omega_r dTi/dpsi`` and the accelerations ``omega_r^2 d2Ti/dpsi2 +
domega_r/dt dTi/dpsi``. Inputs go through the offset reverse transform and
outputs through the forward transform at ``psi`` (no offset).
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, NamedTuple

import numpy as np
from scipy.linalg import block_diag

from . import mbc
from .errors import SingularMatrixError
from .lti import ComplexRational, StateSpaceModel, ss_freq_response
from .plant import RotorModel


@dataclass(frozen=True, eq=False)
class PeriodicStateSpace:
    a_star: np.ndarray
    b_star: np.ndarray
    c_star: np.ndarray
    d_star: np.ndarray
    psi: float = 0.0
    omega_r: float = 0.0
    omega_r_dot: float = 0.0
    F: int = 0
    m: int = 1

    def __post_init__(self):
        a, b, c, d = (np.atleast_2d(np.asarray(x, dtype=float)) for x in
                      (self.a_star, self.b_star, self.c_star, self.d_star))
        if self.F < 0 or self.m < 1:
            raise ValueError("need F >= 0 and m >= 1")
        half = self.F + mbc.B * self.m
        r = 2 * half
        if a.shape != (r, r):
            raise ValueError(f"a_star must be {r}x{r} for F={self.F}, m={self.m}")
        q, p = d.shape
        if b.shape != (r, p) or c.shape != (q, r):
            raise ValueError("b_star/c_star/d_star dimensions are inconsistent")
        if p % mbc.B or q % mbc.B:
            raise ValueError("inputs and outputs must be blade quantities (multiples of 3)")
        if not (np.allclose(a[:half, :half], 0.0, atol=0.0) and np.array_equal(a[:half, half:], np.eye(half))):
            raise ValueError("a_star must have the [0 I; A_K A_C] second-order structure")
        for name, x in zip("abcd", (a, b, c, d)):
            object.__setattr__(self, f"{name}_star", x)

    @property
    def half(self) -> int:
        return self.F + mbc.B * self.m

    def to_dict(self) -> dict:
        ss = StateSpaceModel(self.a_star, self.b_star, self.c_star, self.d_star).to_dict()
        ss.update(psi=self.psi, omega_r=self.omega_r, omega_r_dot=self.omega_r_dot, F=self.F, m=self.m)
        return ss

    @classmethod
    def from_dict(cls, d: dict) -> "PeriodicStateSpace":
        ss = StateSpaceModel.from_dict(d)
        return cls(ss.A, ss.B, ss.C, ss.D, float(d.get("psi", 0.0)), float(d.get("omega_r", 0.0)),
                   float(d.get("omega_r_dot", 0.0)), int(d.get("F", 0)), int(d.get("m", 1)))


class BlockTransform(NamedTuple):
    t_inv: np.ndarray
    t2_inv: np.ndarray
    t3_inv: np.ndarray


def _reverse_derivatives(n, angle):
    az = n * (angle + np.arange(mbc.B) * mbc.TWO_PI / mbc.B)
    zero = np.zeros(mbc.B)
    d1 = np.column_stack([zero, -n * np.sin(az), n * np.cos(az)])
    d2 = np.column_stack([zero, -n * n * np.cos(az), -n * n * np.sin(az)])
    return d1, d2


def build_block_transform(n, psi, psi_o, F, m) -> BlockTransform:
    """``blockdiag(I_F, T^{-1}(psi + psi_o) x m)`` and its first two azimuth derivatives."""
    if F < 0 or m < 1 or int(F) != F or int(m) != m:
        raise ValueError("need integer F >= 0 and m >= 1")
    angle = psi + psi_o
    t = mbc.reverse_matrix(n, angle)
    d1, d2 = _reverse_derivatives(n, angle)
    zf = np.zeros((F, F))
    return BlockTransform(
        block_diag(np.eye(F), *[t] * m),
        block_diag(zf, *[d1] * m),
        block_diag(zf, *[d2] * m),
    )


def _inverse(ti):
    if np.linalg.cond(ti) > 1e12:
        raise SingularMatrixError("MBC block transform is singular (harmonic is a multiple of 3?)")
    return np.linalg.inv(ti)


def transform_ss(model: PeriodicStateSpace, n: int, psi_o: float,
                 normalized_collective: bool = False) -> StateSpaceModel:
    """Fixed-frame ``(A, B, C, D)`` at the model's azimuth.

    ``A = blockdiag(T, T) (A* M - N)`` with ``M = [[Ti, 0], [w Ti', Ti]]`` and
    ``N = [[w Ti', 0], [w^2 Ti'' + dw Ti', 2 w Ti']]``; ``B = M^{-1} B* Tc``,
    ``C = To C* M``, ``D = To D* Tc``.
    """
    ti, t2, t3 = build_block_transform(n, model.psi, psi_o, model.F, model.m)
    tf = _inverse(ti)
    w, wd = model.omega_r, model.omega_r_dot
    h = model.half
    Z = np.zeros((h, h))
    M = np.block([[ti, Z], [w * t2, ti]])
    N = np.block([[w * t2, Z], [w * w * t3 + wd * t2, 2.0 * w * t2]])
    tff = block_diag(tf, tf)
    A = tff @ (model.a_star @ M - N)

    M_inv = np.block([[tf, Z], [-w * tf @ t2 @ tf, tf]])
    p_cat = model.b_star.shape[1] // mbc.B
    q_cat = model.c_star.shape[0] // mbc.B
    tc = block_diag(*[mbc.reverse_matrix(n, model.psi + psi_o)] * p_cat)
    to = block_diag(*[mbc.forward_matrix(n, model.psi, normalized_collective)] * q_cat)
    Bn = M_inv @ model.b_star @ tc
    Cn = to @ model.c_star @ M
    Dn = to @ model.d_star @ tc
    return StateSpaceModel(A, Bn, Cn, Dn)


def azimuth_ensemble(model_at: Callable[[float], PeriodicStateSpace], k: int, n: int,
                     psi_o: float) -> list[StateSpaceModel]:
    """Transform ``k`` models at evenly spaced azimuths ``2 pi i / k``."""
    if k < 1:
        raise ValueError("need k >= 1")
    return [transform_ss(model_at(mbc.TWO_PI * i / k), n, psi_o) for i in range(k)]


@dataclass(frozen=True, eq=False)
class CyclicPlant:
    """Tilt/yaw 2x2 block of a transformed model, usable wherever a plant ``frf`` is expected."""

    model: StateSpaceModel
    category: int = 0

    def frf(self, w):
        w_arr = np.atleast_1d(np.asarray(w, dtype=float))
        i0 = mbc.B * self.category
        idx = slice(i0 + 1, i0 + 3)
        out = np.stack([ss_freq_response(self.model, wk)[idx, idx] for wk in w_arr])
        return out[0] if np.ndim(w) == 0 else out


def second_order_rotor(omega0, zeta, K, psi=0.0, omega_r=0.0, stiffness_coupling=0.0,
                       input_coupling=0.0, azimuth_variation=0.0) -> PeriodicStateSpace:
    """Three mass-spring-damper blades, output = blade deflection coordinate.

    Stiffness and input matrices are circulant with off-diagonal fractions
    ``stiffness_coupling`` and ``input_coupling``. ``azimuth_variation``
    scales each blade's stiffness by ``1 + eps cos(psi_b)``, making the model
    azimuth dependent.
    """
    nb = mbc.B
    off = np.ones((nb, nb)) - np.eye(nb)
    az = psi + np.arange(nb) * mbc.TWO_PI / nb
    ks = omega0 ** 2 * (np.eye(nb) + stiffness_coupling * off)
    ks = np.diag(1.0 + azimuth_variation * np.cos(az)) @ ks
    g = K * omega0 ** 2 * (np.eye(nb) + input_coupling * off)
    cd = 2.0 * zeta * omega0 * np.eye(nb)
    a = np.block([[np.zeros((nb, nb)), np.eye(nb)], [-ks, -cd]])
    b = np.vstack([np.zeros((nb, nb)), g])
    c = np.hstack([np.eye(nb), np.zeros((nb, nb))])
    return PeriodicStateSpace(a, b, c, np.zeros((nb, nb)), psi, omega_r, 0.0, 0, 1)


def second_order_rotor_model(omega0, zeta, K, stiffness_coupling=0.0, input_coupling=0.0) -> RotorModel:
    """Transfer-function counterpart of an azimuth-independent :func:`second_order_rotor`.

    Circulant dynamics split into a collective mode and a cyclic mode; the
    diagonal and cross blade transfer functions follow from those two.
    """
    def mode(gain, stiff):
        return ComplexRational([K * omega0 ** 2 * gain],
                               [omega0 ** 2 * stiff, 2.0 * zeta * omega0, 1.0])

    coll = mode(1.0 + 2.0 * input_coupling, 1.0 + 2.0 * stiffness_coupling)
    cyc = mode(1.0 - input_coupling, 1.0 - stiffness_coupling)
    if stiffness_coupling == 0.0 and input_coupling == 0.0:
        return RotorModel(cyc)
    return RotorModel((coll + cyc * 2.0) * (1.0 / 3.0), (coll - cyc) * (1.0 / 3.0))


def load_family(path) -> list[PeriodicStateSpace]:
    doc = json.loads(Path(path).read_text())
    items = doc["models"] if isinstance(doc, dict) and "models" in doc else doc
    if isinstance(items, dict):
        items = [items]
    return [PeriodicStateSpace.from_dict(d) for d in items]


def save_transformed(path, models, meta: dict | None = None):
    docs = []
    for ss, extra in models:
        d = ss.to_dict()
        d.update(extra)
        docs.append(d)
    out = {"models": docs}
    if meta:
        out.update(meta)
    Path(path).write_text(json.dumps(out, indent=1, sort_keys=True))
