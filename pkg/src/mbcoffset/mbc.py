"""Multi-blade coordinate (Coleman) transformation for three-bladed rotors.

Blade azimuth zero is the upright position. The forward transform maps
blade signals to (collective, tilt, yaw); the reverse transform maps
(collective, tilt, yaw) pitch demands back to blade pitch angles, with an
optional azimuth offset ``psi_o`` added to every blade azimuth.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

B = 3
TWO_PI = 2.0 * np.pi


class CyclicVector(NamedTuple):
    collective: float
    tilt: float
    yaw: float


class PartialMatrixPair(NamedTuple):
    low: np.ndarray
    high: np.ndarray


def wrap_angle(psi):
    """Wrap an angle (or array of angles) to [0, 2*pi)."""
    out = np.mod(psi, TWO_PI)
    # np.mod returns exactly 2*pi for tiny negative inputs
    out = np.where(out >= TWO_PI, 0.0, out)
    return float(out) if np.ndim(out) == 0 else out


def _check_harmonic(n):
    if int(n) != n or n < 1:
        raise ValueError(f"harmonic number must be a positive integer, got {n!r}")
    return int(n)


def blade_azimuths(psi, n_blades: int = B):
    """Azimuth of each blade, ``psi + (b-1) 2pi/B``, wrapped to [0, 2pi)."""
    if n_blades < 1:
        raise ValueError(f"blade count must be >= 1, got {n_blades!r}")
    return [wrap_angle(psi + b * TWO_PI / n_blades) for b in range(n_blades)]


def _raw_azimuths(psi):
    # unwrapped: keeps derivatives and broadcasting simple
    psi = np.asarray(psi, dtype=float)
    return psi[..., None] + np.arange(B) * TWO_PI / B


def forward_matrix(n, psi, normalized_collective: bool = False) -> np.ndarray:
    """The 3x3 forward matrix ``T_n(psi)``.

    With ``normalized_collective=False`` (default) the 2/B factor multiplies
    every row, collective included, exactly as the transform is usually
    printed; the collective channel then has round-trip gain 2. The
    normalized variant uses 1/B on the collective row and is the exact
    inverse of :func:`reverse_matrix`.
    """
    n = _check_harmonic(n)
    az = n * _raw_azimuths(psi)
    first = np.full(np.shape(az), 1.0 / B if normalized_collective else 2.0 / B)
    return np.stack([first, 2.0 / B * np.cos(az), 2.0 / B * np.sin(az)], axis=-2)


def reverse_matrix(n, angle) -> np.ndarray:
    """The 3x3 reverse matrix ``T_n^{-1}(angle)``; pass ``psi + psi_o`` for an offset."""
    n = _check_harmonic(n)
    az = n * _raw_azimuths(angle)
    return np.stack([np.ones(np.shape(az)), np.cos(az), np.sin(az)], axis=-1)


def forward_mbc(n, psi, m, normalized_collective: bool = False) -> CyclicVector:
    """Forward transform of blade signals ``m`` (shape ``(3, ...)``)."""
    m = np.asarray(m, dtype=float)
    if m.shape[0] != B:
        raise ValueError(f"expected {B} blade values, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("blade values must be finite")
    n = _check_harmonic(n)
    az = n * np.moveaxis(_raw_azimuths(psi), -1, 0)
    k0 = 1.0 / B if normalized_collective else 2.0 / B
    return CyclicVector(
        k0 * m.sum(axis=0),
        2.0 / B * (np.cos(az) * m).sum(axis=0),
        2.0 / B * (np.sin(az) * m).sum(axis=0),
    )


def reverse_mbc(n, psi, psi_o, u) -> np.ndarray:
    """Blade pitch angles ``theta_0 + theta_b`` from (collective, tilt, yaw) demands.

    ``psi_o`` is added to every blade azimuth and is not wrapped.
    """
    collective, tilt, yaw = (np.asarray(v, dtype=float) for v in u)
    n = _check_harmonic(n)
    az = n * (np.moveaxis(_raw_azimuths(psi), -1, 0) + psi_o)
    out = collective + tilt * np.cos(az) + yaw * np.sin(az)
    if not np.all(np.isfinite(out)):
        raise ValueError("non-finite input to reverse transform")
    return out


def _trig_block(n):
    ang = TWO_PI * n * np.arange(B) / B
    return np.vstack([np.cos(ang), np.sin(ang)])


def partial_matrices(n, psi_o: float = 0.0) -> PartialMatrixPair:
    """Low and high partial transformation matrices (complex, 2x3).

    ``low = 1/2 [[1, j], [-j, 1]] R(n psi_o)^T G`` with ``G`` the 2x3
    trigonometric block of blade phase angles; ``high`` is its conjugate.
    At ``psi_o = 0`` these are the plain partial matrices; otherwise they are
    the transposes of the offset-augmented reverse partial matrices.
    """
    n = _check_harmonic(n)
    mix = 0.5 * np.array([[1.0, 1.0j], [-1.0j, 1.0]])
    low = mix @ rotation(n * psi_o).T @ _trig_block(n)
    return PartialMatrixPair(low, low.conj())


def rotation(angle) -> np.ndarray:
    """``[[cos a, sin a], [-sin a, cos a]]``."""
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, s], [-s, c]])


def composite_rotation(n, psi_o, psi: float = 0.0) -> np.ndarray:
    """Cyclic 2x2 block of ``T_n(psi) T_n^{-1}(psi + psi_o)``.

    Computed from the matrix product itself. For n not a multiple of 3 the
    result is independent of ``psi`` and equals ``rotation(n * psi_o)``; for
    multiples of 3 the cyclic rows are degenerate and it is not a rotation.
    """
    prod = forward_matrix(n, psi) @ reverse_matrix(n, psi + psi_o)
    return prod[1:, 1:]
