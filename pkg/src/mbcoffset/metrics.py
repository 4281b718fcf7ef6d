"""Interaction measures (RGA, R#) and offset searches built on them."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import SearchFailedError, SingularMatrixError
from .lti import frequency_grid, log_grid

#: band-averaged evaluation grid, 0.1 to 1 rad/s
BAND_GRID = log_grid(0.1, 1.0, 30)
#: single-point evaluation used for per-linearization searches
POINT_GRID = frequency_grid([1e-2])
DEFAULT_OFFSETS = np.radians(np.round(np.arange(-900, 901) * 0.1, 1))

_COND_LIMIT = 1e13


def rga(P) -> np.ndarray:
    """Relative gain array ``P o P^{-T}`` of a square matrix."""
    P = np.asarray(P, dtype=complex)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise ValueError("RGA needs a square matrix")
    if not np.all(np.isfinite(P)) or np.linalg.cond(P) > _COND_LIMIT:
        raise SingularMatrixError("matrix is singular; RGA undefined")
    return P * np.linalg.inv(P).T


def _rga12_batch(F: np.ndarray, grid: np.ndarray) -> np.ndarray:
    out = np.empty(len(F))
    for k, Fk in enumerate(F):
        try:
            out[k] = abs(rga(Fk)[0, 1])
        except SingularMatrixError:
            raise SingularMatrixError(f"plant frequency response singular at w = {grid[k]!r} rad/s",
                                      omega=float(grid[k])) from None
    return out


@dataclass(frozen=True)
class InteractionScore:
    r_sharp: float
    grid: np.ndarray = field(repr=False)


def interaction_index(plant, grid=BAND_GRID) -> InteractionScore:
    """Mean off-diagonal RGA magnitude ``|R12|`` over ``grid``.

    ``plant`` is anything with a vectorized ``frf(w)`` returning 2x2 blocks.
    """
    grid = frequency_grid(grid)
    F = np.asarray(plant.frf(grid)).reshape(len(grid), 2, 2)
    return InteractionScore(float(np.mean(_rga12_batch(F, grid))), grid)


@dataclass(frozen=True)
class OffsetSearchResult:
    psi_star: float
    score_at_star: float
    sweep: list = field(repr=False)

    def write_csv(self, path):
        """Write the sweep as ``psi_o_deg, r_sharp`` rows; failed points are left blank."""
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(["psi_o_deg", "r_sharp"])
            for psi, score in self.sweep:
                wr.writerow([repr(float(np.degrees(psi))), "" if np.isnan(score) else repr(float(score))])


def optimal_offset_grid(plant_builder: Callable, grid=POINT_GRID,
                        offsets: Sequence[float] = DEFAULT_OFFSETS) -> OffsetSearchResult:
    """Grid search for the offset minimizing R#; ties go to the smallest ``|psi_o|``."""
    offsets = np.asarray(offsets, dtype=float)
    if offsets.size == 0:
        raise ValueError("offset list is empty")
    grid = frequency_grid(grid)
    scores = np.full(offsets.shape, np.nan)
    for k, psi in enumerate(offsets):
        try:
            scores[k] = interaction_index(plant_builder(psi), grid).r_sharp
        except (SingularMatrixError, ZeroDivisionError):
            pass
    ok = np.flatnonzero(np.isfinite(scores))
    if ok.size == 0:
        raise SearchFailedError("every offset evaluation was singular")
    best = scores[ok].min()
    ties = ok[np.isclose(scores[ok], best, rtol=1e-12, atol=1e-15)]
    # deterministic tie-break: smallest |psi|, then the negative one
    k = min(ties, key=lambda i: (abs(offsets[i]), offsets[i]))
    return OffsetSearchResult(float(offsets[k]), float(scores[k]),
                              list(zip(offsets.tolist(), scores.tolist())))


def lower_median(values) -> float:
    v = np.sort(np.asarray(values, dtype=float))
    return float(v[(len(v) - 1) // 2])


def median_offset_over_models(builders: Sequence[Callable], grid=POINT_GRID,
                              offsets: Sequence[float] = DEFAULT_OFFSETS) -> float:
    """Median (lower median for even counts) of per-model optimal offsets.

    Failed searches are skipped; more than half failing raises ``SearchFailedError``.
    """
    if len(builders) == 0:
        raise ValueError("need at least one model")
    optima, failures = [], 0
    for build in builders:
        try:
            optima.append(optimal_offset_grid(build, grid, offsets).psi_star)
        except SearchFailedError:
            failures += 1
    if failures > len(builders) / 2:
        raise SearchFailedError(f"{failures} of {len(builders)} model searches failed")
    return lower_median(optima)
