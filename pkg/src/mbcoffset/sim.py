"""Time-domain harness: open-loop identification and closed-loop IPC runs.

Blade channels are discretized by exact zero-order hold. Open-loop runs are
fully vectorized; closed-loop runs step the feedback loop sample by sample.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import signal

from . import mbc
from .errors import IllExcitationError, InstabilityError
from .lti import ComplexRational, frequency_grid, ss_from_tf
from .mimo import DiagonalController
from .plant import RotorModel


@dataclass
class SimulationConfig:
    omega_r: float
    n: int = 1
    psi_o: float = 0.0
    seed: int = 0
    dt: float = 1.0 / 125.0
    duration: float = 2200.0
    discard: float = 200.0
    psi0: float = 0.0
    divergence_bound: float = 1e8

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if not 0 <= self.discard < self.duration:
            raise ValueError("need 0 <= discard < duration")
        if self.omega_r < 0:
            raise ValueError("omega_r must be >= 0")

    @property
    def steps(self) -> int:
        return int(round(self.duration / self.dt))

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=1, sort_keys=True)


@dataclass
class RBSSignal:
    amplitude: float = math.radians(1.0)
    clock_period: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.clock_period < 1 or int(self.clock_period) != self.clock_period:
            raise ValueError("clock period must be a positive integer number of samples")


def rbs_generate(length: int, cfg: RBSSignal) -> np.ndarray:
    """Random binary sequence of +-amplitude, held for ``clock_period`` samples."""
    if length <= 0:
        raise ValueError("length must be positive")
    rng = np.random.default_rng(cfg.seed)
    n_clock = -(-length // cfg.clock_period)
    levels = cfg.amplitude * (2.0 * rng.integers(0, 2, n_clock) - 1.0)
    return np.repeat(levels, cfg.clock_period)[:length]


@dataclass
class BandPassFilter:
    """Butterworth high-pass at ``low_cut`` cascaded with low-pass at ``high_cut`` (rad/s)."""

    low_cut: float = 1e-3
    high_cut: float = 1e2
    order: int = 2

    def __post_init__(self):
        if not 0 < self.low_cut < self.high_cut:
            raise ValueError("need 0 < low_cut < high_cut")

    def sos(self, dt: float) -> np.ndarray:
        fs = 1.0 / dt
        parts = []
        for cut, kind in ((self.low_cut, "highpass"), (self.high_cut, "lowpass")):
            z, p, k = signal.butter(self.order, cut, kind, analog=True, output="zpk")
            parts.append(signal.zpk2sos(*signal.bilinear_zpk(z, p, k, fs)))
        return np.vstack(parts)

    def apply(self, x, dt: float) -> np.ndarray:
        return signal.sosfilt(self.sos(dt), np.asarray(x, dtype=float), axis=-1)


@dataclass
class BladeDisturbance:
    """Additive blade-load disturbance ``mean + A cos(h psi_b + phase) + noise_b``.

    Noise is white with standard deviation ``noise_std`` passed through a
    first-order low-pass of bandwidth ``noise_bandwidth`` rad/s, independent
    per blade.
    """

    amplitude: float = 0.0
    phase: float = 0.0
    harmonic: int = 1
    mean: float = 0.0
    noise_std: float = 0.0
    noise_bandwidth: float = 1.0
    seed: int = 1

    def sample(self, psi: np.ndarray, dt: float) -> np.ndarray:
        az = np.moveaxis(mbc._raw_azimuths(psi), -1, 0)
        d = self.mean + self.amplitude * np.cos(self.harmonic * az + self.phase)
        if self.noise_std > 0:
            rng = np.random.default_rng(self.seed)
            white = rng.standard_normal(d.shape) * self.noise_std
            a = math.exp(-self.noise_bandwidth * dt)
            # unit-DC-gain discrete first-order low-pass
            d = d + signal.lfilter([1.0 - a], [1.0, -a], white, axis=-1)
        return d


def _stable(tf: ComplexRational) -> bool:
    return bool(np.all(tf.poles().real < 0))


def _check_rotor(rotor: RotorModel):
    for tf in (rotor.h1, rotor.h2):
        if tf is not None and not _stable(tf):
            raise ValueError("rotor model must be stable for simulation")


def _zoh_tf(tf: ComplexRational, dt: float):
    num = tf.num.real[::-1]
    den = tf.den.real[::-1]
    if tf.den_degree == 0:
        return np.array([num[0] / den[0]]) if num.size else np.array([0.0]), np.array([1.0])
    b, a, _ = signal.cont2discrete((num, den), dt, method="zoh")
    return np.atleast_2d(b)[0], a


def _zoh_ss(tf: ComplexRational, dt: float):
    ss = ss_from_tf(tf)
    if ss.r == 0:
        return np.zeros((0, 0)), np.zeros((0, 1)), np.zeros((1, 0)), ss.D
    Ad, Bd, Cd, Dd, _ = signal.cont2discrete((ss.A, ss.B, ss.C, ss.D), dt, method="zoh")
    return Ad, Bd, Cd, Dd


@dataclass
class TimeSeries:
    t: np.ndarray
    psi: np.ndarray
    theta: np.ndarray       # (3, N) IPC blade pitch contributions
    M: np.ndarray           # (3, N) blade root moments
    M_tilt: np.ndarray
    M_yaw: np.ndarray
    theta_tilt: np.ndarray
    theta_yaw: np.ndarray
    dt: float = field(default=1.0 / 125.0)

    COLUMNS = ("t", "psi", "theta_1", "theta_2", "theta_3", "M_1", "M_2", "M_3",
               "M_tilt", "M_yaw", "theta_tilt", "theta_yaw")

    def column(self, name: str) -> np.ndarray:
        if name.startswith("theta_") and name[-1] in "123":
            return self.theta[int(name[-1]) - 1]
        if name.startswith("M_") and name[-1] in "123":
            return self.M[int(name[-1]) - 1]
        return getattr(self, name)

    def tail(self, seconds: float) -> "TimeSeries":
        k = max(len(self.t) - int(round(seconds / self.dt)), 0)
        return TimeSeries(self.t[k:], self.psi[k:], self.theta[:, k:], self.M[:, k:], self.M_tilt[k:],
                          self.M_yaw[k:], self.theta_tilt[k:], self.theta_yaw[k:], self.dt)

    def write_csv(self, path):
        cols = [self.column(c) for c in self.COLUMNS]
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(self.COLUMNS)
            for row in zip(*cols):
                wr.writerow([repr(float(x)) for x in row])

    @classmethod
    def read_csv(cls, path) -> "TimeSeries":
        data = np.genfromtxt(path, delimiter=",", names=True)
        if data.ndim == 0 or data.size < 2:
            raise ValueError("time series needs at least two rows")
        t = data["t"]
        return cls(t, data["psi"],
                   np.vstack([data[f"theta_{b}"] for b in (1, 2, 3)]),
                   np.vstack([data[f"M_{b}"] for b in (1, 2, 3)]),
                   data["M_tilt"], data["M_yaw"], data["theta_tilt"], data["theta_yaw"],
                   float(t[1] - t[0]))


def simulate_open_loop(rotor: RotorModel, cfg: SimulationConfig, excitations,
                       band: BandPassFilter | None = BandPassFilter()) -> TimeSeries:
    """Excite tilt/yaw pitch, reverse-MBC with offset, rotor, forward-MBC without offset.

    ``excitations`` is a pair of raw signals of ``cfg.steps`` samples; they
    are band-pass filtered (unless ``band`` is None) and the filtered signals
    are recorded as ``theta_tilt``/``theta_yaw``.
    """
    _check_rotor(rotor)
    exc = np.asarray(excitations, dtype=float)
    N = cfg.steps
    if exc.shape != (2, N):
        raise ValueError(f"need two excitation signals of {N} samples")
    u = band.apply(exc, cfg.dt) if band is not None else exc
    t = np.arange(N) * cfg.dt
    psi = cfg.psi0 + cfg.omega_r * t
    theta = mbc.reverse_mbc(cfg.n, psi, cfg.psi_o, (0.0, u[0], u[1]))
    b1, a1 = _zoh_tf(rotor.h1, cfg.dt)
    M = signal.lfilter(b1, a1, theta, axis=-1)
    if rotor.h2 is not None:
        b2, a2 = _zoh_tf(rotor.h2, cfg.dt)
        others = theta.sum(axis=0) - theta
        M = M + signal.lfilter(b2, a2, others, axis=-1)
    _, m_tilt, m_yaw = mbc.forward_mbc(cfg.n, psi, M)
    k0 = int(round(cfg.discard / cfg.dt))
    return TimeSeries(t[k0:], psi[k0:], theta[:, k0:], M[:, k0:], m_tilt[k0:], m_yaw[k0:],
                      u[0, k0:], u[1, k0:], cfg.dt)


def simulate_closed_loop(rotor: RotorModel, cfg: SimulationConfig, ctrl: DiagonalController,
                         disturbance: BladeDisturbance = BladeDisturbance()) -> TimeSeries:
    """IPC loop: blade moments + disturbance, forward MBC, integrators on tilt/yaw
    (reference zero, negative feedback), reverse MBC with offset, blade pitch."""
    _check_rotor(rotor)
    N, dt = cfg.steps, cfg.dt
    t = np.arange(N) * dt
    psi = cfg.psi0 + cfg.omega_r * t
    dist = disturbance.sample(psi, dt)
    gains = ctrl.gains(2) * dt

    az = cfg.n * np.moveaxis(mbc._raw_azimuths(psi), -1, 0)
    fc, fs = 2.0 / mbc.B * np.cos(az), 2.0 / mbc.B * np.sin(az)
    rc, rs = np.cos(az + cfg.n * cfg.psi_o), np.sin(az + cfg.n * cfg.psi_o)

    A1, B1, C1, D1 = _zoh_ss(rotor.h1, dt)
    x1 = np.zeros((mbc.B, A1.shape[0]))
    coupled = rotor.h2 is not None
    if coupled:
        A2, B2, C2, D2 = _zoh_ss(rotor.h2, dt)
        x2 = np.zeros((mbc.B, A2.shape[0]))
    A1T, B1r, C1r, d1 = A1.T, B1[:, 0], C1[0], float(D1[0, 0])
    if coupled:
        A2T, B2r, C2r, d2 = A2.T, B2[:, 0], C2[0], float(D2[0, 0])

    theta = np.empty((mbc.B, N))
    M = np.empty((mbc.B, N))
    m_tilt = np.empty(N)
    m_yaw = np.empty(N)
    u_tilt = np.empty(N)
    u_yaw = np.empty(N)
    ut = uy = 0.0
    bound = cfg.divergence_bound
    for k in range(N):
        th = ut * rc[:, k] + uy * rs[:, k]
        y = x1 @ C1r + d1 * th + dist[:, k]
        x1 = x1 @ A1T + np.outer(th, B1r)
        if coupled:
            oth = th.sum() - th
            y = y + x2 @ C2r + d2 * oth
            x2 = x2 @ A2T + np.outer(oth, B2r)
        mt = float(fc[:, k] @ y)
        my = float(fs[:, k] @ y)
        theta[:, k] = th
        M[:, k] = y
        m_tilt[k], m_yaw[k], u_tilt[k], u_yaw[k] = mt, my, ut, uy
        ut -= gains[0] * mt
        uy -= gains[1] * my
        if not (abs(mt) < bound and abs(my) < bound and abs(ut) < bound and abs(uy) < bound):
            raise InstabilityError(float(t[k]), max(abs(mt), abs(my), abs(ut), abs(uy)))

    k0 = int(round(cfg.discard / dt))
    return TimeSeries(t[k0:], psi[k0:], theta[:, k0:], M[:, k0:], m_tilt[k0:], m_yaw[k0:],
                      u_tilt[k0:], u_yaw[k0:], dt)


@dataclass
class SpectralEstimate:
    grid: np.ndarray
    frf: np.ndarray          # (L, outputs, inputs)
    coherence: np.ndarray    # (L, outputs, inputs), partial coherence


WELCH_NPERSEG = 2 ** 14


def _welch_kw(nperseg, noverlap):
    return dict(window="hann", nperseg=nperseg,
                noverlap=nperseg // 2 if noverlap is None else noverlap, detrend="constant")


def spectral_frf(inputs, outputs, dt: float, nperseg: int = WELCH_NPERSEG,
                 noverlap: int | None = None, band=None) -> SpectralEstimate:
    """Welch-averaged MIMO FRF ``G_yu G_uu^{-T}`` and partial coherences.

    ``band`` = (w_lo, w_hi) in rad/s restricts the returned grid; the DC bin
    is always excluded. Coherence entry (i, j) is the coherence of output i
    with input j after conditioning on the remaining inputs.
    """
    u = np.atleast_2d(np.asarray(inputs, dtype=float))
    y = np.atleast_2d(np.asarray(outputs, dtype=float))
    if u.shape[1] != y.shape[1]:
        raise ValueError("inputs and outputs must have equal length")
    if u.shape[1] < 4 * nperseg // 2:
        raise ValueError("series shorter than four windows")
    kw = _welch_kw(nperseg, noverlap)
    fs = 1.0 / dt
    m, q = len(u), len(y)

    def csd(a, b):
        f, p = signal.csd(a, b, fs=fs, **kw)
        return f, p

    f, _ = csd(u[0], u[0])
    w = 2.0 * np.pi * f
    sel = w > 0
    if band is not None:
        sel &= (w >= band[0]) & (w <= band[1])
    idx = np.flatnonzero(sel)
    Guu = np.empty((len(f), m, m), dtype=complex)
    for j in range(m):
        for k in range(m):
            Guu[:, j, k] = csd(u[j], u[k])[1]
    Guy = np.empty((len(f), m, q), dtype=complex)   # E[U_j^* Y_i]
    for j in range(m):
        for i in range(q):
            Guy[:, j, i] = csd(u[j], y[i])[1]
    Gyy = np.stack([csd(y[i], y[i])[1].real for i in range(q)], axis=-1)

    frf = np.empty((len(idx), q, m), dtype=complex)
    coh = np.empty((len(idx), q, m))
    for n_out, kf in enumerate(idx):
        G = Guu[kf]
        if np.linalg.cond(G) > 1e10:
            raise IllExcitationError(float(w[kf]))
        # Guy[j, i] = sum_k Guu[j, k] H[i, k], i.e. Guy = Guu H^T
        frf[n_out] = np.linalg.solve(G, Guy[kf]).T
        for j in range(m):
            others = [k for k in range(m) if k != j]
            for i in range(q):
                gjj, gjy, gyy = G[j, j].real, Guy[kf, j, i], Gyy[kf, i]
                if others:
                    Goo = G[np.ix_(others, others)]
                    Gjo = G[j, others]
                    Goy = Guy[kf, others, i]
                    sol_y = np.linalg.solve(Goo, Goy)
                    gjj = gjj - (Gjo @ np.linalg.solve(Goo, G[others, j])).real
                    gjy = gjy - Gjo @ sol_y
                    gyy = gyy - (Goy.conj() @ sol_y).real
                denom = gjj * gyy
                coh[n_out, i, j] = min(abs(gjy) ** 2 / denom, 1.0) if denom > 0 else 0.0
    return SpectralEstimate(frequency_grid(w[idx]), frf, coh)


def psd(x, dt: float, nperseg: int = WELCH_NPERSEG, noverlap: int | None = None):
    """One-sided Welch PSD per rad/s; returns ``(omega, P)`` with ``sum(P) dw`` = variance."""
    x = np.asarray(x, dtype=float)
    nperseg = min(nperseg, len(x))
    f, p = signal.welch(x, fs=1.0 / dt, **_welch_kw(nperseg, noverlap))
    return 2.0 * np.pi * f, p / (2.0 * np.pi)


def band_power(omega, p, lo: float, hi: float) -> float:
    sel = (omega >= lo) & (omega <= hi)
    if not np.any(sel):
        return 0.0
    dw = omega[1] - omega[0]
    return float(np.sum(p[sel]) * dw)


def write_psd_csv(path, omega, columns: dict):
    names = list(columns)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["omega"] + names)
        for k, w in enumerate(omega):
            wr.writerow([repr(float(w))] + [repr(float(columns[c][k])) for c in names])
