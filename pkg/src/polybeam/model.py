"""ULA link model: steering vectors, channel, data rate and its reference derivatives."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from polybeam.errors import DomainError

TWO_PI = 2.0 * math.pi
LN2 = math.log(2.0)


class BeamAngles(NamedTuple):
    theta_rx: float
    theta_tx: float


@dataclass(frozen=True)
class RateParams:
    alpha1: float = 1.0
    alpha2: float = 1.0
    alpha3: float = 1.0

    def __post_init__(self):
        for name in ("alpha1", "alpha2", "alpha3"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be positive and finite, got {v!r}")

    @property
    def gain(self) -> float:
        return self.alpha1 * self.alpha2 / self.alpha3


@dataclass(frozen=True, eq=False)
class ChannelMatrix:
    """Complex N_r x N_t channel ``H = H_r + j H_i``."""

    entries: np.ndarray
    seed: int | None = None
    rows: int = field(init=False)
    cols: int = field(init=False)

    def __post_init__(self):
        h = np.array(self.entries, dtype=np.complex128)
        if h.ndim != 2 or h.shape[0] < 1 or h.shape[1] < 1:
            raise DomainError(f"channel must be a nonempty 2-D matrix, got shape {h.shape}")
        if not np.all(np.isfinite(h)):
            raise DomainError("channel entries must be finite")
        h.setflags(write=False)
        object.__setattr__(self, "entries", h)
        object.__setattr__(self, "rows", h.shape[0])
        object.__setattr__(self, "cols", h.shape[1])

    @classmethod
    def random(cls, n_rx: int, n_tx: int, seed: int) -> "ChannelMatrix":
        """I.i.d. circularly-symmetric standard complex normal entries."""
        rng = np.random.default_rng(seed)
        re = rng.standard_normal((n_rx, n_tx))
        im = rng.standard_normal((n_rx, n_tx))
        return cls((re + 1j * im) / math.sqrt(2.0), seed=seed)

    @classmethod
    def zeros(cls, n_rx: int, n_tx: int) -> "ChannelMatrix":
        return cls(np.zeros((n_rx, n_tx), dtype=np.complex128))

    @property
    def real(self) -> np.ndarray:
        return self.entries.real

    @property
    def imag(self) -> np.ndarray:
        return self.entries.imag

    def __eq__(self, other):
        if not isinstance(other, ChannelMatrix):
            return NotImplemented
        return self.seed == other.seed and np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash((self.seed, self.entries.tobytes()))


def steering_vector(theta: float, n_antennas: int) -> np.ndarray:
    """Half-wavelength ULA response ``w[k] = exp(j*pi*k*sin(theta)) / sqrt(N)``."""
    if n_antennas < 1:
        raise DomainError("n_antennas must be >= 1")
    if not math.isfinite(theta):
        raise DomainError("theta must be finite")
    k = np.arange(n_antennas)
    return np.exp(1j * math.pi * k * math.sin(theta)) / math.sqrt(n_antennas)


def link_gain(H: ChannelMatrix, angles: BeamAngles) -> complex:
    """The scalar ``w_rx^H H w_tx``."""
    w_rx = steering_vector(angles[0], H.rows)
    w_tx = steering_vector(angles[1], H.cols)
    return complex(np.vdot(w_rx, H.entries @ w_tx))


def data_rate(H: ChannelMatrix, params: RateParams, angles: BeamAngles) -> float:
    """Spectral efficiency ``log2(1 + gain * |w_rx^H H w_tx|^2)`` in bits/s/Hz."""
    g = link_gain(H, angles)
    return math.log1p(params.gain * (g.real * g.real + g.imag * g.imag)) / LN2


def rate_gradient_fd(H: ChannelMatrix, params: RateParams, angles: BeamAngles,
                     step: float = 1e-5) -> tuple[float, float]:
    """Central-difference estimates of (dR/dtheta_rx, dR/dtheta_tx)."""
    if not step > 0:
        raise DomainError("step must be positive")
    th_rx, th_tx = angles
    f1 = (data_rate(H, params, BeamAngles(th_rx + step, th_tx))
          - data_rate(H, params, BeamAngles(th_rx - step, th_tx))) / (2 * step)
    f2 = (data_rate(H, params, BeamAngles(th_rx, th_tx + step))
          - data_rate(H, params, BeamAngles(th_rx, th_tx - step))) / (2 * step)
    return f1, f2


def angle_grid(points_per_axis: int) -> np.ndarray:
    """Uniform grid ``k * 2pi / n`` for k = 0..n-1 (right endpoint excluded)."""
    return np.arange(points_per_axis) * (TWO_PI / points_per_axis)


def rate_on_grid(H: ChannelMatrix, params: RateParams, theta_rx: np.ndarray,
                 theta_tx: np.ndarray) -> np.ndarray:
    """R evaluated on the outer grid ``theta_rx x theta_tx``; result[i, j] = R(rx_i, tx_j)."""
    k_rx = np.arange(H.rows)
    k_tx = np.arange(H.cols)
    w_rx = np.exp(1j * math.pi * np.outer(np.sin(theta_rx), k_rx)) / math.sqrt(H.rows)
    w_tx = np.exp(1j * math.pi * np.outer(np.sin(theta_tx), k_tx)) / math.sqrt(H.cols)
    g = w_rx.conj() @ H.entries @ w_tx.T
    return np.log1p(params.gain * np.abs(g) ** 2) / LN2


def exhaustive_search(H: ChannelMatrix, params: RateParams,
                      grid_points_per_axis: int = 360) -> tuple[BeamAngles, float]:
    """Beam sweep over the uniform grid on [0, 2pi)^2.

    Ties resolve to the lexicographically smallest (theta_rx, theta_tx).
    """
    if grid_points_per_axis < 2:
        raise DomainError("grid_points_per_axis must be >= 2")
    grid = angle_grid(grid_points_per_axis)
    rates = rate_on_grid(H, params, grid, grid)
    # argmax returns the first maximum in row-major order: smallest rx, then tx
    i, j = np.unravel_index(int(np.argmax(rates)), rates.shape)
    best = BeamAngles(float(grid[i]), float(grid[j]))
    return best, data_rate(H, params, best)


def grid_max_rate(H: ChannelMatrix, params: RateParams, points_per_axis: int,
                  chunk: int = 256) -> float:
    """Maximum of R over a dense grid, evaluated in row chunks to bound memory."""
    grid = angle_grid(points_per_axis)
    best = 0.0
    for start in range(0, points_per_axis, chunk):
        block = rate_on_grid(H, params, grid[start:start + chunk], grid)
        best = max(best, float(block.max()))
    return best
