"""Classical side of the loop: smoothing the records and switching the feedback."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Protocol

import numpy as np

from .codes import StabilizerCode
from .errors import ConfigError, ContractViolation


class Filter(Protocol):
    """Anything turning record increments into a smoothed signal."""

    warm: bool

    def update(self, dQ) -> np.ndarray: ...


def filter_norm(kappa: float, r: float, window: float) -> float:
    """Scale that centres the filtered record on +-1 for a noiseless eigenstate."""
    if r == 0:
        return 2 * kappa * window
    return 2 * kappa / r * (1 - np.exp(-r * window))


class ExponentialFilter:
    """Exponentially weighted sum over the last ``M = round(T/dt)`` increments.

    ``R = (1/N) * sum_{j<M} exp(-r j dt) dQ[latest - j]``, maintained
    recursively with a ring buffer so each update is O(1) in the window
    length. ``shape`` is the shape of one increment (e.g. ``(batch, m)``).
    """

    def __init__(self, r: float, window: float, dt: float, kappa: float, shape=()):
        if r < 0 or window <= 0 or dt <= 0:
            raise ConfigError("filter needs r >= 0, T > 0 and dt > 0")
        self.r = r
        self.window = window
        self.dt = dt
        self.kappa = kappa
        self.size = max(1, int(round(window / dt)))
        self.norm = filter_norm(kappa, r, window)
        # with kappa = 0 the record carries no signal; report 0 rather than 0/0
        self._scale = 1.0 / self.norm if self.norm > 0 else 0.0
        self.decay = np.exp(-r * dt)
        self._tail = self.decay**self.size
        self._buf = np.zeros((self.size,) + tuple(shape))
        self._acc = np.zeros(shape)
        self._pos = 0
        self.filled = 0

    @property
    def warm(self) -> bool:
        """True until the window has been filled once."""
        return self.filled < self.size

    def update(self, dQ) -> np.ndarray:
        dQ = np.asarray(dQ, dtype=float)
        if self.filled == self.size:
            self._acc = self.decay * self._acc + dQ - self._tail * self._buf[self._pos]
        else:
            self._acc = self.decay * self._acc + dQ
            self.filled += 1
        self._buf[self._pos] = dQ
        self._pos = (self._pos + 1) % self.size
        return self._acc * self._scale

    @property
    def output(self) -> np.ndarray:
        return self._acc * self._scale

    @property
    def partial_output(self) -> np.ndarray:
        """Output normalized over the part of the window seen so far."""
        norm = filter_norm(self.kappa, self.r, self.filled * self.dt)
        if norm == 0:
            return np.zeros_like(self._acc)
        return self._acc / norm


def filter_update(f: ExponentialFilter, dQ) -> np.ndarray:
    return f.update(dQ)


@dataclass(frozen=True)
class ConditioningSignals:
    G: np.ndarray
    active: np.ndarray


class Switchboard:
    """Vectorized syndrome lookup: filtered signals in, feedback amplitudes out.

    A channel switches on when its syndrome pattern appears, with generator
    ``l`` read as -1 whenever ``R_l < -threshold``. The amplitude of an
    active channel is the filtered signal of its driving generator.
    """

    def __init__(self, code: StabilizerCode, threshold: float = 0.0):
        if not -1 < threshold < 1:
            raise ConfigError(f"threshold must lie in (-1, 1), got {threshold}")
        self.code = code
        self.threshold = threshold
        m = code.n_generators
        # driver[pattern, channel] = generator index, -1 when the channel is off
        driver = np.full((2**m, code.n_channels), -1, dtype=np.intp)
        for signs in itertools.product((1, -1), repeat=m):
            idx = sum(1 << l for l, s in enumerate(signs) if s < 0)
            for sw in code.switch_table[signs]:
                driver[idx, sw.channel] = sw.driver
        self._driver = driver
        self._weights = 1 << np.arange(m)

    def __call__(self, R, warm: bool = False) -> ConditioningSignals:
        R = np.asarray(R, dtype=float)
        if R.shape[-1] != self.code.n_generators:
            raise ContractViolation(f"expected {self.code.n_generators} filter outputs, got {R.shape[-1]}")
        drivers = self._driver[(R < -self.threshold) @ self._weights]
        active = drivers >= 0
        if warm:
            return ConditioningSignals(np.zeros(active.shape), np.zeros_like(active))
        G = np.where(active, np.take_along_axis(R, np.maximum(drivers, 0), axis=-1), 0.0)
        return ConditioningSignals(G, active)


def conditioning(code: StabilizerCode, R, warm: bool = False, threshold: float = 0.0) -> ConditioningSignals:
    return Switchboard(code, threshold)(R, warm)
