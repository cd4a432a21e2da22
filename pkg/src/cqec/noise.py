"""Per-trajectory random increments.

Every (master seed, trajectory index, channel) triple owns its own
``numpy`` generator, seeded counter-style through ``SeedSequence`` spawn keys.
Samples are drawn in fixed-size chunks, so the sequence a stream yields does not
depend on how many values a caller asks for at once, and trajectory results
do not depend on how trajectories are grouped into workers.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError, ContractViolation

CHUNK = 4096
MAX_JUMP_PROBABILITY = 0.1


def check_jump_step(gamma: float, dt: float) -> None:
    if gamma < 0:
        raise ConfigError(f"error rate must be non-negative, got {gamma}")
    if gamma * dt > MAX_JUMP_PROBABILITY:
        raise ConfigError(
            f"time step too coarse for jump process: gamma*dt = {gamma * dt:.3g} > {MAX_JUMP_PROBABILITY}"
        )


class NoiseStream:
    """Reproducible source of Wiener or jump increments for one channel."""

    def __init__(self, master_seed: int, trajectory_index: int, channel: int = 0):
        self.master_seed = int(master_seed)
        self.trajectory_index = int(trajectory_index)
        self.channel = int(channel)
        seq = np.random.SeedSequence(self.master_seed, spawn_key=(self.trajectory_index, self.channel))
        self._rng = np.random.Generator(np.random.PCG64(seq))
        self._normal = _Buffer(self._rng.standard_normal)
        self._uniform = _Buffer(self._rng.random)

    def standard_normals(self, n: int) -> np.ndarray:
        return self._normal.take(n)

    def uniforms(self, n: int) -> np.ndarray:
        return self._uniform.take(n)

    def wiener(self, dt: float) -> float:
        return float(self.wiener_block(dt, 1)[0])

    def wiener_block(self, dt: float, n: int) -> np.ndarray:
        if dt <= 0:
            raise ContractViolation(f"dt must be positive, got {dt}")
        return np.sqrt(dt) * self.standard_normals(n)

    def jump(self, gamma: float, dt: float) -> int:
        return int(self.jump_block(gamma, dt, 1)[0])

    def jump_block(self, gamma: float, dt: float, n: int) -> np.ndarray:
        """0/1 increments with P(1) = gamma*dt (first-order Poisson)."""
        check_jump_step(gamma, dt)
        return (self.uniforms(n) < gamma * dt).astype(np.int8)


class _Buffer:
    def __init__(self, draw):
        self._draw = draw
        self._data = np.empty(0)
        self._pos = 0

    def take(self, n: int) -> np.ndarray:
        out = np.empty(n)
        filled = 0
        while filled < n:
            if self._pos == len(self._data):
                self._data = self._draw(CHUNK)
                self._pos = 0
            k = min(n - filled, len(self._data) - self._pos)
            out[filled : filled + k] = self._data[self._pos : self._pos + k]
            self._pos += k
            filled += k
        return out


class BatchNoise:
    """Increments for a batch of trajectories, shaped (steps, batch, channels).

    Channels ``0..m-1`` are the generator measurements and ``m..m+d-1`` the
    error jump processes.
    """

    def __init__(self, master_seed: int, indices, n_generators: int, n_errors: int):
        self.n_generators = n_generators
        self.n_errors = n_errors
        self._meas = [[NoiseStream(master_seed, i, c) for c in range(n_generators)] for i in indices]
        self._jump = [
            [NoiseStream(master_seed, i, n_generators + k) for k in range(n_errors)] for i in indices
        ]

    def wiener(self, dt: float, n_steps: int) -> np.ndarray:
        out = np.empty((n_steps, len(self._meas), self.n_generators))
        for b, streams in enumerate(self._meas):
            for c, s in enumerate(streams):
                out[:, b, c] = s.wiener_block(dt, n_steps)
        return out

    def jumps(self, rates, dt: float, n_steps: int) -> np.ndarray:
        out = np.zeros((n_steps, len(self._jump), self.n_errors), dtype=np.int8)
        for b, streams in enumerate(self._jump):
            for k, s in enumerate(streams):
                out[:, b, k] = s.jump_block(rates[k], dt, n_steps)
        return out
