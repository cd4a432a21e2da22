"""Trajectory loop, ensemble averaging and analytic baselines.

Trajectories are integrated in batches: one ``numpy`` array holds the states
of every trajectory in the batch and each step is a handful of elementwise
array operations. Each trajectory draws from its own noise streams and every
operation acts row by row, so a trajectory's result does not depend on which
batch, or which worker process, computed it.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .codes import StabilizerCode, get_code
from .config import SimConfig, config_dict
from .control import ExponentialFilter, Switchboard
from .dynamics import POSITIVITY_TOL, _sme_kernel, min_eigenvalue, sse_increment
from .errors import NumericalIntegrityError
from .noise import CHUNK, BatchNoise

log = logging.getLogger(__name__)

MAX_ABORTED_FRACTION = 0.1


@dataclass
class TrajectoryResult:
    times: np.ndarray
    fidelity: np.ndarray
    jumps: np.ndarray
    aborted: bool = False


@dataclass
class BatchResult:
    indices: np.ndarray
    times: np.ndarray
    fidelity: np.ndarray  # (batch, samples)
    jumps: np.ndarray  # (batch, errors)
    aborted: np.ndarray  # (batch,)

    def trajectory(self, i: int) -> TrajectoryResult:
        return TrajectoryResult(self.times, self.fidelity[i], self.jumps[i], bool(self.aborted[i]))


@dataclass
class EnsembleResult:
    times: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    n_traj: int
    n_aborted: int
    config: SimConfig
    fidelity: np.ndarray = field(repr=False)
    jumps: np.ndarray = field(repr=False)

    @property
    def seed(self) -> int:
        return self.config.seed

    @property
    def final(self) -> tuple[float, float]:
        return float(self.mean[-1]), float(self.stderr[-1])

    def at(self, t: float) -> tuple[float, float]:
        """Mean and standard error at the sample nearest to ``t``."""
        i = int(np.argmin(np.abs(self.times - t)))
        return float(self.mean[i]), float(self.stderr[i])

    def metadata(self) -> dict:
        ok = self.fidelity.shape[0]
        jumps = self.jumps
        return {
            "config": config_dict(self.config),
            "seed": self.seed,
            "n_traj_effective": self.n_traj,
            "n_aborted": self.n_aborted,
            "final_time": float(self.times[-1]),
            "final_fidelity": float(self.mean[-1]),
            "final_stderr": float(self.stderr[-1]),
            "mean_jumps_per_channel": (jumps.mean(axis=0) if ok else np.zeros(jumps.shape[1])).tolist(),
            "total_jumps": int(jumps.sum()),
            "noise": "common random numbers: trajectory i uses the same streams at every sweep point",
        }


def code_for(cfg: SimConfig) -> StabilizerCode:
    return get_code(cfg.code)


def sample_times(cfg: SimConfig) -> np.ndarray:
    n_samples = cfg.n_steps // cfg.stride + 1
    return np.arange(n_samples) * (cfg.stride * cfg.dt)


def _fidelity_pure(psi0, psi):
    amp = np.sum(psi0.conj() * psi, axis=-1)
    return np.clip(amp.real**2 + amp.imag**2, 0.0, 1.0)


def _fidelity_mixed(psi0, rho):
    weight = psi0.conj()[:, None] * psi0[None, :]
    return np.clip(np.sum((weight * rho).real, axis=(-2, -1)), 0.0, 1.0)


def run_batch(cfg: SimConfig, indices) -> BatchResult:
    """Integrate the trajectories ``indices`` of the ensemble described by ``cfg``."""
    indices = np.asarray(indices, dtype=np.int64)
    code = code_for(cfg)
    batch = len(indices)
    m, d = code.n_generators, code.n_errors
    psi0 = code.initial_codeword
    mixed = cfg.mode == "sme"

    if mixed:
        state = np.tile(np.outer(psi0, psi0.conj()), (batch, 1, 1))
        fidelity_of = _fidelity_mixed
    else:
        state = np.tile(psi0, (batch, 1))
        fidelity_of = _fidelity_pure
    reset = state[0].copy()

    times = sample_times(cfg)
    fid = np.empty((batch, len(times)))
    fid[:, 0] = fidelity_of(psi0, state)
    jumps = np.zeros((batch, d), dtype=np.int64)
    aborted = np.zeros(batch, dtype=bool)

    filt = ExponentialFilter(cfg.r, cfg.window, cfg.dt, cfg.kappa, shape=(batch, m))
    board = Switchboard(code, cfg.threshold)
    noise = BatchNoise(cfg.seed, indices, m, d)
    rates = [cfg.gamma * rate for rate in code.error_rates]
    no_feedback = np.zeros((batch, code.n_channels))
    kappa, lam, dt, eta = cfg.kappa, cfg.lam, cfg.dt, cfg.eta

    sme = _sme_kernel(cfg.sme_scheme)
    n_steps = cfg.n_steps
    step = 0
    while step < n_steps:
        n = min(CHUNK, n_steps - step)
        dW = noise.wiener(dt, n)
        if not mixed:
            dN = noise.jumps(rates, dt, n)
            jumps += dN.sum(axis=0)
        for i in range(n):
            if cfg.early_feedback:
                G = board(filt.partial_output).G
            elif filt.warm or lam == 0:
                G = no_feedback
            else:
                G = board(filt.output).G
            if mixed:
                state, dQ, bad = sme(state, code, dW[i], G, kappa, cfg.gamma, lam, eta, dt)
            else:
                state, dQ, bad = sse_increment(state, code, dW[i], dN[i], G, kappa, lam, dt)
            filt.update(dQ)
            step += 1
            if bad.any():
                aborted |= bad
                state[bad] = reset
            if step % cfg.stride == 0:
                s = step // cfg.stride
                fid[:, s] = fidelity_of(psi0, state)
                if mixed:
                    neg = min_eigenvalue(state) < -POSITIVITY_TOL
                    if neg.any():
                        aborted |= neg
                        state[neg] = reset
        log.debug("batch %s..%s: %d/%d steps", indices[0], indices[-1], step, n_steps)
    return BatchResult(indices, times, fid, jumps, aborted)


def run_trajectory(cfg: SimConfig, index: int) -> TrajectoryResult:
    return run_batch(cfg, [index]).trajectory(0)


def _split(n: int, parts: int) -> list[range]:
    size = math.ceil(n / parts)
    return [range(lo, min(lo + size, n)) for lo in range(0, n, size)]


def _run_range(args):
    cfg, rng = args
    return run_batch(cfg, list(rng))


def run_ensemble(cfg: SimConfig, threads: int = 1, batch_size: int | None = None) -> EnsembleResult:
    """Average ``cfg.n_traj`` trajectories; output is independent of ``threads``.

    Trajectories are split into contiguous index ranges (at most
    ``batch_size`` each) and reduced in index order.
    """
    threads = max(1, int(threads))
    parts = threads
    if batch_size:
        parts = max(parts, math.ceil(cfg.n_traj / batch_size))
    ranges = _split(cfg.n_traj, parts)
    if threads == 1 or len(ranges) == 1:
        batches = [run_batch(cfg, list(r)) for r in ranges]
    else:
        with ProcessPoolExecutor(max_workers=min(threads, len(ranges))) as pool:
            batches = list(pool.map(_run_range, [(cfg, r) for r in ranges]))
    return reduce_batches(cfg, batches)


def reduce_batches(cfg: SimConfig, batches: list[BatchResult]) -> EnsembleResult:
    batches = sorted(batches, key=lambda b: b.indices[0])
    fid = np.concatenate([b.fidelity for b in batches])
    jumps = np.concatenate([b.jumps for b in batches])
    aborted = np.concatenate([b.aborted for b in batches])
    n_aborted = int(aborted.sum())
    if n_aborted > MAX_ABORTED_FRACTION * cfg.n_traj:
        raise NumericalIntegrityError(
            f"{n_aborted} of {cfg.n_traj} trajectories aborted (degenerate or non-positive states); reduce dt"
        )
    fid = fid[~aborted]
    jumps = jumps[~aborted]
    n = fid.shape[0]
    mean = fid.mean(axis=0)
    stderr = fid.std(axis=0, ddof=1) / np.sqrt(n) if n > 1 else np.zeros_like(mean)
    return EnsembleResult(batches[0].times, mean, stderr, n, n_aborted, cfg, fid, jumps)


def analytic_f1(gamma: float, t):
    """Fidelity of an unprotected qubit under bit flips at rate ``gamma``."""
    return 0.5 * (1 + np.exp(-2 * gamma * np.asarray(t, dtype=float)))


def analytic_f3d(gamma: float, t):
    """Fidelity of the bit-flip code corrected discretely after a time ``t``."""
    t = np.asarray(t, dtype=float)
    return 0.25 * (2 + 3 * np.exp(-2 * gamma * t) - np.exp(-6 * gamma * t))
