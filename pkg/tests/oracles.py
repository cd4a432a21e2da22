"""Independent reference implementations used as test oracles.

Nothing here imports the package. Operators are built with ``np.kron`` from
hard-coded 2x2 matrices, states are dense, the feedback loop averages the
error jumps instead of sampling them, and the filter is evaluated from
differences of weighted prefix sums instead of a decaying accumulator, so
agreement with the package is a genuine cross-check rather than a tautology.
"""

from __future__ import annotations

import numpy as np

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)


def kron(*ops):
    out = np.ones((1, 1), dtype=complex)
    for op in ops:
        out = np.kron(out, op)
    return out


def bitflip_ops():
    errors = [kron(X, I2, I2), kron(I2, X, I2), kron(I2, I2, X)]
    gens = [kron(Z, Z, I2), kron(I2, Z, Z)]
    return errors, gens


def lindblad(ops, rates, rho):
    out = np.zeros_like(rho)
    for a, g in zip(ops, rates):
        ad = a.conj().T
        out += g * (a @ rho @ ad - 0.5 * (ad @ a @ rho + rho @ ad @ a))
    return out


def master_equation_fidelity(ops, rates, rho0, psi0, dt, n_steps, stride=1):
    """Plain Euler integration of the unconditional master equation."""
    rho = rho0.astype(complex)
    fid = [np.real(psi0.conj() @ rho @ psi0)]
    for step in range(1, n_steps + 1):
        rho = rho + dt * lindblad(ops, rates, rho)
        if step % stride == 0:
            fid.append(np.real(psi0.conj() @ rho @ psi0))
    return np.array(fid)


def f1_closed(gamma, t):
    return 0.5 * (1 + np.exp(-2 * gamma * t))


def f3d_closed(gamma, t):
    return 0.25 * (2 + 3 * np.exp(-2 * gamma * t) - np.exp(-6 * gamma * t))


def bitflip_sme_fidelity(
    gamma, kappa, lam, r, window, dt, t_final, n_traj, seed, eta=1.0, stride=100
):
    """Brute-force feedback loop on dense 8x8 density matrices.

    Each step applies the measurement operator
    ``K = (1 - (2 kappa + 3 gamma) dt / 2) + sqrt(kappa eta) sum_l dy_l M_l``
    with ``dy_l = 2 sqrt(kappa eta) <M_l> dt + dW_l``, adds the unobserved
    part of the measurement and the averaged bit flips, then the feedback
    unitary ``prod_k (cos(lam G_k dt) - i sin(lam G_k dt) F_k)``. A plain
    Euler update of the same equation is unstable at dt = 1e-4.

    The filter is evaluated from weighted prefix sums
    ``S_n = sum_{i<=n} exp(r i dt) dQ_i``, so ``t_final`` must keep
    ``exp(r t_final)`` well inside floating-point range.
    Returns (times, per-trajectory fidelity samples).
    """
    rng = np.random.default_rng(seed)
    errors, gens = bitflip_ops()
    feedbacks = errors
    eye = np.eye(8)
    psi0 = eye[0].astype(complex)
    rho = np.tile(np.outer(psi0, psi0), (n_traj, 1, 1))
    n_steps = int(round(t_final / dt))
    m = int(round(window / dt))
    norm = 2 * kappa / r * (1 - np.exp(-r * window))
    a = 1 - 0.5 * (2 * kappa + 3 * gamma) * dt
    se = np.sqrt(kappa * eta)

    # ring of prefix sums: slot i % (m + 1) holds S_i
    ring = np.zeros((m + 1, n_traj, 2))
    samples = [np.ones(n_traj)]
    times = [0.0]
    for n in range(1, n_steps + 1):
        # filtered signal from the increments of steps n-m .. n-1
        G = np.zeros((n_traj, 3))
        if n - 1 >= m:
            diff = ring[(n - 1) % (m + 1)] - ring[(n - 1 - m) % (m + 1)]
            R = diff * np.exp(-r * (n - 1) * dt) / norm
            r1, r2 = R[:, 0], R[:, 1]
            G[:, 0] = np.where((r1 < 0) & (r2 >= 0), r1, 0)
            G[:, 1] = np.where((r1 < 0) & (r2 < 0), r1, 0)
            G[:, 2] = np.where((r1 >= 0) & (r2 < 0), r2, 0)

        dW = rng.normal(0.0, np.sqrt(dt), size=(n_traj, 2))
        mean = np.stack([np.trace(g @ rho, axis1=1, axis2=2).real for g in gens], axis=1)
        dy = 2 * se * mean * dt + dW
        K = a * eye + se * (dy[:, 0, None, None] * gens[0] + dy[:, 1, None, None] * gens[1])
        new = K @ rho @ K.conj().transpose(0, 2, 1)
        for g in gens:
            new += (1 - eta) * kappa * dt * (g @ rho @ g)
        for e in errors:
            new += gamma * dt * (e @ rho @ e)
        U = np.tile(eye.astype(complex), (n_traj, 1, 1))
        for k, f in enumerate(feedbacks):
            th = lam * dt * G[:, k, None, None]
            U = U @ (np.cos(th) * eye - 1j * np.sin(th) * f)
        new = U @ new @ U.conj().transpose(0, 2, 1)
        rho = new / np.trace(new, axis1=1, axis2=2).real[:, None, None]

        dQ = 2 * kappa * np.sqrt(eta) * mean * dt + np.sqrt(kappa) * dW
        ring[n % (m + 1)] = ring[(n - 1) % (m + 1)] + np.exp(r * n * dt) * dQ
        if n % stride == 0:
            times.append(n * dt)
            samples.append(rho[:, 0, 0].real)
    return np.array(times), np.array(samples).T
