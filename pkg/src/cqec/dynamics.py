"""Single Euler steps of the conditioned evolution under measurement and feedback.

Both steppers broadcast over leading batch axes: ``psi`` may be ``(dim,)`` or
``(batch, dim)``, ``rho`` may be ``(dim, dim)`` or ``(batch, dim, dim)``; the
increments ``dW`` (per generator), ``dN`` (per error) and the feedback
amplitudes ``G`` (per channel) carry the same leading axes.

Within a step the order is fixed: jumps, then measurement drift and
diffusion, then feedback, then normalization. All expectation values are
taken on the post-jump, pre-increment state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codes import StabilizerCode
from .errors import ConfigError, ContractViolation, DegenerateStateError, NumericalIntegrityError
from .quantum import DEGENERATE_NORM

POSITIVITY_TOL = 1e-3


@dataclass(frozen=True)
class StepInput:
    kappa: float
    gamma: float
    lam: float
    dt: float
    eta: float = 1.0

    def __post_init__(self):
        if min(self.kappa, self.gamma, self.lam) < 0:
            raise ConfigError("rates kappa, gamma, lambda must be non-negative")
        if not 0 < self.eta <= 1:
            raise ConfigError(f"efficiency must lie in (0, 1], got {self.eta}")
        if self.dt <= 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")


def dissipator(a: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """D[A]rho = A rho A^+ - (A^+A rho + rho A^+A)/2."""
    _match(a, rho)
    ad = a.conj().T
    ada = ad @ a
    return a @ rho @ ad - 0.5 * (ada @ rho + rho @ ada)


def innovation(a: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """H[A]rho = A rho + rho A^+ - rho tr(A rho + rho A^+)."""
    _match(a, rho)
    s = a @ rho + rho @ a.conj().T
    tr = np.trace(s, axis1=-2, axis2=-1)
    return s - rho * tr[..., None, None]


def _match(a, rho):
    if a.shape[-1] != rho.shape[-1] or rho.shape[-1] != rho.shape[-2]:
        raise ContractViolation(f"operator {a.shape} does not act on {rho.shape}")


def sse_step(psi, code: StabilizerCode, dW, dN, G, p: StepInput):
    """Advance a pure state by one step; returns ``(psi, dQ)``.

    ``dQ[l] = 2 kappa <M_l> dt + sqrt(kappa) dW[l]`` with the expectation taken
    after any jump in this step.
    """
    if p.eta != 1:
        raise ContractViolation("the pure-state path assumes perfect detection; use sme_step for eta < 1")
    psi, dQ, bad = sse_increment(psi, code, dW, dN, G, p.kappa, p.lam, p.dt)
    if np.any(bad):
        raise DegenerateStateError("state norm collapsed during an SSE step; reduce dt")
    return psi, dQ


def sse_increment(psi, code, dW, dN, G, kappa, lam, dt):
    """Batch kernel behind :func:`sse_step`.

    Returns ``(psi, dQ, degenerate)``; rows whose norm collapsed are left
    unnormalized and flagged instead of raising.
    """
    psi = np.asarray(psi, dtype=complex)
    dN = np.asarray(dN)
    for k, err in enumerate(code.error_actions):
        hit = dN[..., k]
        if np.any(hit):
            psi = np.where(hit[..., None] != 0, err.apply(psi), psi)

    sk = np.sqrt(kappa)
    half = -0.5 * kappa * dt
    dpsi = np.zeros_like(psi)
    m = np.empty(psi.shape[:-1] + (code.n_generators,))
    for l, gen in enumerate(code.generator_actions):
        g_psi = gen.apply(psi)
        ml = np.sum((psi.conj() * g_psi).real, axis=-1)
        m[..., l] = ml
        ml = ml[..., None]
        # (1 - <M> M)^2 = 1 - 2<M>M + <M>^2 M^2
        dpsi += half * (psi - 2 * ml * g_psi + ml * ml * gen.apply(g_psi))
        dpsi += (sk * dW[..., l, None]) * (g_psi - ml * psi)

    G = np.asarray(G)
    if lam and np.any(G):
        for k, fb in enumerate(code.feedback_actions):
            gk = G[..., k]
            if np.any(gk):
                dpsi += (-1j * lam * dt) * gk[..., None] * fb.apply(psi)

    psi = psi + dpsi
    norm = np.sqrt(np.sum((psi.conj() * psi).real, axis=-1))
    bad = norm <= DEGENERATE_NORM
    psi = psi / np.where(bad, 1.0, norm)[..., None]
    dQ = 2 * kappa * dt * m + sk * dW
    return psi, dQ, bad


SME_SCHEMES = ("kraus", "euler")


def sme_step(rho, code: StabilizerCode, dW, G, p: StepInput, scheme: str = "euler"):
    """Advance a density matrix by one step; returns ``(rho, dQ)``.

    ``dQ[l] = 2 kappa sqrt(eta) <M_l> dt + sqrt(kappa) dW[l]``.
    ``scheme="euler"`` is the plain Euler-Maruyama increment;
    ``scheme="kraus"`` is the positivity-preserving update of :func:`sme_kraus`.
    Raises :class:`NumericalIntegrityError` if an eigenvalue of the result
    falls below ``-POSITIVITY_TOL``.
    """
    kernel = _sme_kernel(scheme)
    rho, dQ, bad = kernel(rho, code, dW, G, p.kappa, p.gamma, p.lam, p.eta, p.dt)
    if np.any(bad):
        raise DegenerateStateError("density matrix trace collapsed during an SME step; reduce dt")
    check_positivity(rho)
    return rho, dQ


def _sme_kernel(scheme: str):
    if scheme == "euler":
        return sme_euler
    if scheme == "kraus":
        return sme_kraus
    raise ContractViolation(f"unknown SME scheme {scheme!r}; choose from {SME_SCHEMES}")


def sme_euler(rho, code, dW, G, kappa, gamma, lam, eta, dt):
    """Euler-Maruyama batch kernel; returns ``(rho, dQ, degenerate)``.

    Positivity is only preserved to first order: each step can leave an
    eigenvalue near ``-kappa dt (z^2 - 1)`` when the state straddles two
    syndrome sectors (z = dW / sqrt(dt)).
    """
    rho = np.asarray(rho, dtype=complex)
    drho = np.zeros_like(rho)
    # every operator is a Hermitian Pauli string, so A^+A = 1 and D[A]rho = A rho A - rho
    for rate, err in zip(code.error_rates, code.error_actions):
        drho += (gamma * rate * dt) * (err.sandwich(rho) - rho)

    ske = np.sqrt(kappa * eta)
    m = _expectations(rho, code)
    for l, gen in enumerate(code.generator_actions):
        drho += (kappa * dt) * (gen.sandwich(rho) - rho)
        drho += (ske * dW[..., l, None, None]) * (gen.left(rho) + gen.right(rho) - 2 * m[..., l, None, None] * rho)

    G = np.asarray(G)
    if lam and np.any(G):
        for k, fb in enumerate(code.feedback_actions):
            gk = G[..., k]
            if np.any(gk):
                drho += (-1j * lam * dt) * gk[..., None, None] * (fb.left(rho) - fb.right(rho))
    return _finish(rho + drho, m, dW, kappa, eta, dt)


def sme_kraus(rho, code, dW, G, kappa, gamma, lam, eta, dt):
    """Positivity-preserving first-order batch kernel; returns ``(rho, dQ, degenerate)``.

    With ``dy_l = 2 sqrt(kappa eta) <M_l> dt + dW_l`` and
    ``K = 1 - (m kappa + d gamma) dt / 2 + sqrt(kappa eta) sum_l M_l dy_l``::

        rho' ~ K rho K + (1 - eta) kappa dt sum_l M_l rho M_l + gamma dt sum_k E_k rho E_k

    followed by the feedback rotations ``exp(-i lam G_k dt F_k)`` and trace
    normalization. Every piece is completely positive. Expanding to first
    order in dt (with ``dW^2 -> dt``) gives back the Euler increment.
    """
    rho = np.asarray(rho, dtype=complex)
    ske = np.sqrt(kappa * eta)
    m = _expectations(rho, code)
    dy = 2 * ske * dt * m + dW
    a = 1 - 0.5 * (kappa * code.n_generators + gamma * sum(code.error_rates)) * dt
    k_rho = a * rho
    for l, gen in enumerate(code.generator_actions):
        k_rho = k_rho + (ske * dy[..., l, None, None]) * gen.left(rho)
    new = a * k_rho
    for l, gen in enumerate(code.generator_actions):
        new = new + (ske * dy[..., l, None, None]) * gen.right(k_rho)
    if eta < 1:
        for gen in code.generator_actions:
            new += ((1 - eta) * kappa * dt) * gen.sandwich(rho)
    for rate, err in zip(code.error_rates, code.error_actions):
        if gamma * rate:
            new += (gamma * rate * dt) * err.sandwich(rho)

    G = np.asarray(G)
    if lam and np.any(G):
        for k, fb in enumerate(code.feedback_actions):
            gk = G[..., k]
            if np.any(gk):
                new = fb.rotate(new, lam * dt * gk)
    return _finish(new, m, dW, kappa, eta, dt)


def _expectations(rho, code):
    m = np.empty(rho.shape[:-2] + (code.n_generators,))
    for l, gen in enumerate(code.generator_actions):
        m[..., l] = gen.expect_mixed(rho)
    return m


def _finish(rho, m, dW, kappa, eta, dt):
    rho = 0.5 * (rho + np.swapaxes(rho.conj(), -1, -2))
    tr = np.trace(rho, axis1=-2, axis2=-1).real
    bad = tr <= DEGENERATE_NORM
    rho = rho / np.where(bad, 1.0, tr)[..., None, None]
    dQ = 2 * kappa * np.sqrt(eta) * dt * m + np.sqrt(kappa) * dW
    return rho, dQ, bad


def min_eigenvalue(rho) -> np.ndarray:
    return np.linalg.eigvalsh(rho)[..., 0]


def check_positivity(rho, tol: float = POSITIVITY_TOL) -> None:
    lo = np.min(min_eigenvalue(rho))
    if lo < -tol:
        raise NumericalIntegrityError(
            f"density matrix eigenvalue {lo:.3g} below -{tol}; reduce the time step dt"
        )
