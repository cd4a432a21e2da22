"""The two error-correction setups: a one-qubit toy code and the bit-flip code.

A code is pure data. The controller only ever looks up ``switch_table``, so a
new code needs nothing beyond a new constructor here.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation
from .quantum import PauliAction, PauliString, as_pauli, basis_state, pauli_matrix

_TOL = 1e-9


@dataclass(frozen=True)
class Switch:
    """Feedback channel ``channel`` driven by the filter of generator ``driver``."""

    channel: int
    driver: int


@dataclass(frozen=True, eq=False)
class StabilizerCode:
    name: str
    errors: tuple[PauliString, ...]
    generators: tuple[PauliString, ...]
    feedbacks: tuple[PauliString, ...]
    initial_codeword: np.ndarray
    switch_table: dict[tuple[int, ...], tuple[Switch, ...]]
    error_rates: tuple[float, ...] = ()
    error_actions: tuple[PauliAction, ...] = field(init=False, repr=False)
    generator_actions: tuple[PauliAction, ...] = field(init=False, repr=False)
    feedback_actions: tuple[PauliAction, ...] = field(init=False, repr=False)

    def __post_init__(self):
        set_ = lambda k, v: object.__setattr__(self, k, v)  # noqa: E731
        set_("errors", tuple(map(as_pauli, self.errors)))
        set_("generators", tuple(map(as_pauli, self.generators)))
        set_("feedbacks", tuple(map(as_pauli, self.feedbacks)))
        if not self.error_rates:
            set_("error_rates", (1.0,) * len(self.errors))
        psi0 = np.asarray(self.initial_codeword, dtype=complex)
        psi0.setflags(write=False)
        set_("initial_codeword", psi0)
        set_("error_actions", tuple(map(PauliAction.from_pauli, self.errors)))
        set_("generator_actions", tuple(map(PauliAction.from_pauli, self.generators)))
        set_("feedback_actions", tuple(map(PauliAction.from_pauli, self.feedbacks)))
        self._validate()

    @property
    def n_qubits(self) -> int:
        return self.generators[0].n_qubits

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    @property
    def n_generators(self) -> int:
        return len(self.generators)

    @property
    def n_errors(self) -> int:
        return len(self.errors)

    @property
    def n_channels(self) -> int:
        return len(self.feedbacks)

    def _validate(self) -> None:
        ops = self.errors + self.generators + self.feedbacks
        if any(p.n_qubits != self.n_qubits for p in ops):
            raise ContractViolation("all Pauli strings of a code must act on the same qubits")
        if len(self.error_rates) != len(self.errors):
            raise ContractViolation("one rate multiplier per error operator required")
        if not all(p.is_hermitian for p in ops):
            raise ContractViolation("errors, generators and feedbacks must be Hermitian Pauli strings")
        gens = [pauli_matrix(g) for g in self.generators]
        for a, b in itertools.combinations(gens, 2):
            if not np.allclose(a @ b, b @ a, atol=_TOL):
                raise ContractViolation("stabilizer generators must commute")
        for e in self.errors:
            em = pauli_matrix(e)
            for g in gens:
                comm = np.allclose(em @ g, g @ em, atol=_TOL)
                anti = np.allclose(em @ g, -g @ em, atol=_TOL)
                if not (comm or anti):
                    raise ContractViolation(f"error {e} neither commutes nor anticommutes with a generator")
        psi0 = self.initial_codeword
        if psi0.shape != (self.dim,) or abs(np.linalg.norm(psi0) - 1) > _TOL:
            raise ContractViolation("initial codeword must be a normalized state of the register")
        for g in gens:
            if np.max(np.abs(g @ psi0 - psi0)) > _TOL:
                raise ContractViolation("initial codeword must be a +1 eigenstate of every generator")
        patterns = set(itertools.product((1, -1), repeat=self.n_generators))
        if set(self.switch_table) != patterns:
            raise ContractViolation("switch table must cover every generator sign pattern exactly once")
        if self.switch_table[(1,) * self.n_generators]:
            raise ContractViolation("the all-(+1) syndrome must not trigger feedback")
        for entries in self.switch_table.values():
            for s in entries:
                if not (0 <= s.channel < self.n_channels and 0 <= s.driver < self.n_generators):
                    raise ContractViolation(f"switch {s} refers to an unknown channel or generator")


def active_channels(code: StabilizerCode, signs) -> set[int]:
    """Feedback channels switched on by a pattern of generator signs."""
    signs = tuple(int(s) for s in signs)
    if len(signs) != code.n_generators:
        raise ContractViolation(f"expected {code.n_generators} signs, got {len(signs)}")
    try:
        return {s.channel for s in code.switch_table[signs]}
    except KeyError:
        raise ContractViolation(f"signs must be ±1, got {signs}") from None


def toy_code() -> StabilizerCode:
    """Protect |0> against X errors by watching Z."""
    return StabilizerCode(
        name="toy",
        errors=("X",),
        generators=("Z",),
        feedbacks=("X",),
        initial_codeword=basis_state("0"),
        switch_table={(1,): (), (-1,): (Switch(0, 0),)},
    )


def bitflip_code() -> StabilizerCode:
    """Three-qubit repetition code against single bit flips, started in |000>."""
    # channels 0, 1, 2 correct qubits 1, 2, 3
    return StabilizerCode(
        name="bitflip3",
        errors=("XII", "IXI", "IIX"),
        generators=("ZZI", "IZZ"),
        feedbacks=("XII", "IXI", "IIX"),
        initial_codeword=basis_state("000"),
        switch_table={
            (1, 1): (),
            (-1, 1): (Switch(0, 0),),
            (1, -1): (Switch(2, 1),),
            (-1, -1): (Switch(1, 0),),
        },
    )


CODES = {"toy": toy_code, "bitflip3": bitflip_code}


def get_code(name: str) -> StabilizerCode:
    try:
        return CODES[name]()
    except KeyError:
        raise ContractViolation(f"unknown code {name!r}; choose from {sorted(CODES)}") from None
