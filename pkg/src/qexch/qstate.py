"""Sparse exact state vectors on n qubits.

Basis kets are packed into integers with qubit 1 as the most significant
bit, so ``|b_1 b_2 ... b_n>`` reads left to right exactly as printed.
Qubit indices in the public API are 1-based.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from collections.abc import Iterable, Iterator, Mapping, Sequence
from functools import cached_property

import numpy as np

from qexch.field import ExactScalar, RadicandMismatch

MAX_QUBITS = 24


def bit_of(key: int, k: int, n: int) -> int:
    return (key >> (n - k)) & 1


def key_to_bits(key: int, n: int) -> str:
    return format(key, f"0{n}b")


def bits_to_key(bits: str | Sequence[int]) -> int:
    if isinstance(bits, str):
        text = bits.replace(" ", "")
    else:
        text = "".join(str(b) for b in bits)
    if not text:
        raise ValueError("empty bit string")
    if set(text) - {"0", "1"}:
        raise ValueError(f"non-binary symbol in {bits!r}")
    return int(text, 2)


class StateVector:
    """Immutable sparse vector: basis key -> nonzero ExactScalar."""

    def __init__(self, n: int, radicand: int, amplitudes: Mapping[int, ExactScalar] | None = None):
        if not 1 <= n <= MAX_QUBITS:
            raise ValueError(f"qubit count must be in 1..{MAX_QUBITS}, got {n}")
        self.n = n
        self.radicand = radicand
        amps: dict[int, ExactScalar] = {}
        limit = 1 << n
        for key, value in sorted((amplitudes or {}).items()):
            if not 0 <= key < limit:
                raise ValueError(f"basis key {key} out of range for {n} qubits")
            if value.radicand != radicand:
                raise RadicandMismatch(f"amplitude radicand {value.radicand} != {radicand}")
            if not value.is_zero():
                amps[key] = value
        self._amps = amps

    @classmethod
    def _trusted(cls, n: int, radicand: int, amps: dict[int, ExactScalar]) -> StateVector:
        obj = object.__new__(cls)
        obj.n = n
        obj.radicand = radicand
        obj._amps = {k: amps[k] for k in sorted(amps) if not amps[k].is_zero()}
        return obj

    def __len__(self) -> int:
        return len(self._amps)

    def __iter__(self) -> Iterator[int]:
        return iter(self._amps)

    def items(self):
        return self._amps.items()

    def amplitude(self, bits: str | int) -> ExactScalar:
        key = bits if isinstance(bits, int) else bits_to_key(bits)
        return self._amps.get(key, ExactScalar(radicand=self.radicand))

    def is_zero(self) -> bool:
        return not self._amps

    def __eq__(self, other) -> bool:
        if not isinstance(other, StateVector):
            return NotImplemented
        return self.n == other.n and self.radicand == other.radicand and self._amps == other._amps

    def __hash__(self) -> int:
        return hash((self.n, self.radicand, tuple(self._amps.items())))

    def __repr__(self) -> str:
        return f"StateVector(n={self.n}, terms={len(self)})"

    def pretty(self) -> str:
        if not self._amps:
            return "0"
        return " + ".join(f"({v})|{key_to_bits(k, self.n)}>" for k, v in self._amps.items())

    def _check_compatible(self, other: StateVector) -> None:
        if self.n != other.n:
            raise ValueError(f"qubit counts differ: {self.n} vs {other.n}")
        if self.radicand != other.radicand:
            raise RadicandMismatch(f"radicands differ: {self.radicand} vs {other.radicand}")

    def __add__(self, other: StateVector) -> StateVector:
        self._check_compatible(other)
        amps = dict(self._amps)
        for k, v in other._amps.items():
            amps[k] = amps[k] + v if k in amps else v
        return StateVector._trusted(self.n, self.radicand, amps)

    def __sub__(self, other: StateVector) -> StateVector:
        return self + other.scale(-1)

    def __neg__(self) -> StateVector:
        return self.scale(-1)

    def scale(self, factor) -> StateVector:
        if not isinstance(factor, ExactScalar):
            factor = ExactScalar.from_rational(factor, self.radicand)
        return StateVector._trusted(
            self.n, self.radicand, {k: v * factor for k, v in self._amps.items()}
        )

    @cached_property
    def _integer_form(self) -> tuple[int, dict[int, tuple[int, int, int, int]]]:
        # Common denominator so inner products run on plain integers.
        if not self._amps:
            return 1, {}
        den = math.lcm(*(v.denominator for v in self._amps.values()))
        form = {}
        for k, v in self._amps.items():
            f = den // v.denominator
            A, B, C, D = v.numerators
            form[k] = (A * f, B * f, C * f, D * f)
        return den, form

    def to_dense(self) -> np.ndarray:
        vec = np.zeros(1 << self.n, dtype=complex)
        for k, v in self._amps.items():
            vec[k] = v.to_complex()
        return vec


def basis_state(bits: str | Sequence[int], radicand: int = 1) -> StateVector:
    key = bits_to_key(bits)
    n = len(bits.replace(" ", "")) if isinstance(bits, str) else len(bits)
    return StateVector(n, radicand, {key: ExactScalar(1, radicand=radicand)})


def weight_keys(n: int, weight: int) -> list[int]:
    """All n-bit keys of Hamming weight ``weight``, ascending."""
    keys = []
    for ones in itertools.combinations(range(n), weight):
        keys.append(sum(1 << (n - 1 - j) for j in ones))
    return sorted(keys)


def perm_sum_state(n: int, weight: int, coeff: ExactScalar | int = 1, radicand: int | None = None) -> StateVector:
    """coeff times the sum over the C(n, weight) distinct strings of that weight."""
    if not 0 <= weight <= n:
        raise ValueError(f"weight {weight} outside 0..{n}")
    if not isinstance(coeff, ExactScalar):
        coeff = ExactScalar.from_rational(coeff, radicand or 1)
    elif radicand is not None and coeff.radicand != radicand:
        raise RadicandMismatch(f"coefficient radicand {coeff.radicand} != {radicand}")
    return StateVector._trusted(n, coeff.radicand, {k: coeff for k in weight_keys(n, weight)})


def inner_product(lhs: StateVector, rhs: StateVector) -> ExactScalar:
    """<lhs|rhs>, conjugate-linear in ``lhs``."""
    lhs._check_compatible(rhs)
    m = lhs.radicand
    den_l, form_l = lhs._integer_form
    den_r, form_r = rhs._integer_form
    if len(form_l) > len(form_r):
        shared = [k for k in form_r if k in form_l]
    else:
        shared = [k for k in form_l if k in form_r]
    re = im = rt = irt = 0
    mm = 0
    mi = 0
    for k in shared:
        A1, B1, C1, D1 = form_l[k]
        A2, B2, C2, D2 = form_r[k]
        re += A1 * A2 + B1 * B2
        mm += C1 * C2 + D1 * D2
        im += A1 * B2 - B1 * A2
        mi += C1 * D2 - D1 * C2
        rt += A1 * C2 + C1 * A2 + B1 * D2 + D1 * B2
        irt += A1 * D2 - D1 * A2 - B1 * C2 + C1 * B2
    return ExactScalar._raw(re + m * mm, im + m * mi, rt, irt, den_l * den_r, m)


def norm_squared(state: StateVector) -> ExactScalar:
    return inner_product(state, state)


def _check_qubit(k: int, n: int) -> None:
    if not 1 <= k <= n:
        raise IndexError(f"qubit index {k} outside 1..{n}")


def apply_pauli(state: StateVector, axis: str, k: int) -> StateVector:
    """Apply X, Y or Z on qubit k (1-based)."""
    n = state.n
    _check_qubit(k, n)
    axis = axis.upper()
    mask = 1 << (n - k)
    out: dict[int, ExactScalar] = {}
    if axis == "X":
        for key, v in state.items():
            out[key ^ mask] = v
    elif axis == "Z":
        for key, v in state.items():
            out[key] = -v if key & mask else v
    elif axis == "Y":
        # Y|0> = i|1>, Y|1> = -i|0>
        for key, v in state.items():
            w = v.times_i()
            out[key ^ mask] = -w if key & mask else w
    else:
        raise ValueError(f"unknown Pauli axis {axis!r}")
    return StateVector._trusted(n, state.radicand, out)


def check_permutation(perm: Sequence[int], n: int) -> tuple[int, ...]:
    perm = tuple(int(p) for p in perm)
    if len(perm) != n or sorted(perm) != list(range(1, n + 1)):
        raise ValueError(f"not a bijection on 1..{n}: {perm}")
    return perm


def permute_key(key: int, perm: Sequence[int], n: int) -> int:
    out = 0
    for j in range(1, n + 1):
        if (key >> (n - j)) & 1:
            out |= 1 << (n - perm[j - 1])
    return out


def apply_permutation(state: StateVector, perm: Sequence[int]) -> StateVector:
    """Move the bit at input position j to output position perm[j-1]."""
    n = state.n
    perm = check_permutation(perm, n)
    out = {permute_key(key, perm, n): v for key, v in state.items()}
    return StateVector._trusted(n, state.radicand, out)


def compose_permutations(outer: Sequence[int], inner: Sequence[int]) -> tuple[int, ...]:
    """The permutation that applies ``inner`` first, then ``outer``."""
    return tuple(outer[inner[j] - 1] for j in range(len(inner)))


def weight_histogram(state: StateVector) -> dict[int, int]:
    counts = Counter(bin(key).count("1") for key in state)
    return dict(sorted(counts.items()))


def linear_combination(terms: Iterable[tuple[ExactScalar, StateVector]], n: int, radicand: int) -> StateVector:
    out = StateVector(n, radicand)
    for coeff, vec in terms:
        out = out + vec.scale(coeff)
    return out
