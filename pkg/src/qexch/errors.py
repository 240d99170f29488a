"""Symbolic error operators: Paulis, exchanges, permutations and products."""

from __future__ import annotations

import functools
import random
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from qexch.qstate import (
    StateVector,
    apply_pauli,
    apply_permutation,
    check_permutation,
)

ERROR_CLASSES = ("identity", "x", "y", "z", "exchange")
_CLASS_TOKENS = {
    "identity": ("identity",),
    "x": ("x",),
    "y": ("y",),
    "z": ("z",),
    "pauli": ("x", "y", "z"),
    "exchange": ("exchange",),
}


@dataclass(frozen=True)
class ErrorOp:
    """One error operator.

    ``kind`` is one of identity, pauli, exchange, permutation, product.
    Pauli and exchange qubit indices are 1-based; a permutation sends the
    bit at position j to position ``perm[j-1]``; product factors are applied
    right to left.
    """

    kind: str
    label: str
    axis: str | None = None
    qubits: tuple[int, ...] = ()
    perm: tuple[int, ...] | None = None
    factors: tuple[ErrorOp, ...] = field(default=())

    def __post_init__(self):
        if self.kind == "exchange":
            j, k = self.qubits
            if not j < k:
                raise ValueError(f"exchange indices must satisfy j < k, got {self.qubits}")
        if self.kind == "product":
            if not self.factors:
                raise ValueError("empty product")
            if any(f.kind == "product" for f in self.factors):
                raise ValueError("product factors must be flattened")

    def __str__(self) -> str:
        return self.label


IDENTITY = ErrorOp("identity", "I")


def identity() -> ErrorOp:
    return IDENTITY


def pauli(axis: str, k: int) -> ErrorOp:
    axis = axis.upper()
    if axis not in "XYZ" or len(axis) != 1:
        raise ValueError(f"unknown Pauli axis {axis!r}")
    if k < 1:
        raise IndexError(f"qubit index {k} must be >= 1")
    return ErrorOp("pauli", f"{axis}_{k}", axis=axis, qubits=(k,))


def exchange_label(j: int, k: int) -> str:
    return f"E_{j}{k}" if j < 10 and k < 10 else f"E_{j},{k}"


def exchange(j: int, k: int) -> ErrorOp:
    if j < 1:
        raise IndexError(f"qubit index {j} must be >= 1")
    return ErrorOp("exchange", exchange_label(j, k), qubits=(j, k))


def permutation(perm: Sequence[int], label: str | None = None) -> ErrorOp:
    perm = check_permutation(perm, len(perm))
    if label is None:
        label = "P[" + ",".join(map(str, perm)) + "]"
    return ErrorOp("permutation", label, perm=perm)


def compose_errors(e1: ErrorOp, e2: ErrorOp) -> ErrorOp:
    """The operator e1 * e2: apply ``e2`` first, then ``e1``."""
    factors: list[ErrorOp] = []
    for e in (e1, e2):
        if e.kind == "product":
            factors.extend(e.factors)
        elif e.kind != "identity":
            factors.append(e)
    if not factors:
        return IDENTITY
    if len(factors) == 1:
        return factors[0]
    return ErrorOp("product", "*".join(f.label for f in factors), factors=tuple(factors))


def transposition(j: int, k: int, n: int) -> tuple[int, ...]:
    perm = list(range(1, n + 1))
    perm[j - 1], perm[k - 1] = k, j
    return tuple(perm)


def _check_indices(e: ErrorOp, n: int) -> None:
    for q in e.qubits:
        if not 1 <= q <= n:
            raise IndexError(f"{e.label}: qubit index {q} outside 1..{n}")
    if e.perm is not None and len(e.perm) != n:
        raise ValueError(f"{e.label}: permutation on {len(e.perm)} qubits applied to {n}")


def apply_error(e: ErrorOp, state: StateVector) -> StateVector:
    _check_indices(e, state.n)
    if e.kind == "identity":
        return state
    if e.kind == "pauli":
        return apply_pauli(state, e.axis, e.qubits[0])
    if e.kind == "exchange":
        j, k = e.qubits
        return apply_permutation(state, transposition(j, k, state.n))
    if e.kind == "permutation":
        return apply_permutation(state, e.perm)
    if e.kind == "product":
        for factor in reversed(e.factors):
            state = apply_error(factor, state)
        return state
    raise ValueError(f"unknown error kind {e.kind!r}")


def exchange_as_pauli_sum(j: int, k: int, state: StateVector) -> StateVector:
    """Evaluate (II + Z_jZ_k + X_jX_k + Y_jY_k)/2 on ``state`` term by term."""
    n = state.n
    if not 1 <= j < k <= n:
        raise IndexError(f"need 1 <= j < k <= {n}, got ({j}, {k})")
    total = state
    for axis in "ZXY":
        total = total + apply_pauli(apply_pauli(state, axis, k), axis, j)
    return total.scale(Fraction(1, 2))


@dataclass(frozen=True)
class ErrorSet:
    n: int
    ops: tuple[ErrorOp, ...]
    classes: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.ops or self.ops[0].kind != "identity":
            raise ValueError("error set must start with the identity")
        if sum(op.kind == "identity" for op in self.ops) != 1:
            raise ValueError("identity must appear exactly once")
        labels = [op.label for op in self.ops]
        if len(set(labels)) != len(labels):
            raise ValueError("error labels must be unique")
        for op in self.ops:
            _check_indices(op, self.n)

    def __len__(self) -> int:
        return len(self.ops)

    def __iter__(self):
        return iter(self.ops)

    def __getitem__(self, index):
        return self.ops[index]

    @property
    def labels(self) -> list[str]:
        return [op.label for op in self.ops]

    def index(self, label: str) -> int:
        return self.labels.index(label)


def parse_error_classes(text: str | Iterable[str]) -> tuple[str, ...]:
    """Expand tokens like ``"pauli,exchange"`` into canonical class names."""
    tokens = text.split(",") if isinstance(text, str) else list(text)
    out: set[str] = set()
    for raw in tokens:
        token = raw.strip().lower()
        if not token:
            continue
        if token not in _CLASS_TOKENS:
            raise ValueError(f"unknown error class {raw!r}; expected one of {sorted(_CLASS_TOKENS)}")
        out.update(_CLASS_TOKENS[token])
    if not out:
        raise ValueError("empty error class set")
    return tuple(c for c in ERROR_CLASSES if c in out)


def make_error_set(n: int, classes: str | Iterable[str]) -> ErrorSet:
    """Identity first, then X_1..X_n, Y_1..Y_n, Z_1..Z_n, then E_jk for j < k."""
    wanted = parse_error_classes(classes)
    if "exchange" in wanted and n < 2:
        raise ValueError("exchange errors need at least 2 qubits")
    ops = [IDENTITY]
    for axis in "xyz":
        if axis in wanted:
            ops.extend(pauli(axis, k) for k in range(1, n + 1))
    if "exchange" in wanted:
        ops.extend(exchange(j, k) for j in range(1, n + 1) for k in range(j + 1, n + 1))
    return ErrorSet(n, tuple(ops), wanted)


def error_set_from_ops(n: int, ops: Iterable[ErrorOp]) -> ErrorSet:
    ops = [op for op in ops if op.kind != "identity"]
    return ErrorSet(n, (IDENTITY, *ops))


def random_permutation(n: int, rng: random.Random) -> tuple[int, ...]:
    perm = list(range(1, n + 1))
    rng.shuffle(perm)
    return tuple(perm)


def dense_action(e: ErrorOp, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Monomial form of ``e`` on the 2^n computational basis.

    Returns read-only ``(targets, phases)`` with e|b> = phases[b] |targets[b]>.
    """
    targets, phases = _dense_action(e, n)
    return targets, phases


@functools.lru_cache(maxsize=4096)
def _dense_action(e: ErrorOp, n: int) -> tuple[np.ndarray, np.ndarray]:
    targets, phases = _build_dense_action(e, n)
    targets.flags.writeable = False
    phases.flags.writeable = False
    return targets, phases


def _build_dense_action(e: ErrorOp, n: int) -> tuple[np.ndarray, np.ndarray]:
    _check_indices(e, n)
    dim = 1 << n
    idx = np.arange(dim, dtype=np.int64)
    if e.kind == "identity":
        return idx, np.ones(dim, dtype=complex)
    if e.kind == "pauli":
        shift = n - e.qubits[0]
        bit = (idx >> shift) & 1
        if e.axis == "X":
            return idx ^ (1 << shift), np.ones(dim, dtype=complex)
        if e.axis == "Z":
            return idx, np.where(bit == 1, -1.0, 1.0).astype(complex)
        return idx ^ (1 << shift), np.where(bit == 1, -1j, 1j)
    if e.kind in ("exchange", "permutation"):
        perm = transposition(*e.qubits, n) if e.kind == "exchange" else e.perm
        targets = np.zeros(dim, dtype=np.int64)
        for j in range(1, n + 1):
            targets |= ((idx >> (n - j)) & 1) << (n - perm[j - 1])
        return targets, np.ones(dim, dtype=complex)
    if e.kind == "product":
        targets, phases = idx, np.ones(dim, dtype=complex)
        for factor in reversed(e.factors):
            t, ph = dense_action(factor, n)
            phases = phases * ph[targets]
            targets = t[targets]
        return targets, phases
    raise ValueError(f"unknown error kind {e.kind!r}")


def apply_dense(e: ErrorOp, vec: np.ndarray, n: int) -> np.ndarray:
    targets, phases = dense_action(e, n)
    out = np.zeros_like(vec, dtype=complex)
    out[targets] = phases * vec
    return out
