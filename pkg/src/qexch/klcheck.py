"""Error Gram tensors and the strict / degenerate / extended correction conditions."""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from qexch.codes import Code
from qexch.errors import ErrorSet, apply_dense, apply_error
from qexch.field import ExactScalar
from qexch.qstate import StateVector, inner_product

PRINTED_SPAN_DIMENSION = 54
DEFAULT_FLOAT_TOL = 1e-9

Index = tuple[int, int, int, int]


class KLConsistencyError(ValueError):
    """The Gram tensor does not satisfy the degenerate condition."""


@dataclass
class GramTensor:
    """entries[(i, j, p, q)] = <e_p C_i | e_q C_j>."""

    word_labels: list[str]
    error_labels: list[str]
    entries: dict[Index, ExactScalar | complex]
    exact: bool = True

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.word_labels), len(self.error_labels)

    def __getitem__(self, index: Index):
        return self.entries[index]

    def block(self, i: int, j: int):
        P = len(self.error_labels)
        return [[self.entries[(i, j, p, q)] for q in range(P)] for p in range(P)]

    def to_array(self) -> np.ndarray:
        W, P = self.shape
        out = np.zeros((W, W, P, P), dtype=complex)
        for (i, j, p, q), value in self.entries.items():
            out[i, j, p, q] = complex(value)
        return out


def error_images(code: Code, errors: ErrorSet) -> list[list[StateVector]]:
    if errors.n != code.n:
        raise ValueError(f"error set is for {errors.n} qubits, code has {code.n}")
    return [[apply_error(e, vec) for e in errors] for vec in code.vectors]


def gram_blocks(code: Code, errors: ErrorSet) -> GramTensor:
    images = error_images(code, errors)
    W, P = len(images), len(errors)
    # Many images coincide (exchanges fix symmetric words); compute each distinct pair once.
    distinct: dict[StateVector, int] = {}
    ids = [[distinct.setdefault(img, len(distinct)) for img in row] for row in images]
    vectors = list(distinct)
    products: dict[tuple[int, int], ExactScalar] = {}
    flat = [(i, p) for i in range(W) for p in range(P)]
    entries: dict[Index, ExactScalar] = {}
    for a, (i, p) in enumerate(flat):
        left = ids[i][p]
        for (j, q) in flat[a:]:
            right = ids[j][q]
            value = products.get((left, right))
            if value is None:
                value = inner_product(vectors[left], vectors[right])
                products[(left, right)] = value
                products[(right, left)] = value.conj()
            entries[(i, j, p, q)] = value
            entries[(j, i, q, p)] = value.conj()
    return GramTensor(code.labels, errors.labels, dict(sorted(entries.items())), exact=True)


def gram_blocks_float(words: np.ndarray | Code, errors: ErrorSet, normalize: bool = True,
                      word_labels: Sequence[str] | None = None) -> GramTensor:
    if isinstance(words, Code):
        word_labels = words.labels
        words = words.to_dense(normalize=normalize)
    elif normalize:
        words = np.asarray(words, dtype=complex)
        words = words / np.linalg.norm(words, axis=1, keepdims=True)
    arr = float_gram_array(words, errors)
    W, _, P, _ = arr.shape
    if word_labels is None:
        word_labels = [f"C_{i}" for i in range(W)]
    entries = {
        (i, j, p, q): complex(arr[i, j, p, q])
        for i in range(W) for j in range(W) for p in range(P) for q in range(P)
    }
    return GramTensor(list(word_labels), errors.labels, entries, exact=False)


def float_gram_array(words: np.ndarray, errors: ErrorSet) -> np.ndarray:
    words = np.asarray(words, dtype=complex)
    images = np.array([[apply_dense(e, w, errors.n) for e in errors] for w in words])
    # images[i, p, :] = e_p C_i
    return np.einsum("ipx,jqx->ijpq", images.conj(), images)


@dataclass
class Witness:
    index: Index
    value: ExactScalar | complex
    expected: ExactScalar | complex
    note: str = ""


@dataclass
class DMatrix:
    entries: list[list]
    rank: int
    blocks: list[list[int]]
    labels: list[str]
    exact: bool = True

    def block_sizes(self) -> list[int]:
        return [len(b) for b in self.blocks]

    def to_array(self) -> np.ndarray:
        return np.array([[complex(x) for x in row] for row in self.entries])


@dataclass
class KLReport:
    condition: str
    passed: bool
    witnesses: list[Witness] = field(default_factory=list)
    d_matrix: DMatrix | None = None
    scale: ExactScalar | complex | None = None
    notes: list[str] = field(default_factory=list)


def _is_zero(value, tol: float | None) -> bool:
    if tol is None:
        return value.is_zero()
    return abs(complex(value)) <= tol


def _equal(x, y, tol: float | None) -> bool:
    if tol is None:
        return x == y
    return abs(complex(x) - complex(y)) <= tol


def check_kl(gram: GramTensor, mode: str = "degenerate", tol: float | None = None) -> KLReport:
    """Check the strict or degenerate condition; failures are reported, never raised.

    Exact tensors are compared for literal equality unless ``tol`` is given.
    Float tensors default to an absolute tolerance of 1e-9.
    """
    if mode not in ("strict", "degenerate"):
        raise ValueError(f"unknown mode {mode!r}")
    if not gram.exact and tol is None:
        tol = DEFAULT_FLOAT_TOL
    W, P = gram.shape
    witnesses: list[Witness] = []
    notes = []
    if mode == "strict":
        scale = gram[(0, 0, 0, 0)]
        notes.append(f"strict mode allows one global scale; using <e_0 C_0|e_0 C_0> = {scale}")
        zero = scale * 0
        for index, value in gram.entries.items():
            i, j, p, q = index
            expected = scale if (i == j and p == q) else zero
            if not _equal(value, expected, tol):
                witnesses.append(Witness(index, value, expected))
        return KLReport("strict", not witnesses, witnesses, None, scale, notes)

    for index, value in gram.entries.items():
        i, j, p, q = index
        if i != j:
            if not _is_zero(value, tol):
                witnesses.append(Witness(index, value, value * 0, "cross-word entry must vanish"))
        elif i > 0:
            reference = gram[(0, 0, p, q)]
            if not _equal(value, reference, tol):
                witnesses.append(
                    Witness(index, value, reference, f"differs from word {gram.word_labels[0]}")
                )
    report = KLReport("degenerate", not witnesses, witnesses, None, None, notes)
    if report.passed:
        report.d_matrix = d_matrix(gram, tol=tol, checked=True)
    return report


def check_kl_extended(code: Code, errors: ErrorSet, tol: float | None = None) -> KLReport:
    """Words labelled (i, m) must satisfy <e_p C_i^m|e_q C_j^m'> = delta_ij delta_mm' d_pq."""
    if code.indices is None:
        raise ValueError("extended check needs (i, m) labels on every word")
    gram = gram_blocks(code, errors)
    W, P = gram.shape
    witnesses = []
    for index, value in gram.entries.items():
        a, b, p, q = index
        if code.indices[a] != code.indices[b]:
            if not _is_zero(value, tol):
                witnesses.append(Witness(index, value, value * 0, "distinct (i, m) labels must be orthogonal"))
        elif a != b:
            raise ValueError(f"words {a} and {b} share the label {code.indices[a]}")
        elif a > 0:
            reference = gram[(0, 0, p, q)]
            if not _equal(value, reference, tol):
                witnesses.append(Witness(index, value, reference, "D must not depend on i or m"))
    report = KLReport("extended", not witnesses, witnesses)
    if report.passed:
        report.d_matrix = d_matrix(gram, tol=tol, checked=True)
    return report


def d_matrix(gram: GramTensor, tol: float | None = None, checked: bool = False) -> DMatrix:
    if not gram.exact and tol is None:
        tol = DEFAULT_FLOAT_TOL
    if not checked:
        report = check_kl(gram, "degenerate", tol=tol)
        if not report.passed:
            raise KLConsistencyError(
                f"Gram tensor fails the degenerate condition ({len(report.witnesses)} witnesses)"
            )
    W, P = gram.shape
    if gram.exact:
        entries = gram.block(0, 0)
        rank = exact_rank(entries)
    else:
        arr = gram.to_array()
        avg = arr[np.arange(W), np.arange(W)].mean(axis=0)
        entries = avg.tolist()
        scale = np.abs(avg).max() if avg.size else 0.0
        rank = int(np.linalg.matrix_rank(avg, tol=1e-8 * scale)) if scale else 0
    blocks = _connected_blocks(entries, tol)
    return DMatrix(entries, rank, blocks, gram.error_labels, exact=gram.exact)


def _connected_blocks(entries, tol) -> list[list[int]]:
    P = len(entries)
    parent = list(range(P))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for p in range(P):
        for q in range(p + 1, P):
            value = entries[p][q]
            nonzero = (not value.is_zero()) if tol is None else abs(complex(value)) > tol
            if nonzero:
                parent[find(p)] = find(q)
    groups: dict[int, list[int]] = {}
    for p in range(P):
        groups.setdefault(find(p), []).append(p)
    return sorted(groups.values(), key=lambda b: b[0])


# -- exact linear algebra ----------------------------------------------------

def exact_rank(rows: Sequence[Sequence[ExactScalar]]) -> int:
    """Rank by Gaussian elimination with first-nonzero pivots."""
    matrix = [list(row) for row in rows]
    if not matrix:
        return 0
    n_rows, n_cols = len(matrix), len(matrix[0])
    rank = 0
    for col in range(n_cols):
        pivot = next((r for r in range(rank, n_rows) if not matrix[r][col].is_zero()), None)
        if pivot is None:
            continue
        matrix[rank], matrix[pivot] = matrix[pivot], matrix[rank]
        inv = matrix[rank][col].inverse()
        pivot_row = [x * inv for x in matrix[rank]]
        matrix[rank] = pivot_row
        for r in range(rank + 1, n_rows):
            factor = matrix[r][col]
            if factor.is_zero():
                continue
            row = matrix[r]
            for c in range(col, n_cols):
                if not pivot_row[c].is_zero():
                    row[c] = row[c] - factor * pivot_row[c]
        rank += 1
        if rank == n_rows:
            break
    return rank


def sparse_rank(vectors: Sequence[StateVector]) -> int:
    """Dimension of the span of sparse vectors, reducing each against earlier pivots."""
    pivots: dict[int, dict[int, ExactScalar]] = {}
    for vec in vectors:
        row = dict(vec.items())
        while row:
            lead = min(row)
            if lead not in pivots:
                inv = row[lead].inverse()
                pivots[lead] = {k: v * inv for k, v in row.items()}
                break
            factor = row[lead]
            for k, v in pivots[lead].items():
                value = row[k] - factor * v if k in row else -(factor * v)
                if value.is_zero():
                    row.pop(k, None)
                else:
                    row[k] = value
    return len(pivots)


def span_dimension(code: Code, errors: ErrorSet) -> int:
    images = error_images(code, errors)
    return sparse_rank([vec for row in images for vec in row])


def gram_rank(gram: GramTensor) -> int:
    """Rank of the full (i, p) x (j, q) Gram matrix, equal to the span dimension."""
    W, P = gram.shape
    rows = [[gram[(i, j, p, q)] for j in range(W) for q in range(P)] for i in range(W) for p in range(P)]
    return exact_rank(rows)


@dataclass
class SpanReport:
    span_dimension: int
    gram_rank: int
    d_rank: int | None
    printed_value: int = PRINTED_SPAN_DIMENSION

    @property
    def consistent(self) -> bool:
        return self.span_dimension == self.gram_rank

    def notes(self, n_words: int) -> list[str]:
        lines = [f"span dimension {self.span_dimension} (sparse elimination), Gram rank {self.gram_rank}"]
        if self.d_rank is not None:
            expected = n_words * self.d_rank
            flag = "matches" if expected == self.span_dimension else "DIFFERS from"
            lines.append(f"{n_words}*rank(D) = {expected} {flag} the span dimension")
        if self.span_dimension != self.printed_value:
            lines.append(f"printed value {self.printed_value} differs from the computed span dimension")
        return lines


def span_report(code: Code, errors: ErrorSet, gram: GramTensor | None = None) -> SpanReport:
    if gram is None:
        gram = gram_blocks(code, errors)
    report = check_kl(gram, "degenerate")
    return SpanReport(
        span_dimension(code, errors),
        gram_rank(gram),
        report.d_matrix.rank if report.passed else None,
    )


# -- closed forms for full permutation sums -----------------------------------

@dataclass(frozen=True)
class PermSumIdentities:
    n: int
    weight: int
    z_offdiagonal: Fraction
    x_overlap_count: int


def general_n_identities(n: int, weight: int) -> PermSumIdentities:
    """Predicted <Z_k S|Z_l S> and <X_k S|X_l S> (k != l) for S the unit-coefficient weight sum."""
    if not 1 <= weight <= n - 1:
        raise ValueError(f"weight must satisfy 1 <= weight <= n-1, got {weight} with n={n}")
    z = Fraction((n - 2 * weight) ** 2 - n, n * (n - 1)) * math.comb(n, weight)
    return PermSumIdentities(n, weight, z, 2 * math.comb(n - 2, weight - 1))
