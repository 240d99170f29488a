"""Qubit-count bounds, the phase-condition feasibility test and a numerical
search over permutation-invariant codes.

Search results are numerical evidence only.  A positive residual floor
means the budget found nothing better, not that no code exists.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import minimize

from qexch.codes import Code
from qexch.errors import ErrorSet, apply_dense, make_error_set, pauli, error_set_from_ops
from qexch.klcheck import float_gram_array
from qexch.qstate import weight_keys

EVIDENCE_NOTE = (
    "residual floor over the search budget: numerical evidence only, not a proof of nonexistence"
)
REAL_ONLY_NOTE = "coefficients searched over the reals only"
# residuals at or below this count as a code found
FOUND_TOL = 1e-9


# -- dimension bounds -----------------------------------------------------------

@dataclass(frozen=True)
class BoundResult:
    model: str
    n: int
    lhs: int
    rhs: int
    inequality: str


def _two_n_single(n: int) -> int:
    return 2 * (3 * n + 1)


def _two_n_single_plus_exchange(n: int) -> int:
    return n * n + 5 * n + 2


def _two_n_all_two_bit(n: int) -> int:
    return 9 * n * (n - 1) + 2 * (3 * n + 1)


def _two_n_irrep(n: int) -> int:
    return 2 * (n - 1) * (3 * n + 1)


BOUND_MODELS = {
    "single": (_two_n_single, "2(3n+1) <= 2^n"),
    "single_plus_exchange": (_two_n_single_plus_exchange, "n^2 + 5n + 2 <= 2^n"),
    "all_two_bit": (_two_n_all_two_bit, "9n(n-1) + 2(3n+1) <= 2^n"),
    "irrep_construction": (_two_n_irrep, "2(n-1)(3n+1) <= 2^n"),
}


def bounds_min_qubits(model: str) -> BoundResult:
    """Least n with (required dimension) <= 2^n for the named error model."""
    try:
        lhs, text = BOUND_MODELS[model]
    except KeyError:
        raise ValueError(f"unknown model {model!r}; known: {sorted(BOUND_MODELS)}") from None
    # codes with a single qubit carry no exchange structure; start at n = 2
    n = 2
    while lhs(n) > 2 ** n:
        n += 1
    return BoundResult(model, n, lhs(n), 2 ** n, text)


@dataclass(frozen=True)
class RepetitionCount:
    n: int
    bit_flip_errors: int
    exchanges: int
    total: int
    printed_total: int
    note: str


def repetition_expansion(n: int = 3) -> RepetitionCount:
    """Error count for |0..0>, |1..1> once exchanges are added to identity and bit flips."""
    bit_flip = n + 1
    exchanges = n * (n - 1) // 2
    note = (
        f"counting unordered pairs gives {exchanges} exchanges and {bit_flip + exchanges} errors; "
        "the printed total is 10"
    )
    return RepetitionCount(n, bit_flip, exchanges, bit_flip + exchanges, 10, note)


# -- support patterns --------------------------------------------------------------

@dataclass(frozen=True)
class SupportPattern:
    n: int
    word0_weights: frozenset[int]
    word1_weights: frozenset[int]
    dual_flip_related: bool = True

    def __post_init__(self):
        for w in self.word0_weights | self.word1_weights:
            if not 0 <= w <= self.n:
                raise ValueError(f"weight {w} outside 0..{self.n}")
        if not self.word0_weights or not self.word1_weights:
            raise ValueError("each word needs at least one weight")
        if self.dual_flip_related and self.word1_weights != frozenset(self.n - w for w in self.word0_weights):
            raise ValueError("dual patterns need word1 weights = n - word0 weights")

    def describe(self) -> str:
        w0 = ",".join(map(str, sorted(self.word0_weights)))
        w1 = ",".join(map(str, sorted(self.word1_weights)))
        return f"{w0}/{w1}"


def dual_pattern(n: int, weights: Iterable[int]) -> SupportPattern:
    w0 = frozenset(weights)
    return SupportPattern(n, w0, frozenset(n - w for w in w0), True)


def all_dual_patterns(n: int) -> list[SupportPattern]:
    """One representative per dual pattern; W and n - W give the same code with words swapped."""
    out = []
    seen = set()
    for size in range(1, n + 2):
        for combo in itertools.combinations(range(n + 1), size):
            w0 = frozenset(combo)
            w1 = frozenset(n - w for w in combo)
            key = min(tuple(sorted(w0)), tuple(sorted(w1)))
            if key in seen:
                continue
            seen.add(key)
            out.append(SupportPattern(n, w0, w1, True))
    return out


def parse_patterns(text: str, n: int) -> list[SupportPattern]:
    """``all-dual`` or ``;``-separated items like ``0,6/3,9`` (a bare ``0,6`` means dual)."""
    text = text.strip()
    if text == "all-dual":
        return all_dual_patterns(n)
    patterns = []
    for item in text.split(";"):
        item = item.strip()
        if not item:
            continue
        if "/" in item:
            left, right = item.split("/", 1)
            w0 = frozenset(int(x) for x in left.split(","))
            w1 = frozenset(int(x) for x in right.split(","))
            dual = w1 == frozenset(n - w for w in w0)
            patterns.append(SupportPattern(n, w0, w1, dual))
        else:
            patterns.append(dual_pattern(n, (int(x) for x in item.split(","))))
    if not patterns:
        raise ValueError("empty pattern list")
    return patterns


# -- phase condition ----------------------------------------------------------------

def z_expectation_count(n: int, weight: int) -> int:
    """<S|Z_k S> for S the unit-coefficient sum over weight-``weight`` strings on n qubits."""
    zero_at_k = math.comb(n - 1, weight)
    one_at_k = math.comb(n - 1, weight - 1) if weight >= 1 else 0
    return zero_at_k - one_at_k


@dataclass
class FeasibilityReport:
    feasible: bool
    contributions: dict[int, int]
    witness: dict[int, Fraction] | None
    certificate: str


def dualphase_feasibility(pattern: SupportPattern) -> FeasibilityReport:
    """Can <C_0|Z_k C_0> = 0 hold with every listed weight carrying a nonzero coefficient?

    <C_0|Z_k C_0> = sum_w |a_w|^2 * contribution(w); with every |a_w|^2 > 0 this
    vanishes for some choice iff the contributions are all zero or take both signs.
    """
    if not pattern.dual_flip_related:
        raise ValueError("the phase condition is stated for word pairs related by flipping every bit")
    n = pattern.n
    contributions = {w: z_expectation_count(n, w) for w in sorted(pattern.word0_weights)}
    positive = {w: c for w, c in contributions.items() if c > 0}
    negative = {w: c for w, c in contributions.items() if c < 0}
    if positive and negative or not (positive or negative):
        # |a_w|^2 = 1/P on positive weights, 1/N on negative ones, 1 on neutral ones
        pos_total = sum(positive.values())
        neg_total = -sum(negative.values())
        raw = {}
        for w, c in contributions.items():
            if c > 0:
                raw[w] = Fraction(1, pos_total)
            elif c < 0:
                raw[w] = Fraction(1, neg_total)
            else:
                raw[w] = Fraction(1)
        first = raw[min(raw)]
        witness = {w: v / first for w, v in raw.items()}
        terms = " + ".join(f"{witness[w]}*({c})" for w, c in contributions.items())
        return FeasibilityReport(True, contributions, witness, f"{terms} = 0")
    sign = "positive" if positive else "negative"
    listing = ", ".join(f"weight {w}: {c:+d}" for w, c in contributions.items())
    certificate = (
        f"every contribution per unit |a_w|^2 is {sign} or zero with at least one strict ({listing}); "
        "the phase expectation cannot vanish"
    )
    return FeasibilityReport(False, contributions, None, certificate)


# -- residual functional ---------------------------------------------------------------

def _residual_from_gram(gram: np.ndarray) -> float:
    W = gram.shape[0]
    diag = gram[np.arange(W), np.arange(W)]
    worst = float(np.abs(diag - diag.mean(axis=0)).max())
    if W > 1:
        off = gram.copy()
        off[np.arange(W), np.arange(W)] = 0
        worst = max(worst, float(np.abs(off).max()))
    return worst


def kl_residual(code: Code | np.ndarray, errors: ErrorSet) -> float:
    """max |entry - required| over the Gram tensor of the unit-normalized words.

    Required values are 0 across distinct words and the word-averaged block on
    the diagonal, so the result is 0 exactly when the degenerate condition holds.
    """
    if isinstance(code, Code):
        words = code.to_dense(normalize=True)
    else:
        words = np.asarray(code, dtype=complex)
        words = words / np.linalg.norm(words, axis=1, keepdims=True)
    return _residual_from_gram(float_gram_array(words, errors))


def symmetric_reduction(errors: ErrorSet) -> ErrorSet:
    """Smaller error set with the same residual on permutation-invariant words.

    For words fixed by every qubit permutation, exchanges act as the identity
    and any Pauli pair on qubits (k, l) relabels to (1, 2) or (1, 1), so the
    identity plus each requested axis on qubits 1 and 2 reproduces every
    distinct Gram entry.  Sets that are not closed under relabeling are
    returned unchanged.
    """
    n = errors.n
    classes = set()
    for op in errors:
        if op.kind == "pauli":
            classes.add(op.axis.lower())
        elif op.kind == "exchange":
            classes.add("exchange")
        elif op.kind != "identity":
            return errors
    full = make_error_set(n, classes or {"identity"})
    if full.labels != errors.labels:
        return errors
    ops = [pauli(axis, k) for axis in "XYZ" if axis.lower() in classes for k in range(1, min(n, 2) + 1)]
    return error_set_from_ops(n, ops)


@dataclass
class SearchResult:
    pattern: SupportPattern
    best_coefficients: dict[str, dict[int, float]]
    residual: float
    restarts_used: int
    seed: int
    evaluations: int = 0
    notes: list[str] = field(default_factory=list)


class _PatternObjective:
    """Residual of the unit-normalized perm-invariant words as a function of free coefficients."""

    def __init__(self, pattern: SupportPattern, errors: ErrorSet):
        self.pattern = pattern
        n = pattern.n
        self.w0 = sorted(pattern.word0_weights)
        self.w1 = sorted(pattern.word1_weights) if not pattern.dual_flip_related else [n - w for w in self.w0]
        reduced = symmetric_reduction(errors)
        blocks = [self._images(n, self.w0, reduced), self._images(n, self.w1, reduced)]
        # flat[(i, j)][(p, q), (k, l)] = <e_p B_i[k] | e_q B_j[l]>
        P = len(reduced)
        self.flat = {
            (i, j): np.einsum("kpx,lqx->pqkl", blocks[i].conj(), blocks[j]).reshape(P * P, -1)
            for i, j in ((0, 0), (0, 1), (1, 1))
        }
        self.dual = pattern.dual_flip_related
        self.dim = (len(self.w0) - 1) + (0 if self.dual else len(self.w1) - 1)
        self.evaluations = 0

    @staticmethod
    def _images(n: int, weights: Sequence[int], errors: ErrorSet) -> np.ndarray:
        out = []
        for w in weights:
            vec = np.zeros(1 << n, dtype=complex)
            vec[weight_keys(n, w)] = 1.0
            out.append([apply_dense(e, vec, n) for e in errors])
        return np.array(out)  # (K, P, 2^n)

    def coefficients(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        k0 = len(self.w0) - 1
        c0 = np.concatenate([[1.0], x[:k0]])
        c1 = c0 if self.dual else np.concatenate([[1.0], x[k0:]])
        return c0, c1

    def __call__(self, x: np.ndarray) -> float:
        self.evaluations += 1
        c0, c1 = self.coefficients(np.asarray(x, dtype=float))
        g00 = self.flat[(0, 0)] @ np.outer(c0, c0).ravel()
        g01 = self.flat[(0, 1)] @ np.outer(c0, c1).ravel()
        g11 = self.flat[(1, 1)] @ np.outer(c1, c1).ravel()
        n0, n1 = g00[0].real, g11[0].real
        if n0 <= 0 or n1 <= 0:
            return float("inf")
        # the word-averaged diagonal differs from each word's block by half their difference
        half_diff = np.abs(g00 / n0 - g11 / n1).max() / 2
        return float(max(half_diff, np.abs(g01).max() / math.sqrt(n0 * n1)))


def _nelder_mead(objective, x0: np.ndarray, xatol: float, fatol: float, per_dim: int):
    dim = len(x0)
    res = minimize(
        objective, x0, method="Nelder-Mead",
        options={"xatol": xatol, "fatol": fatol, "maxfev": per_dim * (dim + 1)},
    )
    return float(res.fun), np.asarray(res.x, dtype=float)


def _search_pattern(pattern: SupportPattern, errors: ErrorSet, budget: int,
                    seed_seq: np.random.SeedSequence, seed: int) -> SearchResult:
    objective = _PatternObjective(pattern, errors)
    best_x = np.zeros(objective.dim)
    if objective.dim == 0:
        best, restarts = objective(best_x), 1
    else:
        best, restarts = float("inf"), budget
        for child in seed_seq.spawn(budget):
            x0 = np.random.default_rng(child).standard_normal(objective.dim)
            value, x = _nelder_mead(objective, x0, 1e-7, 1e-9, 150)
            if value < best:
                best, best_x = value, x
        # tight polish from the incumbent; accepted only if it improves
        value, x = _nelder_mead(objective, best_x, 1e-14, 1e-16, 400)
        if value < best:
            best, best_x = value, x
    c0, c1 = objective.coefficients(best_x)
    coeffs = {
        "word0": {w: float(c) for w, c in zip(objective.w0, c0)},
        "word1": {w: float(c) for w, c in zip(objective.w1, c1)},
    }
    notes = [REAL_ONLY_NOTE] if best <= FOUND_TOL else [REAL_ONLY_NOTE, EVIDENCE_NOTE]
    return SearchResult(pattern, coeffs, best, restarts, seed, objective.evaluations, notes)


def search_perm_invariant(n: int, errors: ErrorSet, patterns: Sequence[SupportPattern],
                          budget: int, seed: int) -> list[SearchResult]:
    """Multi-start Nelder-Mead per pattern; seeds split per pattern, then per restart."""
    if not patterns:
        raise ValueError("empty pattern list")
    if budget < 1:
        raise ValueError("budget must be at least 1 restart")
    if errors.n != n:
        raise ValueError(f"error set is for {errors.n} qubits, search is over {n}")
    children = np.random.SeedSequence(seed).spawn(len(patterns))
    results = []
    for pattern, child in zip(patterns, children):
        if pattern.n != n:
            raise ValueError(f"pattern {pattern.describe()} is for {pattern.n} qubits")
        results.append(_search_pattern(pattern, errors, budget, child, seed))
    order = sorted(range(len(results)), key=lambda k: (results[k].residual, k))
    return [results[k] for k in order]
