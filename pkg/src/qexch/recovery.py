"""Syndrome-projector recovery built from a degenerate D matrix (floating point)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from qexch.codes import Code, logical_from_words
from qexch.errors import ErrorOp, ErrorSet, apply_dense
from qexch.klcheck import KLReport, check_kl, gram_blocks

DEFAULT_THRESHOLD = 1e-8
NORM_TOL = 1e-6
BRANCH_FLOOR = 1e-15


class RecoveryRefused(ValueError):
    """The code does not satisfy the degenerate condition for the error set."""

    def __init__(self, report: KLReport):
        self.report = report
        super().__init__(
            f"degenerate condition fails with {len(report.witnesses)} witnesses; no recovery exists"
        )


@dataclass
class Syndrome:
    eigenvalue: float
    block: int
    # coefficients of the transformed error f = sum_p u[p] e_p
    transform: np.ndarray
    # rows: orthonormal basis f C_i / sqrt(eigenvalue), one per word
    basis: np.ndarray

    def composition(self, labels: list[str], cutoff: float = 1e-9) -> list[tuple[str, complex]]:
        return [(labels[p], complex(c)) for p, c in enumerate(self.transform) if abs(c) > cutoff]


@dataclass
class RecoveryPlan:
    code: Code
    errors: ErrorSet
    words: np.ndarray
    transform: np.ndarray
    eigenvalues: np.ndarray
    syndromes: list[Syndrome]
    threshold: float
    d_rank: int

    def summary(self) -> dict:
        labels = self.errors.labels
        return {
            "code": self.code.name,
            "errors": len(self.errors),
            "syndromes": len(self.syndromes),
            "exact_rank": self.d_rank,
            "threshold": self.threshold,
            "entries": [
                {
                    "eigenvalue": s.eigenvalue,
                    "block": s.block,
                    "composition": [
                        {"error": name, "re": c.real, "im": c.imag}
                        for name, c in s.composition(labels)
                    ],
                }
                for s in self.syndromes
            ],
        }


@dataclass
class RecoveryOutcome:
    branches: list[tuple[float, np.ndarray]] = field(default_factory=list)
    residual: float = 0.0


def _eigenbasis(block: np.ndarray, threshold: float) -> list[tuple[float, np.ndarray]]:
    """Eigenpairs with deterministic bases inside degenerate eigenspaces.

    The unit vectors e_0, e_1, ... are projected onto each eigenspace and
    Gram-Schmidt orthonormalized in index order, so the result does not
    depend on which eigenvectors the solver returns.
    """
    values, vectors = np.linalg.eigh(block)
    size = len(values)
    scale = max(abs(values).max(), 1.0)
    out = []
    start = 0
    while start < size:
        stop = start + 1
        while stop < size and abs(values[stop] - values[start]) <= 1e-9 * scale:
            stop += 1
        value = float(values[start:stop].mean())
        if value > threshold:
            space = vectors[:, start:stop]
            projector = space @ space.conj().T
            chosen: list[np.ndarray] = []
            for p in range(size):
                candidate = projector[:, p].copy()
                for u in chosen:
                    candidate -= (u.conj() @ candidate) * u
                norm = np.linalg.norm(candidate)
                if norm > 1e-6:
                    chosen.append(candidate / norm)
                if len(chosen) == stop - start:
                    break
            out.extend((value, u) for u in chosen)
        start = stop
    return out


def build_recovery(code: Code, errors: ErrorSet, threshold: float = DEFAULT_THRESHOLD) -> RecoveryPlan:
    """Diagonalize D block by block and build one two-dimensional syndrome space per retained eigenvector.

    ``threshold`` is relative to the largest eigenvalue of D.
    """
    report = check_kl(gram_blocks(code, errors), "degenerate")
    if not report.passed:
        raise RecoveryRefused(report)
    dm = report.d_matrix
    words = code.to_dense(normalize=False)
    norm2 = float(np.vdot(words[0], words[0]).real)
    words = words / np.sqrt(norm2)
    d = dm.to_array() / norm2
    top = float(np.linalg.eigvalsh(d).max())
    cutoff = threshold * top

    n = code.n
    # images[i, p] = e_p C_i on normalized words
    images = np.array([[apply_dense(e, w, n) for e in errors] for w in words])

    syndromes = []
    for b_index, block in enumerate(dm.blocks):
        sub = d[np.ix_(block, block)]
        for value, u_block in _eigenbasis(sub, cutoff):
            u = np.zeros(len(errors), dtype=complex)
            u[block] = u_block
            # f C_i = sum_p u[p] e_p C_i has norm^2 = u^dag D u = value
            basis = np.einsum("p,ipx->ix", u, images) / np.sqrt(value)
            syndromes.append(Syndrome(value, b_index, u, basis))

    transform = np.array([s.transform for s in syndromes]) if syndromes else np.zeros((0, len(errors)))
    eigenvalues = np.array([s.eigenvalue for s in syndromes])
    return RecoveryPlan(code, errors, words, transform, eigenvalues, syndromes, threshold, dm.rank)


def recover(plan: RecoveryPlan, state: np.ndarray) -> RecoveryOutcome:
    """Measure every syndrome and map each branch back onto the code space."""
    state = np.asarray(state, dtype=complex)
    norm = np.linalg.norm(state)
    if abs(norm - 1.0) > NORM_TOL:
        raise ValueError(f"input state must be unit norm, got {norm:.3g}")
    outcome = RecoveryOutcome()
    total = 0.0
    for syndrome in plan.syndromes:
        amps = syndrome.basis.conj() @ state
        prob = float(np.vdot(amps, amps).real)
        if prob <= BRANCH_FLOOR:
            continue
        post = (amps @ plan.words) / np.sqrt(prob)
        outcome.branches.append((prob, post))
        total += prob
    outcome.residual = max(0.0, 1.0 - total)
    return outcome


def roundtrip_fidelity(plan: RecoveryPlan, error: ErrorOp, alpha: complex, beta: complex) -> float:
    psi = logical_from_words(plan.words, alpha, beta)
    damaged = apply_dense(error, psi, plan.code.n)
    damaged = damaged / np.linalg.norm(damaged)
    outcome = recover(plan, damaged)
    return float(sum(p * abs(np.vdot(psi, post)) ** 2 for p, post in outcome.branches))


def logical_grid() -> list[tuple[complex, complex]]:
    """Twelve fixed logical states: poles, equal weights and complex phases."""
    s = 1 / np.sqrt(2)
    return [
        (1, 0),
        (0, 1),
        (s, s),
        (s, -s),
        (s, 1j * s),
        (s, -1j * s),
        (0.6, 0.8j),
        (0.8, -0.6),
        (0.5, np.sqrt(3) / 2 * np.exp(0.7j)),
        (np.sqrt(0.1), np.sqrt(0.9) * np.exp(-2.1j)),
        (np.exp(0.3j) * np.sqrt(0.3), np.sqrt(0.7)),
        (np.sqrt(0.45) * 1j, np.sqrt(0.55) * np.exp(1.9j)),
    ]


def random_logical_states(count: int, rng: np.random.Generator) -> list[tuple[complex, complex]]:
    out = []
    for _ in range(count):
        z = rng.normal(size=2) + 1j * rng.normal(size=2)
        z /= np.linalg.norm(z)
        out.append((complex(z[0]), complex(z[1])))
    return out


def syndrome_overlap(plan: RecoveryPlan) -> float:
    """Largest |<u|v>| between distinct syndrome basis vectors."""
    if not plan.syndromes:
        return 0.0
    basis = np.concatenate([s.basis for s in plan.syndromes])
    overlaps = np.abs(basis.conj() @ basis.T)
    np.fill_diagonal(overlaps, 0.0)
    return float(overlaps.max())
