"""Built-in codes, permutation-invariant construction and the code file format."""

from __future__ import annotations

import json
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from qexch.field import ExactScalar, RadicandMismatch
from qexch.qstate import (
    StateVector,
    basis_state,
    bits_to_key,
    key_to_bits,
    perm_sum_state,
    weight_keys,
)

FORMAT_HEADER = "qexch-code v1"


class CodeFormatError(ValueError):
    """A code document could not be parsed."""


@dataclass(frozen=True)
class Code:
    name: str
    n: int
    radicand: int
    words: tuple[tuple[str, StateVector], ...]
    # (logical index i, multiplicity index m) per word, for extended checks
    indices: tuple[tuple[int, int], ...] | None = None

    def __post_init__(self):
        if not self.words:
            raise ValueError("a code needs at least one word")
        labels = [label for label, _ in self.words]
        if len(set(labels)) != len(labels):
            raise ValueError(f"word labels must be unique: {labels}")
        for label, vec in self.words:
            if vec.n != self.n:
                raise ValueError(f"word {label} has {vec.n} qubits, code has {self.n}")
            if vec.radicand != self.radicand:
                raise RadicandMismatch(f"word {label} radicand {vec.radicand} != {self.radicand}")
            if vec.is_zero():
                raise ValueError(f"word {label} is zero")
        if self.indices is not None and len(self.indices) != len(self.words):
            raise ValueError("one (i, m) index pair is needed per word")

    @property
    def labels(self) -> list[str]:
        return [label for label, _ in self.words]

    @property
    def vectors(self) -> list[StateVector]:
        return [vec for _, vec in self.words]

    def word(self, label: str) -> StateVector:
        for name, vec in self.words:
            if name == label:
                return vec
        raise KeyError(label)

    def with_indices(self, indices: Sequence[tuple[int, int]]) -> Code:
        return Code(self.name, self.n, self.radicand, self.words, tuple(map(tuple, indices)))

    def to_dense(self, normalize: bool = False) -> np.ndarray:
        words = np.array([vec.to_dense() for vec in self.vectors])
        if normalize:
            words = words / np.linalg.norm(words, axis=1, keepdims=True)
        return words


def _triplets(pattern: str) -> str:
    return "".join(ch * 3 for ch in pattern)


def _shor9() -> Code:
    # Each printed bold symbol stands for a triple: |0 1 1> = |000 111 111>.
    c0 = sum_of_kets([_triplets(p) for p in ("000", "011", "101", "110")])
    c1 = sum_of_kets([_triplets(p) for p in ("111", "100", "010", "001")])
    return Code("shor9", 9, 1, (("c_0", c0), ("c_1", c1)))


def _exch9() -> Code:
    return perm_invariant_code(
        [
            PermInvariantSpec(9, {0: ExactScalar(1, radicand=28), 6: ExactScalar.inv_sqrt(28)}),
            PermInvariantSpec(9, {9: ExactScalar(1, radicand=28), 3: ExactScalar.inv_sqrt(28)}),
        ],
        name="exch9",
        labels=("C_0", "C_1"),
    )


def _rep3() -> Code:
    return Code("rep3", 3, 1, (("C_0", basis_state("000")), ("C_1", basis_state("111"))))


BUILTIN_CODES = {"shor9": _shor9, "exch9": _exch9, "rep3": _rep3}


def builtin_code(name: str) -> Code:
    try:
        factory = BUILTIN_CODES[name]
    except KeyError:
        raise KeyError(f"unknown built-in code {name!r}; known: {sorted(BUILTIN_CODES)}") from None
    return factory()


def sum_of_kets(kets: Sequence[str], radicand: int = 1) -> StateVector:
    out = basis_state(kets[0], radicand)
    for ket in kets[1:]:
        out = out + basis_state(ket, radicand)
    return out


@dataclass(frozen=True)
class PermInvariantSpec:
    """Coefficients a_k of a word sum_k a_k * (sum over weight-k strings)."""

    n: int
    coefficients: Mapping[int, ExactScalar] = field(default_factory=dict)

    def __post_init__(self):
        for weight in self.coefficients:
            if not 0 <= weight <= self.n:
                raise ValueError(f"weight {weight} outside 0..{self.n}")
        if all(_as_scalar(c).is_zero() for c in self.coefficients.values()):
            raise ValueError("a word needs at least one nonzero coefficient")


def _as_scalar(value, radicand: int = 1) -> ExactScalar:
    return value if isinstance(value, ExactScalar) else ExactScalar.from_rational(value, radicand)


def perm_invariant_code(
    specs: Sequence[PermInvariantSpec],
    name: str = "perm-invariant",
    labels: Sequence[str] | None = None,
) -> Code:
    radicands = {c.radicand for s in specs for c in s.coefficients.values() if isinstance(c, ExactScalar)}
    if len(radicands) > 1:
        raise RadicandMismatch(f"coefficients mix radicands {sorted(radicands)}")
    radicand = radicands.pop() if radicands else 1
    ns = {s.n for s in specs}
    if len(ns) != 1:
        raise ValueError(f"words disagree on n: {sorted(ns)}")
    n = ns.pop()
    if labels is None:
        labels = [f"C_{i}" for i in range(len(specs))]
    words = []
    for label, spec in zip(labels, specs):
        vec = StateVector(n, radicand)
        for weight in sorted(spec.coefficients):
            coeff = _as_scalar(spec.coefficients[weight], radicand)
            if not coeff.is_zero():
                vec = vec + perm_sum_state(n, weight, coeff)
        words.append((label, vec))
    return Code(name, n, radicand, tuple(words))


def logical_state(code: Code, alpha: complex, beta: complex) -> np.ndarray:
    """Unit vector alpha*C0 + beta*C1 over the unit-normalized words, as a dense array."""
    if len(code.words) != 2:
        raise ValueError(f"logical states need a two-word code, got {len(code.words)} words")
    return logical_from_words(code.to_dense(normalize=True), alpha, beta)


def logical_from_words(words: np.ndarray, alpha: complex, beta: complex) -> np.ndarray:
    if len(words) != 2:
        raise ValueError(f"logical states need two words, got {len(words)}")
    if alpha == 0 and beta == 0:
        raise ValueError("alpha and beta cannot both be zero")
    psi = alpha * words[0] + beta * words[1]
    norm = np.linalg.norm(psi)
    if norm == 0:
        raise ValueError("logical state is the zero vector")
    return psi / norm


# -- file format -----------------------------------------------------------

def _word_terms(vec: StateVector) -> list[dict]:
    """Split a word into permsum terms (complete equal-amplitude weight classes) and basis terms."""
    by_weight: dict[int, list[tuple[int, ExactScalar]]] = {}
    for key, value in vec.items():
        by_weight.setdefault(bin(key).count("1"), []).append((key, value))
    terms = []
    for weight in sorted(by_weight):
        entries = by_weight[weight]
        values = {v for _, v in entries}
        if len(entries) == math.comb(vec.n, weight) and len(values) == 1 and len(entries) > 1:
            terms.append({"coeff": _coeff_dict(entries[0][1]), "kind": "permsum", "weight": weight})
        else:
            for key, value in entries:
                terms.append({"coeff": _coeff_dict(value), "kind": "basis", "bits": key_to_bits(key, vec.n)})
    return terms


def _coeff_dict(value: ExactScalar) -> dict[str, str]:
    d = value.to_dict()
    del d["radicand"]
    return d


def code_to_document(code: Code) -> dict:
    words = []
    for pos, (label, vec) in enumerate(code.words):
        word = {"label": label, "terms": _word_terms(vec)}
        if code.indices is not None:
            word["index"] = list(code.indices[pos])
        words.append(word)
    return {
        "format": FORMAT_HEADER,
        "name": code.name,
        "n": code.n,
        "radicand": code.radicand,
        "words": words,
    }


def _require_keys(obj, allowed: set[str], required: set[str], where: str) -> None:
    if not isinstance(obj, dict):
        raise CodeFormatError(f"{where}: expected an object")
    unknown = set(obj) - allowed
    if unknown:
        raise CodeFormatError(f"{where}: unknown keys {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise CodeFormatError(f"{where}: missing keys {sorted(missing)}")


def code_from_document(doc: dict) -> Code:
    _require_keys(doc, {"format", "name", "n", "radicand", "words"}, {"format", "n", "radicand", "words"}, "code")
    if doc["format"] != FORMAT_HEADER:
        raise CodeFormatError(f"unsupported format header {doc['format']!r}")
    n, radicand = doc["n"], doc["radicand"]
    if not isinstance(n, int) or not isinstance(radicand, int) or n < 1 or radicand < 1:
        raise CodeFormatError("n and radicand must be positive integers")
    if not isinstance(doc["words"], list) or not doc["words"]:
        raise CodeFormatError("words must be a non-empty list")
    words = []
    indices = []
    for w_pos, word in enumerate(doc["words"]):
        where = f"words[{w_pos}]"
        _require_keys(word, {"label", "terms", "index"}, {"label", "terms"}, where)
        amps: dict[int, ExactScalar] = {}
        for t_pos, term in enumerate(word["terms"]):
            twhere = f"{where}.terms[{t_pos}]"
            _require_keys(term, {"coeff", "kind", "bits", "weight"}, {"coeff", "kind"}, twhere)
            try:
                coeff = ExactScalar.from_dict(term["coeff"], radicand=radicand)
            except RadicandMismatch as exc:
                raise CodeFormatError(f"{twhere}: {exc}") from exc
            except (ValueError, TypeError, AttributeError) as exc:
                raise CodeFormatError(f"{twhere}: bad coefficient: {exc}") from exc
            if term["kind"] == "basis":
                if "bits" not in term or "weight" in term:
                    raise CodeFormatError(f"{twhere}: basis terms carry 'bits' only")
                bits = term["bits"]
                if not isinstance(bits, str) or len(bits) != n:
                    raise CodeFormatError(f"{twhere}: bits must be a string of length {n}")
                try:
                    keys = [bits_to_key(bits)]
                except ValueError as exc:
                    raise CodeFormatError(f"{twhere}: {exc}") from exc
            elif term["kind"] == "permsum":
                if "weight" not in term or "bits" in term:
                    raise CodeFormatError(f"{twhere}: permsum terms carry 'weight' only")
                weight = term["weight"]
                if not isinstance(weight, int) or not 0 <= weight <= n:
                    raise CodeFormatError(f"{twhere}: weight must be an integer in 0..{n}")
                keys = weight_keys(n, weight)
            else:
                raise CodeFormatError(f"{twhere}: unknown term kind {term['kind']!r}")
            for key in keys:
                amps[key] = amps[key] + coeff if key in amps else coeff
        vec = StateVector(n, radicand, amps)
        words.append((word["label"], vec))
        if "index" in word:
            idx = word["index"]
            if not (isinstance(idx, list) and len(idx) == 2 and all(isinstance(x, int) for x in idx)):
                raise CodeFormatError(f"{where}: index must be [i, m]")
            indices.append(tuple(idx))
    if indices and len(indices) != len(words):
        raise CodeFormatError("either every word or no word carries an index")
    try:
        return Code(doc.get("name", "unnamed"), n, radicand, tuple(words), tuple(indices) if indices else None)
    except ValueError as exc:
        raise CodeFormatError(str(exc)) from exc


def save_code(code: Code, destination: str | Path) -> None:
    Path(destination).write_text(json.dumps(code_to_document(code), indent=2) + "\n")


def load_code(source: str | Path) -> Code:
    try:
        doc = json.loads(Path(source).read_text())
    except json.JSONDecodeError as exc:
        raise CodeFormatError(f"{source}: not valid JSON: {exc}") from exc
    return code_from_document(doc)


def resolve_code(ref: str) -> Code:
    """A built-in name or a path to a code document."""
    if ref in BUILTIN_CODES:
        return builtin_code(ref)
    path = Path(ref)
    if not path.is_file():
        raise FileNotFoundError(f"no built-in code or file named {ref!r}")
    return load_code(path)
