"""Pauli-sum expressions: parsing, canonical form, and materialization.

Grammar (whitespace insensitive):

    expr  := ['+'|'-'] term (('+'|'-') term)*
    term  := [coeff '*'] word
    coeff := decimal, optionally with an exponent part
    word  := [IXYZ]{n}

Canonical form merges like words, drops exact zeros, and sorts words
lexicographically. Coefficients are real, so materialized operators are
Hermitian by construction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PauliParseError

PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

_WORD_CHARS = set("IXYZ")
_NUM_START = set("0123456789.")


@dataclass(frozen=True)
class PauliSumExpr:
    """Canonical list of (real coefficient, Pauli word) over n qubits."""

    n: int
    terms: tuple

    @property
    def num_terms(self) -> int:
        return len(self.terms)


def _tokenize(text: str):
    """Full token list with positions; raises on any bad character."""
    tokens = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c in "+-*":
            tokens.append((c, c, i))
            i += 1
            continue
        if c in _WORD_CHARS:
            start = i
            while i < n and text[i] in _WORD_CHARS:
                i += 1
            tokens.append(("word", text[start:i], start))
            continue
        if c in _NUM_START:
            start = i
            while i < n and text[i] in _NUM_START:
                i += 1
            if i < n and text[i] in "eE":
                j = i + 1
                if j < n and text[j] in "+-":
                    j += 1
                if j < n and text[j].isdigit():
                    i = j
                    while i < n and text[i].isdigit():
                        i += 1
            lit = text[start:i]
            try:
                value = float(lit)
            except ValueError:
                raise PauliParseError(f"malformed number {lit!r}", start)
            if not math.isfinite(value):
                raise PauliParseError(f"non-finite coefficient {lit!r}", start)
            tokens.append(("num", value, start))
            continue
        raise PauliParseError(f"unexpected character {c!r}", i)
    return tokens


def parse_pauli_sum(text: str, n: int) -> PauliSumExpr:
    """Parse into canonical form: like words merged, zeros dropped, sorted."""
    if n < 1:
        raise PauliParseError("qubit count must be >= 1", 0)
    if not text or text.isspace():
        raise PauliParseError("empty expression", 0)
    tokens = _tokenize(text)
    pos = 0
    collected = {}

    def term_error_at():
        return tokens[pos][2] if pos < len(tokens) else len(text)

    def parse_term(sign: float):
        nonlocal pos
        if pos >= len(tokens):
            raise PauliParseError("empty term", term_error_at())
        kind, value, at = tokens[pos]
        coeff = 1.0
        if kind == "num":
            coeff = value
            pos += 1
            if pos >= len(tokens) or tokens[pos][0] != "*":
                raise PauliParseError("expected '*' after coefficient", term_error_at())
            pos += 1
            if pos >= len(tokens) or tokens[pos][0] != "word":
                raise PauliParseError("expected Pauli word", term_error_at())
            kind, value, at = tokens[pos]
        if kind != "word":
            raise PauliParseError("empty term", at)
        if len(value) != n:
            raise PauliParseError(
                f"word {value!r} has length {len(value)}, expected {n}", at)
        pos += 1
        collected[value] = collected.get(value, 0.0) + sign * coeff

    sign = 1.0
    if tokens and tokens[0][0] in "+-":
        sign = -1.0 if tokens[0][0] == "-" else 1.0
        pos = 1
    parse_term(sign)
    while pos < len(tokens):
        kind, _, at = tokens[pos]
        if kind not in "+-":
            raise PauliParseError("expected '+' or '-' between terms", at)
        pos += 1
        parse_term(-1.0 if kind == "-" else 1.0)

    terms = tuple((c, w) for w, c in sorted(collected.items()) if c != 0.0)
    return PauliSumExpr(n=n, terms=terms)


def materialize(expr: PauliSumExpr) -> np.ndarray:
    """Dense matrix Σ c · P_1 ⊗ ... ⊗ P_n, leftmost letter outermost."""
    d = 2 ** expr.n
    out = np.zeros((d, d), dtype=complex)
    for coeff, word in expr.terms:
        op = np.array([[1.0 + 0j]])
        for ch in word:
            op = np.kron(op, PAULI_MATRICES[ch])
        out += coeff * op
    return out


def serialize_pauli_sum(expr: PauliSumExpr) -> str:
    """Canonical text; parse(serialize(e)) recovers e exactly."""
    if not expr.terms:
        return "0*" + "I" * expr.n
    parts = []
    for i, (coeff, word) in enumerate(expr.terms):
        mag = repr(abs(coeff))
        if coeff < 0:
            parts.append(("- " if i else "-") + f"{mag}*{word}")
        else:
            parts.append(("+ " if i else "") + f"{mag}*{word}")
    return " ".join(parts)
