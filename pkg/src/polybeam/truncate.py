"""Coefficient-magnitude thresholding of Taylor data into sparse real polynomials."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from polybeam.errors import DomainError, EmptyTruncationError
from polybeam.model import BeamAngles
from polybeam.series import TruncatedSeries, monomial_key


@dataclass(frozen=True)
class SparsePolynomial:
    """Real polynomial in local coordinates (u, v) = x - center.

    ``terms`` is a tuple of ((deg_rx, deg_tx), coeff) sorted in monomial order.
    """

    terms: tuple
    center: BeamAngles = BeamAngles(0.0, 0.0)

    def __post_init__(self):
        seen = {}
        for (a, b), c in self.terms:
            a, b, c = int(a), int(b), float(c)
            if a < 0 or b < 0:
                raise DomainError(f"negative exponent {(a, b)}")
            if (a, b) in seen:
                raise DomainError(f"duplicate exponent {(a, b)}")
            if not math.isfinite(c):
                raise DomainError("coefficients must be finite")
            if c != 0.0:
                seen[(a, b)] = c
        ordered = tuple(sorted(seen.items(), key=lambda t: monomial_key(t[0])))
        object.__setattr__(self, "terms", ordered)
        object.__setattr__(self, "center", BeamAngles(*map(float, self.center)))

    @classmethod
    def from_dict(cls, terms: dict, center=BeamAngles(0.0, 0.0)) -> "SparsePolynomial":
        return cls(tuple(terms.items()), center)

    @property
    def exponents(self) -> list[tuple[int, int]]:
        return [e for e, _ in self.terms]

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([c for _, c in self.terms], dtype=float)

    @property
    def deg_rx(self) -> int:
        return max((a for (a, _), _ in self.terms), default=0)

    @property
    def deg_tx(self) -> int:
        return max((b for (_, b), _ in self.terms), default=0)

    @property
    def total_degree(self) -> int:
        return max((a + b for (a, b), _ in self.terms), default=0)

    def __len__(self):
        return len(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def dense(self) -> np.ndarray:
        """Coefficient matrix ``C[a, b]`` of ``u**a v**b``."""
        C = np.zeros((self.deg_rx + 1, self.deg_tx + 1))
        for (a, b), c in self.terms:
            C[a, b] = c
        return C

    def __call__(self, u, v):
        """Evaluate at local coordinates; accepts complex values and arrays."""
        u = np.asarray(u)
        v = np.asarray(v)
        out = np.zeros(np.broadcast(u, v).shape, dtype=np.result_type(u, v, float))
        for (a, b), c in self.terms:
            out = out + c * u ** a * v ** b
        return out if out.ndim else out[()]

    def partial(self, var: int) -> "SparsePolynomial":
        terms = {}
        for (a, b), c in self.terms:
            if var == 0 and a > 0:
                terms[(a - 1, b)] = a * c
            elif var == 1 and b > 0:
                terms[(a, b - 1)] = b * c
        return SparsePolynomial.from_dict(terms, self.center)

    def swapped(self) -> "SparsePolynomial":
        """Same polynomial with the roles of rx and tx exchanged."""
        return SparsePolynomial.from_dict({(b, a): c for (a, b), c in self.terms},
                                          BeamAngles(self.center[1], self.center[0]))

    def scaled(self, factor: float) -> "SparsePolynomial":
        return SparsePolynomial.from_dict({e: c * factor for e, c in self.terms}, self.center)

    def abs_sum(self) -> float:
        return float(sum(abs(c) for _, c in self.terms))

    def max_abs(self) -> float:
        return float(max((abs(c) for _, c in self.terms), default=0.0))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            write_polynomial_rows(csv.writer(fh, lineterminator="\n"), self)

    @classmethod
    def from_csv(cls, path, center=BeamAngles(0.0, 0.0)) -> "SparsePolynomial":
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r]
        return parse_polynomial_rows(rows, center)


def write_polynomial_rows(writer, p: SparsePolynomial, header: bool = True) -> None:
    if header:
        writer.writerow(["deg_rx", "deg_tx", "coeff"])
    for (a, b), c in p.terms:
        writer.writerow([a, b, repr(c)])


def parse_polynomial_rows(rows, center=BeamAngles(0.0, 0.0)) -> SparsePolynomial:
    terms = {}
    for row in rows:
        if row[0].strip() == "deg_rx":
            continue
        a, b, c = int(row[0]), int(row[1]), float(row[2])
        terms[(a, b)] = terms.get((a, b), 0.0) + c
    return SparsePolynomial.from_dict(terms, center)


def normalize_magnitudes(s: TruncatedSeries) -> list[tuple[tuple[int, int], float]]:
    """Coefficient magnitudes divided by the largest one, in monomial order."""
    items = list(s.items())
    mags = np.array([abs(c) for _, c in items])
    peak = mags.max() if mags.size else 0.0
    if peak == 0.0:
        raise DomainError("nothing to normalize: all coefficients are zero")
    normed = mags / peak
    # exact 1 at the peak regardless of rounding in the division
    normed[mags == peak] = 1.0
    return [(e, float(m)) for (e, _), m in zip(items, normed)]


def threshold_select(s: TruncatedSeries, epsilon: float) -> SparsePolynomial:
    """Keep the terms whose normalized magnitude is strictly above ``epsilon``.

    The real part of each kept coefficient is retained; the imaginary part is
    round-off for a real-valued function and is dropped.
    """
    if not 0.0 <= epsilon <= 1.0:
        raise DomainError(f"epsilon must lie in [0, 1], got {epsilon!r}")
    if s.is_zero():
        raise EmptyTruncationError()
    terms = {}
    for e, m in normalize_magnitudes(s):
        if m > epsilon:
            c = s[e].real
            if c != 0.0:
                terms[e] = c
    if not terms:
        raise EmptyTruncationError()
    return SparsePolynomial.from_dict(terms, s.center)


def approximation_error(p1: SparsePolynomial, p2: SparsePolynomial) -> float:
    """Inverse of the summed raw coefficient magnitudes of both polynomials."""
    total = p1.abs_sum() + p2.abs_sum()
    if not total > 0:
        raise DomainError("approximation_error needs at least one nonzero term")
    return 1.0 / total
