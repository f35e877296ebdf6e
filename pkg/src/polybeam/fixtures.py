"""Plain-text solver fixtures and planted-root system construction.

A fixture file holds two ``deg_rx,deg_tx,coeff`` blocks (p1 then p2)
followed by a block of ``re_rx,im_rx,re_tx,im_tx`` root lines, blocks
separated by blank lines. Lines starting with ``#`` are comments.
"""

from __future__ import annotations

import csv

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.signal import convolve2d

from polybeam.errors import DomainError
from polybeam.truncate import SparsePolynomial, parse_polynomial_rows, write_polynomial_rows

ROOT_HEADER = ["re_rx", "im_rx", "re_tx", "im_tx"]


def write_fixture(path, p1: SparsePolynomial, p2: SparsePolynomial, roots, comment=None):
    with open(path, "w", newline="") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        w = csv.writer(fh, lineterminator="\n")
        write_polynomial_rows(w, p1)
        fh.write("\n")
        write_polynomial_rows(w, p2)
        fh.write("\n")
        w.writerow(ROOT_HEADER)
        for x, y in roots:
            x, y = complex(x), complex(y)
            w.writerow([repr(x.real), repr(x.imag), repr(y.real), repr(y.imag)])


def read_fixture(path):
    """Return ``(p1, p2, roots)`` with roots as a list of complex pairs."""
    blocks, cur = [], []
    with open(path, newline="") as fh:
        for line in fh:
            line = line.strip()
            if line.startswith("#"):
                continue
            if not line:
                if cur:
                    blocks.append(cur)
                cur = []
                continue
            cur.append(line.split(","))
    if cur:
        blocks.append(cur)
    if len(blocks) != 3:
        raise DomainError(f"{path}: expected 3 blocks, found {len(blocks)}")
    p1 = parse_polynomial_rows(blocks[0])
    p2 = parse_polynomial_rows(blocks[1])
    roots = [(complex(float(a), float(b)), complex(float(c), float(d)))
             for a, b, c, d in blocks[2][1:]]
    return p1, p2, roots


def _dense_to_poly(C: np.ndarray) -> SparsePolynomial:
    return SparsePolynomial.from_dict({(a, b): C[a, b] for a, b in zip(*np.nonzero(C))})


def _pad_add(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    Z = np.zeros((max(X.shape[0], Y.shape[0]), max(X.shape[1], Y.shape[1])))
    Z[:X.shape[0], :X.shape[1]] += X
    Z[:Y.shape[0], :Y.shape[1]] += Y
    return Z


def planted_system(rng: np.random.Generator, n_roots: int):
    """A system with exactly ``n_roots`` known simple roots.

    Start from p1 = prod(x - r_j), p2 = y - L(x) with L interpolating random
    s_j = L(r_j), then mix the generators (p1 += p2*k, p2 += p1*h) with random
    bilinear k, h. The ideal, hence the root set, is unchanged while the
    polynomials become dense in both variables.
    """
    r = rng.uniform(-1, 1, n_roots)
    L = rng.standard_normal(n_roots)
    s = npoly.polyval(r, L)
    A = npoly.polyfromroots(r).reshape(-1, 1)
    B = np.zeros((n_roots, 2))
    B[:, 0] = -L
    B[0, 1] = 1.0
    A = _pad_add(A, convolve2d(B, rng.standard_normal((2, 2))))
    B = _pad_add(B, convolve2d(A, rng.standard_normal((2, 2))))
    return _dense_to_poly(A), _dense_to_poly(B), [(complex(x), complex(y)) for x, y in zip(r, s)]
