"""Truncated bivariate power series ("jets") about an expansion point.

Local variables are ``u = theta_rx - center.theta_rx`` and
``v = theta_tx - center.theta_tx``; the coefficient of ``u**a * v**b`` is
stored at ``coeffs[a, b]`` for ``a + b <= degree_cap``. Entries above the
anti-diagonal are always zero.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterator, Union

import numpy as np

from polybeam.errors import DomainError
from polybeam.model import LN2, BeamAngles, ChannelMatrix, RateParams

RX, TX = 0, 1

VarIndex = Union[int, str]


def var_index(var: VarIndex) -> int:
    if var in (RX, "rx", "theta_rx"):
        return RX
    if var in (TX, "tx", "theta_tx"):
        return TX
    raise DomainError(f"unknown variable {var!r}; expected 'rx' or 'tx'")


def monomial_key(exponent: tuple[int, int]) -> tuple[int, int]:
    """Sort key: ascending total degree, ties by lex order with theta_tx > theta_rx."""
    a, b = exponent
    return (a + b, b)


def monomials(degree_cap: int) -> list[tuple[int, int]]:
    """All exponents (a, b) with a + b <= degree_cap, in monomial order."""
    return [(d - b, b) for d in range(degree_cap + 1) for b in range(d + 1)]


def _triangle_mask(degree_cap: int) -> np.ndarray:
    idx = np.arange(degree_cap + 1)
    return idx[:, None] + idx[None, :] <= degree_cap


@dataclass(frozen=True, eq=False)
class TruncatedSeries:
    degree_cap: int
    center: BeamAngles
    coeffs: np.ndarray

    def __post_init__(self):
        D = self.degree_cap
        if D < 0:
            raise DomainError("degree_cap must be >= 0")
        c = np.array(self.coeffs, dtype=np.complex128)
        if c.shape != (D + 1, D + 1):
            raise DomainError(f"coefficient array must be {(D + 1, D + 1)}, got {c.shape}")
        mask = _triangle_mask(D)
        if np.any(c[~mask] != 0):
            raise DomainError("coefficients above total degree cap must be zero")
        if not np.all(np.isfinite(c)):
            raise DomainError("series coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "center", BeamAngles(*map(float, self.center)))

    @classmethod
    def zero(cls, degree_cap: int, center: BeamAngles) -> "TruncatedSeries":
        return cls(degree_cap, center, np.zeros((degree_cap + 1, degree_cap + 1), complex))

    @classmethod
    def constant(cls, value: complex, degree_cap: int, center: BeamAngles) -> "TruncatedSeries":
        c = np.zeros((degree_cap + 1, degree_cap + 1), complex)
        c[0, 0] = value
        return cls(degree_cap, center, c)

    @classmethod
    def from_terms(cls, terms: dict, degree_cap: int, center: BeamAngles) -> "TruncatedSeries":
        c = np.zeros((degree_cap + 1, degree_cap + 1), complex)
        for (a, b), value in terms.items():
            if a < 0 or b < 0 or a + b > degree_cap:
                raise DomainError(f"exponent {(a, b)} outside degree cap {degree_cap}")
            c[a, b] = value
        return cls(degree_cap, center, c)

    @classmethod
    def variable(cls, var: VarIndex, degree_cap: int, center: BeamAngles) -> "TruncatedSeries":
        """The local coordinate u (rx) or v (tx) itself."""
        terms = {(1, 0) if var_index(var) == RX else (0, 1): 1.0} if degree_cap >= 1 else {}
        return cls.from_terms(terms, degree_cap, center)

    # -- inspection -------------------------------------------------------

    @property
    def const(self) -> complex:
        return complex(self.coeffs[0, 0])

    def __getitem__(self, exponent: tuple[int, int]) -> complex:
        a, b = exponent
        if a < 0 or b < 0 or a + b > self.degree_cap:
            return 0j
        return complex(self.coeffs[a, b])

    def items(self) -> Iterator[tuple[tuple[int, int], complex]]:
        """(exponent, coefficient) for every monomial under the cap, in monomial order."""
        for e in monomials(self.degree_cap):
            yield e, complex(self.coeffs[e])

    def is_zero(self) -> bool:
        return not np.any(self.coeffs)

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return (self.degree_cap == other.degree_cap and self.center == other.center
                and np.array_equal(self.coeffs, other.coeffs))

    __hash__ = None

    def __repr__(self):
        nz = int(np.count_nonzero(self.coeffs))
        return f"TruncatedSeries(D={self.degree_cap}, center={tuple(self.center)}, nonzero={nz})"

    def evaluate(self, du, dv):
        """Evaluate the truncated polynomial at local offsets (du, dv); broadcasts."""
        du = np.asarray(du)
        dv = np.asarray(dv)
        D = self.degree_cap
        # Horner in u over polynomials in v
        out = np.zeros(np.broadcast(du, dv).shape, dtype=complex)
        for a in range(D, -1, -1):
            row = np.zeros_like(out)
            for b in range(D - a, -1, -1):
                row = row * dv + self.coeffs[a, b]
            out = out * du + row
        return out if out.ndim else complex(out)

    # -- arithmetic -------------------------------------------------------

    def _check_compatible(self, other: "TruncatedSeries"):
        if self.degree_cap != other.degree_cap or self.center != other.center:
            raise DomainError("series must share degree_cap and center")

    def _wrap(self, coeffs: np.ndarray) -> "TruncatedSeries":
        return TruncatedSeries(self.degree_cap, self.center, coeffs)

    def __add__(self, other):
        if isinstance(other, TruncatedSeries):
            self._check_compatible(other)
            return self._wrap(self.coeffs + other.coeffs)
        c = self.coeffs.copy()
        c[0, 0] += other
        return self._wrap(c)

    __radd__ = __add__

    def __neg__(self):
        return self._wrap(-self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, TruncatedSeries):
            return series_mul(self, other)
        return self._wrap(self.coeffs * other)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self._wrap(self.coeffs / scalar)

    def conj(self) -> "TruncatedSeries":
        """Conjugate as a function of real local variables."""
        return self._wrap(self.coeffs.conj())

    @property
    def real(self) -> "TruncatedSeries":
        return self._wrap(self.coeffs.real.astype(complex))

    def max_imag(self) -> float:
        return float(np.max(np.abs(self.coeffs.imag))) if self.coeffs.size else 0.0

    def to_csv(self, path) -> None:
        """Write ``deg_rx,deg_tx,coeff_real,coeff_imag`` rows in monomial order."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["deg_rx", "deg_tx", "coeff_real", "coeff_imag"])
            for (a, b), c in self.items():
                w.writerow([a, b, repr(c.real), repr(c.imag)])


def series_add(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    a._check_compatible(b)
    return a + b


def series_mul(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    """Cauchy product truncated at total degree ``degree_cap``."""
    a._check_compatible(b)
    # fixed operand order makes a*b and b*a bitwise identical
    if a.coeffs.tobytes() > b.coeffs.tobytes():
        a, b = b, a
    D = a.degree_cap
    A, B = a.coeffs, b.coeffs
    out = np.zeros_like(A)
    for i, j in zip(*np.nonzero(A)):
        out[i:, j:] += A[i, j] * B[:D + 1 - i, :D + 1 - j]
    out[~_triangle_mask(D)] = 0
    return TruncatedSeries(D, a.center, out)


def _require_zero_constant(s: TruncatedSeries, name: str):
    if s.coeffs[0, 0] != 0:
        raise DomainError(f"{name} requires a series with zero constant term")


def series_exp(v: TruncatedSeries) -> TruncatedSeries:
    """exp(v) for v with zero constant term; the sum terminates at degree_cap."""
    _require_zero_constant(v, "series_exp")
    D = v.degree_cap
    out = TruncatedSeries.constant(1.0, D, v.center)
    # Horner form of sum_k v^k / k!
    for k in range(D, 0, -1):
        out = 1.0 + (v * out) / k
    return out


def series_log1p(u: TruncatedSeries) -> TruncatedSeries:
    """log(1 + u) for u with zero constant term."""
    _require_zero_constant(u, "series_log1p")
    D = u.degree_cap
    if D == 0:
        return TruncatedSeries.zero(0, u.center)
    # Horner form of sum_{k=1}^{D} (-1)^(k+1) u^k / k
    acc = TruncatedSeries.constant((-1) ** (D + 1) / D, D, u.center)
    for k in range(D - 1, 0, -1):
        acc = (-1) ** (k + 1) / k + u * acc
    return u * acc


def series_sin_shifted(var: VarIndex, center_angle: float, degree_cap: int,
                       center: BeamAngles | None = None) -> TruncatedSeries:
    """Taylor series of ``sin(center_angle + t)`` in the local variable of ``var``.

    ``center`` fixes the full expansion point of the returned series; by
    default the other coordinate is 0.
    """
    idx = var_index(var)
    if center is None:
        center = BeamAngles(center_angle, 0.0) if idx == RX else BeamAngles(0.0, center_angle)
    terms = {}
    for k in range(degree_cap + 1):
        e = (k, 0) if idx == RX else (0, k)
        terms[e] = math.sin(center_angle + k * math.pi / 2) / math.factorial(k)
    return TruncatedSeries.from_terms(terms, degree_cap, center)


def _steering_series(var: int, n_antennas: int, center: BeamAngles,
                     degree_cap: int) -> list[TruncatedSeries]:
    theta0 = center[var]
    s = series_sin_shifted(var, theta0, degree_cap, center)
    nilpotent = s - math.sin(theta0)
    # exact zero constant so series_exp accepts it
    c = nilpotent.coeffs.copy()
    c[0, 0] = 0
    nilpotent = TruncatedSeries(degree_cap, center, c)
    scale = 1.0 / math.sqrt(n_antennas)
    out = []
    for k in range(n_antennas):
        phase = np.exp(1j * math.pi * k * math.sin(theta0))
        out.append(series_exp(nilpotent * (1j * math.pi * k)) * (scale * phase))
    return out


def link_gain_series(H: ChannelMatrix, center: BeamAngles, degree_cap: int) -> TruncatedSeries:
    """Series of ``g = w_rx^H H w_tx`` about ``center``."""
    w_rx = _steering_series(RX, H.rows, center, degree_cap)
    w_tx = _steering_series(TX, H.cols, center, degree_cap)
    g = TruncatedSeries.zero(degree_cap, center)
    for a in range(H.rows):
        h_a = TruncatedSeries.zero(degree_cap, center)
        for b in range(H.cols):
            if H.entries[a, b] != 0:
                h_a = h_a + w_tx[b] * complex(H.entries[a, b])
        if not h_a.is_zero():
            g = g + w_rx[a].conj() * h_a
    return g


def rate_series(H: ChannelMatrix, params: RateParams, center: BeamAngles,
                degree_cap: int = 20) -> TruncatedSeries:
    """Truncated Taylor series of the data rate R about ``center``."""
    if degree_cap < 2:
        raise DomainError("degree_cap must be >= 2")
    center = BeamAngles(*map(float, center))
    g = link_gain_series(H, center, degree_cap)
    # g * conj(g) expanded as re(g)^2 + im(g)^2 (coefficient-wise parts): the
    # cross terms cancel exactly, so the series of |g|^2 is real by construction
    g_re = TruncatedSeries(degree_cap, center, g.coeffs.real)
    g_im = TruncatedSeries(degree_cap, center, g.coeffs.imag)
    q = (g_re * g_re + g_im * g_im) * params.gain
    q0 = q.const.real
    c = q.coeffs.copy()
    c[0, 0] = 0
    u = TruncatedSeries(degree_cap, center, c) / (1.0 + q0)
    out = series_log1p(u) + math.log1p(q0)
    return out / LN2


def series_partial(s: TruncatedSeries, var: VarIndex) -> TruncatedSeries:
    """Formal partial derivative; the result has degree_cap one lower."""
    if s.degree_cap < 1:
        raise DomainError("series_partial requires degree_cap >= 1")
    D = s.degree_cap - 1
    c = np.zeros((D + 1, D + 1), complex)
    if var_index(var) == RX:
        a = np.arange(1, D + 2)[:, None]
        c[:, :] = (a * s.coeffs[1:, :])[:, :D + 1]
    else:
        b = np.arange(1, D + 2)[None, :]
        c[:, :] = (b * s.coeffs[:, 1:])[:D + 1, :]
    c[~_triangle_mask(D)] = 0
    return TruncatedSeries(D, s.center, c)
