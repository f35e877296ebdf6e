"""Common roots of two bivariate polynomials by a hidden-variable resultant.

theta_tx is hidden: both polynomials are read as univariate in theta_rx with
coefficients in theta_tx, the Sylvester matrix S(y) = sum_k S_k y^k is built,
and det S(y) = 0 is linearized into a generalized eigenproblem. theta_rx is
recovered from the eigenvector, whose null-vector block is proportional to
(x^{K-1}, ..., x, 1), then every candidate is polished with damped Newton.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from polybeam.errors import DegenerateSystemError, DomainError, NonIsolatedRootsError
from polybeam.model import TWO_PI, BeamAngles
from polybeam.truncate import SparsePolynomial

# candidates beyond this modulus (in balanced coordinates) are treated as at infinity
_MAX_MODULUS = 1e6


@dataclass(frozen=True)
class SolverOptions:
    residual_tol: float = 1e-8
    cluster_tol: float = 1e-7
    newton_iters: int = 8
    step_tol: float = 1e-8
    axis_components: str = "raise"
    balance: bool = True
    seed: int = 0


@dataclass
class RootSet:
    """Isolated common roots in global coordinates (center added back)."""

    roots: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    center: BeamAngles = BeamAngles(0.0, 0.0)
    flagged: int = 0
    dropped_components: int = 0

    def __len__(self):
        return len(self.roots)

    @property
    def local_roots(self) -> list[tuple[complex, complex]]:
        c0, c1 = self.center
        return [(r - c0, t - c1) for r, t in self.roots]

    def zero_coordinate_count(self, tol: float = 1e-9) -> int:
        """Roots with a vanishing local coordinate (outside the algebraic torus)."""
        return sum(1 for u, v in self.local_roots if abs(u) <= tol or abs(v) <= tol)

    def torus_count(self, tol: float = 1e-9) -> int:
        return len(self) - self.zero_coordinate_count(tol)


class _Evaluator:
    """Vectorized evaluation of a sparse polynomial and its gradient."""

    def __init__(self, p: SparsePolynomial):
        self.a = np.array([e[0] for e in p.exponents], dtype=int)
        self.b = np.array([e[1] for e in p.exponents], dtype=int)
        self.c = p.coefficients
        self.cmax = float(np.max(np.abs(self.c))) if self.c.size else 0.0
        self.deg_a = int(self.a.max()) if self.a.size else 0
        self.deg_b = int(self.b.max()) if self.b.size else 0

    def _powers(self, z, deg):
        z = np.asarray(z, dtype=complex)
        P = np.ones(z.shape + (deg + 1,), dtype=complex)
        for k in range(1, deg + 1):
            P[..., k] = P[..., k - 1] * z
        return P

    def __call__(self, x, y, grad=False):
        Px = self._powers(x, self.deg_a)
        Py = self._powers(y, self.deg_b)
        mono = Px[..., self.a] * Py[..., self.b]
        val = mono @ self.c
        scale = np.abs(mono) @ np.abs(self.c)
        if not grad:
            return val, scale
        am = np.maximum(self.a - 1, 0)
        bm = np.maximum(self.b - 1, 0)
        dx = (Px[..., am] * Py[..., self.b]) @ (self.c * self.a)
        dy = (Px[..., self.a] * Py[..., bm]) @ (self.c * self.b)
        return val, scale, dx, dy

    def relative_residual(self, x, y):
        val, scale = self(x, y)
        return np.abs(val) / np.maximum(scale, self.cmax)


def _residual_norm(e1, e2, x, y):
    v1, _ = e1(x, y)
    v2, _ = e2(x, y)
    return np.hypot(np.abs(v1) / e1.cmax, np.abs(v2) / e2.cmax)


def _newton_batch(e1: _Evaluator, e2: _Evaluator, x, y, max_iter: int):
    """Damped Newton on (p1, p2) for arrays of starting points.

    A step is accepted only if it lowers the scaled residual norm, so the
    returned residual is never larger than at the start. Returns refined
    x, y and a boolean flag marking points where the Jacobian was singular.
    """
    x = np.array(x, dtype=complex)
    y = np.array(y, dtype=complex)
    flag = np.zeros(x.shape, dtype=bool)
    with np.errstate(all="ignore"):
        res = _residual_norm(e1, e2, x, y)
        active = np.isfinite(res) & (res > 0)
        for _ in range(max_iter):
            if not active.any():
                break
            xi, yi = x[active], y[active]
            f1, _, a11, a12 = e1(xi, yi, grad=True)
            f2, _, a21, a22 = e2(xi, yi, grad=True)
            det = a11 * a22 - a12 * a21
            jscale = np.maximum.reduce([abs(a11), abs(a12), abs(a21), abs(a22)]) ** 2
            singular = ~(np.abs(det) > 1e-14 * jscale) | ~np.isfinite(det)
            safe = np.where(singular, 1.0, det)
            dx = (a22 * f1 - a12 * f2) / safe
            dy = (a11 * f2 - a21 * f1) / safe
            r0 = res[active]
            best_x, best_y, best_r = xi.copy(), yi.copy(), r0.copy()
            improved = np.zeros(xi.shape, dtype=bool)
            t = 1.0
            for _ in range(6):
                tx, ty = xi - t * dx, yi - t * dy
                rt = _residual_norm(e1, e2, tx, ty)
                take = ~improved & ~singular & np.isfinite(rt) & (rt < r0)
                best_x[take], best_y[take], best_r[take] = tx[take], ty[take], rt[take]
                improved |= take
                if improved[~singular].all():
                    break
                t *= 0.5
            idx = np.flatnonzero(active)
            x[idx], y[idx], res[idx] = best_x, best_y, best_r
            flag[idx[singular]] = True
            still = improved & (best_r > 0)
            active[idx] = still
    return x, y, flag


def _newton_step_size(e1: _Evaluator, e2: _Evaluator, x, y):
    """Relative size of the next full Newton correction; inf where the Jacobian is singular."""
    with np.errstate(all="ignore"):
        f1, _, a11, a12 = e1(x, y, grad=True)
        f2, _, a21, a22 = e2(x, y, grad=True)
        det = a11 * a22 - a12 * a21
        dx = (a22 * f1 - a12 * f2) / det
        dy = (a11 * f2 - a21 * f1) / det
        step = np.maximum(np.abs(dx) / np.maximum(1.0, np.abs(x)),
                          np.abs(dy) / np.maximum(1.0, np.abs(y)))
        step = np.where((f1 == 0) & (f2 == 0), 0.0, step)
    return np.where(np.isfinite(step), step, np.inf)


def newton_polish(p1: SparsePolynomial, p2: SparsePolynomial, start, max_iter: int = 8):
    """Refine one root estimate (local coordinates).

    Returns ``((x, y), singular_flag)``; the residual never increases.
    """
    if max_iter < 1:
        raise DomainError("max_iter must be >= 1")
    x, y, flag = _newton_batch(_Evaluator(p1), _Evaluator(p2),
                               np.array([start[0]]), np.array([start[1]]), max_iter)
    return (complex(x[0]), complex(y[0])), bool(flag[0])


def _coeff_columns(p: SparsePolynomial, deg_y: int) -> np.ndarray:
    """C[i, k] = coefficient of x^i y^k, padded to ``deg_y`` in y."""
    C = np.zeros((p.deg_rx + 1, deg_y + 1))
    for (a, b), c in p.terms:
        C[a, b] = c
    return C


def sylvester_pencil(p1: SparsePolynomial, p2: SparsePolynomial) -> np.ndarray:
    """Stack ``S[k]`` of the Sylvester matrix (in x) coefficient of y^k.

    Column j corresponds to the monomial x^(K-1-j), K = deg_x p1 + deg_x p2.
    """
    m, n = p1.deg_rx, p2.deg_rx
    d = max(p1.deg_tx, p2.deg_tx)
    K = m + n
    S = np.zeros((d + 1, K, K))
    C1 = _coeff_columns(p1, d)
    C2 = _coeff_columns(p2, d)
    for r in range(n):
        shift = n - 1 - r
        for i in range(m + 1):
            S[:, r, K - 1 - (i + shift)] = C1[i]
    for r in range(m):
        shift = m - 1 - r
        for i in range(n + 1):
            S[:, n + r, K - 1 - (i + shift)] = C2[i]
    return S


def _balance_scales(p1: SparsePolynomial, p2: SparsePolynomial) -> tuple[float, float]:
    """Variable scales (sx, sy) flattening log-coefficient growth with degree.

    Fits log|c_ab| ~ k_i - a log sx - b log sy over both polynomials by least
    squares; substituting u = sx * x', v = sy * y' makes coefficients comparable.
    """
    rows, rhs = [], []
    for i, p in enumerate((p1, p2)):
        for (a, b), c in p.terms:
            rows.append([a, b, i == 0, i == 1])
            rhs.append(math.log(abs(c)))
    A = np.array(rows, dtype=float)
    if np.linalg.matrix_rank(A) < A.shape[1]:
        return 1.0, 1.0
    sol, *_ = np.linalg.lstsq(A, np.array(rhs), rcond=None)
    sx, sy = math.exp(-sol[0]), math.exp(-sol[1])
    # scales are powers of two so substitution is exact
    sx = 2.0 ** round(math.log2(sx))
    sy = 2.0 ** round(math.log2(sy))
    clamp = lambda s: min(max(s, 2.0 ** -20), 2.0 ** 20)
    return clamp(sx), clamp(sy)


def _substitute(p: SparsePolynomial, sx: float, sy: float) -> SparsePolynomial:
    """p(sx * x', sy * y') normalized to unit max coefficient."""
    terms = {(a, b): c * sx ** a * sy ** b for (a, b), c in p.terms}
    peak = max(abs(c) for c in terms.values())
    return SparsePolynomial.from_dict({e: c / peak for e, c in terms.items()})


def _univariate_roots(coeffs_low_to_high: np.ndarray) -> np.ndarray:
    c = np.trim_zeros(np.asarray(coeffs_low_to_high, dtype=complex), "b")
    if c.size <= 1:
        return np.zeros(0, dtype=complex)
    return np.roots(c[::-1])


def _is_constant(p: SparsePolynomial) -> bool:
    return p.deg_rx == 0 and p.deg_tx == 0


def _candidates_univariate(q1: SparsePolynomial, q2: SparsePolynomial):
    """Candidates when one polynomial involves only y (deg_x == 0)."""
    if q1.deg_rx != 0:
        q1, q2 = q2, q1
    ys = _univariate_roots(_coeff_columns(q1, q1.deg_tx)[0])
    C = _coeff_columns(q2, q2.deg_tx)
    xs_all, ys_all = [], []
    for y0 in ys:
        coeffs_x = C @ (y0 ** np.arange(C.shape[1]))
        if np.max(np.abs(coeffs_x)) <= 1e-12 * max(1.0, np.max(np.abs(C))):
            raise NonIsolatedRootsError()
        for x0 in _univariate_roots(coeffs_x):
            xs_all.append(x0)
            ys_all.append(y0)
    return np.array(xs_all, dtype=complex), np.array(ys_all, dtype=complex)


def _check_not_identically_singular(S: np.ndarray, rng: np.random.Generator):
    """Resultant vanishing at random points means a shared factor."""
    K = S.shape[1]
    for _ in range(2):
        y = complex(*rng.standard_normal(2))
        M = np.tensordot(y ** np.arange(S.shape[0]), S, axes=1)
        sv = np.linalg.svd(M, compute_uv=False)
        if sv[-1] > 1e-14 * K * max(sv[0], 1e-300):
            return
    raise NonIsolatedRootsError()


def linearize(S: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """First companion pencil (A, B) of ``sum_k S[k] y^k``.

    Eigenvectors have the block form (y^(d-1) v, ..., y v, v).
    """
    d, K = S.shape[0] - 1, S.shape[1]
    n = K * d
    A = np.zeros((n, n))
    B = np.eye(n)
    B[:K, :K] = S[d]
    for j in range(d):
        A[:K, j * K:(j + 1) * K] = -S[d - 1 - j]
    if d > 1:
        A[K:, :-K] = np.eye(n - K)
    return A, B


def _candidates_resultant(q1: SparsePolynomial, q2: SparsePolynomial, rng):
    S = sylvester_pencil(q1, q2)
    d, K = S.shape[0] - 1, S.shape[1]
    # unit max-magnitude rows; row scaling leaves the null vectors unchanged
    row_max = np.max(np.abs(S), axis=(0, 2))
    if np.any(row_max == 0):
        raise DegenerateSystemError()
    S = S / row_max[None, :, None]
    _check_not_identically_singular(S, rng)
    if d == 0:
        # y absent from both: the resultant is a nonzero constant, no common roots
        return np.zeros(0, complex), np.zeros(0, complex)
    A, B = linearize(S)
    try:
        w, V = scipy.linalg.eig(A, B, homogeneous_eigvals=True, right=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise DegenerateSystemError() from exc
    alpha, beta = w
    tiny = 1e-13 * max(np.linalg.norm(A, 1), np.linalg.norm(B, 1))
    if np.any((np.abs(alpha) < tiny) & (np.abs(beta) < tiny)):
        raise DegenerateSystemError()
    finite = np.flatnonzero(np.abs(beta) > np.abs(alpha) / _MAX_MODULUS)
    y_eig = alpha[finite] / beta[finite]

    # x from the null-vector block: consecutive entries have ratio x
    blocks = V[:, finite].T.reshape(len(finite), d, K)
    pick = np.argmax(np.linalg.norm(blocks, axis=2), axis=1)
    v = blocks[np.arange(len(finite)), pick]
    den = np.einsum("ij,ij->i", v[:, 1:].conj(), v[:, 1:]).real
    ok = den > 0
    x_eig = np.einsum("ij,ij->i", v[ok, 1:].conj(), v[ok, :-1]) / den[ok]
    xs, ys = [x_eig], [y_eig[ok]]

    # roots of the first polynomial on each slice catch x values that share a y
    C = _coeff_columns(q1, q1.deg_tx)
    ev2 = _Evaluator(q2)
    slice_x, slice_y = [], []
    for y0 in y_eig:
        for x1 in _univariate_roots(C @ (y0 ** np.arange(C.shape[1]))):
            if abs(x1) < _MAX_MODULUS:
                slice_x.append(x1)
                slice_y.append(y0)
    if slice_x:
        sx_, sy_ = np.array(slice_x), np.array(slice_y)
        with np.errstate(all="ignore"):
            near = ev2.relative_residual(sx_, sy_) < 1e-4
        xs.append(sx_[near])
        ys.append(sy_[near])
    return np.concatenate(xs), np.concatenate(ys)


def _cluster(xs, ys, res, tol):
    """Indices of representatives, best residual first, at mutual distance > tol."""
    order = np.argsort(res, kind="stable")
    kept: list[int] = []
    for i in order:
        if kept:
            dist2 = np.abs(xs[kept] - xs[i]) ** 2 + np.abs(ys[kept] - ys[i]) ** 2
            if np.any(dist2 <= tol * tol):
                continue
        kept.append(int(i))
    return kept


def _monomial_factor(p: SparsePolynomial) -> tuple[int, int]:
    return (min(a for (a, _), _ in p.terms), min(b for (_, b), _ in p.terms))


def _divide_monomial(p: SparsePolynomial, a0: int, b0: int) -> SparsePolynomial:
    return SparsePolynomial.from_dict({(a - a0, b - b0): c for (a, b), c in p.terms}, p.center)


def _solve_reduced(p1: SparsePolynomial, p2: SparsePolynomial, opts: SolverOptions):
    """Polished candidate roots (local coordinates) of a system with no monomial factors."""
    empty = np.zeros(0, complex)
    if _is_constant(p1) or _is_constant(p2):
        return empty, empty, np.zeros(0, bool)
    sx, sy = _balance_scales(p1, p2) if opts.balance else (1.0, 1.0)
    q1 = _substitute(p1, sx, sy)
    q2 = _substitute(p2, sx, sy)
    rng = np.random.default_rng(opts.seed)

    if q1.deg_rx == 0 or q2.deg_rx == 0:
        xs, ys = _candidates_univariate(q1, q2)
    elif q1.deg_tx == 0 or q2.deg_tx == 0:
        ys, xs = _candidates_univariate(q1.swapped(), q2.swapped())
    else:
        xs, ys = _candidates_resultant(q1, q2, rng)

    keep = (np.isfinite(xs) & np.isfinite(ys)
            & (np.abs(xs) < _MAX_MODULUS) & (np.abs(ys) < _MAX_MODULUS))
    xs, ys = xs[keep], ys[keep]
    e1, e2 = _Evaluator(q1), _Evaluator(q2)
    xs, ys, flags = _newton_batch(e1, e2, xs, ys, opts.newton_iters)
    # near-infinity ghosts have small backward error but Newton keeps moving them
    converged = _newton_step_size(e1, e2, xs, ys) <= opts.step_tol
    u, v = xs * sx, ys * sy
    with np.errstate(all="ignore"):
        ok = ((_Evaluator(p1).relative_residual(u, v) <= opts.residual_tol)
              & (_Evaluator(p2).relative_residual(u, v) <= opts.residual_tol))
    good = converged & ok
    return u[good], v[good], flags[good]


def _axis_roots(m: tuple[int, int], r: SparsePolynomial):
    """Common zeros of a monomial u^a v^b and a polynomial r without monomial factor."""
    us, vs = [], []
    a, b = m
    C = r.dense()
    if a > 0:
        # u = 0: r(0, v) is a nonzero polynomial in v
        for v0 in _univariate_roots(C[0, :]):
            us.append(0j)
            vs.append(v0)
    if b > 0:
        for u0 in _univariate_roots(C[:, 0]):
            us.append(u0)
            vs.append(0j)
    return us, vs


def solve_system(p1: SparsePolynomial, p2: SparsePolynomial,
                 opts: SolverOptions | None = None) -> RootSet:
    """All isolated complex common roots of ``p1 = p2 = 0``.

    Polynomials are in local coordinates about their shared center; returned
    roots are shifted back to global angles.

    Monomial factors ``u^a v^b`` are split off first. If both polynomials
    vanish on the same coordinate axis the system is not zero-dimensional:
    with ``opts.axis_components == "raise"`` this is an error, with
    ``"drop"`` the axis line is discarded (counted in
    ``RootSet.dropped_components``) and the isolated roots are returned.
    """
    opts = opts or SolverOptions()
    if p1.is_zero() or p2.is_zero():
        raise DomainError("solve_system needs two nonzero polynomials")
    if p1.center != p2.center:
        raise DomainError("polynomials must share a center")
    center = p1.center

    m1, m2 = _monomial_factor(p1), _monomial_factor(p2)
    r1, r2 = _divide_monomial(p1, *m1), _divide_monomial(p2, *m2)
    line_rx = m1[0] > 0 and m2[0] > 0      # u = 0 common
    line_tx = m1[1] > 0 and m2[1] > 0      # v = 0 common
    if (line_rx or line_tx) and opts.axis_components == "raise":
        raise NonIsolatedRootsError()

    u, v, flags = _solve_reduced(r1, r2, opts)
    au, av = [], []
    for m, r in ((m1, r2), (m2, r1)):
        x, y = _axis_roots(m, r)
        au += x
        av += y
    if (m1[0] > 0 and m2[1] > 0) or (m1[1] > 0 and m2[0] > 0):
        au.append(0j)
        av.append(0j)
    u = np.concatenate([u, np.array(au, dtype=complex)])
    v = np.concatenate([v, np.array(av, dtype=complex)])
    flags = np.concatenate([flags, np.zeros(len(au), bool)])

    # points on a dropped axis line belong to that component, not isolated roots
    off_line = np.ones(u.shape, bool)
    if line_rx:
        off_line &= np.abs(u) > opts.cluster_tol
    if line_tx:
        off_line &= np.abs(v) > opts.cluster_tol
    u, v, flags = u[off_line], v[off_line], flags[off_line]

    with np.errstate(all="ignore"):
        res1 = _Evaluator(p1).relative_residual(u, v)
        res2 = _Evaluator(p2).relative_residual(u, v)
    good = (res1 <= opts.residual_tol) & (res2 <= opts.residual_tol)
    u, v, res1, res2, flags = u[good], v[good], res1[good], res2[good], flags[good]
    kept = _cluster(u, v, np.maximum(res1, res2), opts.cluster_tol)

    roots = [(complex(u[i]) + center[0], complex(v[i]) + center[1]) for i in kept]
    resid = [(float(res1[i]), float(res2[i])) for i in kept]
    order = sorted(range(len(roots)), key=lambda i: (roots[i][1].real, roots[i][0].real,
                                                     roots[i][1].imag, roots[i][0].imag))
    return RootSet([roots[i] for i in order], [resid[i] for i in order], center,
                   flagged=int(np.count_nonzero(flags[kept])) if kept else 0,
                   dropped_components=int(line_rx) + int(line_tx))


def filter_real_domain(rs: RootSet, imag_tol: float = 1e-6, wrap: bool = True,
                       domain: tuple[float, float] = (0.0, TWO_PI)) -> list[BeamAngles]:
    """Real roots inside ``domain`` squared.

    With ``wrap`` the real parts are first reduced modulo 2pi, which is sound
    because the rate is 2pi-periodic in both angles.
    """
    if not imag_tol > 0:
        raise DomainError("imag_tol must be positive")
    lo, hi = domain
    out = []
    for r, t in rs.roots:
        if abs(r.imag) > imag_tol or abs(t.imag) > imag_tol:
            continue
        a, b = r.real, t.real
        if wrap:
            a, b = a % TWO_PI, b % TWO_PI
        if lo <= a <= hi and lo <= b <= hi:
            out.append(BeamAngles(a, b))
    return out
