import math
import time
from pathlib import Path

import numpy as np
import pytest
from scipy.optimize import root

from polybeam.errors import DegenerateSystemError, DomainError, NonIsolatedRootsError
from polybeam.fixtures import planted_system, read_fixture, write_fixture
from polybeam.model import BeamAngles, ChannelMatrix, RateParams
from polybeam.polytope import root_bound_eta
from polybeam.series import rate_series, series_partial
from polybeam.solver import (RootSet, SolverOptions, filter_real_domain, linearize,
                             newton_polish, solve_system, sylvester_pencil)
from polybeam.truncate import SparsePolynomial as SP
from polybeam.truncate import threshold_select

FIXTURES = Path(__file__).parent / "fixtures"
DROP = SolverOptions(axis_components="drop")


def dense_random(rng, d):
    return SP.from_dict({(a, b): rng.standard_normal() for a in range(d + 1) for b in range(d + 1 - a)})


def match(found, expected, tol):
    """Every expected root has a found root within ``tol`` (max-norm in C^2)."""
    return all(any(max(abs(x - u), abs(y - v)) <= tol for u, v in found) for x, y in expected)


@pytest.mark.parametrize("name", sorted(p.name for p in FIXTURES.glob("*.txt")))
def test_fixture_systems(name):
    p1, p2, expected = read_fixture(FIXTURES / name)
    rs = solve_system(p1, p2)
    assert len(rs) == len(expected)
    assert match(rs.roots, expected, 1e-8)
    assert all(max(r) <= 1e-8 for r in rs.residuals)


def test_fixture_round_trip(tmp_path, rng):
    p1, p2, roots = planted_system(rng, 3)
    write_fixture(tmp_path / "f.txt", p1, p2, roots, "round trip")
    q1, q2, back = read_fixture(tmp_path / "f.txt")
    assert (q1, q2) == (p1, p2)
    assert back == roots


def test_parabola_line_roots():
    rs = solve_system(SP.from_dict({(2, 0): 1.0, (0, 0): -1.0}), SP.from_dict({(0, 1): 1.0, (1, 0): -1.0}))
    np.testing.assert_allclose(np.array(rs.roots), [[-1, -1], [1, 1]], atol=1e-12)


def test_planted_recall():
    rng = np.random.default_rng(1)
    for _ in range(100):
        n = int(rng.integers(1, 6))
        p1, p2, planted = planted_system(rng, n)
        rs = solve_system(p1, p2)
        assert match(rs.roots, planted, 1e-8)
        assert len(rs) == n


def test_dense_random_completeness():
    rng = np.random.default_rng(0)
    exact, t0 = 0, time.perf_counter()
    for _ in range(200):
        d1, d2 = (int(d) for d in rng.integers(1, 5, 2))
        p1, p2 = dense_random(rng, d1), dense_random(rng, d2)
        rs = solve_system(p1, p2)
        exact += len(rs) == d1 * d2
        assert all(max(r) <= 1e-8 for r in rs.residuals)
        assert rs.torus_count() <= root_bound_eta(p1.exponents, p2.exponents)
    assert exact >= 190
    assert time.perf_counter() - t0 < 30


def test_swap_symmetry(rng):
    for _ in range(10):
        p1, p2 = dense_random(rng, 3), dense_random(rng, 2)
        a = solve_system(p1, p2)
        b = solve_system(p1.swapped(), p2.swapped())
        assert len(a) == len(b)
        swapped_back = [(t, r) for r, t in b.roots]
        assert match(a.roots, swapped_back, 1e-8) and match(swapped_back, a.roots, 1e-8)


def test_deterministic_and_sorted(rng):
    p1, p2 = dense_random(rng, 4), dense_random(rng, 3)
    a, b = solve_system(p1, p2), solve_system(p1, p2)
    assert a.roots == b.roots and a.residuals == b.residuals
    keys = [(t.real, r.real) for r, t in a.roots]
    assert keys == sorted(keys)


def test_center_shift():
    c = BeamAngles(1.0, 2.0)
    rs = solve_system(SP.from_dict({(2, 0): 1.0, (0, 0): -1.0}, c), SP.from_dict({(0, 1): 1.0, (1, 0): -1.0}, c))
    np.testing.assert_allclose(np.array(rs.roots), [[0, 1], [2, 3]], atol=1e-12)
    np.testing.assert_allclose(np.array(rs.local_roots), [[-1, -1], [1, 1]], atol=1e-12)


def test_errors():
    p = SP.from_dict({(1, 0): 1.0, (0, 0): 1.0})
    with pytest.raises(DomainError):
        solve_system(p, SP(()))
    with pytest.raises(DomainError):
        solve_system(p, SP.from_dict({(0, 1): 1.0}, BeamAngles(1.0, 0.0)))
    # common factor (x - y): a positive-dimensional component
    with pytest.raises(NonIsolatedRootsError, match="non-isolated roots"):
        solve_system(SP.from_dict({(2, 0): 1.0, (1, 1): -1.0, (1, 0): 1.0, (0, 1): -1.0}),
                     SP.from_dict({(1, 1): 1.0, (0, 2): -1.0, (1, 0): -2.0, (0, 1): 2.0}))


def test_shared_axis_line_raise_or_drop():
    # p1 = u(u - 1/2), p2 = u(v^2 - 1) share the line u = 0; isolated roots (1/2, +-1)
    p1 = SP.from_dict({(2, 0): 1.0, (1, 0): -0.5})
    p2 = SP.from_dict({(1, 2): 1.0, (1, 0): -1.0})
    with pytest.raises(NonIsolatedRootsError):
        solve_system(p1, p2)
    rs = solve_system(p1, p2, DROP)
    assert rs.dropped_components == 1
    np.testing.assert_allclose(np.array(rs.roots), [[0.5, -1], [0.5, 1]], atol=1e-12)


def test_degenerate_error_type():
    assert issubclass(DegenerateSystemError, RuntimeError)
    assert str(DegenerateSystemError()) == "degenerate system"


def test_pencil_linearization_eigenvalues():
    # p1 = x - y, p2 = x + y - 2: det S(y) vanishes only at y = 1
    p1 = SP.from_dict({(1, 0): 1.0, (0, 1): -1.0})
    p2 = SP.from_dict({(1, 0): 1.0, (0, 1): 1.0, (0, 0): -2.0})
    S = sylvester_pencil(p1, p2)
    A, B = linearize(S)
    from scipy.linalg import eigvals
    ev = eigvals(A, B)
    finite = ev[np.isfinite(ev)]
    np.testing.assert_allclose(finite, [1.0], atol=1e-12)


def test_newton_polish_exact_root_unchanged():
    p1 = SP.from_dict({(2, 0): 1.0, (0, 0): -1.0})
    p2 = SP.from_dict({(0, 1): 1.0, (1, 0): -1.0})
    (x, y), flag = newton_polish(p1, p2, (1.0, 1.0))
    assert (x, y) == (1, 1) and not flag


def test_newton_polish_converges_quadratically():
    p1 = SP.from_dict({(2, 0): 1.0, (0, 2): 1.0, (0, 0): -1.0})
    p2 = SP.from_dict({(1, 0): 1.0, (0, 1): -1.0})
    h = 1 / math.sqrt(2)
    (x, y), _ = newton_polish(p1, p2, (h + 1e-3, h - 1e-3), max_iter=6)
    assert max(abs(p1(x, y)), abs(p2(x, y))) < 1e-12


def test_newton_polish_singular_jacobian_flagged():
    # at the origin the Jacobian of (x^2 + y^2 - 1, x*y) is zero
    p1 = SP.from_dict({(2, 0): 1.0, (0, 2): 1.0, (0, 0): -1.0})
    p2 = SP.from_dict({(1, 1): 1.0})
    (x, y), flag = newton_polish(p1, p2, (0.0, 0.0))
    assert flag and (x, y) == (0, 0)
    with pytest.raises(DomainError):
        newton_polish(p1, p2, (0.0, 0.0), max_iter=0)


def test_newton_polish_planted_basins():
    rng = np.random.default_rng(5)
    hits = total = 0
    for _ in range(40):
        p1, p2, planted = planted_system(rng, int(rng.integers(1, 5)))
        for r in planted:
            start = (r[0] + 1e-4 * rng.standard_normal(), r[1] + 1e-4 * rng.standard_normal())
            (x, y), _ = newton_polish(p1, p2, start)
            nearest = min(planted, key=lambda q: abs(q[0] - start[0]) + abs(q[1] - start[1]))
            hits += max(abs(x - nearest[0]), abs(y - nearest[1])) < 1e-8
            total += 1
    assert hits >= 0.99 * total


def test_filter_real_domain_examples():
    rs = RootSet(roots=[(1 + 1e-12j, 2 + 0j), (1 + 0.5j, 2 + 0j), (-0.5 + 0j, 7.0 + 0j)],
                 residuals=[(0, 0)] * 3)
    got = filter_real_domain(rs, 1e-6)
    assert got[:1] == [BeamAngles(1.0, 2.0)]
    np.testing.assert_allclose(got[1], [2 * math.pi - 0.5, 7.0 - 2 * math.pi])
    assert filter_real_domain(rs, 1e-6, wrap=False) == [BeamAngles(1.0, 2.0)]
    with pytest.raises(DomainError):
        filter_real_domain(rs, 0.0)


# ---- seeded-channel checks at thresholds (0.7, 0.7), degree 12 -------------------------

def truncated_pair(center, eps=0.7, degree_cap=12):
    r = rate_series(ChannelMatrix.random(2, 2, 42), RateParams(), center, degree_cap)
    return tuple(threshold_select(series_partial(r, v), eps) for v in ("rx", "tx"))


def reduce_monomial(p):
    a0 = min(a for a, _ in p.exponents)
    b0 = min(b for _, b in p.exponents)
    return SP.from_dict({(a - a0, b - b0): c for (a, b), c in p.terms})


SEEDED_CENTERS = [(math.pi / 2, 3 * math.pi / 2), (3 * math.pi / 2, 0.0),
                  (3 * math.pi / 2, 3 * math.pi / 2), (7 * math.pi / 4, math.pi / 2),
                  (math.pi / 2, math.pi / 4)]


@pytest.mark.parametrize("center", SEEDED_CENTERS)
def test_real_roots_match_grid_seeded_oracle(center):
    """Torus roots in [0, 2pi]^2 agree with grid-started hybrid Powell root finding."""
    c = BeamAngles(*center)
    p1, p2 = truncated_pair(c)
    rs = solve_system(p1, p2, DROP)
    got = [x for x in filter_real_domain(rs, 1e-6)
           if abs(x[0] - c[0]) > 1e-6 and abs(x[1] - c[1]) > 1e-6]

    # torus roots are unchanged by dividing out monomial factors
    q1, q2 = reduce_monomial(p1), reduce_monomial(p2)
    scale = max(q1.max_abs(), q2.max_abs())

    def F(z):
        return [q1(z[0] - c[0], z[1] - c[1]), q2(z[0] - c[0], z[1] - c[1])]

    found = []
    grid = np.linspace(0, 2 * math.pi, 16)
    for a in grid:
        for b in grid:
            sol = root(F, [a, b], method="hybr", options={"xtol": 1e-13})
            z = sol.x
            if not (0 <= z[0] <= 2 * math.pi and 0 <= z[1] <= 2 * math.pi):
                continue
            if max(map(abs, F(z))) > 1e-8 * scale or min(abs(z[0] - c[0]), abs(z[1] - c[1])) < 1e-6:
                continue
            if all(np.hypot(*(z - f)) > 1e-6 for f in found):
                found.append(z)
    assert len(got) == len(found)
    for z in found:
        assert min(math.hypot(z[0] - g[0], z[1] - g[1]) for g in got) < 1e-6


def test_eta_matches_generic_coefficient_root_count():
    rng = np.random.default_rng(3)
    for center in SEEDED_CENTERS:
        p1, p2 = truncated_pair(BeamAngles(*center))
        eta = root_bound_eta(p1.exponents, p2.exponents)
        q1 = SP.from_dict({e: rng.standard_normal() for e in p1.exponents})
        q2 = SP.from_dict({e: rng.standard_normal() for e in p2.exponents})
        rs = solve_system(q1, q2, DROP)
        assert rs.torus_count() == eta
        # the actual (non-generic) coefficients can only lose roots
        assert solve_system(p1, p2, DROP).torus_count() <= eta
