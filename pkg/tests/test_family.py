import numpy as np
import pytest
import scipy.linalg

from conftest import setup_target
from invariantctl.family import (
    DegenerateBoundary, DomainViolation, ZeroHamiltonian, boundary_invariant, build_family,
    c3_profile, compute_vmax, constraint_matrix, cubic_solution, eval_family, eval_family_grid,
    extremal_weights, nullspace_basis,
)
from invariantctl.planner import ReferenceAxis, Segment
from invariantctl.presets import TARGET_NAMES

W = 2 * np.pi * 0.4

# published per-segment bounds v_max / c
PUBLISHED_VMAX = {
    "i": [0.1655], "ii": [0.6352], "iii": [0.1564, 0.3518], "iv": [0.1951, 0.2761],
    "v": [0.1832, 0.4800], "vi": [0.2985, 0.3481, 0.5739],
}

# reference null basis (degree 18) from a divide-and-conquer SVD, columns 1 and 15
REF_U0 = np.array([
    0.0, -3.8692011053684002e-16, -2.1146347867951654e-01, -3.2470899652447821e-01,
    9.0659924702138661e-01, -8.4475193265440091e-02, -7.5549633552266779e-02,
    -6.6624073839093564e-02, -5.7698514125920232e-02, -4.8772954412746913e-02,
    -3.9847394699573616e-02, -3.0921834986400162e-02, -2.1996275273227051e-02,
    -1.3070715560053769e-02, -4.1451558468803872e-03, 4.7804038662927440e-03,
    1.3705963579465861e-02, 2.2631523292639507e-02, 3.1557083005812912e-02])
REF_U14 = np.array([
    0.0, -7.2025017806303743e-16, 4.3497448331640293e-01, -1.2702954394840923e-01,
    1.5340320752291853e-02, 6.9222788893590211e-04, -1.3955864974419965e-02,
    -2.8603957837775938e-02, -4.3252050701131813e-02, -5.7900143564487722e-02,
    -7.2548236427843638e-02, -8.7196329291199443e-02, -1.0184442215455544e-01,
    -1.1649251501791139e-01, -1.3114060788126722e-01, -1.4578870074462325e-01,
    -1.6043679360797922e-01, -1.7508488647133491e-01, 8.1026702066530920e-01])


def test_boundary_invariant_examples():
    assert boundary_invariant([0, 0, -W], ReferenceAxis.Z) == (0.0, 0.0)
    f1, f2 = boundary_invariant([W / 2, W / np.sqrt(3), -W], ReferenceAxis.Z)
    r = np.sqrt(1 / 4 + 1 / 3 + 1)
    assert f1 == pytest.approx(0.5 / r) and f2 == pytest.approx(1 / np.sqrt(3) / r)
    assert (f1, f2) == pytest.approx((0.3974, 0.4589), abs=1e-4)
    # X reference reads (y, z) as the local (1, 2) pair
    assert boundary_invariant([3, 0, 4], ReferenceAxis.X) == pytest.approx((0, 0.8))
    with pytest.raises(ZeroHamiltonian):
        boundary_invariant([0, 0, 0], ReferenceAxis.Z)


def test_boundary_invariant_homogeneous(rng):
    for _ in range(50):
        h = rng.normal(size=3)
        lam = rng.uniform(0.01, 100)
        for ax in ReferenceAxis:
            assert boundary_invariant(lam * h, ax, 2.0) == pytest.approx(boundary_invariant(h, ax, 2.0))


def test_constraint_matrix():
    assert np.array_equal(constraint_matrix(3),
                          [[1, 0, 0, 0], [0, 1, 0, 0], [1, 1, 1, 1], [0, 1, 2, 3]])
    for n, nullity in [(4, 1), (18, 15)]:
        a = constraint_matrix(n)
        assert np.linalg.matrix_rank(a) == 4 and a.shape[1] - 4 == nullity
    with pytest.raises(ValueError):
        constraint_matrix(2)


def test_cubic_solution():
    assert np.array_equal(cubic_solution(0, 1), [0, 0, 3, -2])
    assert np.array_equal(cubic_solution(0.3, 0.3), [0.3, 0, 0, 0])
    x = cubic_solution(0.2, -0.6)
    assert np.polynomial.polynomial.polyval(0.5, x) == pytest.approx(-0.2)
    a = constraint_matrix(3)
    assert np.allclose(a @ x, [0.2, 0, -0.6, 0])


def test_nullspace_small_degrees():
    assert nullspace_basis(constraint_matrix(3)).shape == (4, 0)
    (u,) = nullspace_basis(constraint_matrix(4)).T
    quartic = np.array([0, 0, 1, -2, 1]) / np.sqrt(6)  # s^2 (1 - s)^2
    assert abs(abs(u @ quartic) - 1) < 1e-12


def test_nullspace_degree_18():
    a = constraint_matrix(18)
    u = nullspace_basis(a)
    assert u.shape == (19, 15)
    assert np.max(np.abs(u.T @ u - np.eye(15))) < 1e-12
    assert np.max(np.abs(a @ u)) < 1e-10
    ref = scipy.linalg.null_space(a)
    assert np.allclose(u @ u.T, ref @ ref.T, atol=1e-12)
    assert np.max(np.abs(u[:, 0] - REF_U0)) < 1e-12
    assert np.max(np.abs(u[:, 14] - REF_U14)) < 1e-12


@pytest.mark.parametrize("name", TARGET_NAMES)
def test_vmax_published(name):
    _, fams, _ = setup_target(name)
    got = [f.v_max / f.c for f in fams]
    assert got == pytest.approx(PUBLISHED_VMAX[name], rel=1e-2)


def _vmax_bisection(fam, points):
    # worst case per grid point: |e1| + v S and |e2| + v S; find v where the sum of squares hits c^2
    x = np.vander(np.linspace(0, 1, points), fam.degree + 1, increasing=True)
    e1, e2 = np.abs(x @ fam.m1[:, 0]), np.abs(x @ fam.m2[:, 0])
    s = np.abs(x @ fam.basis).sum(axis=1)
    lo, hi = 0.0, 10.0
    for _ in range(200):
        mid = (lo + hi) / 2
        if np.all((e1 + mid * s) ** 2 + (e2 + mid * s) ** 2 < 1.0):
            lo = mid
        else:
            hi = mid
    return lo


@pytest.mark.parametrize("convention", ["published", "table"])
def test_vmax_matches_bisection_oracle(convention):
    for name in TARGET_NAMES:
        for fam in setup_target(name, convention)[1]:
            assert fam.v_max == pytest.approx(_vmax_bisection(fam, 2001), rel=1e-9)


def test_vmax_grid_convergence():
    for name in TARGET_NAMES:
        for fam in setup_target(name)[1]:
            fine = compute_vmax(fam.f_start, fam.f_end, fam.basis, 1.0, 4001)
            assert abs(fine - fam.v_max) / fam.v_max < 1e-4


def test_vmax_scales_with_c():
    seg = setup_target("iv")[0].segments[0]
    f1 = build_family(seg, c=1.0)
    f3 = build_family(seg, c=3.0)
    assert f3.v_max == pytest.approx(3 * f1.v_max)


def test_vmax_stationary_and_degenerate():
    seg = Segment(0, 1, (0.2, 0.1, -1.0), (0.2, 0.1, -1.0), ReferenceAxis.Z, -1.0)
    fam = build_family(seg)
    assert 0 < fam.v_max < np.inf
    assert build_family(seg, degree=3).v_max == np.inf
    with pytest.raises(DegenerateBoundary):
        compute_vmax((1.0, 0.0), (0.0, 1.0), fam.basis)


@pytest.mark.parametrize("convention", ["published", "table"])
def test_c3_positive(convention):
    for name in TARGET_NAMES:
        for fam in setup_target(name, convention)[1]:
            c3 = c3_profile(fam.f_start, fam.f_end, fam.c, 10_000)
            assert np.min(c3) > 0


def test_quadratic_root_signs():
    for name in TARGET_NAMES:
        for fam in setup_target(name)[1]:
            x = np.vander(np.linspace(0, 1, 2001), 19, increasing=True)[1:-1]
            e1, e2 = x @ fam.m1[:, 0], x @ fam.m2[:, 0]
            s = np.abs(x @ fam.basis).sum(axis=1)
            c1 = 2 * s**2
            c2 = s * (np.abs(e1) + np.abs(e2))
            c3 = 1 - e1**2 - e2**2
            for k in range(0, len(s), 97):
                roots = np.roots([-c1[k], -2 * c2[k], c3[k]])
                assert np.all(np.isreal(roots))
                assert np.sum(roots.real > 0) == 1 and np.sum(roots.real < 0) == 1


def test_eval_family_theta_zero_is_smoothstep():
    plan, fams, _ = setup_target("iii")
    fam = fams[0]
    m = fam.n_free
    s = np.linspace(0, 1, 11)
    f1, f2, f3, d1, d2 = eval_family(fam, np.zeros(m), np.zeros(m), s)
    step = 3 * s**2 - 2 * s**3
    assert np.allclose(f1, fam.f_start[0] + (fam.f_end[0] - fam.f_start[0]) * step)
    assert np.allclose(d2, (fam.f_end[1] - fam.f_start[1]) * (6 * s - 6 * s**2))


def test_eval_family_constraints(rng):
    for name in TARGET_NAMES:
        for fam in setup_target(name)[1]:
            a = constraint_matrix(fam.degree)
            for _ in range(1000 // 12):
                v1, v2 = rng.uniform(-1, 1, (2, fam.n_free)) * fam.bound
                p1, p2 = fam.coefficients(v1, v2)
                assert np.max(np.abs(a @ p1 - [fam.f_start[0], 0, fam.f_end[0], 0])) < 1e-10
                assert np.max(np.abs(a @ p2 - [fam.f_start[1], 0, fam.f_end[1], 0])) < 1e-10
                f1, f2, f3, d1, d2 = eval_family(fam, v1, v2, np.array([0.0, 1.0]))
                assert np.allclose(d1, 0, atol=1e-10) and np.allclose(d2, 0, atol=1e-10)
                f1, f2, f3, _, _ = eval_family_grid(fam, v1, v2, 2001)
                assert np.max(np.abs(f1**2 + f2**2 + f3**2 - fam.c**2)) < 1e-12
                assert np.min(np.abs(f3)) > 0
                assert np.all(np.sign(f3) == fam.f3_sign)


def test_eval_family_grid_matches_pointwise(rng):
    fam = setup_target("vi")[1][1]
    v1, v2 = rng.uniform(-1, 1, (2, fam.n_free)) * fam.bound
    a = eval_family_grid(fam, v1, v2, 101)
    b = eval_family(fam, v1, v2, np.linspace(0, 1, 101))
    for x, y in zip(a, b):
        assert np.allclose(x, y, atol=1e-12)


def test_extremal_attains_bound():
    for name in ("i", "iv", "vi"):
        for fam in setup_target(name)[1]:
            x = np.vander(np.linspace(0, 1, 2001), fam.degree + 1, increasing=True)
            e1, e2 = x @ fam.m1[:, 0], x @ fam.m2[:, 0]
            s = np.abs(x @ fam.basis).sum(axis=1)
            with np.errstate(divide="ignore", invalid="ignore"):
                root = (1 - e1**2 - e2**2) / (s * (np.abs(e1) + np.abs(e2))
                                              + np.sqrt(s**2 * (np.abs(e1) + np.abs(e2))**2
                                                        + 2 * s**2 * (1 - e1**2 - e2**2)))
            k = int(np.nanargmin(root))
            sstar = k / 2000
            v1, v2 = extremal_weights(fam, sstar)
            f1, f2, _, _, _ = eval_family(fam, v1 * 0.999999, v2 * 0.999999, np.array([sstar]))
            assert abs(f1[0]) == pytest.approx(abs(e1[k]) + fam.v_max * s[k], rel=1e-5)
            assert f1[0] ** 2 + f2[0] ** 2 == pytest.approx(1.0, abs=1e-5)
            with pytest.raises(DomainViolation):
                eval_family(fam, 1.001 * v1, 1.001 * v2, np.array([sstar]))


def test_weights_split():
    fam = setup_target("ii")[1][0]
    theta = np.linspace(-0.9, 0.9, 30)
    v1, v2 = fam.weights(theta)
    assert np.allclose(v1, theta[:15] * fam.v_max) and np.allclose(v2, theta[15:] * fam.v_max)
    with pytest.raises(ValueError):
        fam.weights(np.zeros(29))
