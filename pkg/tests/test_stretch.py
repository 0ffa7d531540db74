import numpy as np
import pytest

from helpers import random_orthogonal, random_unit
from oracles import fd_jacobian
from qcstretch import (
    DegeneratePointError,
    NonFiniteError,
    StretchParams,
    SymMatrix,
    ValidationError,
    determinant,
    eigen_sym,
    eval_stretch,
    eval_stretch_many,
    jac_stretch,
    jac_stretch_eigenvalues,
    operator_norm,
)


@pytest.fixture
def origin_half():
    return StretchParams(np.zeros(3), 2.0)


class TestEvalStretch:
    def test_unit_radius_fixed(self, origin_half):
        out = eval_stretch(origin_half, [1.0, 0.0, 0.0])
        assert np.array_equal(out, [1.0, 0.0, 0.0])

    def test_quarter_maps_to_half(self, origin_half):
        out = eval_stretch(origin_half, [0.25, 0.0, 0.0])
        assert np.allclose(out, [0.5, 0.0, 0.0], rtol=1e-15, atol=0.0)

    def test_continuous_extension_at_center(self, origin_half):
        assert np.array_equal(eval_stretch(origin_half, np.zeros(3)), np.zeros(3))

    def test_batch_matches_scalar(self, origin_half):
        rng = np.random.default_rng(2)
        xs = rng.normal(size=(32, 3))
        batch = eval_stretch_many(origin_half, xs)
        for i, x in enumerate(xs):
            assert np.array_equal(batch[i], eval_stretch(origin_half, x))


class TestJacStretch:
    def test_unit_point_diagonal(self, origin_half):
        m = jac_stretch(origin_half, [1.0, 0.0, 0.0])
        assert np.array_equal(m.entries, np.diag([0.5, 1.0, 1.0]))

    def test_unit_sphere_eigenvalues(self):
        rng = np.random.default_rng(3)
        for k in (1.5, 2.0, 7.0):
            p = StretchParams(np.zeros(4), k)
            x = random_unit(rng, 4)
            s = eigen_sym(jac_stretch(p, x))
            assert np.allclose(s.eigenvalues, [1.0, 1.0, 1.0, 1.0 / k], atol=1e-13)
            radial, tangential = jac_stretch_eigenvalues(p, x)
            assert abs(radial - 1.0 / k) <= 1e-13
            assert abs(tangential - 1.0) <= 1e-13

    def test_finite_difference_oracle(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            d = int(rng.integers(2, 5))
            k = float(rng.uniform(1.1, 8.0))
            lam = rng.normal(size=d)
            p = StretchParams(lam, k)
            x = lam + random_unit(rng, d) * rng.uniform(0.05, 2.0)
            jan = jac_stretch(p, x).entries
            jfd = fd_jacobian(lambda y: eval_stretch(p, y), x)
            rel = np.sqrt(((jfd - jan) ** 2).sum()) / np.sqrt((jan**2).sum())
            assert rel <= 1e-6

    def test_degenerate_at_center(self, origin_half):
        with pytest.raises(DegeneratePointError):
            jac_stretch(origin_half, np.zeros(3))


class TestInvariants:
    def test_homogeneity(self):
        # eval(c x) = c^(1/K) eval(x) for c > 0, 10^4 trials
        rng = np.random.default_rng(5)
        k = 2.5
        p = StretchParams(np.zeros(3), k)
        xs = rng.normal(size=(10_000, 3))
        cs = rng.uniform(1e-3, 1e3, size=10_000)
        lhs = eval_stretch_many(p, cs[:, None] * xs)
        rhs = cs[:, None] ** (1.0 / k) * eval_stretch_many(p, xs)
        rel = np.sqrt(((lhs - rhs) ** 2).sum(-1)) / np.sqrt((rhs**2).sum(-1))
        assert rel.max() <= 1e-12

    def test_rotation_equivariance(self):
        rng = np.random.default_rng(6)
        for _ in range(100):
            d = int(rng.integers(2, 6))
            k = float(rng.uniform(1.1, 9.0))
            lam = rng.normal(size=d)
            x = rng.normal(size=d)
            r = random_orthogonal(rng, d)
            lhs = eval_stretch(StretchParams(r @ lam, k), r @ x)
            rhs = r @ eval_stretch(StretchParams(lam, k), x)
            assert np.sqrt(((lhs - rhs) ** 2).sum()) <= 1e-12 * max(
                1.0, np.sqrt((rhs**2).sum())
            )

    def test_translation_equivariance(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            d = int(rng.integers(2, 6))
            k = float(rng.uniform(1.1, 9.0))
            lam = rng.normal(size=d)
            x = lam + random_unit(rng, d) * rng.uniform(0.01, 3.0)
            v = rng.uniform(-1.0, 1.0, size=d)
            lhs = eval_stretch(StretchParams(lam + v, k), x + v)
            rhs = eval_stretch(StretchParams(lam, k), x)
            assert np.abs(lhs - rhs).max() <= 1e-13 * max(1.0, np.abs(rhs).max())

    def test_positive_definiteness_window(self):
        rng = np.random.default_rng(8)
        for _ in range(200):
            d = int(rng.integers(2, 6))
            k = float(rng.uniform(1.01, 12.0))
            p = StretchParams(rng.normal(size=d), k)
            x = p.center + random_unit(rng, d) * 10.0 ** rng.uniform(-9, 2)
            eigs = eigen_sym(jac_stretch(p, x)).eigenvalues
            radial, tangential = jac_stretch_eigenvalues(p, x)
            tol = 1e-12 * tangential
            assert eigs.min() >= min(1.0 / k, 1.0) * tangential - tol
            assert eigs.max() <= tangential + tol
            assert (eigs > 0.0).all()

    def test_exact_single_map_distortion(self):
        # operator_norm(DS)^d / det(DS) == K at every x off the center
        rng = np.random.default_rng(9)
        for _ in range(100):
            d = int(rng.integers(2, 6))
            k = float(rng.uniform(1.1, 10.0))
            p = StretchParams(rng.normal(size=d), k)
            x = p.center + random_unit(rng, d) * 10.0 ** rng.uniform(-6, 2)
            m = jac_stretch(p, x)
            ratio = operator_norm(m) ** d / determinant(m)
            assert abs(ratio - k) <= 1e-10 * k

    def test_exact_stretching_exponent(self):
        # |S(center + r u)| == r^(1/K) for unit u; center 0 keeps the
        # argument exact in floats
        rng = np.random.default_rng(10)
        for k in (1.1, 2.0, 10.0):
            p = StretchParams(np.zeros(3), k)
            rs = np.logspace(-12, 3, 200)
            us = np.array([random_unit(rng, 3) for _ in range(200)])
            vals = eval_stretch_many(p, rs[:, None] * us)
            measured = np.sqrt((vals**2).sum(-1))
            expected = rs ** (1.0 / k)
            assert np.abs(measured / expected - 1.0).max() <= 1e-13

    def test_exact_stretching_translated_realized_radius(self):
        # off-origin centers: compare against the radius realized after
        # floating-point addition (r itself is absorbed near the center)
        rng = np.random.default_rng(11)
        for k in (1.3, 3.0):
            p = StretchParams(rng.normal(size=3), k)
            for r in np.logspace(-8, 2, 40):
                x = p.center + r * random_unit(rng, 3)
                r_real = np.linalg.norm(x - p.center)
                measured = np.sqrt((eval_stretch(p, x) ** 2).sum())
                assert abs(measured / r_real ** (1.0 / k) - 1.0) <= 1e-13


class TestValidation:
    def test_k_equal_one_rejected(self):
        with pytest.raises(ValidationError):
            StretchParams(np.zeros(2), 1.0)

    def test_k_below_one_rejected(self):
        with pytest.raises(ValidationError):
            StretchParams(np.zeros(2), 0.5)

    def test_nonfinite_center_rejected(self):
        with pytest.raises(NonFiniteError):
            StretchParams(np.array([0.0, np.inf]), 2.0)

    def test_derived_exponents(self):
        p = StretchParams(np.zeros(2), 4.0)
        assert p.inv_k == 0.25
        assert p.alpha == 0.75
