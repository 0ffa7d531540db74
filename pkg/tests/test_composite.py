import numpy as np
import pytest

from helpers import random_centers_in_ball, random_config, random_orthogonal, random_unit
from oracles import eval_map_mp, fd_jacobian
from qcstretch import (
    LambdaSet,
    MapConfig,
    NonFiniteError,
    OnLambdaError,
    SymMatrix,
    ValidationError,
    eigen_sym,
    eval_map,
    eval_map_many,
    jac_direct_sum_many,
    jac_map,
    weight_decomposition,
    weight_fields_many,
)


class TestLambdaSet:
    def test_weights_and_bound(self):
        ls = LambdaSet(np.array([[0.0, 0.0], [3.0, 4.0]]))
        assert np.array_equal(ls.weights, [0.5, 0.25])
        assert ls.bound_radius == 5.0

    def test_duplicate_centers_rejected(self):
        with pytest.raises(ValidationError, match="duplicate"):
            LambdaSet(np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 0.0]]))

    def test_near_duplicate_rejected(self):
        with pytest.raises(ValidationError):
            LambdaSet(np.array([[0.0, 0.0], [1e-13, 0.0]]))

    def test_dim_one_rejected(self):
        with pytest.raises(ValidationError):
            LambdaSet(np.array([[0.0], [1.0]]))

    def test_unbounded_rejected(self):
        with pytest.raises(NonFiniteError):
            LambdaSet(np.array([[0.0, 0.0], [np.inf, 0.0]]))

    def test_k_must_exceed_one(self):
        ls = LambdaSet(np.zeros((1, 2)))
        with pytest.raises(ValidationError, match="exceed 1"):
            MapConfig(ls, 1.0)


class TestEvalMap:
    def test_singleton_is_scaled_stretch(self):
        cfg = MapConfig(LambdaSet(np.zeros((1, 3))), 2.0)
        out = eval_map(cfg, [0.25, 0.0, 0.0])
        assert np.allclose(out, [0.25, 0.0, 0.0], rtol=1e-15, atol=0.0)

    def test_two_centers_at_origin(self):
        cfg = MapConfig(LambdaSet(np.array([[0.0, 0.0], [1.0, 0.0]])), 2.0)
        assert np.array_equal(eval_map(cfg, [0.0, 0.0]), [-0.25, 0.0])

    def test_defined_on_centers(self):
        cfg = MapConfig(LambdaSet(np.array([[0.0, 0.0], [1.0, 0.0]])), 2.0)
        out = eval_map(cfg, [1.0, 0.0])
        assert np.array_equal(out, [0.5, 0.0])  # only the first term contributes

    def test_extended_precision_oracle(self):
        rng = np.random.default_rng(17)
        for trial in range(20):
            centers = random_centers_in_ball(rng, 5, 3)
            k = float(rng.uniform(1.1, 6.0))
            cfg = MapConfig(LambdaSet(centers), k)
            x = rng.uniform(-1.5, 1.5, size=3)
            got = eval_map(cfg, x)
            ref = eval_map_mp(centers, k, x)
            assert np.sqrt(((got - ref) ** 2).sum()) <= 1e-13 * np.sqrt((ref**2).sum())


class TestWeightDecomposition:
    def test_singleton_rank_one(self):
        cfg = MapConfig(LambdaSet(np.zeros((1, 4))), 3.0)
        wd = weight_decomposition(cfg, [0.3, 0.0, 0.0, 0.0])
        assert wd.eta[0] == 1.0
        sig = eigen_sym(wd.b).eigenvalues
        assert np.allclose(sig, [1.0, 0.0, 0.0, 0.0], atol=1e-13)

    def test_collinear_two_centers(self):
        cfg = MapConfig(LambdaSet(np.array([[0.0, 0.0], [1.0, 0.0]])), 2.0)
        wd = weight_decomposition(cfg, [0.5, 0.0])
        assert np.array_equal(wd.directions[0], [1.0, 0.0])
        assert np.array_equal(wd.directions[1], [-1.0, 0.0])
        sig = eigen_sym(wd.b).eigenvalues
        assert np.allclose(sig, [1.0, 0.0], atol=1e-14)
        assert abs(wd.b.entries[0, 0] - 1.0) <= 1e-14

    def test_four_random_centers_trace_and_spectrum(self):
        rng = np.random.default_rng(23)
        cfg = MapConfig(LambdaSet(random_centers_in_ball(rng, 4, 3)), 2.0)
        for _ in range(50):
            wd = weight_decomposition(cfg, rng.uniform(-1.5, 1.5, size=3))
            assert abs(wd.b.trace() - 1.0) <= 1e-11
            sig = eigen_sym(wd.b).eigenvalues
            assert sig.min() >= -1e-11 and sig.max() <= 1.0 + 1e-11

    def test_on_lambda_identifies_center(self):
        cfg = MapConfig(LambdaSet(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])), 2.0)
        with pytest.raises(OnLambdaError) as exc:
            weight_decomposition(cfg, [0.0, 1.0])
        assert exc.value.index == 3


class TestJacMap:
    def test_singleton_half_jacobian(self):
        cfg = MapConfig(LambdaSet(np.zeros((1, 3))), 2.0)
        m = jac_map(cfg, [1.0, 0.0, 0.0])
        assert np.array_equal(m.entries, np.diag([0.25, 0.5, 0.5]))

    def test_on_lambda_raises(self):
        cfg = MapConfig(LambdaSet(np.array([[0.0, 0.0], [1.0, 0.0]])), 2.0)
        with pytest.raises(OnLambdaError) as exc:
            jac_map(cfg, [1.0, 0.0])
        assert exc.value.index == 2

    def test_finite_difference_oracle(self):
        rng = np.random.default_rng(29)
        for _ in range(5):
            cfg = random_config(rng, m=int(rng.integers(2, 12)))
            d = cfg.dim
            tried = 0
            while tried < 20:
                x = rng.uniform(-1.5, 1.5, size=d)
                dists = np.sqrt(((cfg.lambda_set.centers - x) ** 2).sum(-1))
                if dists.min() < 0.05:
                    continue
                tried += 1
                jan = jac_map(cfg, x).entries
                jfd = fd_jacobian(lambda y: eval_map(cfg, y), x)
                rel = np.sqrt(((jfd - jan) ** 2).sum()) / np.sqrt((jan**2).sum())
                assert rel <= 1e-6

    def test_positive_definite_on_samples(self):
        rng = np.random.default_rng(31)
        cfg = random_config(rng, m=10, d=3, k=1.5)
        pts = rng.uniform(-2.0, 2.0, size=(10_000, 3))
        w, b, _, _, on_lambda = weight_fields_many(cfg, pts)
        assert not on_lambda.any()
        from qcstretch.backend import kernels

        sig, _, ok = kernels.jacobi_eigh_many(np.ascontiguousarray(b))
        assert ok.all()
        eigs = w[:, None] * (1.0 - cfg.alpha * sig)
        assert (eigs > 0.0).all()


class TestInvariants:
    def test_monotone_pairing_surrogate(self):
        # <F(x) - F(y), x - y> > 0 over 10^5 random pairs
        rng = np.random.default_rng(37)
        cfg = random_config(rng, m=20, d=3, k=2.0)
        xs = rng.uniform(-2.0, 2.0, size=(100_000, 3))
        ys = rng.uniform(-2.0, 2.0, size=(100_000, 3))
        keep = ((xs - ys) ** 2).sum(-1) > 0
        dots = ((eval_map_many(cfg, xs) - eval_map_many(cfg, ys)) * (xs - ys)).sum(-1)
        assert (dots[keep] > 0.0).all()

    def test_translation_equivariance(self):
        rng = np.random.default_rng(41)
        cfg = random_config(rng, m=8, d=3, k=2.5)
        for _ in range(200):
            v = rng.uniform(-2.0, 2.0, size=3)
            x = rng.uniform(-1.5, 1.5, size=3)
            moved = MapConfig(LambdaSet(cfg.lambda_set.centers + v), cfg.k)
            lhs = eval_map(moved, x + v)
            rhs = eval_map(cfg, x)
            assert np.abs(lhs - rhs).max() <= 1e-12 * max(1.0, np.abs(rhs).max())

    def test_rotation_equivariance(self):
        rng = np.random.default_rng(43)
        cfg = random_config(rng, m=8, d=3, k=3.0)
        for _ in range(200):
            q = random_orthogonal(rng, 3)
            x = rng.uniform(-1.5, 1.5, size=3)
            rotated = MapConfig(LambdaSet(cfg.lambda_set.centers @ q.T), cfg.k)
            lhs = eval_map(rotated, q @ x)
            rhs = q @ eval_map(cfg, x)
            assert np.abs(lhs - rhs).max() <= 1e-12 * max(1.0, np.abs(rhs).max())

    def test_scale_covariance(self):
        rng = np.random.default_rng(47)
        cfg = random_config(rng, m=8, d=3, k=1.7)
        for _ in range(200):
            c = float(rng.uniform(0.1, 10.0))
            x = rng.uniform(-1.5, 1.5, size=3)
            scaled = MapConfig(LambdaSet(c * cfg.lambda_set.centers), cfg.k)
            lhs = eval_map(scaled, c * x)
            rhs = c ** (1.0 / cfg.k) * eval_map(cfg, x)
            assert np.abs(lhs - rhs).max() <= 1e-12 * max(1.0, np.abs(rhs).max())

    def test_jacobian_two_frames_agree(self):
        # W(I - alpha B) vs the direct series sum, relative Frobenius
        rng = np.random.default_rng(53)
        cfg = random_config(rng, m=25, d=3, k=2.0)
        pts = rng.uniform(-2.0, 2.0, size=(10_000, 3))
        w, b, _, _, _ = weight_fields_many(cfg, pts)
        jd = w[:, None, None] * (np.eye(3)[None] - cfg.alpha * b)
        js = jac_direct_sum_many(cfg, pts)
        rel = np.sqrt(((jd - js) ** 2).sum(axis=(1, 2))) / np.sqrt((js**2).sum(axis=(1, 2)))
        assert rel.max() <= 1e-11

    def test_jac_map_matches_per_stretch_sum(self):
        from qcstretch import StretchParams, jac_stretch

        rng = np.random.default_rng(59)
        cfg = random_config(rng, m=6, d=3, k=2.0)
        for _ in range(20):
            x = rng.uniform(-1.5, 1.5, size=3)
            total = np.zeros((3, 3))
            for n in range(1, cfg.count + 1):
                p = StretchParams(cfg.lambda_set.centers[n - 1], cfg.k)
                total += 0.5**n * jac_stretch(p, x).entries
            got = jac_map(cfg, x).entries
            rel = np.sqrt(((got - total) ** 2).sum()) / np.sqrt((total**2).sum())
            assert rel <= 1e-11


class TestImmutability:
    def test_centers_read_only(self):
        cfg = MapConfig(LambdaSet(np.zeros((1, 2))), 2.0)
        with pytest.raises(ValueError):
            cfg.lambda_set.centers[0, 0] = 1.0

    def test_decomposition_arrays_read_only(self):
        cfg = MapConfig(LambdaSet(np.array([[0.0, 0.0], [1.0, 0.0]])), 2.0)
        wd = weight_decomposition(cfg, [0.5, 0.25])
        with pytest.raises(ValueError):
            wd.eta[0] = 2.0
