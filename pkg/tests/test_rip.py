import math

import numpy as np
import pytest

import sparsereg as sr
from sparsereg.rng import make_generator
from sparsereg.supports import BudgetExceededError

import helpers


class TestRipConstant:
    def test_orthogonal_design_is_exact_isometry(self):
        n = p = 16
        X = math.sqrt(n) * np.eye(p)
        for k in (1, 2, 3, 8, 16):
            est = sr.rip_constant(X, k, "exact", budget=10**6)
            assert est.delta == 0.0
            assert est.exact
            assert est.supports_checked == math.comb(p, k)

    def test_sampled_never_exceeds_exact(self):
        for seed in range(20):
            X = make_generator(seed, "rip-test").standard_normal((40, 16))
            exact = sr.rip_constant(X, 3, "exact", budget=10**4)
            sampled = sr.rip_constant(X, 3, "sampled", budget=200, seed=seed)
            assert not sampled.exact
            assert sampled.delta <= exact.delta + 1e-12

    def test_duplicated_column_breaks_isometry(self):
        X = make_generator(1, "rip-test").standard_normal((30, 10))
        X = X.copy()
        X[:, 2] = X[:, 1]
        est = sr.rip_constant(X, 2, "exact", budget=10**4)
        assert est.delta >= 1.0

    def test_monotone_in_order(self):
        X = make_generator(2, "rip-test").standard_normal((50, 12))
        deltas = [sr.rip_constant(X, k, "exact", budget=10**4).delta for k in (1, 2, 3, 4)]
        assert all(b >= a - 1e-12 for a, b in zip(deltas, deltas[1:]))

    def test_budget_refusal_and_bad_args(self):
        X = make_generator(3, "rip-test").standard_normal((20, 12))
        with pytest.raises(BudgetExceededError):
            sr.rip_constant(X, 5, "exact", budget=10)
        with pytest.raises(ValueError):
            sr.rip_constant(X, 0, "exact")
        with pytest.raises(ValueError):
            sr.rip_constant(X, 13, "exact")


class TestRipConsequences:
    def test_zero_vector_inner_product(self):
        inst, _ = helpers.make_instance(0, n=30, p=12, k=3, sigma2=0.5)
        v = np.zeros(12)
        v[3] = 1.2
        out = sr.check_rip_consequences(inst.X, v, np.zeros(12), delta=0.5, k=3)
        assert out.inner_product is True
        assert out.norm_sandwich is True
        assert out.disjoint_inner_product is True

    def test_equal_vectors_norm_sandwich(self):
        inst, _ = helpers.make_instance(1, n=30, p=12, k=3, sigma2=0.5)
        v = np.zeros(12)
        v[[2, 7]] = [1.0, -0.4]
        out = sr.check_rip_consequences(inst.X, v, v.copy(), delta=0.3, k=3)
        assert out.norm_sandwich is True
        assert out.disjoint_inner_product is None  # supports overlap

    def test_not_applicable_verdicts(self):
        inst, _ = helpers.make_instance(2, n=30, p=12, k=3, sigma2=0.5)
        v = np.zeros(12)
        w = np.zeros(12)
        v[[0, 1]] = 1.0
        w[[2, 3]] = 1.0
        out = sr.check_rip_consequences(inst.X, v, w, delta=0.3, k=3)
        assert out.inner_product is True
        assert out.norm_sandwich is None  # union of size 4 exceeds k = 3
        assert out.disjoint_inner_product is None

    def test_certified_delta_property_sweep(self):
        X = make_generator(4, "rip-test").standard_normal((60, 14))
        k = 4
        delta = sr.rip_constant(X, k, "exact", budget=10**4).delta
        rng = np.random.default_rng(5)
        applicable = {"part1": 0, "part2": 0, "part3": 0}
        for _ in range(1000):
            m = int(rng.integers(1, k + 1))
            support = rng.permutation(14)[:m]
            split = int(rng.integers(0, m + 1))
            v = np.zeros(14)
            w = np.zeros(14)
            v[support[:split]] = rng.standard_normal(split)
            w[support[split:]] = rng.standard_normal(m - split)
            if rng.random() < 0.5:
                w[support[: max(split - 1, 0)]] = rng.standard_normal(max(split - 1, 0))
            out = sr.check_rip_consequences(X, v, w, delta=delta, k=k)
            for name, verdict in (
                ("part1", out.inner_product),
                ("part2", out.norm_sandwich),
                ("part3", out.disjoint_inner_product),
            ):
                if verdict is not None:
                    applicable[name] += 1
                    assert verdict is True
        assert min(applicable.values()) > 0


class TestQuadraticFormProbe:
    def test_identity_mean(self):
        n, trials = 10, 4000
        table = sr.quadratic_form_probe(np.eye(n), trials, [1.0, 5.0, 20.0], seed=0)
        assert abs(table.mean_quadratic_form - n) <= 3 * math.sqrt(2 * n / trials)
        assert table.trace == n
        assert table.frobenius == pytest.approx(math.sqrt(n), rel=1e-12)
        assert table.opnorm == pytest.approx(1.0, abs=1e-9)

    def test_zero_matrix_has_empty_tails(self):
        table = sr.quadratic_form_probe(np.zeros((6, 6)), 1000, [0.0, 0.1, 1.0], seed=1)
        assert np.all(table.tail_frequency == 0.0)
        assert table.opnorm == 0.0

    def test_block_kronecker_operator_norm(self):
        n = 12
        A = np.kron(np.array([[1.0, 1.0], [1.0, 0.0]]), np.eye(n))
        table = sr.quadratic_form_probe(A, 1000, [1.0], seed=2)
        golden = (1 + math.sqrt(5)) / 2
        assert table.opnorm == pytest.approx(golden, abs=1e-9)
        assert table.frobenius == pytest.approx(math.sqrt(3 * n), rel=1e-12)

    def test_tail_monotone_and_bounded(self):
        A = make_generator(3, "probe").standard_normal((8, 8))
        t_grid = [0.5, 1.0, 2.0, 4.0, 8.0, 16.0]
        table = sr.quadratic_form_probe(A, 2000, t_grid, seed=3)
        freqs = table.tail_frequency
        assert np.all(freqs[1:] <= freqs[:-1])
        assert np.all((freqs >= 0) & (freqs <= 1))

    def test_preconditions(self):
        with pytest.raises(ValueError):
            sr.quadratic_form_probe(np.eye(4), 10, [1.0])
        with pytest.raises(ValueError):
            sr.quadratic_form_probe(np.ones((3, 4)), 1000, [1.0])
        bad = np.eye(3)
        bad[0, 0] = np.inf
        with pytest.raises(ValueError):
            sr.quadratic_form_probe(bad, 1000, [1.0])

    def test_csv_schema(self, tmp_path):
        table = sr.quadratic_form_probe(np.eye(5), 1000, [1.0, 2.0], seed=4)
        path = tmp_path / "tails.csv"
        table.to_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "t,empirical_tail,frobenius,opnorm"
        assert len(lines) == 3


class TestOperatorNorm:
    def test_matches_svd(self):
        for seed in range(5):
            A = make_generator(seed, "opnorm").standard_normal((9, 7))
            assert sr.operator_norm(A) == pytest.approx(
                float(np.linalg.norm(A, 2)), rel=1e-8
            )
