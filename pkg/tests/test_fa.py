import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fireflybeam.errors import ContractViolation, EvaluationError, NumericError
from fireflybeam.fa import (
    FAConfig,
    PenaltyWeights,
    ProblemSpec,
    Variable,
    brightness,
    init_population,
    move,
    penalized_objective,
    penalty,
    quadratic_schedule,
    run_fa,
)


def scalar_problem(g=None, h=None):
    n_g = 0 if g is None else len(g)
    n_h = 0 if h is None else len(h)
    return ProblemSpec(
        variables=(Variable("x", (1, 1)),),
        objective=lambda x: float(x["x"][0, 0].real),
        inequalities=(lambda x: np.asarray(g, dtype=float)) if g is not None else (lambda x: np.zeros(0)),
        equalities=(lambda x: np.asarray(h, dtype=float)) if h is not None else (lambda x: np.zeros(0)),
        n_inequalities=n_g,
        n_equalities=n_h,
    )


X0 = {"x": np.zeros((1, 1), dtype=complex)}
CONSTANT = lambda n: 1.0  # noqa: E731


class TestPenalty:
    def test_feasible_point(self):
        p = scalar_problem(g=[-1, -1], h=[0])
        assert penalty(p, PenaltyWeights([1, 1], [1], CONSTANT), X0, 3) == 0.0

    def test_inequality_squared(self):
        p = scalar_problem(g=[2])
        assert penalty(p, PenaltyWeights([1], [], CONSTANT), X0, 1) == 4.0

    def test_equality_squared(self):
        p = scalar_problem(h=[0.5])
        assert penalty(p, PenaltyWeights([], [4], CONSTANT), X0, 1) == 1.0

    def test_schedule_scales_weights(self):
        p = scalar_problem(g=[2])
        weights = PenaltyWeights([1], [])
        assert penalty(p, weights, X0, 3) == 4.0 * 9

    def test_generation_zero_counts_as_one(self):
        assert quadratic_schedule(0) == 1.0
        assert quadratic_schedule(5) == 25.0

    def test_non_finite_constraint(self):
        p = scalar_problem(g=[math.nan])
        with pytest.raises(NumericError):
            penalty(p, PenaltyWeights([1], [], CONSTANT), X0, 1)

    def test_weights_must_be_positive(self):
        with pytest.raises(ContractViolation):
            PenaltyWeights([0.0], [])

    # Values below ~1e-154 square to zero in double precision.
    representable = st.floats(-5, 5).filter(lambda v: v == 0 or abs(v) > 1e-150)

    @given(st.lists(representable, min_size=1, max_size=4), st.lists(representable, max_size=3))
    def test_zero_iff_feasible(self, g, h):
        p = scalar_problem(g=g, h=h)
        weights = PenaltyWeights(np.ones(len(g)), np.ones(len(h)), CONSTANT)
        value = penalty(p, weights, X0, 1)
        feasible = all(v <= 0 for v in g) and all(v == 0 for v in h)
        assert value >= 0
        assert (value == 0) == feasible


class TestBrightness:
    def test_reciprocal(self):
        p = ProblemSpec(variables=(Variable("x", (1, 1)),), objective=lambda x: 2.0)
        assert brightness(p, PenaltyWeights([], []), X0, 1) == 0.5

    def test_small_denominator(self):
        p = ProblemSpec(variables=(Variable("x", (1, 1)),), objective=lambda x: 0.1)
        assert brightness(p, PenaltyWeights([], []), X0, 1) == pytest.approx(10.0)

    def test_nonpositive_is_suppressed(self):
        p = ProblemSpec(variables=(Variable("x", (1, 1)),), objective=lambda x: 2.0, sense="maximize")
        assert penalized_objective(p, PenaltyWeights([], []), X0, 1) == -2.0
        assert brightness(p, PenaltyWeights([], []), X0, 1) is None

    def test_ordering_uses_penalized_objective(self):
        p = ProblemSpec(variables=(Variable("x", (1, 1)),),
                        objective=lambda x: float(x["x"][0, 0].real))
        w = PenaltyWeights([], [])
        a = {"x": np.full((1, 1), 3.0 + 0j)}
        b = {"x": np.full((1, 1), 5.0 + 0j)}
        assert brightness(p, w, a, 1) > brightness(p, w, b, 1)


class TestMove:
    def setup_method(self):
        self.rng = np.random.default_rng(1)
        self.xi = {"W": np.array([[1 + 1j, 2], [0, -1j]]), "t": np.array([[0.5j]])}
        self.xj = {"W": np.array([[0, 1], [1, 1]], dtype=complex), "t": np.array([[1.0 + 0j]])}

    def test_no_attraction_no_noise(self):
        out = move(self.xi, self.xj, FAConfig(beta0=0.0, alpha0=0.0), 3, self.rng)
        for k in self.xi:
            assert np.array_equal(out[k], self.xi[k])

    def test_full_attraction(self):
        out = move(self.xi, self.xj, FAConfig(beta0=1.0, gamma=0.0, alpha0=0.0), 3, self.rng)
        for k in self.xi:
            assert np.array_equal(out[k], self.xj[k])

    def test_scalar_hand_value(self):
        xi = {"v": np.zeros((1, 1), dtype=complex)}
        xj = {"v": np.full((1, 1), 2.0 + 0j)}
        out = move(xi, xj, FAConfig(alpha0=0.0), 0, self.rng)
        assert out["v"][0, 0] == pytest.approx(0.0366312777774683605874, rel=1e-14)

    def test_distance_is_per_variable(self):
        cfg = FAConfig(alpha0=0.0)
        out = move(self.xi, self.xj, cfg, 0, self.rng)
        r2_t = abs(self.xj["t"][0, 0] - self.xi["t"][0, 0]) ** 2
        expected_t = self.xi["t"] + np.exp(-r2_t) * (self.xj["t"] - self.xi["t"])
        assert np.allclose(out["t"], expected_t, atol=1e-15)

    def test_per_variable_parameters(self):
        cfg = FAConfig(beta0={"W": 0.0, "t": 1.0}, gamma={"W": 1.0, "t": 0.0}, alpha0=0.0)
        out = move(self.xi, self.xj, cfg, 0, self.rng)
        assert np.array_equal(out["W"], self.xi["W"])
        assert np.array_equal(out["t"], self.xj["t"])

    def test_noise_magnitude_follows_schedule(self):
        xi = {"v": np.zeros((200, 50), dtype=complex)}
        cfg = FAConfig(beta0=0.0, alpha0=0.9, alpha_decay=0.5)
        out = move(xi, xi, cfg, 2, np.random.default_rng(0))
        assert np.std(out["v"]) == pytest.approx(0.9 * 0.25, rel=0.02)

    def test_shape_mismatch(self):
        bad = {"W": np.zeros((2, 3)), "t": np.zeros((1, 1))}
        with pytest.raises(ContractViolation):
            move(self.xi, bad, FAConfig(), 0, self.rng)

    def test_gamma_limits(self):
        xi = {"v": np.zeros((1, 1), dtype=complex)}
        xj = {"v": np.ones((1, 1), dtype=complex)}
        near = move(xi, xj, FAConfig(gamma=1e-12, alpha0=0.0), 0, self.rng)
        assert near["v"][0, 0] == pytest.approx(1.0, abs=1e-11)
        far = move(xi, xj, FAConfig(gamma=1e9, alpha0=0.0), 0, self.rng)
        assert abs(far["v"][0, 0]) < 1e-300


class TestInitPopulation:
    problem = ProblemSpec(variables=(Variable("W", (3, 2)), Variable("theta", (4, 1), unit_modulus=True)),
                          objective=lambda x: 0.0)

    def test_count_shapes_distinct(self):
        pop = init_population(self.problem, FAConfig(population=3), np.random.default_rng(0))
        assert len(pop) == 3
        for x in pop:
            assert x["W"].shape == (3, 2) and x["theta"].shape == (4, 1)
        assert not np.array_equal(pop[0]["W"], pop[1]["W"])
        assert not np.array_equal(pop[1]["W"], pop[2]["W"])

    def test_deterministic(self):
        a = init_population(self.problem, FAConfig(population=3), np.random.default_rng(7))
        b = init_population(self.problem, FAConfig(population=3), np.random.default_rng(7))
        for x, y in zip(a, b):
            assert all(np.array_equal(x[k], y[k]) for k in x)

    def test_unit_modulus(self):
        pop = init_population(self.problem, FAConfig(population=5), np.random.default_rng(0))
        for x in pop:
            assert np.allclose(np.abs(x["theta"]), 1.0, atol=1e-12)

    def test_init_scale(self):
        cfg = FAConfig(population=400, init_scale={"W": 3.0, "theta": 1.0})
        pop = init_population(self.problem, cfg, np.random.default_rng(0))
        entries = np.concatenate([x["W"].ravel() for x in pop])
        assert np.sqrt(np.mean(np.abs(entries) ** 2)) == pytest.approx(3.0, rel=0.05)


def norm_problem():
    return ProblemSpec(variables=(Variable("w", (1, 1)),),
                       objective=lambda x: float(abs(x["w"][0, 0]) ** 2))


def threshold_problem():
    return ProblemSpec(variables=(Variable("p", (1, 1)),),
                       objective=lambda x: float(x["p"][0, 0].real),
                       inequalities=lambda x: np.array([3.0 - x["p"][0, 0].real]),
                       n_inequalities=1)


class TestRunFa:
    def test_unconstrained_norm(self):
        p = norm_problem()
        trace = run_fa(p, PenaltyWeights.uniform(p), FAConfig(population=20, generations=50))
        assert trace.final_objective <= 1e-3

    def test_scalar_threshold(self):
        # Grid search over [0, 10] with step 1e-3 puts the optimum at 3; the
        # penalty method may sit a hair below it.
        grid = np.arange(0, 10.0005, 1e-3)
        assert grid[grid >= 3][0] == pytest.approx(3.0)
        p = threshold_problem()
        for seed in range(3):
            trace = run_fa(p, PenaltyWeights.uniform(p, 100.0),
                           FAConfig(population=20, generations=50, rng_seed=seed, init_scale=5.0))
            assert 3.0 - 1e-4 <= trace.best["p"][0, 0].real <= 3.05

    def test_trace_fields(self):
        p = threshold_problem()
        trace = run_fa(p, PenaltyWeights.uniform(p, 100.0), FAConfig(population=5, generations=7))
        assert len(trace.best_penalized) == 7
        assert trace.generations_run == 7
        assert trace.max_inequality_violation >= 0
        assert trace.wall_time > 0

    def test_initial_population_override(self):
        p = norm_problem()
        init = [{"w": np.full((1, 1), v + 0j)} for v in (1.0, 2.0)]
        trace = run_fa(p, PenaltyWeights.uniform(p),
                       FAConfig(population=2, generations=1, alpha0=0.0, gamma=0.0), init)
        assert trace.final_objective == pytest.approx(1.0)
        with pytest.raises(ContractViolation):
            run_fa(p, PenaltyWeights.uniform(p), FAConfig(population=3, generations=1), init)

    def test_argmax_collapse(self):
        p = norm_problem()
        init = [{"w": np.full((1, 1), v + 0j)} for v in (0.5, 2.0, 3.0, -4.0)]
        cfg = FAConfig(population=4, generations=1, alpha0=0.0, gamma=0.0, beta0=1.0)
        trace = run_fa(p, PenaltyWeights.uniform(p), cfg, init)
        assert trace.final_objective == 0.25
        assert trace.best_penalized == [0.25]

    def test_evaluation_error_carries_generation(self):
        calls = {"n": 0}

        def flaky(x):
            calls["n"] += 1
            return math.nan if calls["n"] > 6 else float(abs(x["w"][0, 0]) ** 2)

        p = ProblemSpec(variables=(Variable("w", (1, 1)),), objective=flaky)
        with pytest.raises(EvaluationError) as info:
            run_fa(p, PenaltyWeights.uniform(p), FAConfig(population=4, generations=3))
        assert info.value.generation == 1

    def test_maximize_sense(self):
        p = ProblemSpec(variables=(Variable("w", (1, 1)),),
                        objective=lambda x: -float(abs(x["w"][0, 0] - 1) ** 2), sense="maximize")
        trace = run_fa(p, PenaltyWeights.uniform(p), FAConfig(population=15, generations=40))
        assert trace.final_objective > -1e-3

    @given(st.integers(0, 2**31 - 1))
    def test_best_so_far_non_increasing(self, seed):
        p = threshold_problem()
        trace = run_fa(p, PenaltyWeights.uniform(p), FAConfig(population=6, generations=12, rng_seed=seed))
        values = np.array(trace.best_penalized)
        assert np.all(np.diff(values) <= 0)
        assert values[0] <= trace.initial_penalized

    @given(st.integers(0, 2**31 - 1))
    def test_deterministic(self, seed):
        p = threshold_problem()
        cfg = FAConfig(population=5, generations=6, rng_seed=seed)
        a = run_fa(p, PenaltyWeights.uniform(p), cfg)
        b = run_fa(p, PenaltyWeights.uniform(p), cfg)
        assert a.best_penalized == b.best_penalized
        assert np.array_equal(a.best["p"], b.best["p"])


class TestConfig:
    def test_population_floor(self):
        with pytest.raises(ContractViolation):
            FAConfig(population=1)

    def test_generation_floor(self):
        with pytest.raises(ContractViolation):
            FAConfig(generations=0)

    def test_alpha_schedule(self):
        cfg = FAConfig(alpha0=0.9, alpha_decay=0.9)
        assert cfg.alpha(0) == 0.9
        assert cfg.alpha(3) == pytest.approx(0.9 ** 4)

    def test_duplicate_names(self):
        with pytest.raises(ContractViolation):
            ProblemSpec(variables=(Variable("a", (1, 1)), Variable("a", (2, 1))), objective=lambda x: 0.0)
