"""Generalized firefly algorithm over sets of complex-matrix decision variables.

A candidate solution (a *firefly*) is a :data:`DecisionSet`: an ordered mapping
from variable name to complex matrix.  Constraints are folded into the
objective with a quadratic penalty whose weights follow a per-generation
schedule, and fireflies are ranked on the penalized objective (smaller is
brighter).  The main loop reproduces the classic sequential double loop: for
every ordered pair ``(i, j)`` firefly ``i`` moves towards ``j`` immediately
whenever ``j`` is brighter.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import ContractViolation, EvaluationError, NumericError

DecisionSet = dict[str, np.ndarray]
Evaluator = Callable[[DecisionSet], float]
VectorEvaluator = Callable[[DecisionSet], np.ndarray]


@dataclass(frozen=True)
class Variable:
    """Shape and kind of one decision variable.

    ``unit_modulus`` marks phase-type variables (e.g. reflection coefficients)
    whose initial entries are drawn on the unit circle.
    """

    name: str
    shape: tuple[int, int]
    unit_modulus: bool = False

    @property
    def size(self) -> int:
        return self.shape[0] * self.shape[1]


def _no_constraints(x: DecisionSet) -> np.ndarray:
    return np.zeros(0)


@dataclass
class ProblemSpec:
    """Objective, constraints and variable layout of one optimization problem.

    ``inequalities`` returns the vector of ``g_l(x)`` (feasible when ``<= 0``),
    ``equalities`` the vector of ``h_k(x)`` (feasible when ``== 0``).  A
    ``maximize`` problem is searched as ``-f``.  The optional ``*_scale``
    arrays give a typical magnitude for each constraint; they never change
    evaluation and only serve to normalize penalty weights and violations.
    """

    variables: tuple[Variable, ...]
    objective: Evaluator
    inequalities: VectorEvaluator = _no_constraints
    equalities: VectorEvaluator = _no_constraints
    n_inequalities: int = 0
    n_equalities: int = 0
    sense: str = "minimize"
    name: str = "problem"
    inequality_scale: np.ndarray | None = None
    equality_scale: np.ndarray | None = None

    def __post_init__(self):
        self.variables = tuple(self.variables)
        self.inequality_scale = (np.ones(self.n_inequalities) if self.inequality_scale is None
                                 else np.asarray(self.inequality_scale, dtype=float))
        self.equality_scale = (np.ones(self.n_equalities) if self.equality_scale is None
                               else np.asarray(self.equality_scale, dtype=float))
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise ContractViolation(f"duplicate variable names: {names}")
        if self.sense not in ("minimize", "maximize"):
            raise ContractViolation(f"sense must be 'minimize' or 'maximize', got {self.sense!r}")

    @property
    def sign(self) -> float:
        return 1.0 if self.sense == "minimize" else -1.0

    def check(self, x: Mapping[str, np.ndarray]) -> None:
        if list(x) != [v.name for v in self.variables]:
            raise ContractViolation(f"variables {list(x)} do not match {[v.name for v in self.variables]}")
        for var in self.variables:
            if np.shape(x[var.name]) != var.shape:
                raise ContractViolation(
                    f"variable {var.name!r} has shape {np.shape(x[var.name])}, expected {var.shape}")


def quadratic_schedule(generation: int) -> float:
    """Penalty multiplier ``n**2``; generation 0 (initial evaluation) counts as 1."""
    return float(max(generation, 1)) ** 2


@dataclass
class PenaltyWeights:
    """Base penalty constants per constraint and their generation schedule.

    The effective weight of inequality ``l`` at generation ``n`` is
    ``inequality[l] * schedule(n)``; likewise for equalities.
    """

    inequality: np.ndarray
    equality: np.ndarray
    schedule: Callable[[int], float] = quadratic_schedule

    def __post_init__(self):
        self.inequality = np.asarray(self.inequality, dtype=float).reshape(-1)
        self.equality = np.asarray(self.equality, dtype=float).reshape(-1)
        if np.any(self.inequality <= 0) or np.any(self.equality <= 0):
            raise ContractViolation("penalty weights must be strictly positive")

    @classmethod
    def uniform(cls, problem: ProblemSpec, base: float = 1.0,
                schedule: Callable[[int], float] = quadratic_schedule) -> "PenaltyWeights":
        return cls(np.full(problem.n_inequalities, base), np.full(problem.n_equalities, base),
                   schedule)

    def at(self, generation: int) -> tuple[np.ndarray, np.ndarray]:
        m = self.schedule(generation)
        return self.inequality * m, self.equality * m


PerVariable = float | Mapping[str, float]


@dataclass
class FAConfig:
    """Swarm size, generation budget, attraction/randomization parameters and seed.

    ``beta0``, ``gamma`` and ``init_scale`` are either one number for every
    variable or a mapping from variable name to value.  The randomization
    factor at generation ``n`` is ``alpha0 * alpha_decay**n``.
    """

    population: int = 30
    generations: int = 50
    beta0: PerVariable = 1.0
    gamma: PerVariable = 1.0
    alpha0: float = 0.9
    alpha_decay: float = 0.9
    rng_seed: int = 0
    init_scale: PerVariable = 1.0
    randomization: str = "gaussian"

    def __post_init__(self):
        if self.population < 2:
            raise ContractViolation("population must be at least 2")
        if self.generations < 1:
            raise ContractViolation("generations must be at least 1")
        if not 0.0 <= self.alpha0 <= 1.0:
            raise ContractViolation("alpha0 must lie in [0, 1]")
        if not 0.0 < self.alpha_decay < 1.0:
            raise ContractViolation("alpha_decay must lie in (0, 1)")
        if self.randomization not in ("gaussian", "uniform"):
            raise ContractViolation("randomization must be 'gaussian' or 'uniform'")

    def alpha(self, generation: int) -> float:
        return self.alpha0 * self.alpha_decay ** generation

    def per_variable(self, attr: str, name: str) -> float:
        value = getattr(self, attr)
        if isinstance(value, Mapping):
            return float(value[name])
        return float(value)


@dataclass
class SolveTrace:
    """Outcome of :func:`run_fa`.

    ``best_penalized`` holds the best-so-far penalized objective after each
    generation; it never increases.
    """

    best: DecisionSet
    best_penalized: list[float]
    final_objective: float
    max_inequality_violation: float
    max_equality_violation: float
    generations_run: int
    initial_penalized: float = math.nan
    wall_time: float = 0.0
    inequality_values: np.ndarray = field(default_factory=lambda: np.zeros(0))
    equality_values: np.ndarray = field(default_factory=lambda: np.zeros(0))


# ---------------------------------------------------------------------------
# Penalty and brightness
# ---------------------------------------------------------------------------

def _constraint_values(problem: ProblemSpec, x: DecisionSet) -> tuple[np.ndarray, np.ndarray]:
    g = np.asarray(problem.inequalities(x), dtype=float).reshape(-1)
    h = np.asarray(problem.equalities(x), dtype=float).reshape(-1)
    if not (np.all(np.isfinite(g)) and np.all(np.isfinite(h))):
        raise NumericError("constraint evaluator returned a non-finite value")
    return g, h


def _penalty_from_values(g: np.ndarray, h: np.ndarray, lam: np.ndarray, rho: np.ndarray) -> float:
    viol = np.maximum(g, 0.0)
    return float(np.dot(lam, viol * viol) + np.dot(rho, h * h))


def penalty(problem: ProblemSpec, weights: PenaltyWeights, x: DecisionSet, gen: int) -> float:
    """Quadratic penalty ``sum lam_l max(0, g_l)^2 + sum rho_k h_k^2`` at generation ``gen``."""
    g, h = _constraint_values(problem, x)
    lam, rho = weights.at(gen)
    if lam.size != g.size or rho.size != h.size:
        raise ContractViolation("penalty weights do not match the number of constraints")
    return _penalty_from_values(g, h, lam, rho)


def penalized_objective(problem: ProblemSpec, weights: PenaltyWeights, x: DecisionSet,
                        gen: int) -> float:
    f = float(problem.objective(x))
    if not math.isfinite(f):
        raise NumericError("objective evaluator returned a non-finite value")
    return problem.sign * f + penalty(problem, weights, x, gen)


def brightness(problem: ProblemSpec, weights: PenaltyWeights, x: DecisionSet,
               gen: int) -> float | None:
    """Reciprocal of the penalized objective, or ``None`` when it is not positive.

    Only for reporting: ranking always uses the penalized objective directly.
    """
    value = penalized_objective(problem, weights, x, gen)
    return 1.0 / value if value > 0 else None


# ---------------------------------------------------------------------------
# Flat layout helpers
# ---------------------------------------------------------------------------

class _Layout:
    """Maps a DecisionSet onto one flat complex vector and back."""

    def __init__(self, variables: Sequence[Variable]):
        self.variables = tuple(variables)
        sizes = [v.size for v in self.variables]
        self.starts = np.concatenate(([0], np.cumsum(sizes)[:-1])).astype(np.intp)
        self.size = int(sum(sizes))
        self.var_index = np.repeat(np.arange(len(sizes)), sizes)
        self.slices = [slice(int(s), int(s) + n) for s, n in zip(self.starts, sizes)]

    def flatten(self, x: Mapping[str, np.ndarray]) -> np.ndarray:
        return np.concatenate([np.asarray(x[v.name], dtype=complex).reshape(-1)
                               for v in self.variables])

    def unflatten(self, flat: np.ndarray) -> DecisionSet:
        return {v.name: flat[s].reshape(v.shape) for v, s in zip(self.variables, self.slices)}


def _draw_noise(rng: np.random.Generator, size: int, kind: str) -> np.ndarray:
    # Unit-variance circularly symmetric entries either way.
    if kind == "gaussian":
        parts = rng.standard_normal((2, size)) * math.sqrt(0.5)
    else:
        half_width = math.sqrt(1.5)
        parts = rng.uniform(-half_width, half_width, (2, size))
    return parts[0] + 1j * parts[1]


def _move_flat(xi: np.ndarray, xj: np.ndarray, layout: _Layout, beta0: np.ndarray,
               gamma: np.ndarray, alpha: float, rng: np.random.Generator, kind: str) -> np.ndarray:
    d = xj - xi
    sq = d.real * d.real + d.imag * d.imag
    r2 = np.add.reduceat(sq, layout.starts)
    attraction = beta0 * np.exp(-gamma * r2)
    return xi + attraction[layout.var_index] * d + alpha * _draw_noise(rng, layout.size, kind)


def _config_vectors(config: FAConfig, variables: Sequence[Variable]) -> tuple[np.ndarray, np.ndarray]:
    beta0 = np.array([config.per_variable("beta0", v.name) for v in variables])
    gamma = np.array([config.per_variable("gamma", v.name) for v in variables])
    return beta0, gamma


def move(xi: DecisionSet, xj: DecisionSet, config: FAConfig, gen: int,
         rng: np.random.Generator) -> DecisionSet:
    """Move firefly ``xi`` towards ``xj``.

    For every variable ``V``::

        V_i' = V_i + beta0 * exp(-gamma * r**2) * (V_j - V_i) + alpha(gen) * Lambda

    where ``r = ||V_j - V_i||_F`` is computed per variable and ``Lambda`` has
    i.i.d. unit-variance complex entries drawn from ``rng``.
    """
    if list(xi) != list(xj):
        raise ContractViolation(f"variable names differ: {list(xi)} vs {list(xj)}")
    variables = []
    for name, value in xi.items():
        if np.shape(value) != np.shape(xj[name]):
            raise ContractViolation(f"variable {name!r}: shape {np.shape(value)} vs {np.shape(xj[name])}")
        shape = np.shape(value)
        shape = (shape + (1, 1))[:2] if len(shape) < 2 else shape
        variables.append(Variable(name, tuple(shape)))
    layout = _Layout(variables)
    beta0, gamma = _config_vectors(config, variables)
    flat = _move_flat(layout.flatten(xi), layout.flatten(xj), layout, beta0, gamma,
                      config.alpha(gen), rng, config.randomization)
    return {name: flat[s].reshape(np.shape(xi[name]))
            for name, s in zip(xi, layout.slices)}


def init_population(problem: ProblemSpec, config: FAConfig,
                    rng: np.random.Generator) -> list[DecisionSet]:
    """Draw ``config.population`` random fireflies.

    Ordinary variables get complex Gaussian entries scaled by their
    ``init_scale``; unit-modulus variables get uniform random phases.
    """
    population = []
    for _ in range(config.population):
        firefly = {}
        for var in problem.variables:
            if var.unit_modulus:
                firefly[var.name] = np.exp(1j * rng.uniform(-np.pi, np.pi, var.shape))
            else:
                scale = config.per_variable("init_scale", var.name)
                firefly[var.name] = scale * _draw_noise(rng, var.size, "gaussian").reshape(var.shape)
        population.append(firefly)
    return population


# ---------------------------------------------------------------------------
# Main loop
# ---------------------------------------------------------------------------

def run_fa(problem: ProblemSpec, weights: PenaltyWeights, config: FAConfig,
           initial: Sequence[DecisionSet] | None = None) -> SolveTrace:
    """Run the generalized firefly algorithm and return the best firefly found.

    ``initial`` optionally replaces the random initial population (it must
    hold ``config.population`` fireflies).  The run is fully determined by
    ``config.rng_seed``.
    """
    started = time.perf_counter()
    layout = _Layout(problem.variables)
    beta0, gamma = _config_vectors(config, problem.variables)
    rng = np.random.default_rng(config.rng_seed)
    n_fireflies = config.population
    sign = problem.sign

    def evaluate(flat: np.ndarray, gen: int) -> float:
        x = layout.unflatten(flat)
        try:
            f = float(problem.objective(x))
            g, h = _constraint_values(problem, x)
        except NumericError as exc:
            raise EvaluationError(str(exc), gen) from exc
        if not math.isfinite(f):
            raise EvaluationError("objective evaluator returned a non-finite value", gen)
        lam, rho = weights.at(gen)
        return sign * f + _penalty_from_values(g, h, lam, rho)

    fireflies = initial if initial is not None else init_population(problem, config, rng)
    if len(fireflies) != n_fireflies:
        raise ContractViolation(f"expected {n_fireflies} initial fireflies, got {len(fireflies)}")
    for x in fireflies:
        problem.check(x)
    swarm = np.stack([layout.flatten(x) for x in fireflies])
    values = np.array([evaluate(row, 0) for row in swarm])

    order = np.argsort(values, kind="stable")
    swarm, values = swarm[order], values[order]
    best_flat, best_value = swarm[0].copy(), float(values[0])
    initial_value = best_value
    history: list[float] = []

    for n in range(1, config.generations + 1):
        alpha = config.alpha(n)
        vals = values.tolist()
        for i in range(n_fireflies):
            for j in range(n_fireflies):
                if vals[i] < best_value:
                    best_value, best_flat = vals[i], swarm[i].copy()
                if vals[j] < best_value:
                    best_value, best_flat = vals[j], swarm[j].copy()
                if vals[j] < vals[i]:
                    swarm[i] = _move_flat(swarm[i], swarm[j], layout, beta0, gamma, alpha,
                                          rng, config.randomization)
                    vals[i] = evaluate(swarm[i], n)
        values = np.asarray(vals)
        order = np.argsort(values, kind="stable")
        swarm, values = swarm[order], values[order]
        if values[0] < best_value:
            best_value, best_flat = float(values[0]), swarm[0].copy()
        history.append(best_value)

    best = {k: v.copy() for k, v in layout.unflatten(best_flat).items()}
    g, h = _constraint_values(problem, best)
    return SolveTrace(
        best=best,
        best_penalized=history,
        final_objective=float(problem.objective(best)),
        max_inequality_violation=float(np.max(g, initial=0.0)) if g.size else 0.0,
        max_equality_violation=float(np.max(np.abs(h), initial=0.0)),
        generations_run=config.generations,
        initial_penalized=initial_value,
        wall_time=time.perf_counter() - started,
        inequality_values=g,
        equality_values=h,
    )
