"""Monte Carlo experiment runner and reporting helpers.

Every solver works on a *normalized* copy of the scenario so that the firefly
search sees quantities of order one whatever the link budget:

* classic / cognitive / ris: noise powers become 1 and beamformers are
  expressed in units of ``power_unit``, the sum of single-user powers that
  meet each target (cognitive beams also respect the interference caps), so
  ``W = sqrt(power_unit) * X``;
* wpt: beamformers are expressed in units of ``sqrt(P)`` and the objective in
  units of a coherent-combining reference level.

Reported objectives, violations and beamformers are always in physical
units.  Minimization results are passed through a repair step that scales
``W`` up by the smallest factor meeting every SINR target; WPT results have
``theta`` projected to unit modulus and ``W`` scaled down into the budget.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Mapping, Sequence

import numpy as np
import scipy.linalg

from . import channels
from .baselines import downlink_power_recovery, duality_solve, sca_wpt_solve
from .errors import ConfigError, ContractViolation, FireflyBeamError, InfeasibleError
from .fa import DecisionSet, FAConfig, PenaltyWeights, ProblemSpec, SolveTrace, run_fa
from .problems import (
    ClassicScenario,
    CognitiveScenario,
    RisScenario,
    WptScenario,
    classic_problem,
    cognitive_problem,
    project_unit_modulus,
    ris_problem,
    total_power,
    wpt_objective,
    wpt_problem,
)

KINDS = ("classic", "cognitive", "ris", "wpt")
SOLVERS = ("fa", "iterative_printed", "iterative_recovered", "sca", "ao")
_SUPPORTED = {
    "classic": {"fa", "iterative_printed", "iterative_recovered"},
    "cognitive": {"fa"},
    "ris": {"fa", "ao"},
    "wpt": {"fa", "sca"},
}
SWEEP_AXES = ("sinr_db", "power_dbm", "generations", "population")
FEASIBILITY_TOL = 1e-3
CONVERGENCE_RTOL = 1e-3
CONVERGENCE_WINDOW = 5
PATTERN_FLOOR_DB = -200.0
CSV_HEADER = ("trial", "sweep", "solver", "objective_db", "objective_linear",
              "max_violation", "generations", "wall_ms")


# ---------------------------------------------------------------------------
# Normalization
# ---------------------------------------------------------------------------

def _top_eigenvalues(mats: np.ndarray) -> np.ndarray:
    return np.array([np.linalg.eigvalsh(0.5 * (A + A.conj().T))[-1] for A in mats])


def _positive_unit(value: float, what: str) -> float:
    if not (value > 0 and math.isfinite(value)):
        raise InfeasibleError(f"cannot normalize: {what} is {value}")
    return float(value)


def normalize_scenario(kind: str, scenario):
    """Return ``(normalized_scenario, unit)``.

    ``unit`` is the power unit for minimization problems and the budget ``P``
    for WPT (whose objective unit is available as ``wpt_objective_unit``).
    """
    if kind == "classic":
        unit = _positive_unit(np.sum(scenario.gamma * scenario.sigma2 / _top_eigenvalues(scenario.R)),
                              "the reference power")
        R = scenario.R * (unit / scenario.sigma2)[:, None, None]
        return ClassicScenario(R=R, sigma2=np.ones(scenario.users), gamma=scenario.gamma), unit
    if kind == "cognitive":
        unit = _positive_unit(cognitive_reference_power(scenario), "the reference power")
        R_s = scenario.R_s * (unit / scenario.sigma2)[:, None, None]
        R_p = scenario.R_p * (unit / scenario.I_to)[:, None, None] if scenario.primary_users else scenario.R_p
        return CognitiveScenario(R_s=R_s, R_p=R_p, sigma2=np.ones(scenario.users), eta=scenario.eta,
                                 I_to=np.ones(scenario.primary_users)), unit
    if kind == "ris":
        gains = scenario.elements * _top_eigenvalues(
            np.einsum("inm,ink->imk", scenario.cascade.conj(), scenario.cascade))
        unit = _positive_unit(np.sum(scenario.eta * scenario.sigma2 / gains), "the reference power")
        cascade = scenario.cascade * np.sqrt(unit / scenario.sigma2)[:, None, None]
        return RisScenario(cascade=cascade, sigma2=np.ones(scenario.users), eta=scenario.eta), unit
    if kind == "wpt":
        ref = wpt_objective_unit(scenario)
        cascade = scenario.cascade * math.sqrt(scenario.P / ref)
        return WptScenario(cascade=cascade, alpha=scenario.alpha, P=1.0), scenario.P
    raise ConfigError(f"unknown scenario kind {kind!r}")


def cognitive_reference_power(scenario: CognitiveScenario, max_steps: int = 200) -> float:
    """Sum over secondary users of a single-user power that respects the interference caps.

    For each user the beam is the top generalized eigenvector of
    ``(R_s, I + mu * sum_k R_p,k / I_to,k)``, scaled to meet the SINR target
    without co-channel interference; ``mu`` doubles until every cap holds.
    Inter-user interference is ignored, so this is a scale, not a bound.
    """
    m = scenario.antennas
    if scenario.primary_users == 0:
        return float(np.sum(scenario.eta * scenario.sigma2 / _top_eigenvalues(scenario.R_s)))
    leakage = np.einsum("k,kmn->mn", 1.0 / scenario.I_to, scenario.R_p)
    first_mu = 1.0 / max(np.linalg.norm(leakage, 2), np.finfo(float).tiny)
    total = 0.0
    for t in range(scenario.users):
        target = scenario.eta[t] * scenario.sigma2[t]
        mu = 0.0
        for _ in range(max_steps):
            _, vectors = scipy.linalg.eigh(scenario.R_s[t], np.eye(m) + mu * leakage)
            v = vectors[:, -1]
            w = v * math.sqrt(target / max(np.real(np.vdot(v, scenario.R_s[t] @ v)), np.finfo(float).tiny))
            leak = np.real(np.einsum("m,kmn,n->k", w.conj(), scenario.R_p, w)) / scenario.I_to
            if np.all(leak <= 1.0):
                break
            mu = 2.0 * mu if mu > 0 else first_mu
        total += float(np.vdot(w, w).real)
    return total


def wpt_objective_unit(scenario: WptScenario) -> float:
    """Reference received power ``P N_t sum_i alpha_i ||G_i||_F^2 / U``."""
    energy = np.sum(scenario.alpha * np.sum(np.abs(scenario.cascade) ** 2, axis=(1, 2)))
    ref = scenario.P * scenario.elements * energy / scenario.users
    return float(ref) if ref > 0 else scenario.P


# ---------------------------------------------------------------------------
# Feasibility, repair and reporting
# ---------------------------------------------------------------------------

def relative_violation(problem: ProblemSpec, x: DecisionSet) -> float:
    """Largest constraint violation, each divided by its natural scale."""
    g = np.asarray(problem.inequalities(x), dtype=float).reshape(-1)
    h = np.asarray(problem.equalities(x), dtype=float).reshape(-1)
    parts = [0.0]
    if g.size:
        parts.append(float(np.max(np.maximum(g, 0.0) / problem.inequality_scale)))
    if h.size:
        parts.append(float(np.max(np.abs(h) / problem.equality_scale)))
    return max(parts)


def _sinr_scale(own: np.ndarray, interference: np.ndarray, target: np.ndarray,
                noise: np.ndarray) -> float:
    # Smallest s^2 >= 1 with own*s^2 >= target*(interference*s^2 + noise).
    margin = own - target * interference
    if np.any(margin <= 0):
        raise InfeasibleError("interference-limited: no power scaling meets the SINR targets")
    return max(1.0, float(np.max(target * noise / margin)))


def _forms(W: np.ndarray, R: np.ndarray) -> np.ndarray:
    return np.real(np.einsum("mj,kmn,nj->kj", W.conj(), R, W))


def repair_classic(W, scenario: ClassicScenario) -> np.ndarray:
    forms = _forms(np.asarray(W, dtype=complex), scenario.R)
    own = np.diag(forms)
    s2 = _sinr_scale(own, forms.sum(axis=1) - own, scenario.gamma, scenario.sigma2)
    return np.asarray(W) * math.sqrt(s2)


def repair_cognitive(W, scenario: CognitiveScenario) -> np.ndarray:
    forms = _forms(np.asarray(W, dtype=complex), scenario.R_s)
    own = np.diag(forms)
    s2 = _sinr_scale(own, forms.sum(axis=1) - own, scenario.eta, scenario.sigma2)
    return np.asarray(W) * math.sqrt(s2)


def repair_ris(W, theta, scenario: RisScenario) -> tuple[np.ndarray, np.ndarray]:
    theta = np.asarray(theta, dtype=complex)
    theta = theta / np.maximum(1.0, np.abs(theta))
    a = np.einsum("n,inm,mj->ij", theta.reshape(-1).conj(), scenario.cascade, np.asarray(W))
    amp = np.abs(a) ** 2
    own = np.diag(amp)
    s2 = _sinr_scale(own, amp.sum(axis=1) - own, scenario.eta, scenario.sigma2)
    return np.asarray(W) * math.sqrt(s2), theta


def repair_wpt(W, theta, scenario: WptScenario) -> tuple[np.ndarray, np.ndarray]:
    theta = project_unit_modulus(theta)
    power = total_power(W)
    W = np.asarray(W)
    if power > scenario.P:
        W = W * math.sqrt(scenario.P / power)
    return W, theta


@dataclass
class Solution:
    """One solver's reported result in physical units."""

    solver: str
    objective: float
    max_violation: float
    feasible: bool
    generations: int
    wall_time: float
    variables: dict[str, np.ndarray] = field(default_factory=dict)
    trace: list[float] | None = None
    raw_objective: float = math.nan


def _physical_problem(kind: str, scenario) -> ProblemSpec:
    return {"classic": classic_problem, "cognitive": cognitive_problem,
            "ris": ris_problem, "wpt": wpt_problem}[kind](scenario)


def report(kind: str, scenario, x: DecisionSet) -> tuple[float, float, bool, DecisionSet]:
    """Repair ``x`` (physical units) and return ``(objective, raw_violation, feasible, repaired)``.

    ``feasible`` requires the raw relative violation to be within
    :data:`FEASIBILITY_TOL`, the repair to succeed and the repaired point to be
    within the same tolerance.
    """
    problem = _physical_problem(kind, scenario)
    raw_violation = relative_violation(problem, x)
    try:
        if kind == "classic":
            repaired = {"W": repair_classic(x["W"], scenario)}
        elif kind == "cognitive":
            repaired = {"W": repair_cognitive(x["W"], scenario)}
        elif kind == "ris":
            W, theta = repair_ris(x["W"], x["theta"], scenario)
            repaired = {"W": W, "theta": theta}
        else:
            W, theta = repair_wpt(x["W"], x["theta"], scenario)
            repaired = {"W": W, "theta": theta}
    except InfeasibleError:
        return float(problem.objective(x)), raw_violation, False, x
    feasible = (raw_violation <= FEASIBILITY_TOL
                and relative_violation(problem, repaired) <= FEASIBILITY_TOL)
    return float(problem.objective(repaired)), raw_violation, feasible, repaired


# ---------------------------------------------------------------------------
# Solvers
# ---------------------------------------------------------------------------

@dataclass
class FASettings:
    """Firefly parameters used by the harness (in normalized units).

    ``inequality_weight`` and ``equality_weight`` are the base penalty
    constants ``kappa``; constraint ``l`` gets ``(kappa / scale_l)**2 * n**2``
    at generation ``n``.
    """

    population: int = 30
    generations: int = 50
    beta0: float = 1.0
    gamma: float = 0.01
    alpha0: float = 0.9
    alpha_decay: float = 0.9
    inequality_weight: float = 30.0
    equality_weight: float = 0.1
    randomization: str = "gaussian"

    def config(self, seed: int, init_scale) -> FAConfig:
        return FAConfig(population=self.population, generations=self.generations,
                        beta0=self.beta0, gamma=self.gamma, alpha0=self.alpha0,
                        alpha_decay=self.alpha_decay, rng_seed=seed, init_scale=init_scale,
                        randomization=self.randomization)

    def weights(self, problem: ProblemSpec) -> PenaltyWeights:
        return PenaltyWeights((self.inequality_weight / problem.inequality_scale) ** 2,
                              (self.equality_weight / problem.equality_scale) ** 2)


def convergence_generation(trace: Sequence[float], rtol: float = CONVERGENCE_RTOL,
                           window: int = CONVERGENCE_WINDOW) -> int | None:
    """Generation (1-based) at which the trace levels off.

    That is the first generation after which every step changes the value by
    less than ``rtol`` relative, provided at least ``window`` such steps
    follow.  Returns ``None`` if the trace is still moving near its end.
    """
    values = np.asarray(trace, dtype=float)
    if values.size <= window:
        return None
    change = np.abs(np.diff(values)) / np.maximum(np.abs(values[:-1]), np.finfo(float).tiny)
    moving = np.flatnonzero(change >= rtol)
    settled_from = int(moving[-1]) + 1 if moving.size else 0
    if values.size - 1 - settled_from < window:
        return None
    return settled_from + 1


def solve_fa(kind: str, scenario, settings: FASettings, seed: int) -> Solution:
    started = time.perf_counter()
    normalized, unit = normalize_scenario(kind, scenario)
    problem = _physical_problem(kind, normalized)
    users = problem.variables[0].shape[1]
    antennas = problem.variables[0].shape[0]
    init_scale = {"W": math.sqrt(1.0 / (users * antennas)), "theta": 1.0}
    trace: SolveTrace = run_fa(problem, settings.weights(problem), settings.config(seed, init_scale))
    x = {name: np.array(value) for name, value in trace.best.items()}
    x["W"] = x["W"] * math.sqrt(unit)
    objective, violation, feasible, repaired = report(kind, scenario, x)
    raw = float(_physical_problem(kind, scenario).objective(x))
    generations = convergence_generation(trace.best_penalized)
    return Solution("fa", objective, violation, feasible,
                    generations if generations is not None else trace.generations_run,
                    time.perf_counter() - started, repaired, trace.best_penalized, raw)


def solve_duality(scenario: ClassicScenario, T: int, recovered: bool) -> Solution:
    started = time.perf_counter()
    normalized, unit = normalize_scenario("classic", scenario)
    W, state = duality_solve(normalized, T)
    if recovered:
        W = downlink_power_recovery(normalized, state.w_hat)
    W = W * math.sqrt(unit)
    problem = classic_problem(scenario)
    violation = relative_violation(problem, {"W": W})
    return Solution("iterative_recovered" if recovered else "iterative_printed",
                    total_power(W), violation, violation <= FEASIBILITY_TOL, state.iteration,
                    time.perf_counter() - started, {"W": W})


def solve_sca(scenario: WptScenario, m0: int = 10) -> Solution:
    started = time.perf_counter()
    normalized, _ = normalize_scenario("wpt", scenario)
    state = sca_wpt_solve(normalized, m0=m0)
    W = state.w * math.sqrt(scenario.P)
    x = {"W": W, "theta": state.theta}
    objective = wpt_objective(W, state.theta, scenario)
    violation = relative_violation(wpt_problem(scenario), x)
    return Solution("sca", objective, violation, violation <= FEASIBILITY_TOL, m0,
                    time.perf_counter() - started, x)


# ---------------------------------------------------------------------------
# Experiments
# ---------------------------------------------------------------------------

@dataclass
class ExperimentPlan:
    """What to run: scenario kind, optional sweep, trials, solvers and seeds.

    ``scenario`` overrides keys of :func:`fireflybeam.channels.default_config`.
    ``duality_iterations`` defaults to the FA generation count.
    """

    kind: str
    trials: int = 1
    solvers: tuple[str, ...] = ("fa",)
    sweep_axis: str | None = None
    sweep_values: tuple[float, ...] = ()
    base_seed: int = 0
    fa: FASettings = field(default_factory=FASettings)
    scenario: dict[str, Any] = field(default_factory=dict)
    duality_iterations: int | None = None
    sca_iterations: int = 10
    workers: int = 1

    def __post_init__(self):
        self.solvers = tuple(self.solvers)
        self.sweep_values = tuple(self.sweep_values)
        if self.kind not in KINDS:
            raise ConfigError(f"unknown scenario kind {self.kind!r}; expected one of {KINDS}")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if not self.solvers:
            raise ConfigError("at least one solver is required")
        unsupported = [s for s in self.solvers if s not in _SUPPORTED[self.kind]]
        if unsupported:
            raise ConfigError(f"solvers {unsupported} do not apply to {self.kind!r} "
                              f"(supported: {sorted(_SUPPORTED[self.kind])})")
        if self.sweep_axis is not None:
            if self.sweep_axis not in SWEEP_AXES:
                raise ConfigError(f"unknown sweep axis {self.sweep_axis!r}; expected one of {SWEEP_AXES}")
            if not self.sweep_values:
                raise ConfigError("a sweep axis needs at least one value")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")

    def points(self) -> list[float | None]:
        return list(self.sweep_values) if self.sweep_axis else [None]


@dataclass
class ResultRow:
    trial: int
    sweep: float | None
    solver: str
    objective_db: float
    objective_linear: float
    max_violation: float
    generations: int
    wall_ms: float
    feasible: bool = True
    error: str | None = None


def to_db(linear: float) -> float:
    return 10.0 * math.log10(linear) if linear > 0 else -math.inf


def _row(trial: int, sweep, solution: Solution) -> ResultRow:
    return ResultRow(trial, sweep, solution.solver, to_db(solution.objective), solution.objective,
                     solution.max_violation, int(solution.generations),
                     solution.wall_time * 1e3, bool(solution.feasible))


def _error_row(trial: int, sweep, solver: str, message: str) -> ResultRow:
    return ResultRow(trial, sweep, solver, math.nan, math.nan, math.nan, 0, 0.0, False, message)


def scenario_seed(base_seed: int, trial: int) -> np.random.SeedSequence:
    """Channel draws depend on the trial only, so sweep points share channels."""
    return np.random.SeedSequence(entropy=base_seed, spawn_key=(trial,))


def solver_seed(base_seed: int, trial: int, point: int, solver: int) -> int:
    ss = np.random.SeedSequence(entropy=base_seed, spawn_key=(trial, point, solver))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _point_settings(plan: ExperimentPlan, value) -> tuple[dict, FASettings]:
    config = channels.default_config(plan.kind)
    config.update(plan.scenario)
    settings = plan.fa
    if plan.sweep_axis in ("sinr_db", "power_dbm"):
        config[plan.sweep_axis] = value
    elif plan.sweep_axis == "generations":
        settings = replace(settings, generations=int(value))
    elif plan.sweep_axis == "population":
        settings = replace(settings, population=int(value))
    return config, settings


def run_solver(kind: str, solver: str, scenario, settings: FASettings, seed: int,
               duality_iterations: int, sca_iterations: int) -> Solution:
    if solver == "fa":
        return solve_fa(kind, scenario, settings, seed)
    if solver in ("iterative_printed", "iterative_recovered"):
        return solve_duality(scenario, duality_iterations, solver == "iterative_recovered")
    if solver == "sca":
        return solve_sca(scenario, sca_iterations)
    raise InfeasibleError("baseline unavailable")


def _run_cell(plan: ExperimentPlan, trial: int, point_index: int) -> list[ResultRow]:
    value = plan.points()[point_index]
    config, settings = _point_settings(plan, value)
    rows = []
    try:
        scenario = channels.build_scenario(plan.kind, config,
                                           np.random.default_rng(scenario_seed(plan.base_seed, trial)))
    except FireflyBeamError as exc:
        return [_error_row(trial, value, s, f"scenario: {exc}") for s in plan.solvers]
    T = plan.duality_iterations or settings.generations
    for k, solver in enumerate(plan.solvers):
        seed = solver_seed(plan.base_seed, trial, point_index, k)
        try:
            solution = run_solver(plan.kind, solver, scenario, settings, seed, T, plan.sca_iterations)
        except (FireflyBeamError, ArithmeticError, ValueError) as exc:
            rows.append(_error_row(trial, value, solver, str(exc)))
            continue
        rows.append(_row(trial, value, solution))
    return rows


def run_experiment(plan: ExperimentPlan) -> list[ResultRow]:
    """Run every (trial, sweep point, solver) combination.

    Solver failures become rows with ``error`` set; the run continues.  The
    output is deterministic for a fixed ``base_seed`` regardless of
    ``workers``.
    """
    cells = [(t, p) for t in range(plan.trials) for p in range(len(plan.points()))]
    if plan.workers == 1:
        results = [_run_cell(plan, t, p) for t, p in cells]
    else:
        with ProcessPoolExecutor(max_workers=plan.workers) as pool:
            results = list(pool.map(_run_cell, [plan] * len(cells),
                                    [t for t, _ in cells], [p for _, p in cells]))
    return [row for cell in results for row in cell]


def summarize(rows: Sequence[ResultRow], exclude_infeasible: Sequence[str] = ("fa",)) -> dict:
    """Mean objective per (sweep, solver); infeasible rows of the listed solvers are counted, not averaged."""
    groups: dict[tuple, dict] = {}
    for row in rows:
        key = (row.sweep, row.solver)
        g = groups.setdefault(key, {"values": [], "infeasible": 0, "errors": 0})
        if row.error is not None:
            g["errors"] += 1
        elif not row.feasible and row.solver in exclude_infeasible:
            g["infeasible"] += 1
        else:
            g["values"].append(row.objective_linear)
    summary = {}
    for key, g in sorted(groups.items(), key=lambda kv: (str(kv[0][0]), kv[0][1])):
        values = np.sort(np.asarray(g["values"], dtype=float))
        mean = float(np.mean(values)) if values.size else math.nan
        summary[key] = {"mean_linear": mean, "mean_db": to_db(mean) if values.size else math.nan,
                        "median_linear": float(np.median(values)) if values.size else math.nan,
                        "count": int(values.size), "infeasible": g["infeasible"],
                        "errors": g["errors"]}
    return summary


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

def _json_value(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def rows_to_csv(rows: Sequence[ResultRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow([getattr(row, name) for name in CSV_HEADER])
    return buf.getvalue()


def rows_to_json(rows: Sequence[ResultRow]) -> str:
    return json.dumps([{k: _json_value(v) for k, v in asdict(row).items()} for row in rows],
                      indent=2)


def rows_from_json(text: str) -> list[ResultRow]:
    def restore(d):
        d = dict(d)
        for name in ("objective_db", "objective_linear", "max_violation"):
            if d[name] is None:
                d[name] = math.nan
        return ResultRow(**d)

    return [restore(d) for d in json.loads(text)]


def emit(rows: Sequence[ResultRow], fmt: str, path: str | Path | None = None) -> str:
    """Serialize rows as CSV or JSON; write UTF-8 to ``path`` when given."""
    if not rows:
        raise ContractViolation("no rows to emit")
    if fmt == "csv":
        text = rows_to_csv(rows)
    elif fmt == "json":
        text = rows_to_json(rows) + "\n"
    else:
        raise ContractViolation(f"format must be 'csv' or 'json', got {fmt!r}")
    if path is not None:
        path = Path(path)
        try:
            path.write_text(text, encoding="utf-8")
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc}") from exc
    return text


# ---------------------------------------------------------------------------
# Radiation pattern and complexity
# ---------------------------------------------------------------------------

def radiation_pattern(W, angles_deg, spacing_ratio: float = 0.5) -> np.ndarray:
    """Array gain ``10 log10(sum_t |a(angle)^H w_t|^2)`` per angle, floored at -200 dB.

    ``a`` is :func:`fireflybeam.channels.steering_vector`, whose outer product
    ``a a^H`` is the zero-spread limit of
    :func:`fireflybeam.channels.angular_covariance`, so the pattern's nulls
    line up with the directions protected by interference constraints.
    """
    W = np.asarray(W, dtype=complex)
    if W.ndim == 1:
        W = W[:, None]
    angles = np.atleast_1d(np.asarray(angles_deg, dtype=float))
    if np.any(np.abs(angles) > 90):
        raise ContractViolation("angles must lie in [-90, 90] degrees")
    A = np.array([channels.steering_vector(a, W.shape[0], spacing_ratio) for a in angles])
    gain = np.sum(np.abs(A.conj() @ W) ** 2, axis=1)
    with np.errstate(divide="ignore"):
        db = 10.0 * np.log10(gain)
    return np.maximum(db, PATTERN_FLOOR_DB)


def _ln_inv(eps: float) -> float:
    if not 0 < eps < 1:
        raise ConfigError(f"epsilon must lie in (0, 1), got {eps}")
    return math.log(1.0 / eps)


def _iterative_classic(T, U, M_t):
    return T * (U * (M_t ** 3 + M_t ** 2 + M_t * math.log2(M_t)) + U)


def _firefly_classic(T, N, U, M_t):
    inner = N * U * M_t * (1 + U * M_t)
    return (T * N ** 2 * (M_t ** 2 + inner) + T * N * math.log2(N) + N * M_t * U
            + inner + N * math.log2(N))


def _interior_point_cognitive(U, K, M_t, epsilon):
    return (_ln_inv(epsilon) * math.sqrt(U * (M_t + 1) + K)
            * ((M_t ** 2 + 1) * (U + K) + U * M_t ** 2 * (M_t ** 2 + M_t) + M_t ** 4) * M_t ** 2)


def _firefly_cognitive(T, N, U, K, M_t):
    inner = N * U * M_t * (1 + U * M_t + K * M_t)
    return (T * N ** 2 * (M_t ** 2 + inner) + T * N * math.log2(N) + N * M_t * U
            + inner + N * math.log2(N))


def _alternating_ris(n0, U, M_t, N_t, epsilon):
    ln = _ln_inv(epsilon)
    tau1 = (ln * math.sqrt(U * (M_t + 1))
            * ((M_t ** 2 + 1) * U + U * M_t ** 2 * (M_t ** 2 + M_t) + M_t ** 4) * M_t ** 2)
    tau2 = ln * math.sqrt(U + 2 * N_t) * ((N_t ** 2 + 1) * (U + 2 * N_t ** 2) + N_t ** 4) * N_t ** 2
    return n0 * (tau1 + tau2)


def _firefly_ris(T, N, U, M_t, N_t):
    per_firefly = U * M_t + U * (N_t ** 2 + M_t * N_t) + N_t
    return (T * N ** 2 * (M_t ** 2 + N_t + N * per_firefly) + T * N * math.log2(N)
            + N * M_t * U + N_t * N + N * math.log2(N) + N * per_firefly)


def _sca_power_transfer(m0, U, M_t, N_t):
    return m0 * (U * M_t * (M_t + N_t) + M_t ** 3 + M_t * math.log2(M_t) + N_t ** 3 + N_t ** 2 * M_t)


_ESTIMATES: dict[int, Callable[..., float]] = {
    1: _iterative_classic, 2: _firefly_classic, 3: _interior_point_cognitive, 4: _firefly_cognitive,
    5: _alternating_ris, 6: _firefly_ris, 7: _sca_power_transfer, 8: _firefly_ris,
}
ESTIMATE_PARAMETERS = {
    1: ("T", "U", "M_t"),
    2: ("T", "N", "U", "M_t"),
    3: ("U", "K", "M_t", "epsilon"),
    4: ("T", "N", "U", "K", "M_t"),
    5: ("n0", "U", "M_t", "N_t", "epsilon"),
    6: ("T", "N", "U", "M_t", "N_t"),
    7: ("m0", "U", "M_t", "N_t"),
    8: ("T", "N", "U", "M_t", "N_t"),
}
ESTIMATE_NAMES = {
    1: "iterative classic beamforming",
    2: "firefly classic beamforming",
    3: "interior-point cognitive beamforming",
    4: "firefly cognitive beamforming",
    5: "alternating optimization for RIS beamforming",
    6: "firefly RIS beamforming",
    7: "SCA for RIS power transfer",
    8: "firefly RIS power transfer",
}


def complexity_estimate(which: int, params: Mapping[str, float]) -> float:
    """Operation-count estimate of one algorithm (``M log M`` terms in base 2).

    ``which`` selects the algorithm (see :data:`ESTIMATE_NAMES`); ``params`` must
    hold every name in ``ESTIMATE_PARAMETERS[which]``.

    Raises:
        ConfigError: naming the missing parameters.
    """
    if which not in _ESTIMATES:
        raise ConfigError(f"estimate must be one of 1..8, got {which}")
    names = ESTIMATE_PARAMETERS[which]
    missing = tuple(n for n in names if n not in params)
    if missing:
        raise ConfigError(f"estimate {which} ({ESTIMATE_NAMES[which]}) is incomplete", missing)
    return float(_ESTIMATES[which](**{n: params[n] for n in names}))


def order_of_magnitude(value: float) -> int:
    return int(math.floor(math.log10(value)))
