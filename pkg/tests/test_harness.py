import json
import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fireflybeam import cli
from fireflybeam.channels import build_scenario, default_config, steering_vector
from fireflybeam.errors import ConfigError, ContractViolation
from fireflybeam.harness import (
    CSV_HEADER,
    ExperimentPlan,
    FASettings,
    ResultRow,
    complexity_estimate,
    convergence_generation,
    emit,
    normalize_scenario,
    order_of_magnitude,
    radiation_pattern,
    report,
    rows_from_json,
    run_experiment,
    summarize,
)
from fireflybeam.problems import ClassicScenario, classic_constraints, total_power

# Operation counts evaluated at 50 significant digits.
ESTIMATE_VALUES = [
    (1, {"T": 30, "U": 2, "M_t": 4}, 5340.0),
    (2, {"T": 30, "N": 30, "U": 2, "M_t": 4}, 58758963.408),
    (2, {"T": 30, "N": 30, "U": 2, "M_t": 6}, 127341603.408),
    (2, {"T": 30, "N": 30, "U": 2, "M_t": 8}, 222061203.408),
    (3, {"U": 3, "K": 2, "M_t": 8, "epsilon": 0.01}, 28957997.414),
    (4, {"T": 80, "N": 100, "U": 3, "K": 2, "M_t": 8}, 78771354615.235),
    (5, {"n0": 10, "U": 2, "M_t": 3, "N_t": 30, "epsilon": 0.01}, 7.94207155159e11),
    (5, {"n0": 10, "U": 2, "M_t": 8, "N_t": 30, "epsilon": 0.01}, 7.94374867324e11),
    (6, {"T": 50, "N": 120, "U": 2, "M_t": 3, "N_t": 30}, 1.7421076851e11),
    (6, {"T": 50, "N": 120, "U": 2, "M_t": 8, "N_t": 30}, 2.0103440691e11),
    (7, {"m0": 10, "U": 2, "M_t": 3, "N_t": 30}, 299297.5489),
    (7, {"m0": 10, "U": 2, "M_t": 8, "N_t": 30}, 353440.0),
    (8, {"T": 50, "N": 100, "U": 2, "M_t": 3, "N_t": 30}, 1.0081973908e11),
    (8, {"T": 50, "N": 100, "U": 2, "M_t": 8, "N_t": 30}, 1.1634727108e11),
]

FAST = FASettings(population=8, generations=6)


def row(**kw):
    base = dict(trial=0, sweep=None, solver="fa", objective_db=0.0, objective_linear=1.0,
                max_violation=0.0, generations=1, wall_ms=1.0)
    base.update(kw)
    return ResultRow(**base)


class TestExperiment:
    def test_single_row(self):
        rows = run_experiment(ExperimentPlan("classic", trials=1, solvers=("fa",), fa=FAST))
        assert len(rows) == 1
        assert rows[0].solver == "fa" and rows[0].error is None

    def test_deterministic(self):
        plan = ExperimentPlan("classic", trials=2, fa=FAST,
                              solvers=("fa", "iterative_printed", "iterative_recovered"))
        strip = lambda rows: [replace(r, wall_ms=0.0) for r in rows]  # noqa: E731
        assert strip(run_experiment(plan)) == strip(run_experiment(plan))

    def test_workers_do_not_change_results(self):
        plan = ExperimentPlan("ris", trials=2, solvers=("fa",), fa=FAST)
        serial = [(r.objective_linear, r.max_violation) for r in run_experiment(plan)]
        plan.workers = 2
        parallel = [(r.objective_linear, r.max_violation) for r in run_experiment(plan)]
        assert serial == parallel

    def test_sweep_shares_channels(self):
        plan = ExperimentPlan("classic", trials=1, solvers=("iterative_recovered",),
                              sweep_axis="sinr_db", sweep_values=(0.0, 10.0))
        low, high = run_experiment(plan)
        assert (low.sweep, high.sweep) == (0.0, 10.0)
        assert high.objective_linear > low.objective_linear

    def test_ao_reported_unavailable(self):
        rows = run_experiment(ExperimentPlan("ris", trials=1, solvers=("ao",)))
        assert rows[0].error == "baseline unavailable"
        assert math.isnan(rows[0].objective_linear)

    def test_wpt_rows(self):
        rows = run_experiment(ExperimentPlan("wpt", trials=1, solvers=("fa", "sca"), fa=FAST))
        assert [r.solver for r in rows] == ["fa", "sca"]
        assert all(r.error is None and r.objective_linear > 0 for r in rows)
        assert rows[1].feasible

    def test_cognitive_row(self):
        rows = run_experiment(ExperimentPlan("cognitive", trials=1, fa=FAST))
        assert rows[0].error is None and rows[0].objective_linear > 0

    def test_db_consistent_with_linear(self):
        rows = run_experiment(ExperimentPlan("classic", trials=2, fa=FAST,
                                             solvers=("fa", "iterative_recovered")))
        for r in rows:
            assert r.objective_db == pytest.approx(10 * math.log10(r.objective_linear), abs=1e-9)

    @pytest.mark.parametrize("kwargs", [
        {"kind": "mimo"},
        {"kind": "classic", "trials": 0},
        {"kind": "classic", "solvers": ()},
        {"kind": "classic", "solvers": ("sca",)},
        {"kind": "classic", "sweep_axis": "antennas", "sweep_values": (1,)},
        {"kind": "classic", "sweep_axis": "sinr_db"},
    ])
    def test_plan_validation(self, kwargs):
        with pytest.raises(ConfigError):
            ExperimentPlan(**kwargs)

    def test_scenario_failure_recorded(self):
        plan = ExperimentPlan("classic", trials=1, solvers=("fa",), scenario={"min_distance_km": -1})
        rows = run_experiment(plan)
        assert rows[0].error is not None and rows[0].error.startswith("scenario")


class TestReporting:
    def test_repair_scales_to_targets(self):
        e = np.eye(2)
        sc = ClassicScenario([np.outer(e[0], e[0]), np.outer(e[1], e[1])], [1, 1], [4, 9])
        W = np.diag([1.999, 2.999]).astype(complex)
        objective, violation, feasible, repaired = report("classic", sc, {"W": W})
        assert feasible and violation < 1e-3
        assert np.all(classic_constraints(repaired["W"], sc) <= 1e-12)
        assert objective == pytest.approx(total_power(repaired["W"]))

    def test_far_from_feasible_is_flagged(self):
        sc = ClassicScenario([np.eye(2)], [1.0], [4.0])
        _, violation, feasible, _ = report("classic", sc, {"W": np.array([[1.0], [0.0]])})
        assert violation == pytest.approx(0.75) and not feasible

    def test_normalization_unit(self):
        sc = build_scenario("classic", default_config("classic"), np.random.default_rng(0))
        normalized, unit = normalize_scenario("classic", sc)
        assert np.allclose(normalized.sigma2, 1.0)
        expected = sum(sc.gamma[i] * sc.sigma2[i] / np.linalg.eigvalsh(sc.R[i])[-1] for i in range(2))
        assert unit == pytest.approx(expected, rel=1e-12)

    def test_summary_excludes_infeasible_fa(self):
        rows = [row(objective_linear=2.0), row(objective_linear=100.0, feasible=False),
                row(solver="sca", objective_linear=4.0, feasible=False), row(error="boom")]
        s = summarize(rows)
        assert s[(None, "fa")]["mean_linear"] == 2.0
        assert s[(None, "fa")]["infeasible"] == 1 and s[(None, "fa")]["errors"] == 1
        assert s[(None, "sca")]["mean_linear"] == 4.0

    @given(st.permutations(list(range(6))))
    def test_summary_order_invariant(self, perm):
        rows = [row(trial=k, objective_linear=float(k + 1)) for k in range(6)]
        a = summarize(rows)[(None, "fa")]["mean_linear"]
        b = summarize([rows[k] for k in perm])[(None, "fa")]["mean_linear"]
        assert a == b


class TestConvergence:
    def test_levels_off(self):
        trace = [10, 5, 2, 1.5, 1.2, 1.1, 1.1, 1.1, 1.1, 1.1, 1.1, 1.1]
        assert convergence_generation(trace) == 6

    def test_still_moving(self):
        assert convergence_generation(list(np.linspace(10, 1, 20))) is None

    def test_flat_from_start(self):
        assert convergence_generation([1.0] * 10) == 1


class TestEmit:
    def test_csv_one_row(self):
        text = emit([row()], "csv")
        lines = text.strip().split("\n")
        assert len(lines) == 2
        assert lines[0] == ",".join(CSV_HEADER)

    def test_json_round_trip(self, tmp_path):
        rows = [row(), row(trial=1, sweep=5.0, solver="sca", objective_db=-3.0, objective_linear=0.5),
                row(solver="ao", objective_db=math.nan, objective_linear=math.nan,
                    max_violation=math.nan, feasible=False, error="baseline unavailable")]
        path = tmp_path / "rows.json"
        emit(rows, "json", path)
        back = rows_from_json(path.read_text(encoding="utf-8"))
        assert back[:2] == rows[:2]
        assert back[2].error == "baseline unavailable" and math.isnan(back[2].objective_linear)

    def test_empty_and_bad_format(self, tmp_path):
        with pytest.raises(ContractViolation):
            emit([], "csv")
        with pytest.raises(ContractViolation):
            emit([row()], "xml")

    def test_unwritable_path(self, tmp_path):
        with pytest.raises(OSError, match="absent"):
            emit([row()], "csv", tmp_path / "absent" / "x.csv")


class TestPattern:
    def test_matched_beam_gain(self):
        a = steering_vector(0.0, 8)
        gain = radiation_pattern(a / np.sqrt(8), [0.0])[0]
        assert gain == pytest.approx(9.030899869919436, abs=1e-12)

    def test_exact_null_floored(self):
        a = steering_vector(20.0, 4)
        w = np.array([a[1], -a[0], 0, 0]).conj()
        assert abs(np.vdot(a, w)) < 1e-15
        assert radiation_pattern(w, [20.0])[0] == -200.0

    def test_out_of_range(self):
        with pytest.raises(ContractViolation):
            radiation_pattern(np.ones(4), [95.0])


class TestComplexity:
    @pytest.mark.parametrize("which,params,expected", ESTIMATE_VALUES)
    def test_values(self, which, params, expected):
        assert complexity_estimate(which, params) == pytest.approx(expected, rel=1e-9)

    def test_missing_parameter_named(self):
        with pytest.raises(ConfigError) as info:
            complexity_estimate(5, {"n0": 10, "U": 2, "M_t": 3})
        assert set(info.value.missing) == {"N_t", "epsilon"}

    def test_bad_epsilon(self):
        with pytest.raises(ConfigError):
            complexity_estimate(3, {"U": 1, "K": 1, "M_t": 2, "epsilon": 2.0})

    def test_order(self):
        assert order_of_magnitude(5340.0) == 3
        assert order_of_magnitude(1e8) == 8


class TestCli:
    def test_complexity(self, capsys):
        assert cli.main(["complexity", "1", "T=30", "U=2", "M_t=4"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["value"] == 5340.0 and out["order"] == 3

    def test_missing_parameter_exit_code(self, capsys):
        assert cli.main(["complexity", "7", "m0=10"]) == 1
        err = json.loads(capsys.readouterr().err)
        assert err["type"] == "ConfigError" and "N_t" in err["missing"]

    def test_run_writes_csv(self, tmp_path, capsys):
        out = tmp_path / "r.csv"
        code = cli.main(["classic", "--trials", "1", "--fireflies", "6", "--generations", "4",
                         "--solvers", "fa,iterative_recovered", "--out", str(out)])
        assert code == 0
        lines = out.read_text(encoding="utf-8").strip().split("\n")
        assert len(lines) == 3 and lines[0].startswith("trial,sweep,solver")

    def test_config_overrides_flags(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"trials": 2, "generations": 3, "fireflies": 5}))
        assert cli.main(["wpt", "--config", str(cfg), "--format", "json", "--solvers", "sca"]) == 0
        assert len(json.loads(capsys.readouterr().out)) == 2

    def test_sweep_flag(self, capsys):
        assert cli.main(["classic", "--sinr-db", "0,5", "--solvers", "iterative_recovered"]) == 0
        lines = capsys.readouterr().out.strip().split("\n")
        assert len(lines) == 3

    def test_bad_solver_exit_code(self, capsys):
        assert cli.main(["classic", "--solvers", "sca"]) == 1
        assert json.loads(capsys.readouterr().err)["type"] == "ConfigError"

    def test_pattern(self, capsys):
        code = cli.main(["pattern", "--fireflies", "6", "--generations", "3", "--angles", "0,30"])
        assert code == 0
        assert capsys.readouterr().out.startswith("angle_deg,gain_db\n0,")
