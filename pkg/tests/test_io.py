import math
import os

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from coevo.dynamics import Trajectory, make_schedule, run
from coevo.equilibria import check_all_defection_unique, enumerate_equilibria, verify_nash
from coevo.io import (
    atomic_write,
    best_response_to_jsonable,
    condition_report_to_jsonable,
    emit_trajectory,
    format_real,
    load_trajectory,
    nash_check_to_jsonable,
    render_json,
    render_trajectory_csv,
    write_json,
)
from coevo.model import SystemState, best_response
from instances import random_interior_params, random_row_stochastic, random_state


def states_equal(a: Trajectory, b: Trajectory) -> bool:
    if len(a.states) != len(b.states) or a.active_sets != b.active_sets:
        return False
    for sa, sb in zip(a.states, b.states):
        if not np.array_equal(sa.x, sb.x) or not np.array_equal(sa.y, sb.y):
            return False
    if (a.potentials is None) != (b.potentials is None):
        return False
    if a.potentials is not None and list(a.potentials) != list(b.potentials):
        return False
    return True


def make_trajectory(rng, n=4, with_potentials=True, steps=6) -> Trajectory:
    states = [random_state(rng, n) for _ in range(steps + 1)]
    actives = tuple(
        tuple(sorted(int(v) for v in rng.choice(n, size=int(rng.integers(1, n + 1)), replace=False)))
        for _ in range(steps)
    )
    pots = tuple(float(v) for v in rng.normal(size=steps + 1)) if with_potentials else None
    return Trajectory(
        states=tuple(states), active_sets=actives, potentials=pots, stop_reason="max_steps"
    )


class TestFormatReal:
    def test_spot_values(self):
        assert format_real(0.5) == "0.5"
        assert format_real(1.0) == "1"
        assert float(format_real(1 / 3)) == 1 / 3

    @given(st.floats(allow_nan=False, allow_infinity=False))
    def test_round_trips_any_double(self, v):
        assert float(format_real(v)) == v

    def test_negative_zero(self):
        assert math.copysign(1.0, float(format_real(-0.0))) == -1.0


class TestAtomicWrite:
    def test_writes_and_replaces(self, tmp_path):
        path = tmp_path / "out.txt"
        atomic_write(str(path), "first\n")
        atomic_write(str(path), "second\n")
        assert path.read_text() == "second\n"

    def test_leaves_no_temp_files(self, tmp_path):
        atomic_write(str(tmp_path / "a.txt"), "x" * 10000)
        assert sorted(p.name for p in tmp_path.iterdir()) == ["a.txt"]


class TestTrajectoryFiles:
    def test_csv_layout(self, rng):
        params = random_interior_params(rng, 2)
        net = random_row_stochastic(rng, 2)
        traj = run(
            SystemState(np.array([1, 0]), np.array([1.0, 0.0])),
            make_schedule("round-robin", 2),
            params,
            net,
            max_steps=2,
        )
        text = render_trajectory_csv(traj)
        lines = text.splitlines()
        assert lines[0] == "t,active,x_1,x_2,y_1,y_2,potential"
        first = lines[1].split(",")
        assert first[0] == "0"
        assert first[1] == ""
        assert first[2:4] == ["1", "0"]
        second = lines[2].split(",")
        assert second[1] == "1"

    def test_round_trip_csv_bit_exact(self, rng, tmp_path):
        for with_pots in (True, False):
            traj = make_trajectory(rng, n=5, with_potentials=with_pots)
            path = str(tmp_path / f"t{with_pots}.csv")
            emit_trajectory(traj, path, format="csv")
            back = load_trajectory(path, format="csv")
            assert states_equal(traj, back)
            assert back.stop_reason == "unknown"

    def test_round_trip_jsonl_bit_exact(self, rng, tmp_path):
        for with_pots in (True, False):
            traj = make_trajectory(rng, n=3, with_potentials=with_pots)
            path = str(tmp_path / f"t{with_pots}.jsonl")
            emit_trajectory(traj, path, format="json-lines")
            back = load_trajectory(path, format="json-lines")
            assert states_equal(traj, back)

    def test_round_trip_preserves_awkward_doubles(self, tmp_path):
        y = np.array([np.nextafter(0.0, 1.0), 1 / 3, np.nextafter(1.0, 0.0)])
        traj = Trajectory(
            states=(SystemState(np.array([0, 1, 0]), y),),
            active_sets=(),
            potentials=(-1 / 7,),
            stop_reason="max_steps",
        )
        for fmt, name in (("csv", "a.csv"), ("json-lines", "a.jsonl")):
            path = str(tmp_path / name)
            emit_trajectory(traj, path, format=fmt)
            back = load_trajectory(path, format=fmt)
            np.testing.assert_array_equal(back.states[0].y, y)
            assert back.potentials[0] == -1 / 7

    def test_empty_trajectory_is_header_only(self, tmp_path):
        empty = Trajectory(states=(), active_sets=(), potentials=None, stop_reason="unknown")
        assert render_trajectory_csv(empty) == "t,active,potential\n"
        path = str(tmp_path / "empty.csv")
        emit_trajectory(empty, path)
        back = load_trajectory(path)
        assert back.states == ()
        assert back.active_sets == ()

    def test_unknown_format_rejected(self, rng, tmp_path):
        traj = make_trajectory(rng, n=2)
        with pytest.raises(ValueError, match="unknown trajectory format"):
            emit_trajectory(traj, str(tmp_path / "t.xml"), format="xml")
        with pytest.raises(ValueError, match="unknown trajectory format"):
            load_trajectory(str(tmp_path / "t.xml"), format="xml")

    def test_csv_errors_carry_line_numbers(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("t,active,x_1,y_1,potential\n0,,1,0.5,\n0,,1,0.5,\n")
        with pytest.raises(ValueError, match=r"bad\.csv:3: time index 0 out of order"):
            load_trajectory(str(path))
        path.write_text("t,active,x_1,y_1,potential\n0,,1\n")
        with pytest.raises(ValueError, match=r"bad\.csv:2: expected 5 columns, got 3"):
            load_trajectory(str(path))
        path.write_text("time,who\n")
        with pytest.raises(ValueError, match="unrecognised trajectory header"):
            load_trajectory(str(path))
        path.write_text("")
        with pytest.raises(ValueError, match="empty trajectory file"):
            load_trajectory(str(path))

    def test_csv_missing_potential_mid_file(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text(
            "t,active,x_1,y_1,potential\n0,,1,0.5,-0.25\n1,1,1,0.5,\n"
        )
        with pytest.raises(ValueError, match=r"bad\.csv:3: missing potential"):
            load_trajectory(str(path))

    def test_jsonl_errors_carry_line_numbers(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"t": 0, "active": [], "x": [0], "y": [0.5]}\n{nope}\n')
        with pytest.raises(ValueError, match=r"bad\.jsonl:2"):
            load_trajectory(str(path), format="json-lines")

    def test_active_column_uses_one_based_ids(self, rng, tmp_path):
        traj = Trajectory(
            states=(
                SystemState(np.array([0, 0, 0]), np.zeros(3)),
                SystemState(np.array([0, 0, 0]), np.zeros(3)),
            ),
            active_sets=((0, 2),),
            potentials=None,
            stop_reason="max_steps",
        )
        text = render_trajectory_csv(traj)
        assert text.splitlines()[2].split(",")[1] == "1;3"
        path = str(tmp_path / "t.csv")
        emit_trajectory(traj, path)
        assert load_trajectory(path).active_sets == ((0, 2),)


class TestJsonRendering:
    def test_render_json_is_canonical(self):
        assert render_json({"b": 1, "a": [2]}) == '{\n  "a": [\n    2\n  ],\n  "b": 1\n}\n'

    def test_write_json(self, tmp_path):
        path = str(tmp_path / "obj.json")
        write_json({"k": 0.5}, path)
        assert open(path).read() == '{\n  "k": 0.5\n}\n'

    def test_condition_report_uses_one_based_players(self, params_r2):
        doc = condition_report_to_jsonable(check_all_defection_unique(params_r2))
        assert [p["player"] for p in doc["per_player"]] == [1, 2, 3, 4]
        assert doc["all_hold"] is True
        assert doc["condition_id"] == "all_defection_unique"

    def test_nash_check_reports_one_based_deviator(self, params_r2, complete4):
        doc = nash_check_to_jsonable(
            verify_nash(SystemState.all_cooperation(4), params_r2, complete4)
        )
        assert doc["is_nash"] is False
        assert doc["deviating_player"] == 1
        assert doc["improving_response"] == {"action": 0, "opinion": 0.5}

    def test_best_response_document(self, params_r2, complete4):
        doc = best_response_to_jsonable(
            best_response(0, np.full(4, 0.9), params_r2, complete4)
        )
        assert set(doc) == {"discriminant", "entries"}
        assert len(doc["entries"]) == 1
        assert set(doc["entries"][0]) == {"action", "opinion"}

    def test_equilibrium_report_round_trips_through_json(self, params_r2, complete4):
        import json

        from coevo.io import equilibrium_report_to_jsonable

        doc = equilibrium_report_to_jsonable(enumerate_equilibria(params_r2, complete4))
        parsed = json.loads(render_json(doc))
        assert parsed["action_profiles_scanned"] == 16
        assert parsed["equilibria"][0]["x"] == [0, 0, 0, 0]
        assert parsed["equilibria"][0]["class"]["full_class"] == "all-defection-consensus"
