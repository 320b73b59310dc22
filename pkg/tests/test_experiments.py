"""Experiment runner: configs, point files, metadata, convergence tables."""

import json

import numpy as np
import pytest

from specgrid.errors import ValidationError
from specgrid.experiments import (
    ExperimentConfig,
    POINT_HEADER,
    convergence_report,
    points_to_text,
    read_point_file,
    run_experiment,
    write_point_file,
)
from specgrid.schrodinger import operator_sampling_bound, unit_bump_problem

JACOBI = {"name": "jacobi", "diagonal": 0.0, "offdiagonal": 1.0}
DECOMPOSED = {
    "name": "decomposed",
    "t": {"name": "diagonal", "entries": [1.0, -1.0]},
    "v": {"name": "diagonal", "entries": [0.25]},
}
BUMP = {"dimension": 1, "potential": {"family": "bump_unit"}}


def cfg_dict(**kw):
    base = {"mode": "gamma1", "levels": [1, 2], "operator": JACOBI}
    base.update(kw)
    return base


class TestConfig:
    def test_minimal(self):
        cfg = ExperimentConfig.from_dict(cfg_dict())
        assert cfg.levels == (1, 2)
        assert cfg._inferred_algorithm() == "gamma1"

    def test_unknown_keys_rejected_by_name(self):
        with pytest.raises(ValidationError, match="worker_count"):
            ExperimentConfig.from_dict(cfg_dict(worker_count=2))

    def test_mode_required(self):
        raw = cfg_dict()
        del raw["mode"]
        with pytest.raises(ValidationError, match="mode"):
            ExperimentConfig.from_dict(raw)

    def test_bad_mode(self):
        with pytest.raises(ValidationError, match="mode"):
            ExperimentConfig.from_dict(cfg_dict(mode="gamma9"))

    def test_levels_must_increase(self):
        with pytest.raises(ValidationError, match="levels"):
            ExperimentConfig.from_dict(cfg_dict(levels=[2, 2]))
        with pytest.raises(ValidationError, match="levels"):
            ExperimentConfig.from_dict(cfg_dict(levels=[]))
        with pytest.raises(ValidationError, match="levels"):
            ExperimentConfig.from_dict(cfg_dict(levels=[0]))

    def test_gamma3_needs_problem(self):
        with pytest.raises(ValidationError, match="problem"):
            ExperimentConfig.from_dict(
                {"mode": "gamma3", "levels": [1], "operator": JACOBI}
            )

    def test_convergence_needs_reference(self):
        with pytest.raises(ValidationError, match="reference"):
            ExperimentConfig.from_dict(
                {"mode": "convergence", "levels": [1], "operator": JACOBI}
            )

    def test_algorithm_inference(self):
        ref = {"kind": "points", "points": [[0, 0]]}
        base = {"mode": "convergence", "levels": [1], "reference": ref}
        assert (
            ExperimentConfig.from_dict({**base, "operator": JACOBI})._inferred_algorithm()
            == "gamma1"
        )
        assert (
            ExperimentConfig.from_dict(
                {**base, "operator": DECOMPOSED}
            )._inferred_algorithm()
            == "gamma2"
        )
        assert (
            ExperimentConfig.from_dict({**base, "problem": BUMP})._inferred_algorithm()
            == "gamma3"
        )

    def test_from_file(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps(cfg_dict()), encoding="utf-8")
        assert ExperimentConfig.from_file(path).mode == "gamma1"
        bad = tmp_path / "bad.json"
        bad.write_text("[1, 2]", encoding="utf-8")
        with pytest.raises(ValidationError):
            ExperimentConfig.from_file(bad)
        with pytest.raises(ValidationError):
            ExperimentConfig.from_file(tmp_path / "missing.json")


class TestPointFiles:
    def test_header_and_format(self):
        text = points_to_text(np.array([0.5 - 0.25j, -1 + 0j]))
        lines = text.splitlines()
        assert lines[0] == POINT_HEADER
        assert lines[1] == "0.5,-0.25"
        assert lines[2] == "-1,0"
        assert text.endswith("\n")

    def test_negative_zero_normalized(self):
        text = points_to_text(np.array([complex(-0.0, -0.0)]))
        assert text.splitlines()[1] == "0,0"

    def test_seventeen_digits_round_trip(self, tmp_path, rng):
        pts = np.sort_complex(rng.standard_normal(20) + 1j * rng.standard_normal(20))
        path = tmp_path / "pts.csv"
        write_point_file(path, pts)
        back = read_point_file(path)
        assert np.array_equal(back, pts)

    def test_header_enforced(self, tmp_path):
        path = tmp_path / "nohdr.csv"
        path.write_text("0,0\n", encoding="utf-8")
        with pytest.raises(ValidationError):
            read_point_file(path)


class TestRunExperiment:
    def test_gamma1_files(self, tmp_path):
        cfg = ExperimentConfig.from_dict(
            cfg_dict(out=str(tmp_path), label="Free Jacobi", plot=True)
        )
        art = run_experiment(cfg)
        assert [lev.n for lev in art.levels] == [1, 2]
        for n in (1, 2):
            base = tmp_path / f"free-jacobi_n{n}"
            pts = read_point_file(base.with_suffix(".csv"))
            lev = art.levels[n - 1]
            assert np.array_equal(pts, lev.result.points)
            meta = json.loads((tmp_path / f"free-jacobi_n{n}.meta.json").read_text())
            assert meta["n"] == n
            assert meta["algorithm"] == "gamma1"
            assert meta["point_count"] == len(pts)
            assert meta["threshold"] == 1.0 / n
            assert meta["config"]["operator"] == JACOBI
            assert "seconds" in meta["timings"]
            plot = json.loads((tmp_path / f"free-jacobi_n{n}.plot.json").read_text())
            assert plot["kind"] == "scatter"
            assert plot["points_file"] == f"free-jacobi_n{n}.csv"
            assert plot["x_range"][0] < plot["x_range"][1]

    def test_no_out_dir_writes_nothing(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        art = run_experiment(ExperimentConfig.from_dict(cfg_dict()))
        assert art.files == []
        assert list(tmp_path.iterdir()) == []

    def test_byte_determinism_across_workers(self, tmp_path):
        blobs = []
        for w in (1, 4):
            out = tmp_path / f"w{w}"
            cfg = ExperimentConfig.from_dict(
                cfg_dict(mode="gamma2", operator=DECOMPOSED, out=str(out), workers=w)
            )
            run_experiment(cfg)
            blobs.append([(p.name, p.read_bytes()) for p in sorted(out.glob("*.csv"))])
        assert blobs[0] == blobs[1]

    def test_gamma3_metadata_carries_error_bound(self, tmp_path):
        cfg = ExperimentConfig.from_dict(
            {
                "mode": "gamma3",
                "levels": [1],
                "problem": BUMP,
                "out": str(tmp_path),
                "label": "bump",
            }
        )
        run_experiment(cfg)
        meta = json.loads((tmp_path / "bump_n1.meta.json").read_text())
        assert meta["l"] == 5
        assert meta["resolution_mode"] == "strict"
        assert meta["error_bound"] == operator_sampling_bound(1, 5, unit_bump_problem())
        assert meta["mode"] == "gamma3"

    def test_gamma3_l_override_recorded(self, tmp_path):
        cfg = ExperimentConfig.from_dict(
            {
                "mode": "gamma3",
                "levels": [1],
                "problem": BUMP,
                "l": 7,
                "out": str(tmp_path),
                "label": "bump",
            }
        )
        run_experiment(cfg)
        meta = json.loads((tmp_path / "bump_n1.meta.json").read_text())
        assert meta["l"] == 7
        assert meta["resolution_mode"] == "relaxed"

    def test_gamma2_requires_decomposed(self):
        cfg = ExperimentConfig.from_dict(cfg_dict(mode="gamma2"))
        with pytest.raises(ValidationError, match="decomposed"):
            run_experiment(cfg)

    def test_oracle_compare_extra(self):
        cfg = ExperimentConfig.from_dict(cfg_dict(mode="oracle-compare", levels=[2]))
        art = run_experiment(cfg)
        oracle = art.levels[0].extra["oracle"]
        assert oracle["method"] == "eigenvalue_distance"
        assert oracle["discrepancy"]["count"] == 0
        assert oracle["discrepancy"]["points"] == []
        assert oracle["discrepancy"]["primary_count"] == len(art.levels[0].result.points)


class TestConvergence:
    def test_zero_operator_against_origin(self, tmp_path):
        cfg = ExperimentConfig.from_dict(
            {
                "mode": "convergence",
                "levels": [1, 2, 4],
                "operator": {"name": "zero"},
                "reference": {"kind": "points", "points": [[0, 0]]},
                "window": {"center": [0, 0], "radius": 3},
                "aw_terms": 8,
                "out": str(tmp_path),
                "label": "zero",
            }
        )
        art = convergence_report(cfg)
        assert [row["n"] for row in art.table] == [1, 2, 4]
        for row in art.table:
            # gamma1 of the zero operator is the closed 1/n ball on the grid
            assert row["d_K"] <= 1.0 / row["n"] + 1e-12
            assert row["d_AW"] >= 0.0
        assert art.trend["d_K_strictly_decreasing"]
        assert art.trend["d_AW_nonincreasing_within_slack"]
        payload = json.loads((tmp_path / "zero_convergence.json").read_text())
        assert payload["table"] == art.table
        assert payload["trend"] == art.trend
        assert payload["window"]["radius"] == 3

    def test_two_point_diagonal_reference(self):
        cfg = ExperimentConfig.from_dict(
            {
                "mode": "convergence",
                "levels": [1, 2, 4],
                "operator": {"name": "diagonal", "entries": [1.0, -1.0]},
                "reference": {"kind": "points", "points": [[1, 0], [-1, 0]]},
                "aw_terms": 6,
            }
        )
        art = convergence_report(cfg)
        dks = [row["d_K"] for row in art.table]
        assert dks == sorted(dks, reverse=True)
        assert dks[-1] <= 0.25 + 1e-12

    def test_run_experiment_dispatches_convergence(self):
        cfg = ExperimentConfig.from_dict(
            {
                "mode": "convergence",
                "levels": [1, 2],
                "operator": {"name": "zero"},
                "reference": {"kind": "points", "points": [[0, 0]]},
                "aw_terms": 4,
            }
        )
        art = run_experiment(cfg)
        assert art.table is not None and art.trend is not None

    def test_rows_match_direct_metrics(self):
        from specgrid.setdist import (
            Disk,
            FinitePoints,
            RealIntervals,
            attouch_wets_report,
            window_distance,
        )

        cfg = ExperimentConfig.from_dict(
            {
                "mode": "convergence",
                "levels": [2],
                "operator": JACOBI,
                "reference": {"kind": "intervals", "intervals": [[-2, 2]]},
                "window": {"center": [0, 0], "radius": 5},
                "aw_terms": 5,
            }
        )
        art = convergence_report(cfg)
        pts = art.levels[0].result.points
        ref = RealIntervals([(-2, 2)])
        row = art.table[0]
        assert row["d_K"] == window_distance(FinitePoints(pts), ref, Disk(0j, 5.0))
        rep = attouch_wets_report(FinitePoints(pts), ref, terms=5)
        assert row["d_AW"] == rep.value and row["d_AW_slack"] == rep.slack
