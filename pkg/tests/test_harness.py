import json

import numpy as np
import pytest

from conftest import small_config_kwargs
from lowcoh import ConfigError, SystemConfig
from lowcoh.harness import (
    DIST_COLUMNS,
    NMSE_COLUMNS,
    REPRODUCE_TARGETS,
    config_from_dict,
    config_from_yaml,
    config_hash,
    distribution_rows,
    reproduce,
    resolve_workers,
    rows_to_csv,
    run_coherence_distribution,
    run_design,
    run_nmse_sweep,
    write_files,
)


def small_config(**overrides):
    return SystemConfig(**small_config_kwargs(**overrides))


class TestSystemConfig:
    def test_grid_sizes_derived_by_rounding(self):
        config = SystemConfig()
        assert config.g_t == 96
        assert config.g_r == 24

    def test_explicit_grids_kept(self):
        config = small_config()
        assert (config.g_t, config.g_r) == (12, 6)

    def test_scalar_snr_promoted_to_tuple(self):
        config = small_config(snr_db=5)
        assert config.snr_db == (5.0,)

    @pytest.mark.parametrize(
        "overrides",
        [
            {"l_t": 3},
            {"l_r": 3},
            {"m_x": 5},
            {"m_x": 0},
            {"n_p": 0},
            {"trials": 0},
            {"snr_db": ()},
            {"b_ps": 0},
            {"codebook_kind": "mystery"},
            {"gain_variance": 0.0},
            {"grid_multiplier": 0.5},
            {"g_t": 4},
        ],
    )
    def test_invalid_values_rejected(self, overrides):
        with pytest.raises(ConfigError):
            small_config(**overrides)

    def test_unknown_keys_rejected(self):
        with pytest.raises(ConfigError):
            config_from_dict({"n_t": 8, "bogus": 1})

    def test_yaml_round_trip(self, tmp_path):
        path = tmp_path / "config.yaml"
        path.write_text("n_t: 8\nn_r: 4\nl_t: 4\nl_r: 2\nm_x: 2\nsnr_db: [0.0]\n")
        config = config_from_yaml(str(path))
        assert config.n_t == 8
        assert config.snr_db == (0.0,)

    def test_yaml_must_be_mapping(self, tmp_path):
        path = tmp_path / "config.yaml"
        path.write_text("- 1\n- 2\n")
        with pytest.raises(ConfigError):
            config_from_yaml(str(path))

    def test_hash_tracks_content(self):
        assert config_hash(small_config()) == config_hash(small_config())
        assert config_hash(small_config()) != config_hash(small_config(m_x=3))


class TestResolveWorkers:
    def test_explicit_wins(self, monkeypatch):
        monkeypatch.setenv("LOWCOH_MAX_WORKERS", "1")
        assert resolve_workers(5) == 5

    def test_env_caps_default(self, monkeypatch):
        monkeypatch.setenv("LOWCOH_MAX_WORKERS", "1")
        assert resolve_workers() == 1

    def test_floor_of_one(self):
        assert resolve_workers(0) == 1


class TestRunDesign:
    def test_report_fields(self):
        design, report = run_design(small_config())
        assert report["coherence"] == pytest.approx(design.coherence, abs=1e-15)
        assert sorted(report["ordering"]) == list(range(8))
        assert report["pilot_columns"][0] == 0
        assert report["wall_seconds"] >= 0.0

    def test_random_config_has_no_design(self):
        with pytest.raises(ConfigError):
            run_design(small_config(codebook_kind="random_config"))

    def test_random_permutation_deterministic(self):
        a = run_design(small_config(codebook_kind="random_permutation"))[1]
        b = run_design(small_config(codebook_kind="random_permutation"))[1]
        assert a["ordering"] == b["ordering"]


class TestCoherenceDistribution:
    def test_summary_consistent_with_samples(self):
        dist = run_coherence_distribution(small_config(), draws=40)
        assert len(dist["samples"]) == 40
        assert dist["mean"] == pytest.approx(float(np.mean(dist["samples"])), abs=1e-15)
        assert dist["min"] == min(dist["samples"])
        assert dist["max"] == max(dist["samples"])

    def test_deterministic_across_runs_and_workers(self):
        a = run_coherence_distribution(small_config(), draws=30, workers=1)
        b = run_coherence_distribution(small_config(), draws=30, workers=3)
        assert np.array_equal(a["samples"], b["samples"])

    def test_rejects_empty_draw_count(self):
        with pytest.raises(ConfigError):
            run_coherence_distribution(small_config(), draws=0)

    def test_rows_include_markers(self):
        dist = run_coherence_distribution(small_config(), draws=5)
        rows = distribution_rows(dist)
        kinds = [r["kind"] for r in rows]
        assert kinds.count("sample") == 5
        assert kinds[-4:] == ["proposed", "mean", "min", "max"]
        assert all(r["draw"] == -1 for r in rows[-4:])


class TestNmseSweep:
    def test_row_layout_and_m_column(self):
        rows = run_nmse_sweep(small_config(trials=4), "snr")
        assert len(rows) == 2  # one snr value x two codebook kinds
        for row in rows:
            assert set(row) == set(NMSE_COLUMNS)
            assert row["m"] == (8 // 4) * 2 * (4 // 2)
            assert row["trials"] == 4
        assert {r["codebook"] for r in rows} == {"proposed", "random_config"}

    def test_axis_defaults(self):
        rows = run_nmse_sweep(small_config(trials=2), "m_x", kinds=("proposed",))
        assert [r["value"] for r in rows] == [1.0, 2.0, 3.0, 4.0]

    def test_worker_count_does_not_change_bytes(self):
        config = small_config(trials=60)  # spans two trial chunks
        rows1 = run_nmse_sweep(config, "snr", workers=1)
        rows3 = run_nmse_sweep(config, "snr", workers=3)
        assert rows_to_csv(rows1, NMSE_COLUMNS) == rows_to_csv(rows3, NMSE_COLUMNS)

    def test_custom_axis_values(self):
        rows = run_nmse_sweep(
            small_config(trials=2), "n_p", kinds=("proposed",), axis_values=(1, 3)
        )
        assert [r["value"] for r in rows] == [1.0, 3.0]

    def test_non_snr_axis_needs_single_snr(self):
        with pytest.raises(ConfigError):
            run_nmse_sweep(small_config(snr_db=(0.0, 10.0)), "m_x")

    def test_unknown_axis_rejected(self):
        with pytest.raises(ConfigError):
            run_nmse_sweep(small_config(), "bandwidth")

    def test_unknown_kind_rejected(self):
        with pytest.raises(ConfigError):
            run_nmse_sweep(small_config(), "snr", kinds=("proposed", "mystery"))


class TestCsvFormat:
    def test_header_order_and_float_precision(self):
        rows = [
            {
                "axis": "snr",
                "value": 1.0 / 3.0,
                "codebook": "proposed",
                "m": 8,
                "nmse": 0.1,
                "nmse_db": -10.0,
                "stderr": 0.0,
                "trials": 2,
                "seed": 7,
            }
        ]
        text = rows_to_csv(rows, NMSE_COLUMNS)
        lines = text.split("\n")
        assert lines[0] == ",".join(NMSE_COLUMNS)
        assert "0.33333333333333331" in lines[1]
        assert text.endswith("\n")
        assert "\r" not in text

    def test_distribution_columns(self):
        dist = run_coherence_distribution(small_config(), draws=3)
        text = rows_to_csv(distribution_rows(dist), DIST_COLUMNS)
        assert text.splitlines()[0] == "m_x,kind,draw,mu"


class TestReproduce:
    def test_unknown_target_rejected(self):
        with pytest.raises(ConfigError):
            reproduce("fig9", small_config())

    def test_fig5_artifacts(self):
        config = small_config(trials=2, n_p=2)
        files = reproduce("fig5", config, draws=5)
        assert set(files) == {"fig5.csv", "design_mx4.json", "manifest.json"}
        manifest = json.loads(files["manifest.json"])
        assert manifest["config_sha256"] == config_hash(config)
        assert manifest["files"] == ["design_mx4.json", "fig5.csv"]
        assert "wall_seconds" in manifest
        design = json.loads(files["design_mx4.json"])
        assert "wall_seconds" not in design
        # fig5 pins m_x=4 regardless of the incoming config
        assert design["m_x"] == 4

    def test_fig2_artifacts(self):
        # at l_t=4 only the m_x=2 panel is feasible; the m_x=7 one is dropped
        files = reproduce("fig2", small_config(trials=2), draws=4)
        assert set(files) == {"fig2.csv", "design_mx2.json", "manifest.json"}
        body = files["fig2.csv"].splitlines()
        assert body[0] == "m_x,kind,draw,mu"
        assert len(body) == 1 + 4 + 4  # header, draws, marker rows

    def test_infeasible_target_rejected(self):
        config = SystemConfig(**small_config_kwargs(l_t=1, m_x=1, g_t=12))
        with pytest.raises(ConfigError):
            reproduce("fig2", config, draws=2)

    def test_targets_catalog(self):
        assert REPRODUCE_TARGETS == ("table1", "fig2", "fig3", "fig4", "fig5")

    def test_write_files(self, tmp_path):
        files = {"a.csv": "x,y\n1,2\n"}
        names = write_files(files, str(tmp_path))
        assert names == ["a.csv"]
        assert (tmp_path / "a.csv").read_bytes() == b"x,y\n1,2\n"
