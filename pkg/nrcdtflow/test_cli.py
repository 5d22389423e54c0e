import numpy as np
import pytest

from nrcdtflow.cli import EXIT_FAILURE, EXIT_IO, EXIT_OK, build_parser, main
from nrcdtflow.datagen.dataset import MANIFEST_NAME
from nrcdtflow.datagen.idx import read_idx
from nrcdtflow.io import read_csv


@pytest.fixture
def config_file(tiny_config, tmp_path):
    return str(tiny_config.save(tmp_path / "tiny.yml"))


@pytest.mark.unit
class TestParser:
    def test_common_options(self):
        argv = ["experiment", "--config", "c.yml", "--seed", "4", "--threads", "2", "--quiet"]
        args = build_parser().parse_args(argv)
        assert (args.command, args.config, args.seed, args.threads, args.quiet) == ("experiment", "c.yml", 4, 2, True)

    def test_requires_command(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args([])

    def test_version(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            main(["--version"])
        assert excinfo.value.code == 0
        assert capsys.readouterr().out.startswith("nrcdtflow ")

    def test_unknown_suite(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["selftest", "--suite", "speed"])


@pytest.mark.integration
class TestCommands:
    def test_experiment(self, config_file, tmp_path, capsys):
        out = tmp_path / "run"
        assert main(["experiment", "--config", config_file, "--out", str(out), "--quiet"]) == EXIT_OK
        frame = read_csv(out / "results.csv")
        assert len(frame) == 4
        assert "mNRCDT" in capsys.readouterr().out

    def test_seed_override(self, config_file, tmp_path):
        out = tmp_path / "run"
        assert main(["experiment", "--config", config_file, "--out", str(out), "--seed", "99", "--quiet"]) == EXIT_OK
        assert set(read_csv(out / "results.csv")["seed"]) == {99}

    def test_pipeline(self, config_file, tmp_path):
        out = tmp_path / "staged"
        common = ["--config", config_file, "--out", str(out), "--quiet"]
        assert main(["gen", "--idx", *common]) == EXIT_OK
        assert (out / "dataset" / MANIFEST_NAME).exists()
        images = read_idx(out / "dataset" / "images-idx3-ubyte")
        labels = read_idx(out / "dataset" / "labels-idx1-ubyte")
        assert images.shape == (9, 64, 64)
        np.testing.assert_array_equal(labels, [1, 1, 1, 6, 6, 6, 11, 11, 11])
        assert images.reshape(9, -1).max(axis=1).tolist() == [255] * 9

        assert main(["features", "--fields", *common]) == EXIT_OK
        assert (out / "features_mNRCDT.nrcf").exists()
        assert (out / "templates_labels.csv").exists()
        assert len(list((out / "fields").glob("field_*.rcdt"))) == 9

        assert main(["classify", *common]) == EXIT_OK
        frame = read_csv(out / "results.csv")
        assert list(frame["representation"]) == ["mNRCDT", "aNRCDT", "RCDT_flat", "Euclidean_flat"]
        assert frame["accuracy_mean"].between(0.0, 1.0).all()

    def test_features_without_dataset_generates_it(self, config_file, tmp_path):
        out = tmp_path / "direct"
        assert main(["features", "--config", config_file, "--out", str(out), "--quiet"]) == EXIT_OK
        assert (out / "features_labels.csv").exists()

    def test_phase(self, tiny_config, tmp_path):
        data = tiny_config.to_dict()
        data["phase"] = {"kind": "salt", "strengths": [0.0, 3.0], "counts": [0, 1]}
        data["run"]["representations"] = ["aNRCDT"]
        path = tmp_path / "phase.yml"
        path.write_text(type(tiny_config).model_validate(data).to_yaml())
        out = tmp_path / "phase"
        assert main(["phase", "--config", str(path), "--out", str(out), "--quiet"]) == EXIT_OK
        assert (out / "phase.csv").exists()
        assert (out / "phase_salt_aNRCDT_l2.pgm").exists()

    def test_selftest(self, capsys):
        assert main(["selftest", "--suite", "isometry", "--suite", "adjointness", "--quiet"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "PASS isometry" in out and "PASS adjointness" in out


@pytest.mark.unit
class TestExitCodes:
    def test_phase_needs_section(self, config_file, tmp_path, capsys):
        assert main(["phase", "--config", config_file, "--out", str(tmp_path), "--quiet"]) == EXIT_FAILURE
        assert "phase" in capsys.readouterr().err

    def test_invalid_config(self, tmp_path, capsys):
        path = tmp_path / "bad.yml"
        path.write_text("discretization:\n  angles: 0\n")
        assert main(["experiment", "--config", str(path), "--quiet"]) == EXIT_FAILURE
        err = capsys.readouterr().err
        assert "invalid configuration" in err
        assert "line 2: discretization.angles" in err

    def test_missing_config(self, tmp_path):
        assert main(["experiment", "--config", str(tmp_path / "absent.yml"), "--quiet"]) == EXIT_IO

    def test_missing_features(self, config_file, tmp_path):
        assert main(["classify", "--config", config_file, "--out", str(tmp_path / "empty"), "--quiet"]) == EXIT_IO

    def test_selftest_failure(self, monkeypatch, capsys):
        from nrcdtflow.transforms import nrcdt

        monkeypatch.setattr(nrcdt, "EPS_STD", -1.0)
        assert main(["selftest", "--suite", "normalization", "--quiet"]) == EXIT_FAILURE
        assert "FAIL normalization" in capsys.readouterr().out
