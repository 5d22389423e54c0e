from pathlib import Path

import pytest

from nrcdtflow.classify.classifiers import Metric
from nrcdtflow.datagen.params import AFFINE_PRESETS, CORRUPTION_PRESETS, NONAFFINE_PRESETS, AffineRanges
from nrcdtflow.experiments.config import PRESETS, ConfigError, ConfigIssue, ExperimentConfig
from nrcdtflow.transforms.nrcdt import FeatureTag


@pytest.mark.unit
class TestDefaults:
    def test_empty_document(self):
        config = ExperimentConfig.from_yaml("")
        assert config == ExperimentConfig()
        assert config.discretization.angles == 128
        assert config.run.metrics == [Metric.L2]
        assert config.phase is None

    def test_presets(self):
        assert PRESETS == [
            "affine_medium",
            "affine_mild",
            "affine_strong",
            "rigid",
            "mild_salt",
            "mild_warp_salt",
            "strong_clean",
            "strong_warp",
            "mild_nowarp",
            "mild_ripple",
            "mild_ripple_small",
            "mild_ripple_wide",
            "mild_warp",
            "mild_warp_strong",
        ]

    def test_nonaffine_sweep_presets(self):
        expected = {
            "mild_nowarp": ((0.0, 0.0), (0.0, 0.0)),
            "mild_warp": ((0.5, 2.0), (2.5, 7.5)),
            "mild_warp_strong": ((0.5, 2.0), (8.0, 13.0)),
            "mild_ripple_small": ((0.5, 4.0), (0.5, 2.0)),
            "mild_ripple_wide": ((0.5, 4.0), (0.5, 7.5)),
            "mild_ripple": ((0.5, 4.0), (2.5, 7.5)),
        }
        assert set(NONAFFINE_PRESETS) == set(expected)
        for name, (frequency, amplitude) in expected.items():
            spec = ExperimentConfig.from_yaml(f"dataset:\n  preset: {name}\n").dataset_spec()
            assert (spec.corruption.frequency, spec.corruption.amplitude) == (frequency, amplitude)
            assert spec.affine == AffineRanges.full(scale=(0.75, 1.0), shear=5.0)
            assert spec.corruption.salt_count == (0, 0)


@pytest.mark.unit
class TestYaml:
    def test_roundtrip(self, tiny_config):
        assert ExperimentConfig.from_yaml(tiny_config.to_yaml()) == tiny_config

    def test_roundtrip_with_phase(self):
        config = ExperimentConfig.model_validate({"phase": {"kind": "warp", "strengths": [0, 2.5], "counts": [0, 3]}})
        assert ExperimentConfig.from_yaml(config.to_yaml()) == config

    def test_save_and_load(self, tiny_config, tmp_path):
        path = tiny_config.save(tmp_path / "nested" / "config.yml")
        assert ExperimentConfig.load(path) == tiny_config

    def test_enum_values(self):
        config = ExperimentConfig.from_yaml("run:\n  representations: [aNRCDT]\n  metrics: [linf]\n")
        assert config.run.representations == [FeatureTag.ANRCDT]
        assert config.run.metrics == [Metric.LINF]


@pytest.mark.unit
class TestErrors:
    def test_issue_carries_line(self):
        text = "dataset:\n  samples_per_class: 0\ndiscretization:\n  angles: 8\n"
        with pytest.raises(ConfigError) as excinfo:
            ExperimentConfig.from_yaml(text)
        (issue,) = excinfo.value.issues
        assert issue.path == "dataset.samples_per_class"
        assert issue.line == 2
        assert str(issue).startswith("line 2: dataset.samples_per_class")

    def test_unknown_key(self):
        with pytest.raises(ConfigError) as excinfo:
            ExperimentConfig.from_yaml("run:\n  seed: 1\n  colour: red\n")
        assert excinfo.value.issues[0].path == "run.colour"
        assert excinfo.value.issues[0].line == 3

    def test_every_issue_is_listed(self):
        with pytest.raises(ConfigError) as excinfo:
            ExperimentConfig.from_yaml("discretization:\n  angles: 0\n  points: 1\n")
        assert {i.path for i in excinfo.value.issues} == {"discretization.angles", "discretization.points"}

    def test_bad_yaml(self):
        with pytest.raises(ConfigError) as excinfo:
            ExperimentConfig.from_yaml("run: [unclosed\n")
        assert excinfo.value.issues[0].path == "<document>"

    def test_top_level_list(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_yaml("- 1\n- 2\n")

    def test_bad_preset_and_ids(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_yaml("dataset:\n  preset: unknown\n")
        with pytest.raises(ConfigError):
            ExperimentConfig.from_yaml("dataset:\n  template_ids: [1, 1]\n")
        with pytest.raises(ConfigError):
            ExperimentConfig.from_yaml("dataset:\n  template_ids: [13]\n")

    def test_cross_section_rules(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_yaml("dataset:\n  kind: linmnist\n")
        with pytest.raises(ConfigError):
            ExperimentConfig.from_yaml(
                "dataset:\n  samples_per_class: 5\nclassifier:\n  kind: knn\n  train_per_class: 5\n"
            )
        with pytest.raises(ConfigError):
            ExperimentConfig.from_yaml("dataset:\n  template_ids: [1, 2]\nclassifier:\n  kind: probe\n")

    def test_error_message(self):
        error = ConfigError([ConfigIssue(path="run.seed", message="bad"), ConfigIssue(path="x", line=4, message="y")])
        assert str(error) == "run.seed: bad; line 4: x: y"


@pytest.mark.unit
class TestDerived:
    def test_hash_ignores_output_dir(self, tiny_config):
        moved = tiny_config.with_overrides(output_dir="/elsewhere")
        assert moved.run.output_dir == "/elsewhere"
        assert moved.config_hash() == tiny_config.config_hash()
        assert len(tiny_config.config_hash()) == 16

    def test_hash_tracks_content(self, tiny_config):
        assert tiny_config.with_seed(12).config_hash() != tiny_config.config_hash()

    def test_overrides(self, tiny_config):
        assert tiny_config.with_overrides(seed=None).run.seed == 11
        with pytest.raises(ConfigError):
            tiny_config.with_overrides(repetitions=0)

    def test_dataset_spec(self, tiny_config):
        spec = tiny_config.dataset_spec()
        assert spec.template_ids == (1, 6, 11)
        assert spec.seed == 11
        assert spec.affine.rotation == (0.0, 360.0)
        assert tiny_config.dataset_spec(seed=3).seed == 3

    def test_preset_overrides_ranges(self):
        config = ExperimentConfig.from_yaml("dataset:\n  preset: mild_salt\n  affine:\n    rotation: [0, 1]\n")
        spec = config.dataset_spec()
        assert spec.affine == CORRUPTION_PRESETS["mild_salt"][0]
        assert spec.corruption.salt_radius == 9.0
        spec = ExperimentConfig.from_yaml("dataset:\n  preset: affine_medium\n").dataset_spec()
        assert spec.affine == AFFINE_PRESETS["affine_medium"]

    def test_invalid_ranges_surface_as_config_error(self):
        config = ExperimentConfig.from_yaml("dataset:\n  affine:\n    rotation: [10, 0]\n")
        with pytest.raises(ConfigError) as excinfo:
            config.dataset_spec()
        assert excinfo.value.issues[0].path == "dataset"

    def test_angle_sweep(self):
        config = ExperimentConfig.from_yaml("discretization:\n  angles: 8\n  angle_sweep: [2, 4]\n")
        assert config.discretization.angle_counts == [2, 4]
        assert config.discretization.feature_config(4).angles == 4
        assert ExperimentConfig().discretization.angle_counts == [128]
        with pytest.raises(ConfigError):
            ExperimentConfig.from_yaml("discretization:\n  angle_sweep: []\n")


CONFIG_DIR = Path(__file__).resolve().parents[1] / "config"


@pytest.mark.unit
@pytest.mark.parametrize("path", sorted(CONFIG_DIR.glob("*.yml")), ids=lambda p: p.name)
def test_shipped_configs_load(path):
    config = ExperimentConfig.load(path)
    assert config.run.seed == 7
    assert ExperimentConfig.from_yaml(config.to_yaml()) == config


@pytest.mark.unit
def test_nonaffine_sweep_has_one_config_per_range():
    presets = [ExperimentConfig.load(p).dataset.preset for p in sorted(CONFIG_DIR.glob("nt_nonaffine_*.yml"))]
    assert sorted(presets) == sorted(NONAFFINE_PRESETS)
