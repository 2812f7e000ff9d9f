"""Experiment registry, config plumbing, report determinism, CLI exits."""

import json
from fractions import Fraction

import pytest

from lenslab import (
    ExperimentConfig,
    InvalidConfig,
    UnknownExperiment,
    apply_overrides,
    config_from_mapping,
    list_experiments,
    parse_config_text,
    run_experiment,
    validate_config,
    value_str,
)
from lenslab.cli import main as cli_main

EXPECTED_NAMES = [
    "cesaro-barycenter",
    "entropy-factor",
    "fixed-points",
    "group-embedding",
    "iet-realize",
    "mixing-profile",
    "one-sided-limit",
    "periodic-commuters",
    "rigidity-sweep",
    "skew-orbit",
    "transitivity-witness",
]


#
# Registry listing.
#

def test_registry_contains_exactly_the_expected_experiments():
    assert [e["name"] for e in list_experiments()] == EXPECTED_NAMES


def test_listing_is_json_roundtrippable_and_complete():
    listing = list_experiments()
    assert json.loads(json.dumps(listing)) == listing
    for entry in listing:
        assert entry["description"]
        assert set(entry["backends"]) <= {"rational", "float"}
        for p in entry["parameters"]:
            assert p["kind"] in ("int", "fraction", "str",
                                 "intlist", "fraclist", "intmatrix")
        for schema in entry["csv"].values():
            assert "," in schema


#
# Canonical value rendering.
#

def test_value_str_canonical_forms():
    assert value_str(True) == "true"
    assert value_str(False) == "false"
    assert value_str(Fraction(3, 1)) == "3"
    assert value_str(Fraction(13, 32)) == "13/32"
    assert value_str(7) == "7"
    assert value_str(0.1) == "0.1"
    assert value_str(1 / 3) == repr(1 / 3)
    assert value_str("graph:2,0,1") == "graph:2,0,1"


#
# Config parsing and overrides.
#

def test_parse_config_text_handles_comments_and_spacing():
    text = """
    # a comment
    experiment = rigidity-sweep

    system= rot:k=6,s=1
    blocks =1,2,3
    """
    mapping = parse_config_text(text)
    assert mapping == {
        "experiment": "rigidity-sweep",
        "system": "rot:k=6,s=1",
        "blocks": "1,2,3",
    }


def test_parse_config_text_rejects_bad_lines():
    with pytest.raises(InvalidConfig):
        parse_config_text("just some words\n")
    with pytest.raises(InvalidConfig):
        parse_config_text("= value\n")


def test_apply_overrides_wins_and_validates():
    base = {"experiment": "mixing-profile", "n_max": "3"}
    out = apply_overrides(base, ["n_max=5", "expect_zero_by=2"])
    assert out["n_max"] == "5" and out["expect_zero_by"] == "2"
    assert base["n_max"] == "3"  # original untouched
    with pytest.raises(InvalidConfig):
        apply_overrides(base, ["nonsense"])


def test_config_from_mapping_splits_reserved_keys():
    cfg = config_from_mapping({
        "experiment": "mixing-profile",
        "system": "bern:d=2,L=2",
        "backend": "rational",
        "output_dir": "/tmp/x",
        "n_max": "3",
    })
    assert cfg.experiment == "mixing-profile"
    assert cfg.system == "bern:d=2,L=2"
    assert cfg.output_dir == "/tmp/x"
    assert cfg.parameters == {"n_max": "3"}
    with pytest.raises(InvalidConfig):
        config_from_mapping({"system": "rot:k=3,s=1"})


#
# Validation errors.
#

def cfg_for(experiment, system="", backend="rational", **params):
    return ExperimentConfig(experiment=experiment, system=system,
                            backend=backend,
                            parameters={k: str(v) for k, v in params.items()})


def test_validate_rejects_unknown_experiment():
    with pytest.raises(UnknownExperiment, match="rigidity-sweep"):
        validate_config(cfg_for("no-such-thing"))


def test_validate_rejects_bad_backend():
    with pytest.raises(InvalidConfig, match="backend"):
        validate_config(cfg_for("mixing-profile", system="bern:d=2,L=2",
                                backend="decimal", n_max=3))


def test_validate_rejects_float_on_exact_only_experiment():
    with pytest.raises(InvalidConfig, match="exact-only"):
        validate_config(cfg_for("skew-orbit", system="skew:alpha=1/7",
                                backend="float", start="0,0,0", N=4))


def test_validate_requires_system_when_needed():
    with pytest.raises(InvalidConfig, match="needs a system"):
        validate_config(cfg_for("rigidity-sweep", blocks="1,2", n_max=3))


def test_validate_rejects_unknown_parameter():
    with pytest.raises(InvalidConfig, match="expected: "):
        validate_config(cfg_for("mixing-profile", system="bern:d=2,L=2",
                                n_max=3, bogus=1))


def test_validate_requires_missing_parameter():
    with pytest.raises(InvalidConfig, match="n_max"):
        validate_config(cfg_for("mixing-profile", system="bern:d=2,L=2"))


def test_validate_requires_seed_for_random_experiments():
    with pytest.raises(InvalidConfig, match="seed"):
        validate_config(cfg_for("iet-realize", k=3, L=9))


def test_validate_rejects_unparsable_values():
    with pytest.raises(InvalidConfig, match="cannot parse"):
        validate_config(cfg_for("mixing-profile", system="bern:d=2,L=2",
                                n_max="three"))


def test_validate_applies_defaults_and_types():
    typed = validate_config(cfg_for(
        "transitivity-witness", d=2, L=1, sigma="1,0", pi="0,1"))
    assert typed["epsilon"] == Fraction(1, 10**6)
    assert typed["sigma"] == (1, 0)
    typed = validate_config(cfg_for("cesaro-barycenter",
                                    system="rot:k=5,s=1", seed=7))
    assert typed["N_values"] == (10, 100)
    assert typed["n_initials"] == 3


def test_run_rejects_bad_system_spec_as_config_error():
    with pytest.raises(InvalidConfig, match="bad system spec"):
        run_experiment(cfg_for("mixing-profile", system="rot:k=0,s=1",
                               n_max=2), write=False)


#
# Determinism and report files.
#

def test_seeded_run_is_byte_identical():
    cfg = cfg_for("cesaro-barycenter", system="bern:d=2,L=2",
                  seed=42, N_values="10,50", n_initials=2)
    a = run_experiment(cfg, write=False)
    b = run_experiment(cfg, write=False)
    assert a.to_stable_json() == b.to_stable_json()
    assert a.series_csv("residuals") == b.series_csv("residuals")
    assert a.passed


def test_report_files_roundtrip(tmp_path):
    out = tmp_path / "run1"
    cfg = ExperimentConfig(
        experiment="mixing-profile", system="bern:d=2,L=2",
        output_dir=str(out),
        parameters={"n_max": "3", "expect_zero_by": "2"})
    report = run_experiment(cfg)
    assert report.passed
    doc = json.loads((out / "report.json").read_text())
    assert doc["passed"] is True
    assert "duration" not in json.dumps(doc)  # wall clock excluded
    assert doc["config"]["parameters"]["n_max"] == "3"
    csv = (out / "residuals.csv").read_text().splitlines()
    assert csv[0] == "n,residual"
    assert len(csv) == 5  # header + n = 0..3
    assert csv[-1].endswith(",0")  # exact zero residual at n = L = 2 onward


def test_scalars_hold_printable_values():
    report = run_experiment(cfg_for(
        "rigidity-sweep", system="rot:k=6,s=1", blocks="1,2,3",
        n_max=6, expect_return_at=6), write=False)
    assert report.passed
    assert report.scalars["first_return"] == 6
    assert report.scalars["final_score"] == "1"


#
# Command line interface.
#

def write_config(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


PASSING = """
experiment = rigidity-sweep
system = rot:k=6,s=1
blocks = 1,2,3
n_max = 6
expect_return_at = 6
"""

FAILING = PASSING.replace("expect_return_at = 6", "expect_return_at = 3")


def test_cli_run_passing_config(tmp_path, capsys):
    path = write_config(tmp_path, "ok.cfg", PASSING)
    assert cli_main(["run", path]) == 0
    out = capsys.readouterr().out
    assert "experiment: rigidity-sweep" in out
    assert "verdict returns_at_expected_step: pass" in out
    assert "passed: true" in out


def test_cli_run_failing_verdict_exits_one(tmp_path, capsys):
    path = write_config(tmp_path, "bad.cfg", FAILING)
    assert cli_main(["run", path]) == 1
    out = capsys.readouterr().out
    assert "verdict returns_at_expected_step: FAIL" in out
    assert "passed: false" in out


def test_cli_set_overrides_flip_the_outcome(tmp_path):
    path = write_config(tmp_path, "bad.cfg", FAILING)
    assert cli_main(["run", path, "--set", "expect_return_at=6"]) == 0


def test_cli_unknown_experiment_exits_two(tmp_path, capsys):
    path = write_config(tmp_path, "unknown.cfg", "experiment = warp-drive\n")
    assert cli_main(["run", path]) == 2
    assert "config error" in capsys.readouterr().err


def test_cli_missing_config_file_exits_two(tmp_path, capsys):
    assert cli_main(["run", str(tmp_path / "nope.cfg")]) == 2
    assert "not found" in capsys.readouterr().err


def test_cli_size_guard_exits_three(tmp_path, capsys):
    path = write_config(tmp_path, "huge.cfg", """
experiment = iet-realize
k = 2
L = 16384
seed = 1
""")
    assert cli_main(["run", path]) == 3
    assert "size guard" in capsys.readouterr().err


def test_cli_list_shows_every_experiment(capsys):
    assert cli_main(["list"]) == 0
    out = capsys.readouterr().out
    for name in EXPECTED_NAMES:
        assert f"{name}:" in out


def test_cli_list_json_is_machine_readable(capsys):
    assert cli_main(["list", "--json"]) == 0
    listing = json.loads(capsys.readouterr().out)
    assert [e["name"] for e in listing] == EXPECTED_NAMES


def test_cli_validate_accepts_and_rejects(tmp_path, capsys):
    good = write_config(tmp_path, "good.cfg", PASSING)
    assert cli_main(["validate", good]) == 0
    assert "ok: rigidity-sweep" in capsys.readouterr().out
    assert cli_main(["validate", good, "--set", "bogus=1"]) == 2
    assert "unknown parameter" in capsys.readouterr().err


def test_cli_run_writes_report_when_asked(tmp_path, capsys):
    out_dir = tmp_path / "out"
    path = write_config(tmp_path, "w.cfg",
                        PASSING + f"output_dir = {out_dir}\n")
    assert cli_main(["run", path]) == 0
    assert (out_dir / "report.json").is_file()
    assert (out_dir / "scores.csv").is_file()
    assert f"report: {out_dir}/report.json" in capsys.readouterr().out
