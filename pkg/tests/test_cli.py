import csv
import json
import time

import jsonschema
import pytest
from hypothesis import given, strategies as st

from regenlab.cli import main
from regenlab.experiments import EXPERIMENT_IDS, ExperimentConfig, resolve

IDS = [
    "reflected-ssrw-localtime", "reflected-ssrw-arcsine", "vague-convergence", "stable-walk-scaling",
    "gwi-renewal", "gwi-glaw", "gw-extinction", "cutout-coverage", "negbin-check", "laplace-gd",
    "negative-control",
]

REPORT_SCHEMA = {
    "type": "object",
    "required": ["experiment", "params", "seed", "grid", "verdict", "runtime_ms", "version"],
    "properties": {
        "experiment": {"type": "string"},
        "params": {"type": "object"},
        "seed": {"type": "integer"},
        "grid": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["n", "estimate", "reference", "ks", "ci_low", "ci_high", "pass"],
                "properties": {
                    "n": {"type": "integer"},
                    "estimate": {"type": "number"},
                    "reference": {"type": ["number", "null"]},
                    "ks": {"type": ["number", "null"]},
                    "ci_low": {"type": "number"},
                    "ci_high": {"type": "number"},
                    "pass": {"type": "boolean"},
                },
            },
        },
        "verdict": {"enum": ["PASS", "FAIL"]},
        "runtime_ms": {"type": "integer"},
        "version": {"type": "string"},
    },
}


def test_list_prints_every_id_once_in_stable_order(capsys):
    assert main(["list"]) == 0
    first = capsys.readouterr().out
    assert main(["list"]) == 0
    assert capsys.readouterr().out == first
    rows = first.strip().splitlines()
    assert [r.split()[0] for r in rows] == IDS
    assert all(len(r.split(None, 1)) == 2 and r.split(None, 1)[1].strip() for r in rows)
    assert list(EXPERIMENT_IDS) == IDS


def test_gw_extinction_passes_quickly(tmp_path, capsys):
    out = tmp_path / "r.json"
    t0 = time.perf_counter()
    code = main(["run", "--experiment", "gw-extinction", "--out", str(out)])
    elapsed = time.perf_counter() - t0
    report = json.loads(out.read_text())
    assert code == 0 and report["verdict"] == "PASS"
    assert elapsed < 1.0
    jsonschema.validate(report, REPORT_SCHEMA)


def test_negative_control_fails_with_nonzero_exit(tmp_path):
    out = tmp_path / "r.json"
    code = main(["run", "--experiment", "negative-control", "--out", str(out)])
    report = json.loads(out.read_text())
    assert code != 0
    assert report["verdict"] == "FAIL"
    jsonschema.validate(report, REPORT_SCHEMA)


def test_same_seed_gives_identical_reports_and_samples(tmp_path):
    paths = []
    for k in range(2):
        out, samples = tmp_path / f"r{k}.json", tmp_path / f"s{k}.csv"
        main(["run", "--experiment", "reflected-ssrw-localtime", "--seed", "42",
              "--out", str(out), "--samples", str(samples)])
        paths.append((out, samples))
    (r0, s0), (r1, s1) = paths
    a, b = json.loads(r0.read_text()), json.loads(r1.read_text())
    a.pop("runtime_ms"), b.pop("runtime_ms")  # wall clock is the one field allowed to differ
    assert a == b
    assert s0.read_bytes() == s1.read_bytes()
    jsonschema.validate(json.loads(r0.read_text()), REPORT_SCHEMA)

    with open(s0) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["replica_id", "value"]
    assert [int(r[0]) for r in rows[1:]] == list(range(len(rows) - 1))
    assert len(rows) - 1 == 50_000


def test_different_seeds_give_different_samples(tmp_path):
    outs = []
    for seed in (1, 2):
        s = tmp_path / f"s{seed}.csv"
        main(["run", "--experiment", "negative-control", "--replicas", "200", "--seed", str(seed),
              "--out", str(tmp_path / "r.json"), "--samples", str(s)])
        outs.append(s.read_bytes())
    assert outs[0] != outs[1]


def test_report_embeds_resolved_config(tmp_path):
    out = tmp_path / "r.json"
    main(["run", "--experiment", "gwi-renewal", "--seed", "7", "--replicas", "1000", "--out", str(out)])
    report = json.loads(out.read_text())
    assert report["seed"] == 7
    assert report["params"]["replicas"] == 1000
    assert report["params"]["p"] == pytest.approx(1 / 3)
    assert report["params"]["tolerances"]["version"]
    assert report["version"].startswith("v")


def test_unknown_experiment_is_a_usage_error(capsys):
    assert main(["run", "--experiment", "no-such-thing"]) == 2
    err = capsys.readouterr().err
    for exp_id in IDS:
        assert exp_id in err


def test_unwritable_output_is_an_io_error(tmp_path, capsys):
    target = tmp_path / "missing-dir" / "r.json"
    assert main(["run", "--experiment", "gw-extinction", "--out", str(target)]) == 3
    assert "I/O error" in capsys.readouterr().err


def test_bad_parameters_are_usage_errors(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"experiment": "gw-extinction", "params": {"bogus": 1}}))
    assert main(["run", "--config", str(cfg)]) == 2
    assert main(["run", "--experiment", "gw-extinction", "--replicas", "5"]) == 2
    cfg.write_text(json.dumps({"experiment": "gw-extinction", "colour": "red"}))
    assert main(["run", "--config", str(cfg)]) == 2


def test_flags_override_config_fields(tmp_path):
    cfg, out = tmp_path / "c.json", tmp_path / "r.json"
    cfg.write_text(ExperimentConfig("gwi-renewal", seed=3, replicas=500).to_json())
    assert main(["run", "--config", str(cfg), "--seed", "9", "--out", str(out)]) in (0, 1)
    report = json.loads(out.read_text())
    assert report["seed"] == 9
    assert report["params"]["replicas"] == 500


@given(
    exp=st.sampled_from(IDS),
    seed=st.integers(0, 2**64 - 1),
    replicas=st.none() | st.integers(100, 10**7),
    grid=st.none() | st.lists(st.integers(1, 10**6), min_size=1, max_size=6, unique=True).map(sorted),
    out=st.none() | st.text(min_size=1, max_size=20),
)
def test_config_round_trips_through_json(exp, seed, replicas, grid, out):
    cfg = ExperimentConfig(exp, seed, replicas, grid, {}, out, None)
    back = ExperimentConfig.from_json(cfg.to_json())
    assert back == cfg
    assert resolve(back) == resolve(cfg)


def test_histogram_csv(tmp_path):
    out = tmp_path / "h.csv"
    assert main(["histogram", "--horizon", "10", "--replicas", "2000", "--seed", "5", "--out", str(out)]) == 0
    with open(out) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["index", "hits", "total"]
    body = [[int(x) for x in r] for r in rows[1:]]
    assert [r[0] for r in body] == list(range(11))
    assert body[0][1] == 2000  # index 0 is never covered
    assert all(r[2] == 2000 and 0 <= r[1] <= 2000 for r in body)


@pytest.mark.parametrize("process", ["ssrw", "reflected-ssrw", "heavy", "gw", "gwi", "perturbed"])
def test_path_and_excursion_csv(tmp_path, process):
    out, exc = tmp_path / "p.csv", tmp_path / "e.csv"
    assert main(["path", "--process", process, "--horizon", "200", "--out", str(out),
                 "--excursions", str(exc)]) == 0
    with open(out) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["step_index", "lattice_value"]
    assert [int(r[0]) for r in rows[1:]] == list(range(201))
    with open(exc) as fh:
        recs = list(csv.DictReader(fh))
    assert all(int(r["end"]) > int(r["start"]) for r in recs)
    assert sum(int(r["censored"]) for r in recs) <= 1
    if recs:
        assert all(int(r["censored"]) == 0 for r in recs[:-1])
