"""CLI behaviour: exit codes, determinism, parallel/sequential equality."""

import json

import numpy as np
import pytest

from esam import cli
from esam.convert import BnnLayer, BnnModel, bnn_to_snn, load_model, save_model
from esam.dataset import save_dataset
from esam.metrics import learning_latency
from esam.config import load_default_config

from oracles import bnn_dataset_accuracy, random_bnn_layer


@pytest.fixture()
def workdir(tmp_path):
    """A small BNN model + 30-sample dataset on disk."""
    rng = np.random.default_rng(77)
    sizes = (64, 32, 10)
    layers = [random_bnn_layer(rng, r, c)
              for r, c in zip(sizes[:-1], sizes[1:])]
    bnn = BnnModel(tuple(BnnLayer(w, b) for w, b in layers),
                   {"trainer_seed": 77})
    save_model(bnn, tmp_path / "bnn.json")
    samples = (rng.random((30, 64)) < 0.3).astype(np.uint8)
    labels = rng.integers(0, 10, 30).astype(np.uint8)
    save_dataset(tmp_path / "data.bin", samples, labels)
    return tmp_path, bnn, samples, labels


def run_cli(*argv) -> int:
    return cli.main([str(a) for a in argv])


# ---------------------------------------------------------------------------
# convert
# ---------------------------------------------------------------------------

def test_convert_produces_integer_thresholds(workdir, capsys):
    d, bnn, _, _ = workdir
    assert run_cli("convert", "--model", d / "bnn.json", "--out", d / "snn.json") == 0
    out = capsys.readouterr().out
    assert "thresholds" in out
    snn = load_model(d / "snn.json")
    for a, b in zip(snn.layers, bnn_to_snn(bnn).layers):
        np.testing.assert_array_equal(a.thresholds, b.thresholds)


def test_convert_idempotent_bytes(workdir):
    d, _, _, _ = workdir
    run_cli("convert", "--model", d / "bnn.json", "--out", d / "a.json")
    run_cli("convert", "--model", d / "bnn.json", "--out", d / "b.json")
    assert (d / "a.json").read_bytes() == (d / "b.json").read_bytes()


def test_convert_bad_weight_exits_2(workdir, capsys):
    d, _, _, _ = workdir
    doc = json.loads((d / "bnn.json").read_text())
    doc["layers"][0]["weights"][3] = doc["layers"][0]["weights"][3][:-3] + "0.5"
    (d / "bad.json").write_text(json.dumps(doc))
    assert run_cli("convert", "--model", d / "bad.json", "--out", d / "x.json") == 2
    err = capsys.readouterr().err
    assert "layer 0" in err and "row 3" in err


def test_missing_files_exit_1(workdir, capsys):
    d, _, _, _ = workdir
    assert run_cli("convert", "--model", d / "nope.json", "--out", d / "x.json") == 1
    assert run_cli("simulate", "--model", d / "nope.json",
                   "--data", d / "data.bin") == 1


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def simulate_json(d, *extra):
    out = d / f"report_{len(list(d.iterdir()))}.json"
    rc = run_cli("simulate", "--model", d / "bnn.json", "--data", d / "data.bin",
                 "--out-json", out, *extra)
    assert rc == 0
    return json.loads(out.read_text())


def test_simulate_accuracy_matches_bnn_oracle(workdir):
    d, bnn, samples, labels = workdir
    doc = simulate_json(d)
    assert doc["report"]["accuracy"] == pytest.approx(
        bnn_dataset_accuracy(bnn, samples, labels))


def test_simulate_limit_first_n(workdir):
    d, bnn, samples, labels = workdir
    doc = simulate_json(d, "--limit", "7")
    assert doc["report"]["n_samples"] == 7
    assert doc["report"]["accuracy"] == pytest.approx(
        bnn_dataset_accuracy(bnn, samples[:7], labels[:7]))


def test_simulate_variants_same_predictions_different_cost(workdir):
    d, _, _, _ = workdir
    slow = simulate_json(d, "--variant", "1rw")
    fast = simulate_json(d, "--variant", "1rw4r")
    assert slow["predictions"] == fast["predictions"]
    assert slow["report"]["counters"]["grants"] == fast["report"]["counters"]["grants"]
    assert (slow["report"]["energy_per_inference_pj"]
            != fast["report"]["energy_per_inference_pj"])
    assert (slow["report"]["bottleneck_cycles_per_sample"]
            > fast["report"]["bottleneck_cycles_per_sample"])


def test_simulate_byte_identical_reruns(workdir):
    d, _, _, _ = workdir
    for name in ("r1", "r2"):
        rc = run_cli("simulate", "--model", d / "bnn.json",
                     "--data", d / "data.bin",
                     "--out-json", d / f"{name}.json",
                     "--out-csv", d / f"{name}.csv")
        assert rc == 0
    assert (d / "r1.json").read_bytes() == (d / "r2.json").read_bytes()
    assert (d / "r1.csv").read_bytes() == (d / "r2.csv").read_bytes()


def test_simulate_parallel_equals_sequential(workdir):
    d, _, _, _ = workdir
    for name, jobs in (("seq", "1"), ("par", "3")):
        rc = run_cli("simulate", "--model", d / "bnn.json",
                     "--data", d / "data.bin", "--jobs", jobs,
                     "--out-json", d / f"{name}.json",
                     "--out-csv", d / f"{name}.csv")
        assert rc == 0
    assert (d / "seq.json").read_bytes() == (d / "par.json").read_bytes()
    assert (d / "seq.csv").read_bytes() == (d / "par.csv").read_bytes()


def test_simulate_random_sampling_seeded(workdir):
    d, _, _, _ = workdir
    a = simulate_json(d, "--limit", "10", "--sample", "random", "--seed", "5")
    b = simulate_json(d, "--limit", "10", "--sample", "random", "--seed", "5")
    c = simulate_json(d, "--limit", "10", "--sample", "random", "--seed", "6")
    assert a["predictions"] == b["predictions"]
    assert a["predictions"] != c["predictions"]


# ---------------------------------------------------------------------------
# sweep-ports / learn-latency
# ---------------------------------------------------------------------------

def test_sweep_ports_csv(workdir):
    d, _, _, _ = workdir
    rc = run_cli("sweep-ports", "--model", d / "bnn.json",
                 "--data", d / "data.bin", "--out-csv", d / "sweep.csv")
    assert rc == 0
    lines = (d / "sweep.csv").read_text().strip().split("\n")
    assert len(lines) == 6  # header + 5 variants
    assert lines[1].startswith("1rw,") and lines[5].startswith("1rw4r,")


def test_sweep_shipped_artifacts_orderings(tmp_path):
    """Energy falls monotonically with added ports; 1R dips below 1RW tput."""
    from pathlib import Path
    repo = Path(__file__).resolve().parent.parent
    out = tmp_path / "sweep.csv"
    rc = run_cli("sweep-ports", "--model", repo / "models" / "mnist_snn.json",
                 "--data", repo / "data" / "mnist_test_100.bin",
                 "--out-csv", out)
    assert rc == 0
    rows = out.read_text().strip().split("\n")
    header = rows[0].split(",")
    col = {name: header.index(name) for name in header}
    table = {r.split(",")[0]: r.split(",") for r in rows[1:]}

    energy = {v: float(table[v][col["energy_per_inference_pj"]]) for v in table}
    tput = {v: float(table[v][col["throughput_inf_per_s"]]) for v in table}
    assert energy["1rw1r"] > energy["1rw2r"] > energy["1rw3r"] > energy["1rw4r"]
    assert tput["1rw1r"] < tput["1rw"] < tput["1rw2r"]

    # area column is exactly the analytical estimate
    from esam.config import load_default_config
    from esam.convert import load_model
    from esam.engine import build_network
    from esam.metrics import area_estimate
    cfg = load_default_config()
    snn = load_model(repo / "models" / "mnist_snn.json")
    for v in table:
        expected = area_estimate(build_network(snn, cfg, v), cfg)
        assert float(table[v][col["total_area_um2"]]) == expected


def test_learn_latency_matches_metrics(workdir, capsys):
    d, _, _, _ = workdir
    rc = run_cli("learn-latency", "--variant", "1rw4r",
                 "--out-json", d / "ll.json")
    assert rc == 0
    doc = json.loads((d / "ll.json").read_text())
    ll = learning_latency(load_default_config(), "1rw4r", 128)
    assert doc["baseline"]["cycles"] == ll.baseline.cycles == 256
    assert doc["proposed"]["cycles"] == ll.proposed.cycles == 8
    assert doc["time_ratio"] == pytest.approx(ll.time_ratio)


def test_learn_latency_unknown_variant_exits_2(capsys):
    assert cli.main(["learn-latency", "--variant", "1rw4r", "--rows", "500"]) == 2
