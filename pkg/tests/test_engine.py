"""Tile engine: mapping, drain/cycle model, MAC equivalence, determinism."""

import numpy as np
import pytest

from esam.config import load_default_config
from esam.convert import BnnLayer, BnnModel, SnnLayer, SnnModel, bnn_to_snn
from esam.engine import SimStats, build_network, run_dataset, run_inference
from esam.errors import ValidationError

from oracles import bnn_forward, random_bnn_layer

CFG = load_default_config()
ALL_VARIANTS = ("1rw", "1rw1r", "1rw2r", "1rw3r", "1rw4r")


def snn_from_layers(layer_sizes, rng, bias_scale=4.0):
    layers = []
    for rows, cols in zip(layer_sizes[:-1], layer_sizes[1:]):
        layers.append(random_bnn_layer(rng, rows, cols, bias_scale))
    bnn = BnnModel(tuple(BnnLayer(w, b) for w, b in layers), {})
    return bnn, bnn_to_snn(bnn)


def single_layer_snn(weight_bits, thresholds):
    return SnnModel((SnnLayer(np.asarray(weight_bits, dtype=np.uint8),
                              np.asarray(thresholds, dtype=np.int64)),), {})


# ---------------------------------------------------------------------------
# build_network mapping
# ---------------------------------------------------------------------------

def test_mapping_768_to_256_layer():
    rng = np.random.default_rng(0)
    _, snn = snn_from_layers((768, 256), rng)
    net = build_network(snn, CFG, "1rw4r")
    tile = net.tiles[0]
    assert len(tile.row_blocks) == 6
    assert all(len(b.arrays) == 2 for b in tile.row_blocks)
    assert net.n_arbiters() == 6
    assert net.total_cells() == 768 * 256


def test_mapping_128_to_128_layer():
    rng = np.random.default_rng(1)
    _, snn = snn_from_layers((128, 128), rng)
    net = build_network(snn, CFG, "1rw")
    assert len(net.tiles[0].row_blocks) == 1
    assert len(net.tiles[0].row_blocks[0].arrays) == 1
    assert net.n_arbiters() == 1


def test_mapping_partial_output_block():
    rng = np.random.default_rng(2)
    _, snn = snn_from_layers((256, 10), rng)
    net = build_network(snn, CFG, "1rw4r")
    tile = net.tiles[0]
    assert len(tile.row_blocks) == 2
    assert all(a.cols == 10 for b in tile.row_blocks for a in b.arrays)
    # weights land bit-exactly
    got = np.concatenate([np.concatenate([a.weights for a in b.arrays], axis=1)
                          for b in tile.row_blocks], axis=0)
    np.testing.assert_array_equal(got, snn.layers[0].weight_bits)


def test_build_rejects_unconverted_model():
    rng = np.random.default_rng(3)
    bnn, _ = snn_from_layers((8, 4), rng)
    with pytest.raises(ValidationError, match="converted"):
        build_network(bnn, CFG, "1rw4r")


def test_build_rejects_oversized_fan_in():
    snn = single_layer_snn(np.ones((1100, 4), dtype=np.uint8), [0, 0, 0, 0])
    with pytest.raises(ValidationError, match="fan-in"):
        build_network(snn, CFG, "1rw4r")


# ---------------------------------------------------------------------------
# drain behaviour / cycle model
# ---------------------------------------------------------------------------

def drain(tile, stats):
    steps = 0
    while tile.pending:
        tile.step(stats)
        steps += 1
    return steps


def test_seven_spikes_drain_in_two_steps_with_four_ports():
    snn = single_layer_snn(np.ones((16, 4), dtype=np.uint8), [99, 99, 99, 99])
    net = build_network(snn, CFG, "1rw4r")
    tile = net.tiles[0]
    spikes = np.zeros(16, dtype=np.uint8)
    spikes[:7] = 1
    tile.latch(spikes)
    stats = net.new_stats()
    tile.step(stats)
    assert sum(b.pending for b in tile.row_blocks) == 3
    tile.step(stats)
    assert not tile.pending
    assert stats.grants == 7


def test_zero_spikes_no_accumulation():
    snn = single_layer_snn(np.ones((16, 4), dtype=np.uint8), [0] * 4)
    net = build_network(snn, CFG, "1rw4r")
    tile = net.tiles[0]
    tile.latch(np.zeros(16, dtype=np.uint8))
    assert not tile.pending
    stats = net.new_stats()
    tile.step(stats)
    assert stats.grants == 0 and not tile.bank.v_mem.any()


def test_two_blocks_drain_in_parallel():
    rng = np.random.default_rng(4)
    _, snn = snn_from_layers((256, 8), rng)
    net = build_network(snn, CFG, "1rw4r")
    tile = net.tiles[0]
    spikes = np.zeros(256, dtype=np.uint8)
    spikes[[0, 5, 9, 77, 100]] = 1   # 5 spikes in block 0
    spikes[130] = 1                   # 1 spike in block 1
    tile.latch(spikes)
    assert drain(tile, net.new_stats()) == 2  # max(ceil(5/4), ceil(1/4))


@pytest.mark.parametrize("variant", ALL_VARIANTS)
def test_drain_steps_equal_ceil_rule_randomized(variant):
    rng = np.random.default_rng(5)
    p = CFG.variant(variant).cell.inference_ports
    for _ in range(200):
        rows = int(rng.integers(1, 129))
        snn = single_layer_snn(rng.integers(0, 2, (rows, 3)).astype(np.uint8),
                               [99, 99, 99])
        net = build_network(snn, CFG, variant)
        tile = net.tiles[0]
        spikes = (rng.random(rows) < rng.random()).astype(np.uint8)
        k = tile.latch(spikes)
        assert drain(tile, net.new_stats()) == -(-k // p)


def test_run_inference_cycle_accounting():
    rng = np.random.default_rng(6)
    _, snn = snn_from_layers((256, 8), rng, bias_scale=0.0)
    net = build_network(snn, CFG, "1rw4r")
    spikes = np.zeros(256, dtype=np.uint8)
    spikes[:9] = 1  # one block: ceil(9/4) = 3 arbitration cycles
    _, stats = run_inference(net, spikes)
    overhead = CFG.pipeline_drain_cycles + CFG.fire_handoff_cycles
    assert stats.per_tile_cycles[0] == 3 + overhead


def test_all_zero_input_costs_only_pipeline_overhead():
    rng = np.random.default_rng(7)
    _, snn = snn_from_layers((64, 32, 10), rng, bias_scale=8.0)
    net = build_network(snn, CFG, "1rw4r")
    pred, stats = run_inference(net, np.zeros(64, dtype=np.uint8))
    overhead = CFG.pipeline_drain_cycles + CFG.fire_handoff_cycles
    assert stats.per_tile_cycles[0] == overhead
    # deterministic prediction driven purely by thresholds/biases
    pred2, _ = run_inference(net, np.zeros(64, dtype=np.uint8))
    assert pred == pred2


# ---------------------------------------------------------------------------
# functional correctness
# ---------------------------------------------------------------------------

def test_hand_computed_two_input_neuron_fires():
    # stored bits [1, 1], threshold 1, input [1, 0] -> v_mem +1 >= 1
    snn = single_layer_snn([[1], [1]], [1])
    net = build_network(snn, CFG, "1rw4r")
    tile = net.tiles[0]
    tile.latch(np.array([1, 0], dtype=np.uint8))
    drain(tile, net.new_stats())
    assert tile.bank.v_mem.tolist() == [1]
    assert tile.bank.fire_check(r_empty=True).tolist() == [True]


@pytest.mark.parametrize("variant", ALL_VARIANTS)
def test_post_drain_membrane_matches_dense_oracle(variant):
    rng = np.random.default_rng(8)
    for _ in range(60):
        rows = int(rng.integers(1, 17))
        cols = int(rng.integers(1, 17))
        bits = rng.integers(0, 2, (rows, cols)).astype(np.uint8)
        snn = single_layer_snn(bits, [99] * cols)
        net = build_network(snn, CFG, variant)
        tile = net.tiles[0]
        spikes = rng.integers(0, 2, rows).astype(np.uint8)
        tile.latch(spikes)
        drain(tile, net.new_stats())
        expected = spikes.astype(np.int64) @ (2 * bits.astype(np.int64) - 1)
        np.testing.assert_array_equal(tile.bank.v_mem, expected)


def test_predictions_match_bnn_oracle_random_network():
    rng = np.random.default_rng(9)
    bnn, snn = snn_from_layers((40, 24, 10), rng)
    net = build_network(snn, CFG, "1rw4r")
    for _ in range(100):
        spikes = (rng.random(40) < 0.3).astype(np.uint8)
        pred, _ = run_inference(net, spikes)
        oracle_pred, _ = bnn_forward(bnn, spikes)
        assert pred == oracle_pred


@pytest.mark.parametrize("variant", ALL_VARIANTS)
def test_function_is_independent_of_parallelism(variant):
    rng = np.random.default_rng(10)
    bnn, snn = snn_from_layers((150, 60, 10), rng)
    net = build_network(snn, CFG, variant)
    ref = build_network(snn, CFG, "1rw4r")
    for _ in range(20):
        spikes = (rng.random(150) < 0.4).astype(np.uint8)
        pred, _ = run_inference(net, spikes)
        ref_pred, _ = run_inference(ref, spikes)
        assert pred == ref_pred


def test_function_is_independent_of_row_block_split():
    import dataclasses

    rng = np.random.default_rng(17)
    _, snn = snn_from_layers((150, 60, 10), rng)
    small_arrays = dataclasses.replace(CFG, max_rows=32, max_cols=16)
    net_fine = build_network(snn, small_arrays, "1rw4r")
    net_ref = build_network(snn, CFG, "1rw4r")
    assert len(net_fine.tiles[0].row_blocks) == 5  # ceil(150/32)
    for _ in range(20):
        spikes = (rng.random(150) < 0.4).astype(np.uint8)
        pred, _ = run_inference(net_fine, spikes)
        ref_pred, _ = run_inference(net_ref, spikes)
        assert pred == ref_pred


def test_spike_conservation():
    rng = np.random.default_rng(11)
    _, snn = snn_from_layers((100, 50, 10), rng)
    net = build_network(snn, CFG, "1rw2r")
    spikes = (rng.random(100) < 0.5).astype(np.uint8)
    _, stats = run_inference(net, spikes)
    assert stats.grants == int(spikes.sum()) + stats.fires


def test_determinism_identical_stats():
    rng = np.random.default_rng(12)
    _, snn = snn_from_layers((64, 32, 10), rng)
    net = build_network(snn, CFG, "1rw3r")
    samples = (rng.random((20, 64)) < 0.35).astype(np.uint8)
    labels = rng.integers(0, 10, 20)
    a = run_dataset(net, samples, labels)
    b = run_dataset(build_network(snn, CFG, "1rw3r"), samples, labels)
    assert a.predictions.tolist() == b.predictions.tolist()
    assert a.stats == b.stats
    assert a.accuracy == b.accuracy


def test_stats_merge_matches_single_run():
    rng = np.random.default_rng(13)
    _, snn = snn_from_layers((64, 16), rng)
    net = build_network(snn, CFG, "1rw4r")
    samples = (rng.random((12, 64)) < 0.4).astype(np.uint8)
    whole = run_dataset(net, samples).stats
    first = run_dataset(net, samples[:5]).stats
    second = run_dataset(net, samples[5:]).stats
    assert first.merge(second) == whole


def test_run_dataset_single_sample_accuracy_binary():
    rng = np.random.default_rng(14)
    _, snn = snn_from_layers((16, 10), rng)
    net = build_network(snn, CFG, "1rw4r")
    sample = (rng.random((1, 16)) < 0.5).astype(np.uint8)
    res = run_dataset(net, sample, np.array([3]))
    assert res.accuracy in (0.0, 1.0)


def test_width_mismatch_rejected():
    rng = np.random.default_rng(15)
    _, snn = snn_from_layers((16, 10), rng)
    net = build_network(snn, CFG, "1rw4r")
    with pytest.raises(ValidationError):
        run_inference(net, np.zeros(17, dtype=np.uint8))


def test_port_utilization_monotone():
    rng = np.random.default_rng(16)
    _, snn = snn_from_layers((128, 10), rng)
    net = build_network(snn, CFG, "1rw4r")
    samples = (rng.random((30, 128)) < 0.2).astype(np.uint8)
    stats = run_dataset(net, samples).stats
    pg = stats.port_grants
    assert all(pg[k] >= pg[k + 1] for k in range(3))
    assert sum(pg) == stats.grants
