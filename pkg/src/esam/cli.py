"""Command-line front end.

Subcommands:
    convert        BNN file -> converted model file (integer thresholds)
    simulate       run a model over a spike dataset, emit a PPA report
    sweep-ports    simulate all five cell variants, one CSV row each
    learn-latency  column-update cost vs the non-transposable baseline

Exit codes: 0 success, 1 I/O error, 2 validation error, 3 internal
invariant violation.  All outputs are timestamp-free and byte-identical
across reruns of the same manifest; --jobs N parallelism merges integer
counters in sample order, so parallel runs match sequential ones
bit-for-bit.
"""

from __future__ import annotations

import argparse
import csv
import json
import multiprocessing
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import convert as conv
from .config import HardwareConfig, VARIANT_PORTS, default_config_path, load_config
from .dataset import SpikeDataset, load_dataset
from .engine import DatasetResult, SimStats, build_network, run_dataset
from .errors import SimulationError, ValidationError
from .metrics import PpaReport, build_report, learning_latency

EXIT_OK = 0
EXIT_IO = 1
EXIT_VALIDATION = 2
EXIT_INTERNAL = 3

VARIANT_CHOICES = tuple(VARIANT_PORTS)


# ---------------------------------------------------------------------------
# Manifest
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RunManifest:
    config_path: Path
    model_path: Path
    data_path: Path
    variant: str
    limit: int | None
    sample_mode: str
    seed: int
    jobs: int
    out_json: Path | None
    out_csv: Path | None

    def echo(self) -> dict:
        """The manifest fields that shape the result (jobs never does)."""
        return {
            "config": str(self.config_path),
            "model": str(self.model_path),
            "data": str(self.data_path),
            "variant": self.variant,
            "limit": self.limit,
            "sample_mode": self.sample_mode,
            "seed": self.seed,
        }


def _select_samples(ds: SpikeDataset, manifest: RunManifest
                    ) -> tuple[np.ndarray, np.ndarray]:
    n = ds.count if manifest.limit is None else min(manifest.limit, ds.count)
    if manifest.sample_mode == "random":
        idx = np.sort(np.random.default_rng(manifest.seed).choice(
            ds.count, size=n, replace=False))
        return ds.samples[idx], ds.labels[idx]
    return ds.samples[:n], ds.labels[:n]


# ---------------------------------------------------------------------------
# Parallel simulation (deterministic merge in sample order)
# ---------------------------------------------------------------------------

_WORKER = {}


def _worker_init(config_path, model_path, variant):
    cfg = load_config(config_path)
    model = conv.load_model(model_path)
    if isinstance(model, conv.BnnModel):
        model = conv.bnn_to_snn(model)
    _WORKER["network"] = build_network(model, cfg, variant)


def _worker_run(chunk) -> tuple[list[int], SimStats]:
    samples, labels = chunk
    res = run_dataset(_WORKER["network"], samples, labels)
    return res.predictions.tolist(), res.stats


def _simulate(manifest: RunManifest, cfg: HardwareConfig,
              samples: np.ndarray, labels: np.ndarray):
    """Returns (network, DatasetResult); parallel runs merge in sample order."""
    model = conv.load_model(manifest.model_path)
    if isinstance(model, conv.BnnModel):
        model = conv.bnn_to_snn(model)
    network = build_network(model, cfg, manifest.variant)

    if manifest.jobs <= 1 or samples.shape[0] < 2 * manifest.jobs:
        return network, run_dataset(network, samples, labels)

    bounds = np.linspace(0, samples.shape[0], manifest.jobs + 1, dtype=int)
    chunks = [(samples[a:b], labels[a:b])
              for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    with multiprocessing.Pool(
            processes=manifest.jobs, initializer=_worker_init,
            initargs=(manifest.config_path, manifest.model_path,
                      manifest.variant)) as pool:
        parts = pool.map(_worker_run, chunks)
    predictions: list[int] = []
    stats = network.new_stats()
    for preds, part_stats in parts:  # merge strictly in sample order
        predictions.extend(preds)
        stats.merge(part_stats)
    pred = np.array(predictions, dtype=np.int64)
    accuracy = float((pred == labels).mean())
    return network, DatasetResult(pred, accuracy, stats)


# ---------------------------------------------------------------------------
# Output helpers
# ---------------------------------------------------------------------------

def _write_json(path: Path, doc: dict):
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _write_csv(path: Path, rows: list[list], header) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _print_report(report: PpaReport):
    print(f"variant            : {report.variant}")
    print(f"samples            : {report.n_samples}")
    print(f"accuracy           : {report.accuracy:.4f}")
    print(f"clock              : {report.clock_ns:.2f} ns")
    print(f"throughput         : {report.throughput_inf_per_s / 1e6:.2f} M inf/s")
    print(f"energy/inference   : {report.energy_per_inference_pj:.1f} pJ")
    print(f"average power      : {report.average_power_mw:.2f} mW")
    print(f"total area         : {report.total_area_um2:.0f} um^2")
    per_tile = [c / report.n_samples for c in report.cycles_per_tile]
    print("cycles/tile (mean) : " + "  ".join(f"{c:.2f}" for c in per_tile))
    print("port utilization   : "
          + "  ".join(f"p{k}={u:.3f}" for k, u in enumerate(report.port_utilization)))


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_convert(args) -> int:
    model = conv.load_model(args.model)
    if not isinstance(model, conv.BnnModel):
        raise ValidationError(f"{args.model}: expected a 'bnn' model file")
    snn = conv.bnn_to_snn(model)
    conv.save_model(snn, args.out)
    print(f"wrote {args.out}")
    for li, layer in enumerate(snn.layers):
        th = layer.thresholds
        print(f"layer {li}: {layer.rows}x{layer.cols}  thresholds "
              f"min={th.min()} mean={th.mean():.2f} max={th.max()}")
    return EXIT_OK


def _manifest_from_args(args) -> RunManifest:
    manifest = RunManifest(
        config_path=Path(args.config),
        model_path=Path(args.model),
        data_path=Path(args.data),
        variant=args.variant,
        limit=args.limit,
        sample_mode=args.sample,
        seed=args.seed,
        jobs=args.jobs,
        out_json=Path(args.out_json) if args.out_json else None,
        out_csv=Path(args.out_csv) if args.out_csv else None,
    )
    for p in (manifest.config_path, manifest.model_path, manifest.data_path):
        if not p.exists():
            raise FileNotFoundError(f"input file not found: {p}")
    return manifest


def cmd_simulate(args) -> int:
    manifest = _manifest_from_args(args)
    cfg = load_config(manifest.config_path)
    samples, labels = _select_samples(load_dataset(manifest.data_path), manifest)
    network, result = _simulate(manifest, cfg, samples, labels)
    report = build_report(network, result)

    if manifest.out_json:
        _write_json(manifest.out_json,
                    {"manifest": manifest.echo(), "report": report.to_doc(),
                     "predictions": result.predictions.tolist()})
    if manifest.out_csv:
        _write_csv(manifest.out_csv, [report.csv_row()], PpaReport.CSV_COLUMNS)
    _print_report(report)
    return EXIT_OK


def cmd_sweep_ports(args) -> int:
    manifest = _manifest_from_args(args)
    cfg = load_config(manifest.config_path)
    samples, labels = _select_samples(load_dataset(manifest.data_path), manifest)

    rows = []
    reports = {}
    for variant in VARIANT_CHOICES:
        vm = RunManifest(**{**manifest.__dict__, "variant": variant})
        network, result = _simulate(vm, cfg, samples, labels)
        report = build_report(network, result)
        reports[variant] = report.to_doc()
        rows.append(report.csv_row())
        print(f"{variant:7s} tput={report.throughput_inf_per_s / 1e6:8.2f}M "
              f"E/inf={report.energy_per_inference_pj:8.1f}pJ "
              f"P={report.average_power_mw:6.2f}mW "
              f"area={report.total_area_um2:9.0f}um2")

    if manifest.out_csv:
        _write_csv(manifest.out_csv, rows, PpaReport.CSV_COLUMNS)
    if manifest.out_json:
        _write_json(manifest.out_json,
                    {"manifest": manifest.echo(), "reports": reports})
    return EXIT_OK


def cmd_learn_latency(args) -> int:
    cfg = load_config(args.config)
    ll = learning_latency(cfg, args.variant, rows=args.rows)
    print(f"column update, {args.rows} rows, variant {args.variant}")
    print(f"  baseline (1rw) : {ll.baseline.cycles:4d} cycles  "
          f"{ll.baseline.time_ns:8.2f} ns  {ll.baseline.energy_pj:8.2f} pJ")
    print(f"  proposed       : {ll.proposed.cycles:4d} cycles  "
          f"{ll.proposed.time_ns:8.2f} ns  {ll.proposed.energy_pj:8.2f} pJ")
    print(f"  ratios         : time {ll.time_ratio:.1f}x  "
          f"energy {ll.energy_ratio:.1f}x")
    if args.out_json:
        _write_json(Path(args.out_json), {
            "rows": args.rows,
            "variant": args.variant,
            "baseline": ll.baseline.__dict__,
            "proposed": ll.proposed.__dict__,
            "time_ratio": ll.time_ratio,
            "energy_ratio": ll.energy_ratio,
        })
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser / entry point
# ---------------------------------------------------------------------------

def _add_run_args(sp):
    sp.add_argument("--config", default=str(default_config_path()),
                    help="hardware config JSON (default: shipped esam3nm)")
    sp.add_argument("--model", required=True, help="model file (bnn or snn)")
    sp.add_argument("--data", required=True, help="binarized spike dataset (.bin)")
    sp.add_argument("--variant", choices=VARIANT_CHOICES, default="1rw4r")
    sp.add_argument("--limit", type=int, default=None,
                    help="use only N samples (first N unless --sample random)")
    sp.add_argument("--sample", choices=("first", "random"), default="first")
    sp.add_argument("--seed", type=int, default=0,
                    help="seed for --sample random")
    sp.add_argument("--jobs", type=int, default=1,
                    help="worker processes (results identical to --jobs 1)")
    sp.add_argument("--out-json", default=None)
    sp.add_argument("--out-csv", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="esam",
        description="Multiport-SRAM CIM spiking-network accelerator model")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("convert", help="convert a BNN file to a deployable model")
    sp.add_argument("--model", required=True, help="input bnn JSON")
    sp.add_argument("--out", required=True, help="output snn JSON")
    sp.set_defaults(func=cmd_convert)

    sp = sub.add_parser("simulate", help="run inference over a dataset")
    _add_run_args(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("sweep-ports", help="simulate all five cell variants")
    _add_run_args(sp)
    sp.set_defaults(func=cmd_sweep_ports)

    sp = sub.add_parser("learn-latency", help="column-update cost report")
    sp.add_argument("--config", default=str(default_config_path()))
    sp.add_argument("--variant", choices=VARIANT_CHOICES, default="1rw4r")
    sp.add_argument("--rows", type=int, default=128)
    sp.add_argument("--out-json", default=None)
    sp.set_defaults(func=cmd_learn_latency)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (FileNotFoundError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except SimulationError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
