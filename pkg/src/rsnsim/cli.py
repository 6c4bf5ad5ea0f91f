"""Command-line entry point.

Subcommands: generate, simulate, analyze, sweep, hierarchy.  Config files
are JSON; flags override file values.  Exit codes: 0 success (including
partial sweep failures), 1 config error, 2 I/O error, 3 total numerical
failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import tempfile
import warnings
from typing import Optional, Sequence

import numpy as np

from . import __version__, config as cfgmod
from .analysis import energy, entropy
from .errors import ConfigError, DataError, NumericalError, RsnError
from .harness import (AGGREGATE_FIELDS, SweepConfig, SweepRecord, aggregate,
                      run_sweep)
from .solver import SimulationTrace, simulate, sine_waveform
from .topology import BetaShape, NetworkTopology, build_grid, generate_network, has_path

log = logging.getLogger("rsnsim")


def _fmt(x) -> str:
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        return f"{x:.9g}"
    return str(x)


def write_text_atomic(path: str, text: str) -> None:
    """Write via a temp file + rename so failures never leave partial output."""
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w", newline="\n") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def records_csv(records: Sequence[SweepRecord]) -> str:
    lines = [",".join(SweepRecord.CSV_FIELDS)]
    for r in records:
        lines.append(",".join(_fmt(getattr(r, k)) for k in SweepRecord.CSV_FIELDS))
    return "\n".join(lines) + "\n"


def aggregate_csv(rows: Sequence[dict]) -> str:
    lines = [",".join(AGGREGATE_FIELDS)]
    for row in rows:
        lines.append(",".join(_fmt(row[k]) for k in AGGREGATE_FIELDS))
    return "\n".join(lines) + "\n"


def _manifest(command: str, cfg_doc: dict, seeds, workers: int) -> str:
    return json.dumps({
        "tool": "rsnsim",
        "version": __version__,
        "command": command,
        "config": cfg_doc,
        "workers": workers,
        "seeds": seeds,
    }, indent=1, sort_keys=True) + "\n"


def _write_heatmaps(cfg: SweepConfig, agg_rows: Sequence[dict], outdir: str) -> None:
    """Mean-entropy heatmaps per (xi, v) plus an energy-entropy scatter.

    Rendering problems are warnings; CSV output is the contract.
    """
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        by_cell = {(r["alpha"], r["beta"], r["xi"], r["v"]): r for r in agg_rows}
        for xi in cfg.xis:
            for v in cfg.amplitudes:
                m = np.full((len(cfg.betas), len(cfg.alphas)), np.nan)
                for ia, alpha in enumerate(cfg.alphas):
                    for ib, beta in enumerate(cfg.betas):
                        row = by_cell.get((alpha, beta, xi, v))
                        if row is not None:
                            m[ib, ia] = row["mean_entropy"]
                fig, ax = plt.subplots(figsize=(5, 4))
                im = ax.imshow(m, origin="lower", aspect="auto", cmap="viridis")
                ax.set_xticks(range(len(cfg.alphas)), [_fmt(a) for a in cfg.alphas])
                ax.set_yticks(range(len(cfg.betas)), [_fmt(b) for b in cfg.betas])
                ax.set_xlabel("alpha")
                ax.set_ylabel("beta")
                ax.set_title(f"mean entropy (bits), xi={xi}, v={_fmt(v)} V")
                fig.colorbar(im, ax=ax)
                fig.tight_layout()
                fig.savefig(os.path.join(outdir, f"entropy_xi{xi}_v{_fmt(v)}.png"))
                plt.close(fig)

        h = [r["mean_entropy"] for r in agg_rows if r["mean_energy"] > 0]
        e = [math.log10(r["mean_energy"]) for r in agg_rows if r["mean_energy"] > 0]
        if h:
            fig, ax = plt.subplots(figsize=(5, 4))
            ax.scatter(e, h, s=12)
            ax.set_xlabel("log10 energy (J)")
            ax.set_ylabel("mean entropy (bits)")
            fig.tight_layout()
            fig.savefig(os.path.join(outdir, "energy_vs_entropy.png"))
            plt.close(fig)
    except Exception as exc:
        warnings.warn(f"heatmap rendering failed: {exc}")


def cmd_generate(args) -> int:
    doc = cfgmod.load_config_file(args.config)
    if args.seed is not None:
        doc["seed"] = args.seed
    g = cfgmod.parse_generate(doc)
    grid = build_grid(g["interface_dim"], g["subdivision"])
    iface = grid.interface_indices
    input_node = int(iface[0]) if g["input_node"] is None else int(g["input_node"])
    ground_node = int(iface[-1]) if g["ground_node"] is None else int(g["ground_node"])
    rng = np.random.default_rng(g["seed"])
    topo = generate_network(grid, BetaShape(g["alpha"], g["beta"]), g["xi"],
                            input_node=input_node, ground_node=ground_node,
                            ranges=g["ranges"], rng=rng, seed=g["seed"],
                            edge_count=g["edge_count"])
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "topology.json")
    write_text_atomic(path, topo.to_json() + "\n")
    cfg_echo = dict(g, ranges=g["ranges"].to_dict(),
                    input_node=input_node, ground_node=ground_node)
    write_text_atomic(os.path.join(args.out, "manifest.json"),
                      _manifest("generate", cfg_echo, [g["seed"]], 1))
    print(f"wrote {path}")
    print(f"edges: {topo.edge_count} ({topo.n_augmented} added for connectivity)")
    print(f"interface nodes: {grid.n_interface} of {grid.n_nodes}")
    print(f"input->ground connected: {has_path(topo)}")
    return 0


def cmd_simulate(args) -> int:
    doc = cfgmod.load_config_file(args.config)
    s = cfgmod.parse_simulate(doc)
    with open(args.topology) as f:
        text = f.read()
    try:
        topo = NetworkTopology.from_json(text)
    except Exception as exc:
        raise DataError(f"topology file {args.topology} is not usable: {exc}") \
            from None
    trace = simulate(topo, sine_waveform(s["amplitude"], s["frequency"]),
                     s["dt"], s["duration"], decay_mode=s["decay_mode"],
                     decimation=s["decimation"])
    os.makedirs(args.out, exist_ok=True)
    trace_path = os.path.join(args.out, "trace.csv")
    write_text_atomic(trace_path, trace.to_csv())
    en = energy(trace)
    summary = {
        "energy_joules": en.energy_joules,
        "mean_power_watts": en.mean_power,
        "duration_seconds": en.duration,
        "switching_events": trace.switching_events,
        "steps": int(trace.n_steps),
        "amplitude": s["amplitude"],
        "frequency": s["frequency"],
    }
    write_text_atomic(os.path.join(args.out, "summary.json"),
                      json.dumps(summary, indent=1, sort_keys=True) + "\n")
    write_text_atomic(os.path.join(args.out, "manifest.json"),
                      _manifest("simulate", dict(s, topology=args.topology),
                                [int(topo.seed)], 1))
    print(f"wrote {trace_path} ({trace.n_steps} rows)")
    print(f"energy: {_fmt(en.energy_joules)} J, switching events: {trace.switching_events}")
    return 0


def cmd_analyze(args) -> int:
    trace = SimulationTrace.read_csv(args.trace)
    ent = entropy(trace.interface_voltages, center=not args.no_center)
    en = energy(trace)
    out = {
        "entropy_bits": ent.entropy_bits,
        "n_signals": ent.n_signals,
        "degenerate": ent.degenerate,
        "spectrum": [float(x) for x in ent.spectrum],
        "energy_joules": en.energy_joules,
        "mean_power_watts": en.mean_power,
        "centered": not args.no_center,
    }
    text = json.dumps(out, indent=1, sort_keys=True) + "\n"
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        write_text_atomic(os.path.join(args.out, "analysis.json"), text)
    print(text, end="")
    return 0


def _sweep_like(args, hierarchy: bool) -> int:
    doc = cfgmod.load_config_file(args.config)
    if args.seed is not None:
        doc["base_seed"] = args.seed
    if args.no_center:
        doc["center"] = False
    if hierarchy:
        cfg, hier = cfgmod.parse_hierarchy(doc)
    else:
        cfg, hier = cfgmod.parse_sweep(doc), None

    records = run_sweep(cfg, workers=args.workers, hierarchy=hier)
    agg = aggregate(records)
    os.makedirs(args.out, exist_ok=True)
    write_text_atomic(os.path.join(args.out, "records.csv"), records_csv(records))
    write_text_atomic(os.path.join(args.out, "aggregate.csv"), aggregate_csv(agg))

    cfg_doc = cfgmod.sweep_config_to_dict(cfg)
    if hier is not None:
        cfg_doc.update({"k": hier.k, "readout_a": hier.readout_a,
                        "readout_b": hier.readout_b})
    seeds = [r.seed for r in records]
    write_text_atomic(os.path.join(args.out, "manifest.json"),
                      _manifest("hierarchy" if hierarchy else "sweep",
                                cfg_doc, seeds, args.workers))
    if args.heatmap:
        _write_heatmaps(cfg, agg, args.out)

    failed = sum(1 for r in records if r.error)
    print(f"records: {len(records)} ({failed} failed)")
    print(f"wrote {args.out}/records.csv, aggregate.csv, manifest.json")
    if failed == len(records):
        log.error("every cell failed")
        return 3
    return 0


def cmd_sweep(args) -> int:
    return _sweep_like(args, hierarchy=False)


def cmd_hierarchy(args) -> int:
    return _sweep_like(args, hierarchy=True)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="rsnsim",
        description="Random resistive-switch network simulator")
    p.add_argument("--version", action="version", version=f"rsnsim {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, workers=False):
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--seed", type=int, help="override the config seed")
        sp.add_argument("--out", default=".", help="output directory")
        if workers:
            sp.add_argument("--workers", type=int, default=1,
                            help="parallel worker processes")
            sp.add_argument("--heatmap", action="store_true",
                            help="also render heatmap/scatter images")
            sp.add_argument("--no-center", action="store_true",
                            help="entropy on the literal uncentered Gram matrix")

    sp = sub.add_parser("generate", help="generate a network topology file")
    common(sp)
    sp.set_defaults(func=cmd_generate)

    sp = sub.add_parser("simulate", help="time-step a topology file")
    common(sp)
    sp.add_argument("--topology", required=True, help="topology JSON file")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("analyze", help="entropy/energy of a trace CSV")
    sp.add_argument("--trace", required=True, help="trace CSV file")
    sp.add_argument("--out", default=None, help="optional output directory")
    sp.add_argument("--no-center", action="store_true",
                    help="entropy on the literal uncentered Gram matrix")
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("sweep", help="run the (alpha, beta, xi, v) grid")
    common(sp, workers=True)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("hierarchy", help="sweep with K independent networks per cell")
    common(sp, workers=True)
    sp.set_defaults(func=cmd_hierarchy)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return 1
    except (OSError, DataError) as exc:
        log.error("i/o error: %s", exc)
        return 2
    except NumericalError as exc:
        log.error("numerical failure: %s", exc)
        return 3
    except RsnError as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
