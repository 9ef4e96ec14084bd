"""Command-line interface: simulate, analyze, sweep, pns.

Exit codes: 0 on success (including analyses that end in a zero rate),
2 on usage or configuration errors, 3 on I/O errors. The default seed can
be set through the RFIQKD_SEED environment variable.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import replace

import numpy as np

from .devices import DeviceParams, OpticsSpec, ideal_params, params_from_optics
from .estimation import CountMatrix, constraints
from .keyrates import (
    AnalysisConfig,
    bb84_rate_any_pair,
    quantity_c,
    rfi_rate,
    urfi_rate,
)
from .postprocess import PnsConfig, pns_reduction
from .simulate import (
    ChannelConfig,
    DetectorConfig,
    SourceConfig,
    events_to_csv,
    hwp_sweep_angles,
    sample_count_matrix,
    simulate_counts,
)

SWEEP_HEADER = [
    "theta_deg",
    "r_bb84_xx",
    "r_bb84_xy",
    "r_bb84_yx",
    "r_bb84_yy",
    "r_rfi",
    "r_urfi",
    "r_urfi_sigma",
    "qber",
    "C",
    "status",
]


def _default_seed() -> int:
    return int(os.environ.get("RFIQKD_SEED", "0"))


def _load_json(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _device_from_config(cfg: dict) -> DeviceParams:
    dev = cfg.get("device")
    if dev is None or dev.get("ideal"):
        return ideal_params()
    if "optics" in dev:
        prep_spec = OpticsSpec(**dev["optics"])
        meas_spec = OpticsSpec(**dev["meas_optics"]) if "meas_optics" in dev else None
        return params_from_optics(prep_spec, meas_spec)
    return DeviceParams.from_json_dict(dev)


def _configs_from_file(cfg: dict, seed: int | None):
    source_cfg = cfg.get("source", {})
    src = SourceConfig(**source_cfg)
    if seed is not None:
        src = replace(src, seed=seed)
    elif "seed" not in source_cfg:
        src = replace(src, seed=_default_seed())
    ch = ChannelConfig(**cfg.get("channel", {}))
    det = DetectorConfig(**cfg.get("detector", {}))
    dev = _device_from_config(cfg)
    mode = cfg.get("mode", "pulse")
    if mode not in ("pulse", "fast"):
        raise ValueError(f"mode must be 'pulse' or 'fast', got {mode!r}")
    return dev, src, ch, det, mode


def _cmd_simulate(args: argparse.Namespace) -> int:
    cfg = _load_json(args.config)
    dev, src, ch, det, mode = _configs_from_file(cfg, args.seed)
    if mode == "pulse":
        events, matrix = simulate_counts(dev, src, ch, det)
    else:
        events, matrix = None, sample_count_matrix(dev, src, ch, det)
    with open(args.output, "w", encoding="utf-8") as fh:
        fh.write(matrix.dumps())
        fh.write("\n")
    if args.events:
        if events is None:
            raise ValueError("event logs require the pulse-level mode")
        with open(args.events, "w", encoding="utf-8") as fh:
            fh.write(events_to_csv(events))
    print(f"wrote {matrix.total} counts to {args.output}")
    return 0


def _read_matrix(path: str) -> CountMatrix:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    if path.endswith(".csv"):
        return CountMatrix.from_csv(text)
    return CountMatrix.loads(text)


def _analysis_config(args: argparse.Namespace, sigma: float) -> AnalysisConfig:
    return AnalysisConfig(
        sigma=sigma,
        n_starts=args.starts,
        seed=args.seed if args.seed is not None else _default_seed(),
    )


def _cmd_analyze(args: argparse.Namespace) -> int:
    matrix = _read_matrix(args.matrix)
    if args.flip_z:
        matrix = matrix.swap_det_signs("Z")
    cs = constraints(matrix)
    report: dict = {"sigma": args.sigma, "constraints": cs.to_json_dict()}
    rates: dict = {}
    qber = float(np.clip((1.0 - cs.corr[2, 2]) / 2.0, 0.0, 1.0))
    if args.protocol in ("bb84", "all"):
        for pair in ("XX", "XY", "YX", "YY"):
            rates[f"bb84_{pair.lower()}"] = bb84_rate_any_pair(cs.corr, pair)
    if args.protocol in ("rfi", "all"):
        rates["rfi"] = rfi_rate(qber, min(quantity_c(cs.corr), 2.0)).to_json_dict()
    if args.protocol in ("urfi", "all"):
        rates["urfi"] = urfi_rate(cs, _analysis_config(args, args.sigma)).to_json_dict()
    report["keyrates"] = rates
    text = json.dumps(report, indent=2)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
            fh.write("\n")
    else:
        print(text)
    return 0


def _sweep_row(
    theta_deg: float, dev, src, ch, det, mode: str, sigma: float, args
) -> tuple[dict, np.ndarray | None]:
    if mode == "pulse":
        _, matrix = simulate_counts(dev, src, ch, det)
    else:
        matrix = sample_count_matrix(dev, src, ch, det)
    if ch.z_flip:
        matrix = matrix.swap_det_signs("Z")
    cs = constraints(matrix)
    qber = float(np.clip((1.0 - cs.corr[2, 2]) / 2.0, 0.0, 1.0))
    cq = quantity_c(cs.corr)
    row = {
        "theta_deg": theta_deg,
        "r_bb84_xx": bb84_rate_any_pair(cs.corr, "XX"),
        "r_bb84_xy": bb84_rate_any_pair(cs.corr, "XY"),
        "r_bb84_yx": bb84_rate_any_pair(cs.corr, "YX"),
        "r_bb84_yy": bb84_rate_any_pair(cs.corr, "YY"),
        "r_rfi": rfi_rate(qber, min(cq, 2.0)).rate,
        "r_urfi": "",
        "r_urfi_sigma": "",
        "qber": qber,
        "C": cq,
        "status": "ok",
    }
    if args.protocols == "all":
        res0 = urfi_rate(cs, _analysis_config(args, 0.0))
        res_s = urfi_rate(cs, _analysis_config(args, sigma))
        row["r_urfi"] = res0.rate
        row["r_urfi_sigma"] = res_s.rate
        if res0.status == "infeasible" or res_s.status == "infeasible":
            row["status"] = "infeasible"
    normalized = matrix.counts / matrix.total if matrix.total else None
    return row, normalized


def _cmd_sweep(args: argparse.Namespace) -> int:
    cfg = _load_json(args.config)
    base_seed = args.seed if args.seed is not None else _default_seed()
    dev, src, base_ch, det, mode = _configs_from_file(cfg, base_seed)
    if "mode" not in cfg:
        mode = "fast"
    channels = [
        replace(ch, depolarization=base_ch.depolarization)
        for ch in hwp_sweep_angles(args.angles)
    ]

    rows = []
    matrices: dict[str, list] = {}
    for i, ch in enumerate(channels):
        theta_deg = math.degrees(ch.rotation) / 4.0
        src_i = replace(src, seed=base_seed + i)
        try:
            row, normalized = _sweep_row(theta_deg, dev, src_i, ch, det, mode, args.sigma, args)
        except Exception as exc:  # keep sweeping; record the failure
            row = {k: "" for k in SWEEP_HEADER}
            row["theta_deg"] = theta_deg
            row["status"] = f"error: {exc}"
            normalized = None
        rows.append(row)
        if normalized is not None:
            matrices[f"{theta_deg:.6f}"] = normalized.tolist()

    with open(args.output, "w", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=SWEEP_HEADER, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    if args.matrices:
        with open(args.matrices, "w", encoding="utf-8") as fh:
            json.dump(matrices, fh, indent=2)
            fh.write("\n")
    print(f"wrote {len(rows)} sweep rows to {args.output}")
    return 0


def _cmd_pns(args: argparse.Namespace) -> int:
    cfg = PnsConfig(
        pulse_rate=args.rate,
        mu=args.mu,
        eta_accessible=args.eta_a,
        eta_inaccessible=args.eta_i,
        key_fraction=args.fraction,
        raw_key_bits=args.rawbits,
    )
    print(json.dumps(pns_reduction(cfg).to_json_dict(), indent=2))
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rfiqkd",
        description="Simulator and security analysis for a free-space "
        "reference-frame-independent QKD link",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="generate a count matrix (and event log)")
    p_sim.add_argument("--config", required=True, help="JSON configuration file")
    p_sim.add_argument("--output", required=True, help="count matrix JSON path")
    p_sim.add_argument("--events", help="optional event-log CSV path (pulse mode)")
    p_sim.add_argument("--seed", type=int, default=None)
    p_sim.set_defaults(func=_cmd_simulate)

    p_an = sub.add_parser("analyze", help="key rates from a count matrix")
    p_an.add_argument("matrix", help="count matrix JSON or CSV path")
    p_an.add_argument("--sigma", type=float, default=3.0)
    p_an.add_argument("--protocol", choices=["bb84", "rfi", "urfi", "all"], default="all")
    p_an.add_argument("--output", help="report JSON path (default: stdout)")
    p_an.add_argument("--starts", type=int, default=16)
    p_an.add_argument("--seed", type=int, default=None)
    p_an.add_argument(
        "--flip-z", action="store_true",
        help="relabel the key-basis detectors before analysis",
    )
    p_an.set_defaults(func=_cmd_analyze)

    p_sw = sub.add_parser("sweep", help="key rates across a waveplate rotation sweep")
    p_sw.add_argument("--config", required=True, help="JSON configuration file")
    p_sw.add_argument("--angles", type=int, default=24)
    p_sw.add_argument("--sigma", type=float, default=3.0)
    p_sw.add_argument("--output", required=True, help="sweep CSV path")
    p_sw.add_argument("--matrices", help="optional per-angle normalised matrix JSON path")
    p_sw.add_argument(
        "--protocols", choices=["analytic", "all"], default="all",
        help="'analytic' skips the minimisation-based rate",
    )
    p_sw.add_argument("--starts", type=int, default=16)
    p_sw.add_argument("--seed", type=int, default=None)
    p_sw.set_defaults(func=_cmd_sweep)

    p_pns = sub.add_parser("pns", help="multi-photon key-fraction reduction")
    p_pns.add_argument("--rate", type=float, required=True, help="pulse rate in Hz")
    p_pns.add_argument("--mu", type=float, required=True, help="mean photons per pulse")
    p_pns.add_argument("--eta-a", type=float, required=True, help="accessible loss share")
    p_pns.add_argument("--eta-i", type=float, required=True, help="inaccessible loss share")
    p_pns.add_argument("--fraction", type=float, required=True, help="raw-key fraction of clicks")
    p_pns.add_argument("--rawbits", type=int, required=True, help="raw key bits per second")
    p_pns.set_defaults(func=_cmd_pns)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (FileNotFoundError, PermissionError, IsADirectoryError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
