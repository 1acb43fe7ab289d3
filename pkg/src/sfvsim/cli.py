"""Command-line front end.

Subcommands: run one scenario, sweep one variable, tabulate the analytic
detection model, print key-space figures, or trace a single handshake.
All outputs are deterministic for equal seeds; CSV goes to --out or
stdout.
"""

from __future__ import annotations

import argparse
import random
import sys

from .adversary import ReplayProfile, WormholeTunnel, wormhole_perturb
from .analytics import (
    brute_force_average,
    compare_analytic_empirical,
    detection_probability,
    detection_rate,
    DetectionModel,
    emit_csv,
    keyspace_size,
    scientific_string,
)
from .config import build_scenario, load_config
from .model import IdPool, KEY_BITS, NodeProfile, SymmetricId
from .protocol import HandshakeConfig, handshake_transcript, transcript_lines
from .ranging import evidence_for_link
from .simulator import SFV_MODES, measure_metrics, run_scenario


def _metrics_record(metrics) -> dict:
    return {
        "mode": metrics.mode,
        "seed": metrics.master_seed,
        "duration_s": metrics.duration_s,
        "tx_rate_kbps": metrics.tx_rate_kbps,
        "node_speed_min": metrics.node_speed[0],
        "node_speed_max": metrics.node_speed[1],
        "generated": metrics.generated,
        "delivered": metrics.delivered,
        "dropped_queue": metrics.dropped_queue,
        "dropped_range": metrics.dropped_range,
        "in_flight": metrics.in_flight,
        "throughput_kbps": metrics.throughput_kbps,
        "mean_delay_s": metrics.mean_delay_s,
        "pdr": metrics.pdr,
        "no_traffic": metrics.no_traffic,
        "handshakes": metrics.handshakes,
        "scan_attempts": metrics.scan_attempts,
        "friendly_per_cluster": ";".join(str(n) for n in metrics.friendly_per_cluster),
        "suspicious_per_cluster": ";".join(str(n) for n in metrics.suspicious_per_cluster),
        "attack_attempts": metrics.attack_attempts,
        "attacks_detected": metrics.attacks_detected,
        "empirical_detection_rate": metrics.empirical_detection_rate,
    }


def _emit(records: list[dict], out: str | None) -> None:
    if out:
        emit_csv(records, out)
    else:
        emit_csv(records, sys.stdout)


def _load_options(args) -> dict:
    return load_config(args.config) if args.config else {}


def _cmd_run(args) -> int:
    options = _load_options(args)
    scenario, duration = build_scenario(
        options,
        master_seed=args.seed,
        sfv_mode=args.mode,
        duration_s=args.duration,
    )
    run = run_scenario(scenario, duration)
    _emit([_metrics_record(measure_metrics(run))], args.out)
    return 0


def _cmd_sweep(args) -> int:
    options = _load_options(args)
    values = [part.strip() for part in args.values.split(",") if part.strip()]
    if not values:
        raise ValueError("sweep needs at least one value")
    base_seed = args.seed if args.seed is not None else 1

    if args.variable == "n_ids":
        profile = ReplayProfile.calibrated(args.detection_probability)
        rows = compare_analytic_empirical(
            [int(v) for v in values], profile,
            attempts=args.attempts, seed=base_seed,
        )
        records = [
            {
                "n_ids": row.n_ids,
                "analytic_rate": row.analytic,
                "empirical_rate": row.empirical,
                "abs_gap": row.abs_gap,
                "attempts": row.attempts,
            }
            for row in rows
        ]
        _emit(records, args.out)
        return 0

    records = []
    for value in values:
        for repetition in range(args.repetitions):
            seed = base_seed + repetition
            overrides = {
                "master_seed": seed,
                "sfv_mode": args.mode,
                "duration_s": args.duration,
            }
            if args.variable == "tx_rate":
                overrides["tx_rate_kbps"] = float(value)
            else:  # node_speed
                overrides["node_speed_min"] = float(value)
                overrides["node_speed_max"] = float(value)
            scenario, duration = build_scenario(options, **overrides)
            metrics = measure_metrics(run_scenario(scenario, duration))
            record = {"variable": args.variable, "value": float(value)}
            record.update(_metrics_record(metrics))
            records.append(record)
    _emit(records, args.out)
    return 0


def _cmd_detect(args) -> int:
    if args.p_wormhole is not None or args.p_id is not None or args.p_rtt is not None:
        if None in (args.p_wormhole, args.p_id, args.p_rtt):
            raise ValueError("give all of --p-wormhole, --p-id, --p-rtt or none")
        profile = ReplayProfile(args.p_wormhole, args.p_id, args.p_rtt)
    else:
        profile = ReplayProfile.calibrated(args.detection_probability)
    n_values = [int(part) for part in args.n_ids.split(",") if part.strip()]
    single = detection_probability(profile)
    records = [
        {
            "n_ids": n,
            "p_wormhole": profile.p_wormhole,
            "p_id_replay": profile.p_id_replay,
            "p_rtt_replay": profile.p_rtt_replay,
            "detection_probability": single,
            "detection_rate": detection_rate(DetectionModel(profile, n)),
        }
        for n in n_values
    ]
    _emit(records, args.out)
    return 0


def _cmd_keyspace(args) -> int:
    size = keyspace_size(args.bits)
    average = brute_force_average(args.bits)
    if args.out:
        emit_csv(
            [{
                "bits": args.bits,
                "keys": size,
                "brute_force_average": average,
                "scientific": scientific_string(size),
            }],
            args.out,
        )
    else:
        print(f"key width: {args.bits} bits")
        print(f"distinct keys: {size}")
        print(f"scientific: {scientific_string(size)}")
        print(f"average exhaustive-search trials: {average}")
    return 0


def _cmd_handshake(args) -> int:
    rng = random.Random(args.seed if args.seed is not None else 1)
    taken: set[int] = set()

    def draw_ids(count: int) -> list[SymmetricId]:
        ids = []
        while len(ids) < count:
            value = rng.getrandbits(26)
            if value not in taken:
                taken.add(value)
                ids.append(SymmetricId(value))
        return ids

    shared = draw_ids(6)
    initiator = NodeProfile("initiator", (0.0, 0.0), (0.0, 0.0), "honest", IdPool(list(shared)))
    responder = NodeProfile("responder", (150.0, 0.0), (0.0, 0.0), "honest", IdPool(list(shared)))
    evidence = evidence_for_link(150.0, 0.0, d_max=270.0)

    cfg = HandshakeConfig()
    if args.adversary == "wormhole":
        tunnel = WormholeTunnel("relay-near", "relay-far", args.tunnel_latency)
        evidence = wormhole_perturb(evidence, tunnel, tunnel_bearing=0.0)
        events = handshake_transcript(initiator, responder, evidence, cfg, rng)
    elif args.adversary == "sybil":
        impostor = NodeProfile("impostor", (150.0, 0.0), (0.0, 0.0), "sybil",
                               IdPool(draw_ids(3)))
        events = handshake_transcript(initiator, impostor, evidence, cfg, rng)
    else:
        events = handshake_transcript(initiator, responder, evidence, cfg, rng)

    lines = transcript_lines(events)
    if args.out:
        with open(args.out, "w") as handle:
            handle.write("\n".join(lines) + "\n")
    else:
        for line in lines:
            print(line)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sfvsim",
        description="Verification-gated MANET link simulator and analytics",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, duration_default=None):
        p.add_argument("--config", help="flat key = value scenario file")
        p.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
        p.add_argument("--out", help="write CSV here instead of stdout")
        p.add_argument("--mode", choices=SFV_MODES, help="verification mode")
        p.add_argument("--duration", type=float, default=duration_default,
                       help="simulated seconds")

    p_run = sub.add_parser("run", help="run one scenario and report metrics")
    common(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="sweep one variable over comma-separated values")
    common(p_sweep)
    p_sweep.add_argument("--variable", required=True,
                         choices=("tx_rate", "node_speed", "n_ids"))
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated sweep values")
    p_sweep.add_argument("--repetitions", type=int, default=1,
                         help="seeded repetitions per value (seed, seed+1, ...)")
    p_sweep.add_argument("--attempts", type=int, default=10_000,
                         help="simulated attacker attempts per point (n_ids sweeps)")
    p_sweep.add_argument("--detection-probability", type=float, default=0.35,
                         help="single-verification detection target (n_ids sweeps)")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_detect = sub.add_parser("detect", help="tabulate the analytic detection model")
    p_detect.add_argument("--detection-probability", type=float, default=0.35)
    p_detect.add_argument("--p-wormhole", type=float, dest="p_wormhole")
    p_detect.add_argument("--p-id", type=float, dest="p_id")
    p_detect.add_argument("--p-rtt", type=float, dest="p_rtt")
    p_detect.add_argument("--n-ids", default="1,2,4,6,8",
                          help="comma-separated verifier id counts")
    p_detect.add_argument("--out")
    p_detect.set_defaults(func=_cmd_detect)

    p_keys = sub.add_parser("keyspace", help="print exhaustive-search figures")
    p_keys.add_argument("--bits", type=int, default=KEY_BITS)
    p_keys.add_argument("--out")
    p_keys.set_defaults(func=_cmd_keyspace)

    p_hs = sub.add_parser("handshake", help="trace one handshake transcript")
    p_hs.add_argument("--seed", type=int)
    p_hs.add_argument("--out")
    p_hs.add_argument("--adversary", choices=("none", "sybil", "wormhole"),
                      default="none")
    p_hs.add_argument("--tunnel-latency", type=float, default=1e-5,
                      dest="tunnel_latency", help="wormhole latency, seconds")
    p_hs.set_defaults(func=_cmd_handshake)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
