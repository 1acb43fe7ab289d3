"""Flat `key = value` scenario configuration files.

Blank lines and `#` comments are ignored.  Every key is optional and maps
onto one scenario knob; unknown keys are rejected so typos fail loudly.
List-valued keys take comma-separated entries.
"""

from __future__ import annotations

from .adversary import ReplayProfile
from .protocol import HandshakeConfig
from .simulator import QueueModel, Scenario


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_float_list(text: str) -> tuple[float, ...]:
    return tuple(float(part) for part in text.split(","))


_SCHEMA = {
    "terrain_width": float,
    "terrain_height": float,
    "clusters": int,
    "cluster_width": float,
    "cluster_height": float,
    "nodes_per_cluster": int,
    "radio_ranges": _parse_float_list,
    "tx_rate_kbps": float,
    "packet_size_bytes": int,
    "node_speed_min": float,
    "node_speed_max": float,
    "sfv_mode": str,
    "master_seed": int,
    "duration_s": float,
    "queue_capacity": int,
    "channel_capacity_kbps": float,
    "flows_per_cluster": int,
    "m_blocks": int,
    "n_ranging": int,
    "retry_limit": int,
    "n_ids": int,
    "processing_budget_s": float,
    "aoa_halfwidth_deg": float,
    "handshake_base_s": float,
    "handshake_attempt_extra_s": float,
    "mobility_step_s": float,
    "discovery_interval_s": float,
    "pause_s": float,
    "attacker_fraction": float,
    "attacker_kind": str,
    "attack_interval_s": float,
    "tunnel_latency_s": float,
    "p_wormhole": float,
    "p_id_replay": float,
    "p_rtt_replay": float,
    "detection_probability": float,
    "neighbor_verification": _parse_bool,
    "noise_distance_m": float,
    "noise_angle_deg": float,
    "noise_rtt_s": float,
}


def parse_config_text(text: str) -> dict:
    """Parse flat configuration text into typed options."""
    options: dict = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {line_no}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _SCHEMA:
            raise ValueError(f"line {line_no}: unknown configuration key {key!r}")
        if key in options:
            raise ValueError(f"line {line_no}: duplicate configuration key {key!r}")
        try:
            options[key] = _SCHEMA[key](value)
        except ValueError as exc:
            raise ValueError(f"line {line_no}: bad value for {key}: {exc}") from exc
    return options


def load_config(path) -> dict:
    """Read and parse one configuration file."""
    with open(path, "r") as handle:
        return parse_config_text(handle.read())


def build_scenario(options: dict, **overrides) -> tuple[Scenario, float]:
    """Assemble a Scenario from typed options plus keyword overrides.

    Overrides use the same key names and win over the file.  Returns the
    scenario and the run duration (default 60 s).
    """
    merged = dict(options)
    for key, value in overrides.items():
        if value is None:
            continue
        if key not in _SCHEMA:
            raise ValueError(f"unknown configuration key {key!r}")
        merged[key] = value

    defaults = Scenario()
    duration = merged.pop("duration_s", 60.0)

    def take(key, fallback):
        return merged.pop(key, fallback)

    terrain = (take("terrain_width", defaults.terrain[0]),
               take("terrain_height", defaults.terrain[1]))
    cluster_size = (take("cluster_width", defaults.cluster_size[0]),
                    take("cluster_height", defaults.cluster_size[1]))
    node_speed = (take("node_speed_min", defaults.node_speed[0]),
                  take("node_speed_max", defaults.node_speed[1]))
    queue = QueueModel(
        capacity=take("queue_capacity", defaults.queue.capacity),
        service_rate_kbps=take("channel_capacity_kbps", defaults.queue.service_rate_kbps),
    )
    handshake = HandshakeConfig(
        m_blocks=take("m_blocks", defaults.handshake.m_blocks),
        n_ranging=take("n_ranging", defaults.handshake.n_ranging),
        retry_limit=take("retry_limit", defaults.handshake.retry_limit),
    )

    replay_profile = None
    explicit = [merged.pop(k, None) for k in ("p_wormhole", "p_id_replay", "p_rtt_replay")]
    target = merged.pop("detection_probability", None)
    if any(p is not None for p in explicit):
        if any(p is None for p in explicit):
            raise ValueError("replay profile needs all of p_wormhole, p_id_replay, p_rtt_replay")
        replay_profile = ReplayProfile(*explicit)
    elif target is not None:
        replay_profile = ReplayProfile.calibrated(target)

    scenario = Scenario(
        terrain=terrain,
        cluster_size=cluster_size,
        node_speed=node_speed,
        queue=queue,
        handshake=handshake,
        replay_profile=replay_profile,
        **merged,
    )
    return scenario, duration
