"""Core value types for link verification: symmetric IDs, integrated keys, blocks.

The verification cipher works on 12-byte blocks (10 payload bytes plus a
16-bit checksum) masked by a 90-bit integrated key.  The key concatenates a
32-bit location-derived word, a 26-bit symmetric ID and a 32-bit timing
word, and is consumed most-significant-first.
"""

from __future__ import annotations

from dataclasses import dataclass, field

ID_BITS = 26
K1_BITS = 32
K3_BITS = 32
KEY_BITS = K1_BITS + ID_BITS + K3_BITS  # 90
HALF_BITS = KEY_BITS // 2  # 45, key halves reseed the next block
PAD_BITS = 6  # zero pad appended so the keystream covers 12 bytes exactly

PAYLOAD_BYTES = 10
CHECKSUM_BYTES = 2
BLOCK_BYTES = PAYLOAD_BYTES + CHECKSUM_BYTES

_MASK_ID = (1 << ID_BITS) - 1
_MASK32 = 0xFFFFFFFF
_MASK_HALF = (1 << HALF_BITS) - 1


@dataclass(frozen=True)
class SymmetricId:
    """A 26-bit shared identifier drawn from a pre-provisioned pool."""

    value: int

    def __post_init__(self):
        if not 0 <= self.value <= _MASK_ID:
            raise ValueError(f"symmetric id out of 26-bit range: {self.value}")

    def __int__(self) -> int:
        return self.value


@dataclass
class IdPool:
    """Ordered pool of distinct symmetric IDs with a cyclic selection cursor.

    Both endpoints of a provisioned link hold pools with identical contents
    and advance their cursors in lockstep, one selection per handshake.
    """

    ids: list[SymmetricId]
    next_index: int = 0

    def __post_init__(self):
        values = [i.value for i in self.ids]
        if len(set(values)) != len(values):
            raise ValueError("id pool contains duplicate ids")

    def __len__(self) -> int:
        return len(self.ids)


def select_symmetric_id(pool: IdPool) -> SymmetricId:
    """Return the pool's next ID and advance the cursor cyclically."""
    if not pool.ids:
        raise ValueError("cannot select from an empty id pool")
    chosen = pool.ids[pool.next_index % len(pool.ids)]
    pool.next_index = (pool.next_index + 1) % len(pool.ids)
    return chosen


@dataclass(frozen=True)
class IntegratedKey:
    """One block's 90-bit key: location word, symmetric ID, timing word."""

    k1: int
    k2: SymmetricId
    k3: int

    def __post_init__(self):
        if not 0 <= self.k1 <= _MASK32:
            raise ValueError(f"k1 out of 32-bit range: {self.k1}")
        if not 0 <= self.k3 <= _MASK32:
            raise ValueError(f"k3 out of 32-bit range: {self.k3}")


def pack_key(key: IntegratedKey) -> int:
    """Concatenate k1 || k2 || k3 into a 90-bit integer, k1 most significant."""
    return (key.k1 << (ID_BITS + K3_BITS)) | (key.k2.value << K3_BITS) | key.k3


def unpack_key(packed: int) -> IntegratedKey:
    """Inverse of pack_key."""
    if not 0 <= packed < (1 << KEY_BITS):
        raise ValueError("packed key out of 90-bit range")
    return IntegratedKey(
        k1=packed >> (ID_BITS + K3_BITS),
        k2=SymmetricId((packed >> K3_BITS) & _MASK_ID),
        k3=packed & _MASK32,
    )


def split_key_halves(key: IntegratedKey) -> tuple[int, int]:
    """Split the packed key into (upper 45 bits, lower 45 bits).

    The halves are zero-extended to 64-bit seeds for the next block's
    location and timing words, which is what rolls the key forward.
    """
    packed = pack_key(key)
    return packed >> HALF_BITS, packed & _MASK_HALF


def expand_keystream(key: IntegratedKey) -> bytes:
    """Return the 12-byte block mask: the packed key followed by 6 zero bits."""
    return (pack_key(key) << PAD_BITS).to_bytes(BLOCK_BYTES, "big")


# CRC-16/CCITT-FALSE: poly 0x1021, init 0xFFFF, no reflection, no final xor.
_CRC_POLY = 0x1021


def _crc_table() -> list[int]:
    table = []
    for byte in range(256):
        crc = byte << 8
        for _ in range(8):
            crc = ((crc << 1) ^ _CRC_POLY) & 0xFFFF if crc & 0x8000 else (crc << 1) & 0xFFFF
        table.append(crc)
    return table


_CRC16_TABLE = _crc_table()


def block_checksum(payload: bytes) -> int:
    """16-bit integrity checksum over a block payload."""
    crc = 0xFFFF
    for byte in payload:
        crc = ((crc << 8) & 0xFFFF) ^ _CRC16_TABLE[(crc >> 8) ^ byte]
    return crc


@dataclass(frozen=True)
class Block:
    """A fixed 12-byte cipher block: 10 payload bytes plus 2 checksum bytes.

    The checksum field is only meaningful on plaintext blocks; ciphertext
    reuses the same container with the field masked like everything else.
    """

    data: bytes

    def __post_init__(self):
        if len(self.data) != BLOCK_BYTES:
            raise ValueError(f"block must be exactly {BLOCK_BYTES} bytes, got {len(self.data)}")

    @classmethod
    def from_payload(cls, payload: bytes) -> "Block":
        """Build a plaintext block, appending the payload checksum."""
        if len(payload) != PAYLOAD_BYTES:
            raise ValueError(f"payload must be exactly {PAYLOAD_BYTES} bytes, got {len(payload)}")
        return cls(payload + block_checksum(payload).to_bytes(CHECKSUM_BYTES, "big"))

    @property
    def payload(self) -> bytes:
        return self.data[:PAYLOAD_BYTES]

    @property
    def checksum_field(self) -> int:
        return int.from_bytes(self.data[PAYLOAD_BYTES:], "big")

    def checksum_ok(self) -> bool:
        """True when the trailing field matches the payload checksum."""
        return self.checksum_field == block_checksum(self.payload)


@dataclass(frozen=True)
class RangingEvidence:
    """One link's measured evidence plus the thresholds it must satisfy.

    Channel reciprocity is assumed: both endpoints observe the same values,
    so the same evidence object seeds both sides of a session.

    d_radial    measured radial distance, meters
    aoa         measured angle of arrival, degrees in [0, 360)
    rtt         measured round-trip time, seconds
    d_max       admissible distance ceiling (the selected radio range), m
    aoa_center  center of the admissible arrival sector, degrees
    aoa_halfwidth  half-width of that sector, degrees in (0, 180]
    rtt_max     admissible round-trip ceiling, seconds
    """

    d_radial: float
    aoa: float
    rtt: float
    d_max: float
    aoa_center: float
    aoa_halfwidth: float
    rtt_max: float

    def __post_init__(self):
        if self.d_radial < 0:
            raise ValueError(f"negative radial distance: {self.d_radial}")
        if not 0.0 <= self.aoa < 360.0:
            raise ValueError(f"arrival angle outside [0, 360): {self.aoa}")
        if not 0.0 <= self.aoa_center < 360.0:
            raise ValueError(f"sector center outside [0, 360): {self.aoa_center}")
        if self.rtt < 0:
            raise ValueError(f"negative round-trip time: {self.rtt}")
        if self.d_max <= 0:
            raise ValueError(f"distance ceiling must be positive: {self.d_max}")
        if self.rtt_max <= 0:
            raise ValueError(f"round-trip ceiling must be positive: {self.rtt_max}")
        if not 0.0 < self.aoa_halfwidth <= 180.0:
            raise ValueError(f"sector half-width outside (0, 180]: {self.aoa_halfwidth}")


@dataclass(frozen=True)
class NodeProfile:
    """A node's identity, kinematic state and credential pool.

    waypoint/pause_remaining carry random-waypoint mobility state between
    steps; the shared pool object survives positional updates so its
    cursor keeps advancing across handshakes.
    """

    node_id: str
    position: tuple[float, float]
    velocity: tuple[float, float]
    role: str  # "honest" | "sybil" | "wormhole-endpoint"
    pool: IdPool
    waypoint: tuple[float, float] | None = None
    pause_remaining: float = 0.0

    def __post_init__(self):
        if self.role not in ("honest", "sybil", "wormhole-endpoint"):
            raise ValueError(f"unknown node role: {self.role!r}")
