import hashlib
import json
import math
from typing import Dict, List, Sequence, Union

import numpy as np

SeedPart = Union[int, str]


def _seed_word(part: SeedPart) -> int:
    if isinstance(part, (int, np.integer)):
        if part < 0:
            raise ValueError(f"Seed parts must be non-negative, got {part}")
        return int(part)
    digest = hashlib.sha256(str(part).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def derive_seed(*parts: SeedPart) -> int:
    """
    Derive a 64-bit seed from a master seed and any number of labels.

    Strings are hashed with SHA-256, so the result is stable across processes
    and platforms (unlike ``hash``).

    Args:
        parts: Master seed followed by identifiers (dataset, generator, repeat, ...)

    Returns:
        Non-negative integer below 2**64
    """
    sequence = np.random.SeedSequence([_seed_word(p) for p in parts])
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def make_rng(*parts: SeedPart) -> np.random.Generator:
    return np.random.default_rng(derive_seed(*parts))


def largest_remainder(counts: Sequence[int], total: int) -> List[int]:
    """
    Allocate ``total`` units across groups proportionally to ``counts``.

    Each group gets the floor of its exact quota; the leftover units go to the
    largest fractional remainders, ties to the lower group index.

    Args:
        counts: Group sizes (non-negative, positive sum)
        total: Units to allocate

    Returns:
        Per-group allocation summing to ``total``
    """
    grand = sum(counts)
    if grand <= 0:
        raise ValueError("Cannot allocate across empty groups")
    quotas = [c * total / grand for c in counts]
    allocation = [math.floor(q) for q in quotas]
    leftover = total - sum(allocation)
    order = sorted(range(len(counts)), key=lambda i: (-(quotas[i] - allocation[i]), i))
    for i in order[:leftover]:
        allocation[i] += 1
    return allocation


def to_jsonable(value):
    """
    Convert numpy scalars and non-finite floats into plain JSON values.
    """
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def dump_json(data: Dict) -> str:
    return json.dumps(to_jsonable(data), indent=2, sort_keys=True) + "\n"


def reject_unknown_keys(data: Dict, allowed, where: str, error=ValueError):
    unknown = set(data) - set(allowed)
    if unknown:
        raise error(f"Unknown field(s) in {where}: {', '.join(sorted(unknown))}")
