"""Canonical JSON encoding and stable hashing used for digests and seeds."""

from __future__ import annotations

import hashlib
import json


def canonical_json(value) -> str:
    """Compact JSON with sorted keys; byte-stable for any JSON-encodable value."""
    return json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def sha256_hex(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def digest_of(value) -> str:
    """sha256 of the canonical JSON encoding."""
    return sha256_hex(canonical_json(value))


def stable_seed(*parts: str) -> int:
    """Deterministic non-negative seed from string parts (process-independent)."""
    joined = "\x1f".join(parts)
    return int.from_bytes(hashlib.sha256(joined.encode("utf-8")).digest()[:8], "big")
