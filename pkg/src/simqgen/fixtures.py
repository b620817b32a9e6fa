"""Bundled synthetic conversations: eight conversations over five simulations.

These fixtures reproduce the benchmark's cardinalities (8 x 35 questions x 4
levels = 1120 cells per model) without any classroom data; every file is
labeled synthetic. Each simulation supports all seven question types,
including a three-unit causal chain.
"""

from __future__ import annotations

import json
from importlib import resources

from .bench import Conversation, conversation_from_json_dict


def load_conversations(limit: int | None = None) -> tuple[Conversation, ...]:
    """The bundled conversations in id order, optionally the first ``limit``."""
    package_files = resources.files(__package__) / "data"
    conversations = []
    for entry in sorted(package_files.iterdir(), key=lambda p: p.name):
        if entry.name.endswith(".json"):
            conversations.append(conversation_from_json_dict(json.loads(entry.read_text(encoding="utf-8"))))
    if limit is not None:
        conversations = conversations[:limit]
    return tuple(conversations)
