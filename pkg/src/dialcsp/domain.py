"""Ontology, knowledge base and instance matching.

A knowledge base is the per-dialogue set of slot-value records the dialogue
must agree with.  Matching and counting go through :class:`KBIndex`, which
keeps one posting set per (slot, value) pair so existence and exact-count
checks are set intersections rather than scans.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Set, Tuple

from .errors import ValidationError

COUNT_MARKER = "__count__"


def normalize_text(surface: str) -> str:
    """Canonical form of a slot value: lowercased, trimmed, single spaces."""
    return " ".join(surface.lower().split())


@dataclass(frozen=True)
class SlotType:
    name: str
    values: frozenset

    def __post_init__(self):
        if not self.values:
            raise ValidationError(f"slot {self.name!r} has no values")
        for v in self.values:
            if v != normalize_text(v):
                raise ValidationError(
                    f"slot {self.name!r} value {v!r} is not canonical"
                )


@dataclass(frozen=True)
class Ontology:
    slots: Tuple[SlotType, ...]

    def __post_init__(self):
        names = [s.name for s in self.slots]
        if len(names) != len(set(names)):
            raise ValidationError("duplicate slot names in ontology")

    def slot(self, name: str) -> SlotType:
        for s in self.slots:
            if s.name == name:
                return s
        raise ValidationError(f"unknown slot {name!r}")

    def has_slot(self, name: str) -> bool:
        return any(s.name == name for s in self.slots)

    @property
    def slot_names(self) -> List[str]:
        return [s.name for s in self.slots]

    def all_values(self) -> Set[str]:
        out: Set[str] = set()
        for s in self.slots:
            out |= s.values
        return out

    @classmethod
    def from_dict(cls, data: Mapping) -> "Ontology":
        slots = tuple(
            SlotType(
                name=item["name"],
                values=frozenset(normalize_text(v) for v in item["values"]),
            )
            for item in data["slots"]
        )
        return cls(slots=slots)

    def to_dict(self) -> dict:
        return {
            "slots": [
                {"name": s.name, "values": sorted(s.values)} for s in self.slots
            ]
        }

    @classmethod
    def load(cls, path: Path) -> "Ontology":
        with open(path) as f:
            return cls.from_dict(json.load(f))


@dataclass(frozen=True)
class Instance:
    id: str
    attributes: Mapping[str, str]

    def matches(self, filters: Mapping[str, str]) -> bool:
        return all(self.attributes.get(s) == v for s, v in filters.items())


@dataclass(frozen=True)
class KnowledgeBase:
    instances: Tuple[Instance, ...]

    def __post_init__(self):
        ids = [i.id for i in self.instances]
        if len(ids) != len(set(ids)):
            raise ValidationError("duplicate instance ids in knowledge base")

    def __len__(self) -> int:
        return len(self.instances)

    def ids(self) -> List[str]:
        return [i.id for i in self.instances]

    def get(self, instance_id: str) -> Instance:
        for i in self.instances:
            if i.id == instance_id:
                return i
        raise ValidationError(f"unknown instance id {instance_id!r}")

    def slot_values(self, slot: str) -> Set[str]:
        """Distinct values the kb holds for a slot."""
        return {
            i.attributes[slot] for i in self.instances if slot in i.attributes
        }

    def validate(self, ontology: Ontology) -> None:
        for inst in self.instances:
            for slot, value in inst.attributes.items():
                if not ontology.has_slot(slot):
                    raise ValidationError(
                        f"instance {inst.id!r}: unknown slot {slot!r}"
                    )
                if value not in ontology.slot(slot).values:
                    raise ValidationError(
                        f"instance {inst.id!r}: value {value!r} not in "
                        f"ontology slot {slot!r}"
                    )

    @classmethod
    def from_dict(cls, data: Mapping) -> "KnowledgeBase":
        instances = tuple(
            Instance(
                id=item["id"],
                attributes={
                    s: normalize_text(v) for s, v in item["attributes"].items()
                },
            )
            for item in data["instances"]
        )
        return cls(instances=instances)

    def to_dict(self) -> dict:
        return {
            "instances": [
                {"id": i.id, "attributes": dict(i.attributes)}
                for i in self.instances
            ]
        }

    @classmethod
    def load(cls, path: Path) -> "KnowledgeBase":
        with open(path) as f:
            return cls.from_dict(json.load(f))


@dataclass(frozen=True)
class KBIndex:
    postings: Mapping[Tuple[str, str], frozenset]
    total: int
    instance_ids: Tuple[str, ...]


def build_kb_index(kb: KnowledgeBase) -> KBIndex:
    postings: Dict[Tuple[str, str], Set[str]] = {}
    for inst in kb.instances:
        for slot, value in inst.attributes.items():
            postings.setdefault((slot, value), set()).add(inst.id)
    return KBIndex(
        postings={k: frozenset(v) for k, v in postings.items()},
        total=len(kb),
        instance_ids=tuple(kb.ids()),
    )


def matching_ids(index: KBIndex, filters: Mapping[str, str]) -> frozenset:
    result = frozenset(index.instance_ids)
    for slot, value in filters.items():
        result &= index.postings.get((slot, value), frozenset())
        if not result:
            break
    return result


def count_matching(index: KBIndex, filters: Mapping[str, str]) -> int:
    if not filters:
        return index.total
    return len(matching_ids(index, filters))


def exists_matching(index: KBIndex, filters: Mapping[str, str]) -> bool:
    return count_matching(index, filters) > 0


MAX_KB_SIZE = 9
PAD_RANGE = 8  # extra instances drawn uniformly from {0..8}


def sample_kb(
    global_kb: KnowledgeBase,
    pertinent_ids: Iterable[str],
    seed: int,
) -> KnowledgeBase:
    """Per-dialogue kb: all pertinent instances plus up to 8 random others.

    The pad count is drawn uniformly from {0..8} and padding is sampled
    without replacement, so the result never exceeds 9 instances (or the
    global pool, whichever is smaller).  Deterministic for a given seed.
    """
    pertinent = set(pertinent_ids)
    known = set(global_kb.ids())
    unknown = pertinent - known
    if unknown:
        raise ValidationError(f"pertinent ids not in global kb: {sorted(unknown)}")
    if len(pertinent) > MAX_KB_SIZE:
        raise ValidationError(
            f"{len(pertinent)} pertinent instances exceed the kb size cap "
            f"of {MAX_KB_SIZE}"
        )
    rng = random.Random(seed)
    n = rng.randint(0, PAD_RANGE)
    n = min(n, MAX_KB_SIZE - len(pertinent))
    pool = sorted(known - pertinent)
    padding = set(rng.sample(pool, min(n, len(pool))))
    chosen = pertinent | padding
    instances = tuple(i for i in global_kb.instances if i.id in chosen)
    return KnowledgeBase(instances=instances)


def select_pertinent(
    global_kb: KnowledgeBase,
    gold_mentions: Mapping[str, str],
    name_slot: str = "name",
) -> Optional[str]:
    """Pick the instance a gold dialogue talks about.

    Prefers an instance whose name is mentioned in the dialogue; otherwise
    the instance matching the most gold slot-value mentions, ties broken by
    instance id.  Returns None on an empty kb or when nothing matches.
    """
    if not global_kb.instances:
        return None
    mentioned_name = gold_mentions.get(name_slot)
    if mentioned_name is not None:
        for inst in global_kb.instances:
            if inst.attributes.get(name_slot) == mentioned_name:
                return inst.id
    best_id = None
    best_score = 0
    for inst in sorted(global_kb.instances, key=lambda i: i.id):
        score = sum(
            1
            for slot, value in gold_mentions.items()
            if inst.attributes.get(slot) == value
        )
        if score > best_score:
            best_id, best_score = inst.id, score
    return best_id
