"""Dialogue representation, variable identification and de-/re-lexicalization.

A dialogue arrives annotated with character spans marking slot values and
instance counts.  ``delexicalize`` turns each span into a typed variable and
replaces it with a ``<Vk>`` placeholder; ``relexicalize`` substitutes values
back, reproducing the original text byte-exactly under the gold assignment.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Tuple, Union

from .domain import COUNT_MARKER, normalize_text
from .errors import ValidationError

NUMBER_WORDS = {
    "zero": 0, "one": 1, "two": 2, "three": 3, "four": 4, "five": 5,
    "six": 6, "seven": 7, "eight": 8, "nine": 9, "ten": 10,
}
WORD_FOR_NUMBER = {v: k for k, v in NUMBER_WORDS.items()}
NEGATION_WORDS = {"no", "none"}

MASK_TOKEN = "[MASK]"

Value = Union[str, int]


def normalize_value(surface: str, kind: str) -> Value:
    """Canonicalize a span surface: text for value spans, int for counts."""
    if kind == "value":
        return normalize_text(surface)
    token = normalize_text(surface)
    if token.isdigit():
        return int(token)
    if token in NUMBER_WORDS:
        return NUMBER_WORDS[token]
    if token in NEGATION_WORDS:
        return 0
    raise ValidationError(f"cannot read {surface!r} as an instance count")


@dataclass(frozen=True)
class Span:
    start: int
    end: int
    surface: str
    slot: str
    cue: Optional[str] = None  # explicit override: none_cue/exists_cue/exact_cue

    @property
    def kind(self) -> str:
        return "count" if self.slot == COUNT_MARKER else "value"


@dataclass(frozen=True)
class Turn:
    speaker: str  # "user" or "system"
    text: str
    spans: Tuple[Span, ...] = ()

    def __post_init__(self):
        if self.speaker not in ("user", "system"):
            raise ValidationError(f"bad speaker {self.speaker!r}")
        last_end = 0
        for span in self.spans:
            if span.start < last_end:
                raise ValidationError(
                    f"overlapping or unsorted spans in turn {self.text!r}"
                )
            if span.end > len(self.text) or span.start >= span.end:
                raise ValidationError(
                    f"span [{span.start},{span.end}) out of bounds"
                )
            if self.text[span.start:span.end] != span.surface:
                raise ValidationError(
                    f"span surface {span.surface!r} does not match text"
                )
            last_end = span.end


@dataclass(frozen=True)
class Dialogue:
    dialogue_id: str
    turns: Tuple[Turn, ...]

    @classmethod
    def from_dict(cls, data: Mapping) -> "Dialogue":
        turns = []
        for t in data["turns"]:
            spans = tuple(
                Span(
                    start=s["start"],
                    end=s["end"],
                    surface=t["text"][s["start"]:s["end"]],
                    slot=s["slot"],
                    cue=s.get("cue"),
                )
                for s in sorted(t.get("spans", []), key=lambda s: s["start"])
            )
            turns.append(Turn(speaker=t["speaker"], text=t["text"], spans=spans))
        return cls(dialogue_id=data["dialogue_id"], turns=tuple(turns))

    def to_dict(self) -> dict:
        return {
            "dialogue_id": self.dialogue_id,
            "turns": [
                {
                    "speaker": t.speaker,
                    "text": t.text,
                    "spans": [
                        {
                            "start": s.start,
                            "end": s.end,
                            "slot": s.slot,
                            **({"cue": s.cue} if s.cue else {}),
                        }
                        for s in t.spans
                    ],
                }
                for t in self.turns
            ],
        }


@dataclass(frozen=True)
class Variable:
    id: str  # V1, V2, ... in document order
    kind: str  # "value" or "count"
    slot: Optional[str]  # None for count variables
    turn_index: int
    gold: Value
    surface: str  # original span text, kept for exact round trips
    cue: Optional[str] = None

    @property
    def placeholder(self) -> str:
        return f"<{self.id}>"


@dataclass(frozen=True)
class DelexTurn:
    speaker: str
    text: str  # original text with <Vk> placeholders


@dataclass(frozen=True)
class DelexDialogue:
    dialogue_id: str
    turns: Tuple[DelexTurn, ...]
    variables: Tuple[Variable, ...]

    def variable(self, var_id: str) -> Variable:
        for v in self.variables:
            if v.id == var_id:
                return v
        raise ValidationError(f"unknown variable {var_id!r}")

    def variables_in_turn(self, turn_index: int) -> List[Variable]:
        return [v for v in self.variables if v.turn_index == turn_index]

    def gold_assignment(self) -> "Assignment":
        return Assignment(values={v.id: v.gold for v in self.variables})

    @classmethod
    def from_dict(cls, data: Mapping) -> "DelexDialogue":
        return cls(
            dialogue_id=data["dialogue_id"],
            turns=tuple(
                DelexTurn(speaker=t["speaker"], text=t["text"])
                for t in data["turns"]
            ),
            variables=tuple(
                Variable(
                    id=v["id"],
                    kind=v["kind"],
                    slot=v.get("slot"),
                    turn_index=v["turn_index"],
                    gold=v["gold"],
                    surface=v["surface"],
                    cue=v.get("cue"),
                )
                for v in data["variables"]
            ),
        )

    def to_dict(self) -> dict:
        return {
            "dialogue_id": self.dialogue_id,
            "turns": [{"speaker": t.speaker, "text": t.text} for t in self.turns],
            "variables": [
                {
                    "id": v.id,
                    "kind": v.kind,
                    "slot": v.slot,
                    "turn_index": v.turn_index,
                    "gold": v.gold,
                    "surface": v.surface,
                    **({"cue": v.cue} if v.cue else {}),
                }
                for v in self.variables
            ],
        }


@dataclass(frozen=True)
class Assignment:
    """Mapping variable id -> value; a missing/None entry means unfilled."""

    values: Mapping[str, Optional[Value]]

    def get(self, var_id: str) -> Optional[Value]:
        return self.values.get(var_id)

    def is_filled(self, var_id: str) -> bool:
        return self.values.get(var_id) is not None

    @classmethod
    def from_dict(cls, data: Mapping) -> "Assignment":
        return cls(values=dict(data["values"]))

    def to_dict(self) -> dict:
        return {"values": dict(self.values)}


def delexicalize(dialogue: Dialogue) -> DelexDialogue:
    """Replace every annotated span with a placeholder, one variable each."""
    variables: List[Variable] = []
    delex_turns: List[DelexTurn] = []
    counter = 0
    for turn_index, turn in enumerate(dialogue.turns):
        pieces = []
        cursor = 0
        for span in turn.spans:
            counter += 1
            var = Variable(
                id=f"V{counter}",
                kind=span.kind,
                slot=None if span.kind == "count" else span.slot,
                turn_index=turn_index,
                gold=normalize_value(span.surface, span.kind),
                surface=span.surface,
                cue=span.cue,
            )
            variables.append(var)
            pieces.append(turn.text[cursor:span.start])
            pieces.append(var.placeholder)
            cursor = span.end
        pieces.append(turn.text[cursor:])
        delex_turns.append(DelexTurn(speaker=turn.speaker, text="".join(pieces)))
    return DelexDialogue(
        dialogue_id=dialogue.dialogue_id,
        turns=tuple(delex_turns),
        variables=tuple(variables),
    )


def render_value(variable: Variable, value: Optional[Value]) -> str:
    """Surface form for an assigned value at a variable's position.

    The gold value reuses the original surface verbatim (exact round trip);
    other values inherit the original span's initial-capital style.  Counts
    up to ten render as words when the original was a word.
    """
    if value is None:
        return MASK_TOKEN
    if value == variable.gold:
        return variable.surface
    if variable.kind == "count":
        if variable.surface[:1].isdigit():
            text = str(value)
        else:
            text = WORD_FOR_NUMBER.get(int(value), str(value))
    else:
        text = str(value)
    if variable.surface[:1].isupper():
        text = text[:1].upper() + text[1:]
    return text


def relexicalize(delex: DelexDialogue, assignment: Assignment) -> List[str]:
    """Substitute assigned values into placeholders; unfilled -> [MASK]."""
    unknown = set(assignment.values) - {v.id for v in delex.variables}
    if unknown:
        raise ValidationError(f"assignment names unknown variables: {sorted(unknown)}")
    out = []
    for turn in delex.turns:
        text = turn.text
        for var in delex.variables:
            if var.placeholder in text:
                text = text.replace(
                    var.placeholder, render_value(var, assignment.get(var.id)), 1
                )
        out.append(text)
    return out


def load_dialogues(path: Path) -> List[Dialogue]:
    with open(path) as f:
        data = json.load(f)
    return [Dialogue.from_dict(d) for d in data]


def load_delex(path: Path) -> List[DelexDialogue]:
    with open(path) as f:
        data = json.load(f)
    return [DelexDialogue.from_dict(d) for d in data]


def load_assignments(path: Path) -> Dict[str, Assignment]:
    """Assignment file: {dialogue_id: {values: {...}}, ...}."""
    with open(path) as f:
        data = json.load(f)
    return {did: Assignment.from_dict(a) for did, a in data.items()}


def dump_assignments(assignments: Mapping[str, Assignment]) -> dict:
    return {did: a.to_dict() for did, a in sorted(assignments.items())}
