"""Constraint extraction: builds the C1-C6 constraint set for a dialogue/kb pair.

Families:
  C1  slot-type membership (realized as the variable domains)
  C2  cross-turn equality of variables sharing a gold mention
  C3  within-utterance distinctness of same-slot variables
  C4  zero-result grounding (no kb instance matches the filters)
  C5  existence grounding (at least one kb instance matches)
  C6  exact-count grounding (matching instances == count variable)
"""

from __future__ import annotations

import json
import re
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Dict, FrozenSet, List, Mapping, Optional, Sequence, Set, Tuple

from .dialogue import DelexDialogue, Variable
from .domain import COUNT_MARKER, KnowledgeBase, Ontology
from .errors import ValidationError

FAMILIES = ("C1", "C2", "C3", "C4", "C5", "C6")
FAMILY_GROUPS = {"dialogic": {"C2", "C3"}, "domain": {"C4", "C5", "C6"}}

NONE_CUE = "none_cue"
EXISTS_CUE = "exists_cue"
EXACT_CUE = "exact_cue"


@dataclass(frozen=True)
class CueLexicon:
    none_cues: Tuple[str, ...]
    exists_cues: Tuple[str, ...]

    @classmethod
    def default(cls) -> "CueLexicon":
        text = resources.files("dialcsp").joinpath("data/cue_lexicon.json").read_text()
        return cls.from_dict(json.loads(text))

    @classmethod
    def from_dict(cls, data: Mapping) -> "CueLexicon":
        return cls(
            none_cues=tuple(data["none_cues"]),
            exists_cues=tuple(data["exists_cues"]),
        )

    @classmethod
    def load(cls, path: Path) -> "CueLexicon":
        with open(path) as f:
            return cls.from_dict(json.load(f))


@dataclass(frozen=True)
class Constraint:
    family: str
    scope: Tuple[str, ...]
    payload: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValidationError(f"unknown constraint family {self.family!r}")
        if not self.scope:
            raise ValidationError("constraint scope may not be empty")

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "scope": list(self.scope),
            "payload": dict(self.payload),
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "Constraint":
        return cls(
            family=data["family"],
            scope=tuple(data["scope"]),
            payload=dict(data.get("payload", {})),
        )


@dataclass(frozen=True)
class ConstraintSet:
    constraints: Tuple[Constraint, ...]
    domains: Mapping[str, tuple]  # variable id -> admissible values, in order


def build_domains(
    variables: Sequence[Variable],
    ontology: Ontology,
    kb: KnowledgeBase,
    ablate_c1: bool = False,
) -> Dict[str, tuple]:
    """Variable domains; dropping C1 widens value domains to all slot values."""
    union = tuple(sorted(ontology.all_values()))
    domains: Dict[str, tuple] = {}
    for var in variables:
        if var.kind == "count":
            domains[var.id] = tuple(range(len(kb) + 1))
        elif ablate_c1:
            domains[var.id] = union
        else:
            if not ontology.has_slot(var.slot):
                raise ValidationError(
                    f"variable {var.id} has unknown slot {var.slot!r}"
                )
            domains[var.id] = tuple(sorted(ontology.slot(var.slot).values))
    return domains


def _class_key(var: Variable) -> Tuple[str, object]:
    return (var.slot if var.kind == "value" else COUNT_MARKER, var.gold)


def extract_equalities(variables: Sequence[Variable]) -> List[Constraint]:
    """One C2 equality class per (slot, gold value) mentioned more than once."""
    groups: Dict[Tuple[str, object], List[str]] = defaultdict(list)
    for var in variables:
        groups[_class_key(var)].append(var.id)
    out = []
    for (slot, gold), members in groups.items():
        if len(members) >= 2:
            out.append(
                Constraint(family="C2", scope=tuple(members), payload={"slot": slot})
            )
    out.sort(key=lambda c: c.scope)
    return out


def extract_alldiff(
    variables: Sequence[Variable], equality_classes: Sequence[Constraint]
) -> List[Constraint]:
    """Pairwise C3 constraints per utterance and slot, skipping C2-linked pairs."""
    linked: Set[FrozenSet[str]] = set()
    for c in equality_classes:
        for i, a in enumerate(c.scope):
            for b in c.scope[i + 1:]:
                linked.add(frozenset((a, b)))
    by_site: Dict[Tuple[int, str], List[str]] = defaultdict(list)
    for var in variables:
        if var.kind == "value":
            by_site[(var.turn_index, var.slot)].append(var.id)
    out = []
    for (turn_index, slot), members in sorted(by_site.items()):
        for i, a in enumerate(members):
            for b in members[i + 1:]:
                if frozenset((a, b)) in linked:
                    continue
                out.append(
                    Constraint(
                        family="C3",
                        scope=(a, b),
                        payload={"slot": slot, "turn_index": turn_index},
                    )
                )
    return out


def _contains_cue(text: str, cues: Sequence[str]) -> bool:
    lowered = text.lower()
    return any(
        re.search(r"(?<![a-z])" + re.escape(cue) + r"(?![a-z])", lowered)
        for cue in cues
    )


def detect_cues(
    delex: DelexDialogue, lexicon: Optional[CueLexicon] = None
) -> Dict[int, str]:
    """Classify each system utterance as a C4/C5/C6 site (or no site).

    Explicit span annotations win; otherwise a count variable makes the
    site exact, a negation lexeme makes it none, and a vague quantifier
    makes it exists.
    """
    lexicon = lexicon or CueLexicon.default()
    cues: Dict[int, str] = {}
    for turn_index, turn in enumerate(delex.turns):
        if turn.speaker != "system":
            continue
        turn_vars = delex.variables_in_turn(turn_index)
        explicit = [v.cue for v in turn_vars if v.cue]
        if explicit:
            cues[turn_index] = explicit[0]
            continue
        if any(v.kind == "count" for v in turn_vars):
            cues[turn_index] = EXACT_CUE
        elif _contains_cue(turn.text, lexicon.none_cues):
            cues[turn_index] = NONE_CUE
        elif _contains_cue(turn.text, lexicon.exists_cues):
            cues[turn_index] = EXISTS_CUE
    return cues


def _filter_candidates(delex: DelexDialogue, turn_index: int) -> List[Variable]:
    """Value variables grounding a domain-constraint site.

    Same utterance first; an utterance with no value variables borrows the
    most recent preceding user turn.  Slots mentioned more than once at the
    site enumerate alternatives rather than a conjunctive filter, so they
    are excluded.
    """
    candidates = [
        v for v in delex.variables_in_turn(turn_index) if v.kind == "value"
    ]
    if not candidates:
        for prior in range(turn_index - 1, -1, -1):
            if delex.turns[prior].speaker == "user":
                candidates = [
                    v
                    for v in delex.variables_in_turn(prior)
                    if v.kind == "value"
                ]
                if candidates:
                    break
    slot_counts = Counter(v.slot for v in candidates)
    return [v for v in candidates if slot_counts[v.slot] == 1]


def extract_domain_constraints(
    delex: DelexDialogue,
    cues: Mapping[int, str],
    warnings: Optional[List[str]] = None,
) -> List[Constraint]:
    out = []
    for turn_index in sorted(cues):
        cue = cues[turn_index]
        filters = _filter_candidates(delex, turn_index)
        filter_map = {v.id: v.slot for v in filters}
        if cue == EXACT_CUE:
            count_vars = [
                v
                for v in delex.variables_in_turn(turn_index)
                if v.kind == "count"
            ]
            if not count_vars:
                if warnings is not None:
                    warnings.append(
                        f"{delex.dialogue_id}: exact-count site at turn "
                        f"{turn_index} has no count variable; skipped"
                    )
                continue
            count_var = count_vars[0]
            out.append(
                Constraint(
                    family="C6",
                    scope=(count_var.id, *filter_map),
                    payload={"count": count_var.id, "filters": filter_map},
                )
            )
        elif cue in (NONE_CUE, EXISTS_CUE):
            if not filter_map:
                continue
            out.append(
                Constraint(
                    family="C4" if cue == NONE_CUE else "C5",
                    scope=tuple(filter_map),
                    payload={"filters": filter_map},
                )
            )
    return out


def parse_ablation(removed: Sequence[str]) -> Set[str]:
    """Expand family tags (dialogic/domain) into concrete families."""
    out: Set[str] = set()
    for item in removed:
        if item in FAMILY_GROUPS:
            out |= FAMILY_GROUPS[item]
        elif item in FAMILIES:
            out.add(item)
        else:
            raise ValidationError(f"unknown ablation target {item!r}")
    return out


def extract_constraints(
    delex: DelexDialogue,
    ontology: Ontology,
    kb: KnowledgeBase,
    ablate: Sequence[str] = (),
    lexicon: Optional[CueLexicon] = None,
    warnings: Optional[List[str]] = None,
) -> ConstraintSet:
    """Full constraint set for a dialogue/kb pair, honoring ablations."""
    removed = parse_ablation(ablate)
    domains = build_domains(
        delex.variables, ontology, kb, ablate_c1="C1" in removed
    )
    constraints: List[Constraint] = []
    equalities = extract_equalities(delex.variables)
    if "C2" not in removed:
        constraints.extend(equalities)
    if "C3" not in removed:
        # C3 exemptions come from the full equality grouping even when C2
        # itself is ablated, keeping the two families structurally disjoint.
        constraints.extend(extract_alldiff(delex.variables, equalities))
    cues = detect_cues(delex, lexicon)
    for c in extract_domain_constraints(delex, cues, warnings):
        if c.family not in removed:
            constraints.append(c)
    return ConstraintSet(constraints=tuple(constraints), domains=domains)


def coverage_stats(
    constraint_sets: Sequence[ConstraintSet],
) -> Dict[str, Tuple[int, float]]:
    """Per family: distinct variables under >=1 constraint and their share.

    C1 restricts every variable's domain, so it always covers everything.
    """
    total = sum(len(cs.domains) for cs in constraint_sets)
    touched: Dict[str, Set[Tuple[int, str]]] = {f: set() for f in FAMILIES}
    for i, cs in enumerate(constraint_sets):
        touched["C1"].update((i, v) for v in cs.domains)
        for c in cs.constraints:
            touched[c.family].update((i, v) for v in c.scope)
    return {
        f: (len(vars_), len(vars_) / total if total else 0.0)
        for f, vars_ in touched.items()
    }
