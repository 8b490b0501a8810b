"""Packs a constraint model into flat arrays for the solver kernels.

Both the Python and the compiled kernel consume exactly this layout, which
keeps their enumeration order trivially identical:

  * variables are indexed in id order (V1, V2, ...);
  * each variable's domain is a run in ``dom_val``, ascending, where value
    strings are interned into codes by global sorted order and count values
    are their own codes (so ascending code order is canonical value order);
  * ``dom_mask`` holds, per domain entry, the bitmask of kb instances whose
    slot value equals that entry (zero for count variables);
  * constraints are runs in ``sc_var`` typed by ``ctype``; for exact-count
    constraints the first scope entry is the count variable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..constraints import ConstraintSet
from ..dialogue import Variable
from ..domain import KBIndex
from ..errors import ValidationError

Value = Union[str, int]

CT_EQ = 2
CT_NEQ = 3
CT_NONE = 4
CT_EXISTS = 5
CT_COUNT = 6


@dataclass
class PackedModel:
    n: int
    dom_off: np.ndarray  # int64[n+1]
    dom_val: np.ndarray  # int64[total]
    dom_mask: np.ndarray  # uint64[total]
    ctype: np.ndarray  # int64[m]
    sc_off: np.ndarray  # int64[m+1]
    sc_var: np.ndarray  # int64[total scope]
    full_mask: int
    var_ids: Tuple[str, ...]
    decode: Tuple[Tuple[Value, ...], ...]  # per var, value per domain entry

    def decode_solution(self, codes: Sequence[int]) -> Dict[str, Value]:
        out = {}
        for i, var_id in enumerate(self.var_ids):
            lo = int(self.dom_off[i])
            pos = int(np.searchsorted(self.dom_val[lo:int(self.dom_off[i + 1])], codes[i]))
            out[var_id] = self.decode[i][pos]
        return out

    def encode_target(self, values: Dict[str, Optional[Value]]) -> np.ndarray:
        """Assignment -> per-variable code, -1 where no domain value matches."""
        target = np.full(self.n, -1, dtype=np.int64)
        for i, var_id in enumerate(self.var_ids):
            value = values.get(var_id)
            if value is None:
                continue
            try:
                pos = self.decode[i].index(value)
            except ValueError:
                continue
            target[i] = self.dom_val[int(self.dom_off[i]) + pos]
        return target


def _value_mask(index: KBIndex, slot: Optional[str], value: Value) -> int:
    if slot is None:
        return 0
    order = {iid: k for k, iid in enumerate(index.instance_ids)}
    mask = 0
    for iid in index.postings.get((slot, value), ()):  # type: ignore[arg-type]
        mask |= 1 << order[iid]
    return mask


def pack_model(
    variables: Sequence[Variable],
    constraint_set: ConstraintSet,
    index: KBIndex,
) -> PackedModel:
    var_ids = tuple(v.id for v in variables)
    var_pos = {vid: i for i, vid in enumerate(var_ids)}
    n = len(var_ids)

    # Interned codes for string values, in global sorted order so each
    # domain's code run is ascending.
    all_strings = sorted(
        {
            v
            for var in variables
            for v in constraint_set.domains[var.id]
            if isinstance(v, str)
        }
    )
    code_of = {s: i for i, s in enumerate(all_strings)}

    order = {iid: k for k, iid in enumerate(index.instance_ids)}
    dom_off = [0]
    dom_val: List[int] = []
    dom_mask: List[int] = []
    decode: List[Tuple[Value, ...]] = []
    for var in variables:
        values = constraint_set.domains[var.id]
        if var.kind == "count":
            ordered: List[Value] = sorted(values)  # type: ignore[type-var]
            codes = [int(v) for v in ordered]
            masks = [0] * len(ordered)
        else:
            ordered = sorted(values)
            codes = [code_of[v] for v in ordered]
            masks = []
            for v in ordered:
                mask = 0
                for iid in index.postings.get((var.slot, v), ()):
                    mask |= 1 << order[iid]
                masks.append(mask)
        dom_val.extend(codes)
        dom_mask.extend(masks)
        dom_off.append(len(dom_val))
        decode.append(tuple(ordered))

    ctype: List[int] = []
    sc_off = [0]
    sc_var: List[int] = []
    kind_of = {"C2": CT_EQ, "C3": CT_NEQ, "C4": CT_NONE, "C5": CT_EXISTS, "C6": CT_COUNT}
    for c in constraint_set.constraints:
        if c.family == "C1":
            continue  # realized in the domains
        if c.family not in kind_of:
            raise ValidationError(f"cannot pack constraint family {c.family!r}")
        if c.family == "C6":
            scope = [var_pos[c.payload["count"]]]
            scope += [var_pos[v] for v in c.payload["filters"]]
        else:
            scope = [var_pos[v] for v in c.scope]
        ctype.append(kind_of[c.family])
        sc_var.extend(scope)
        sc_off.append(len(sc_var))

    return PackedModel(
        n=n,
        dom_off=np.asarray(dom_off, dtype=np.int64),
        dom_val=np.asarray(dom_val, dtype=np.int64),
        dom_mask=np.asarray(dom_mask, dtype=np.uint64),
        ctype=np.asarray(ctype, dtype=np.int64),
        sc_off=np.asarray(sc_off, dtype=np.int64),
        sc_var=np.asarray(sc_var, dtype=np.int64),
        full_mask=(1 << index.total) - 1,
        var_ids=var_ids,
        decode=tuple(decode),
    )
