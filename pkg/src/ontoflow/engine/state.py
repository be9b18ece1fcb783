"""Interned slot table mirroring current property values.

The dataflow kernels never touch Python objects mid-loop: individuals,
properties, and canonical string forms are interned to dense integer ids,
and each (individual, property) slot is a tagged record spread across five
parallel numpy arrays:

    tag    int8     0 null, 1 number, 2 string, 3 individual ref
    num    float64  numeric reading (valid when flg & 1)
    canon  int32    id of the canonical string form
    ref    int32    target individual id (refs only)
    flg    int8     bit 0: value has a numeric reading

The graph remains the source of truth; the table is an index rebuilt from
heads at any time.
"""

from __future__ import annotations

import numpy as np

from ..scalars import Scalar, canonical, parse_number

TAG_NULL = 0
TAG_NUM = 1
TAG_STR = 2
TAG_REF = 3


class StateStore:
    def __init__(self, cap_individuals: int = 16, cap_props: int = 32):
        self.prop_ids: dict[str, int] = {}
        self.prop_names: list[str] = []
        self.ind_ids: dict[str, int] = {}
        self.ind_names: list[str] = []
        self.str_ids: dict[str, int] = {"": 0, "0": 1, "1": 2}
        self.str_vals: list[str] = ["", "0", "1"]
        self.head_ids: dict[tuple[int, int], str] = {}  # slot -> head event id
        self._ci = cap_individuals
        self._cp = cap_props
        self.tag = np.zeros((self._ci, self._cp), dtype=np.int8)
        self.num = np.zeros((self._ci, self._cp), dtype=np.float64)
        self.canon = np.zeros((self._ci, self._cp), dtype=np.int32)
        self.ref = np.zeros((self._ci, self._cp), dtype=np.int32)
        self.flg = np.zeros((self._ci, self._cp), dtype=np.int8)

    @property
    def width(self) -> int:
        """Column stride used to encode slot ids in read buffers."""
        return self._cp

    # -- interning -----------------------------------------------------------

    def intern_string(self, s: str) -> int:
        sid = self.str_ids.get(s)
        if sid is None:
            sid = len(self.str_vals)
            self.str_ids[s] = sid
            self.str_vals.append(s)
        return sid

    def ensure_props(self, names) -> None:
        for name in names:
            if name not in self.prop_ids:
                self.prop_ids[name] = len(self.prop_names)
                self.prop_names.append(name)
        if len(self.prop_names) > self._cp:
            self._grow(self._ci, max(self._cp * 2, len(self.prop_names)))

    def intern_individual(self, name: str) -> int:
        idx = self.ind_ids.get(name)
        if idx is None:
            idx = len(self.ind_names)
            self.ind_ids[name] = idx
            self.ind_names.append(name)
            if len(self.ind_names) > self._ci:
                self._grow(max(self._ci * 2, len(self.ind_names)), self._cp)
        return idx

    def _grow(self, ci: int, cp: int) -> None:
        def widen(arr, dtype):
            new = np.zeros((ci, cp), dtype=dtype)
            new[: arr.shape[0], : arr.shape[1]] = arr
            return new

        if cp != self._cp:
            # column stride changes: recode head slot keys
            self.head_ids = {
                (i, p): eid for (i, p), eid in self.head_ids.items()
            }
        self.tag = widen(self.tag, np.int8)
        self.num = widen(self.num, np.float64)
        self.canon = widen(self.canon, np.int32)
        self.ref = widen(self.ref, np.int32)
        self.flg = widen(self.flg, np.int8)
        self._ci, self._cp = ci, cp

    # -- slot writes -----------------------------------------------------------

    def quad(self, value: Scalar) -> tuple[int, float, int, int, int]:
        """Tagged form of a scalar (no individual-reference resolution)."""
        if value is None:
            return (TAG_NULL, 0.0, 0, 0, 0)
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return (TAG_NUM, float(value), self.intern_string(canonical(value)), 0, 1)
        text = str(value)
        n = parse_number(text)
        return (TAG_STR, n if n is not None else 0.0, self.intern_string(text), 0, int(n is not None))

    def ref_quad(self, name: str) -> tuple[int, float, int, int, int] | None:
        idx = self.ind_ids.get(name)
        if idx is None:
            return None
        return (TAG_REF, 0.0, self.intern_string(name), idx, 0)

    def set_slot(self, ind: int, prop: int, value: Scalar, is_relation: bool, event_id: str) -> None:
        if is_relation and isinstance(value, str):
            quad = self.ref_quad(value) or self.quad(value)
        else:
            quad = self.quad(value)
        t, n, c, r, f = quad
        self.tag[ind, prop] = t
        self.num[ind, prop] = n
        self.canon[ind, prop] = c
        self.ref[ind, prop] = r
        self.flg[ind, prop] = f
        self.head_ids[(ind, prop)] = event_id

    # -- reads -------------------------------------------------------------------

    def materialize(self, tag: int, num: float, canon_id: int, ref: int) -> Scalar:
        if tag == TAG_NULL:
            return None
        if tag == TAG_NUM:
            f = float(num)
            return int(f) if f.is_integer() else f
        if tag == TAG_REF:
            return self.ind_names[ref]
        return self.str_vals[canon_id]

    def slot_scalar(self, ind: int, prop: int) -> Scalar:
        return self.materialize(
            int(self.tag[ind, prop]),
            float(self.num[ind, prop]),
            int(self.canon[ind, prop]),
            int(self.ref[ind, prop]),
        )
