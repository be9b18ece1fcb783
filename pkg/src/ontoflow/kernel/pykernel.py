"""Pure-Python evaluation kernel.

Reference implementation of the program semantics; the compiled kernel in
``_ckernel.pyx`` mirrors it instruction for instruction. Both sides are
exercised against each other by the equivalence tests.

Semantics summary (null propagation rules):

* a null operand makes every comparison yield 0 and counts as false under
  ``&&``/``||``;
* ``==`` compares numerically when both sides have a numeric reading,
  otherwise by canonical string form;
* ``===`` compares canonical string forms only;
* ``+`` (COERCE) passes null through, keeps the numeric reading of
  coercible values, and flags an error (err=1) for anything else;
* canonical form is preserved through COERCE — coercion changes how a
  value compares numerically, not how it prints.

Returns ``(tag, num, canon, ref, err, n_reads)``; reads are slot codes
``individual * width + prop`` appended to the caller's buffer, recorded
only when the slot holds a value (null slots have no head event).
"""

from __future__ import annotations

BACKEND = "py"

_TAG_NULL = 0
_TAG_NUM = 1
_TAG_STR = 2
_TAG_REF = 3

_OP_LIT = 0
_OP_LOAD = 1
_OP_DEREF = 2
_OP_VALUE = 3
_OP_CURIND = 4
_OP_COERCE = 5
_OP_EQ = 6
_OP_SEQ = 7
_OP_LT = 8
_OP_GT = 9
_OP_GE = 10
_OP_AND = 11
_OP_OR = 12


def _truth(tag: int, num: float, flg: int) -> int:
    if tag == _TAG_NULL:
        return 0
    if tag == _TAG_REF:
        return 1
    if flg & 1:
        return 1 if num != 0.0 else 0
    return 0


def eval_program(
    code,
    c_tag, c_num, c_canon, c_ref, c_flg,
    s_tag, s_num, s_canon, s_ref, s_flg,
    cur: int,
    cur_canon: int,
    t_tag: int, t_num: float, t_canon: int, t_ref: int, t_flg: int,
    reads,
):
    width = s_tag.shape[1]
    tags: list[int] = []
    nums: list[float] = []
    canons: list[int] = []
    refs: list[int] = []
    flgs: list[int] = []
    n_reads = 0

    def push(t, n, c, r, f):
        tags.append(t)
        nums.append(n)
        canons.append(c)
        refs.append(r)
        flgs.append(f)

    def push_bool(v: int):
        push(_TAG_NUM, 1.0 if v else 0.0, 2 if v else 1, 0, 1)

    for k in range(code.shape[0]):
        op = int(code[k, 0])
        a = int(code[k, 1])
        b = int(code[k, 2])
        if op == _OP_LIT:
            push(int(c_tag[a]), float(c_num[a]), int(c_canon[a]), int(c_ref[a]), int(c_flg[a]))
        elif op == _OP_LOAD:
            t = int(s_tag[cur, a])
            if t != _TAG_NULL:
                reads[n_reads] = cur * width + a
                n_reads += 1
            push(t, float(s_num[cur, a]), int(s_canon[cur, a]), int(s_ref[cur, a]), int(s_flg[cur, a]))
        elif op == _OP_DEREF:
            t = int(s_tag[cur, a])
            if t != _TAG_NULL:
                reads[n_reads] = cur * width + a
                n_reads += 1
            if t == _TAG_REF:
                j = int(s_ref[cur, a])
                tj = int(s_tag[j, b])
                if tj != _TAG_NULL:
                    reads[n_reads] = j * width + b
                    n_reads += 1
                push(tj, float(s_num[j, b]), int(s_canon[j, b]), int(s_ref[j, b]), int(s_flg[j, b]))
            else:
                push(_TAG_NULL, 0.0, 0, 0, 0)
        elif op == _OP_VALUE:
            push(t_tag, t_num, t_canon, t_ref, t_flg)
        elif op == _OP_CURIND:
            push(_TAG_REF, 0.0, cur_canon, cur, 0)
        elif op == _OP_COERCE:
            t = tags[-1]
            if t == _TAG_NULL:
                pass  # null propagates
            elif flgs[-1] & 1:
                tags[-1] = _TAG_NUM
            else:
                return (0, 0.0, 0, 0, 1, n_reads)
        else:
            tb, nb, cb, rb, fb = tags.pop(), nums.pop(), canons.pop(), refs.pop(), flgs.pop()
            ta, na, ca, ra, fa = tags.pop(), nums.pop(), canons.pop(), refs.pop(), flgs.pop()
            if op == _OP_AND:
                push_bool(_truth(ta, na, fa) and _truth(tb, nb, fb))
            elif op == _OP_OR:
                push_bool(_truth(ta, na, fa) or _truth(tb, nb, fb))
            elif ta == _TAG_NULL or tb == _TAG_NULL:
                push_bool(0)
            elif op == _OP_EQ:
                if (fa & 1) and (fb & 1):
                    push_bool(1 if na == nb else 0)
                else:
                    push_bool(1 if ca == cb else 0)
            elif op == _OP_SEQ:
                push_bool(1 if ca == cb else 0)
            else:
                if not ((fa & 1) and (fb & 1)):
                    push_bool(0)
                elif op == _OP_LT:
                    push_bool(1 if na < nb else 0)
                elif op == _OP_GT:
                    push_bool(1 if na > nb else 0)
                else:  # GE
                    push_bool(1 if na >= nb else 0)

    return (tags[-1], nums[-1], canons[-1], refs[-1], 0, n_reads)
