# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled evaluation kernel.

Instruction-for-instruction mirror of ``pykernel.eval_program``; see that
module for the semantics. Keep the two in lockstep — the equivalence test
suite runs identical programs through both backends.
"""

BACKEND = "c"

cdef enum:
    TAG_NULL = 0
    TAG_NUM = 1
    TAG_STR = 2
    TAG_REF = 3

cdef enum:
    OP_LIT = 0
    OP_LOAD = 1
    OP_DEREF = 2
    OP_VALUE = 3
    OP_CURIND = 4
    OP_COERCE = 5
    OP_EQ = 6
    OP_SEQ = 7
    OP_LT = 8
    OP_GT = 9
    OP_GE = 10
    OP_AND = 11
    OP_OR = 12

cdef enum:
    STACK_CAP = 128


cdef inline int _truth(signed char tag, double num, signed char flg) nogil:
    if tag == TAG_NULL:
        return 0
    if tag == TAG_REF:
        return 1
    if flg & 1:
        return 1 if num != 0.0 else 0
    return 0


def eval_program(
    int[:, ::1] code,
    signed char[::1] c_tag, double[::1] c_num, int[::1] c_canon, int[::1] c_ref, signed char[::1] c_flg,
    signed char[:, ::1] s_tag, double[:, ::1] s_num, int[:, ::1] s_canon, int[:, ::1] s_ref, signed char[:, ::1] s_flg,
    Py_ssize_t cur,
    int cur_canon,
    int t_tag, double t_num, int t_canon, int t_ref, int t_flg,
    long long[::1] reads,
):
    cdef signed char[STACK_CAP] tags
    cdef double[STACK_CAP] nums
    cdef int[STACK_CAP] canons
    cdef int[STACK_CAP] refs
    cdef signed char[STACK_CAP] flgs
    cdef Py_ssize_t sp = 0
    cdef Py_ssize_t n_reads = 0
    cdef Py_ssize_t width = s_tag.shape[1]
    cdef Py_ssize_t k, j
    cdef int op, a, b
    cdef signed char t, tj, ta, tb, fa, fb
    cdef double na, nb
    cdef int ca, cb, ra, rb
    cdef int v

    for k in range(code.shape[0]):
        op = code[k, 0]
        a = code[k, 1]
        b = code[k, 2]
        if op == OP_LIT:
            tags[sp] = c_tag[a]; nums[sp] = c_num[a]; canons[sp] = c_canon[a]
            refs[sp] = c_ref[a]; flgs[sp] = c_flg[a]; sp += 1
        elif op == OP_LOAD:
            t = s_tag[cur, a]
            if t != TAG_NULL:
                reads[n_reads] = cur * width + a
                n_reads += 1
            tags[sp] = t; nums[sp] = s_num[cur, a]; canons[sp] = s_canon[cur, a]
            refs[sp] = s_ref[cur, a]; flgs[sp] = s_flg[cur, a]; sp += 1
        elif op == OP_DEREF:
            t = s_tag[cur, a]
            if t != TAG_NULL:
                reads[n_reads] = cur * width + a
                n_reads += 1
            if t == TAG_REF:
                j = s_ref[cur, a]
                tj = s_tag[j, b]
                if tj != TAG_NULL:
                    reads[n_reads] = j * width + b
                    n_reads += 1
                tags[sp] = tj; nums[sp] = s_num[j, b]; canons[sp] = s_canon[j, b]
                refs[sp] = s_ref[j, b]; flgs[sp] = s_flg[j, b]; sp += 1
            else:
                tags[sp] = TAG_NULL; nums[sp] = 0.0; canons[sp] = 0
                refs[sp] = 0; flgs[sp] = 0; sp += 1
        elif op == OP_VALUE:
            tags[sp] = <signed char> t_tag; nums[sp] = t_num; canons[sp] = t_canon
            refs[sp] = t_ref; flgs[sp] = <signed char> t_flg; sp += 1
        elif op == OP_CURIND:
            tags[sp] = TAG_REF; nums[sp] = 0.0; canons[sp] = cur_canon
            refs[sp] = <int> cur; flgs[sp] = 0; sp += 1
        elif op == OP_COERCE:
            t = tags[sp - 1]
            if t == TAG_NULL:
                pass
            elif flgs[sp - 1] & 1:
                tags[sp - 1] = TAG_NUM
            else:
                return (0, 0.0, 0, 0, 1, n_reads)
        else:
            sp -= 1
            tb = tags[sp]; nb = nums[sp]; cb = canons[sp]; rb = refs[sp]; fb = flgs[sp]
            sp -= 1
            ta = tags[sp]; na = nums[sp]; ca = canons[sp]; ra = refs[sp]; fa = flgs[sp]
            if op == OP_AND:
                v = _truth(ta, na, fa) and _truth(tb, nb, fb)
            elif op == OP_OR:
                v = _truth(ta, na, fa) or _truth(tb, nb, fb)
            elif ta == TAG_NULL or tb == TAG_NULL:
                v = 0
            elif op == OP_EQ:
                if (fa & 1) and (fb & 1):
                    v = 1 if na == nb else 0
                else:
                    v = 1 if ca == cb else 0
            elif op == OP_SEQ:
                v = 1 if ca == cb else 0
            elif not ((fa & 1) and (fb & 1)):
                v = 0
            elif op == OP_LT:
                v = 1 if na < nb else 0
            elif op == OP_GT:
                v = 1 if na > nb else 0
            else:
                v = 1 if na >= nb else 0
            tags[sp] = TAG_NUM; nums[sp] = 1.0 if v else 0.0
            canons[sp] = 2 if v else 1; refs[sp] = 0; flgs[sp] = 1; sp += 1

    sp -= 1
    return (<int> tags[sp], nums[sp], canons[sp], refs[sp], 0, <int> n_reads)
