"""Expression -> postfix program compiler.

Both evaluation kernels (compiled and pure Python) execute the same
program encoding: an (n, 3) int32 instruction array plus a constant pool
in the five-field tagged form used by the slot table.

    opcode  a            b
    LIT     const index  -
    LOAD    prop id      -           push slot (cur, a)
    DEREF   rel prop id  prop id     push slot (*(cur, a), b)
    VALUE   -            -           push the trigger value
    CURIND  -            -           push a ref to the current individual
    COERCE  -            -           numeric coercion (unary +)
    EQ SEQ LT GT GE AND OR           binary, pop two push one
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..bsl.nodes import Binary, BinOp, ContextRef, Deref, Expression, Literal, NumCoerce, PropRef
from ..errors import UnknownProperty
from .state import StateStore

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

_BINOPS = {
    BinOp.EQ: OP_EQ,
    BinOp.SEQ: OP_SEQ,
    BinOp.LT: OP_LT,
    BinOp.GT: OP_GT,
    BinOp.GE: OP_GE,
    BinOp.AND: OP_AND,
    BinOp.OR: OP_OR,
}

MAX_STACK = 128


@dataclass
class Program:
    code: np.ndarray           # (n, 3) int32
    c_tag: np.ndarray          # int8
    c_num: np.ndarray          # float64
    c_canon: np.ndarray        # int32
    c_ref: np.ndarray          # int32
    c_flg: np.ndarray          # int8
    max_stack: int
    max_reads: int
    source: Expression


def compile_expression(expr: Expression, store: StateStore) -> Program:
    code: list[tuple[int, int, int]] = []
    consts: list[tuple[int, float, int, int, int]] = []
    const_index: dict[tuple, int] = {}

    def const(quad) -> int:
        idx = const_index.get(quad)
        if idx is None:
            idx = len(consts)
            const_index[quad] = idx
            consts.append(quad)
        return idx

    def prop_id(name: str) -> int:
        pid = store.prop_ids.get(name)
        if pid is None:
            raise UnknownProperty(f"property {name!r} is not registered")
        return pid

    def emit(node: Expression) -> int:
        """Emit instructions; returns the stack growth high-water mark."""
        if isinstance(node, Literal):
            code.append((OP_LIT, const(store.quad(node.value)), 0))
            return 1
        if isinstance(node, PropRef):
            code.append((OP_LOAD, prop_id(node.name), 0))
            return 1
        if isinstance(node, Deref):
            code.append((OP_DEREF, prop_id(node.relation), prop_id(node.prop)))
            return 1
        if isinstance(node, ContextRef):
            code.append((OP_VALUE if node.name == "Value" else OP_CURIND, 0, 0))
            return 1
        if isinstance(node, NumCoerce):
            depth = emit(node.operand)
            code.append((OP_COERCE, 0, 0))
            return depth
        if isinstance(node, Binary):
            left = emit(node.lhs)
            right = emit(node.rhs)
            code.append((_BINOPS[node.op], 0, 0))
            return max(left, 1 + right)
        raise TypeError(f"not an expression node: {node!r}")

    depth = emit(expr)
    if depth > MAX_STACK:
        raise UnknownProperty(f"expression too deep for evaluation ({depth} slots)")
    arr = np.array(code, dtype=np.int32).reshape(len(code), 3)
    reads = sum(1 for op, _, _ in code if op == OP_LOAD) + 2 * sum(
        1 for op, _, _ in code if op == OP_DEREF
    )
    return Program(
        code=arr,
        c_tag=np.array([c[0] for c in consts], dtype=np.int8),
        c_num=np.array([c[1] for c in consts], dtype=np.float64),
        c_canon=np.array([c[2] for c in consts], dtype=np.int32),
        c_ref=np.array([c[3] for c in consts], dtype=np.int32),
        c_flg=np.array([c[4] for c in consts], dtype=np.int8),
        max_stack=depth,
        max_reads=max(reads, 1),
        source=expr,
    )
