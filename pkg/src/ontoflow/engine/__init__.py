"""Dataflow engine: evaluation, subscriptions, cascades."""

from .core import (
    DEPTH_EXCEEDED,
    QUIESCENT,
    ActionState,
    CascadeResult,
    Engine,
    EvalContext,
)
from .programs import Program, compile_expression
from .state import StateStore
from .subscriptions import SubscriptionIndex, build_subscription_index

__all__ = [
    "Engine",
    "EvalContext",
    "CascadeResult",
    "ActionState",
    "QUIESCENT",
    "DEPTH_EXCEEDED",
    "Program",
    "compile_expression",
    "StateStore",
    "SubscriptionIndex",
    "build_subscription_index",
]
