"""Subscription index: property -> dependent model restrictions.

Built once per registration batch from the same syntactic walk as the
dependency graph. Ingestion consults it to find, for an event on
(individual, property), exactly the restrictions that could care — no
polling, no global scans.

Navigated references (``$($.rel).p``) are resolved per event through the
engine's reverse-relation index rather than by materializing per-pair
edges; moving a relation retargets subscriptions implicitly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..models.analysis import iter_refs
from ..models.registry import Registry


@dataclass
class SubscriptionIndex:
    # property -> [(model, dependent property, restriction kind)], every
    # syntactic reference from any Condition/SetValue
    by_property: dict[str, list[tuple[str, str, str]]] = field(default_factory=dict)
    # direct references from SetValue-bearing properties (recompute targets):
    # source property -> [(model, dependent property)]
    recompute: dict[str, list[tuple[str, str]]] = field(default_factory=dict)
    # navigated references from SetValue-bearing properties:
    # (relation, leaf property) -> [(model, dependent property)]
    recompute_deref: dict[tuple[str, str], list[tuple[str, str]]] = field(default_factory=dict)

    def edge_set(self) -> set[tuple[str, str, str]]:
        """(referenced property, model, dependent property) projection."""
        out = set()
        for prop, entries in self.by_property.items():
            for model, dep, _ in entries:
                out.add((prop, model, dep))
        return out


def build_subscription_index(registry: Registry) -> SubscriptionIndex:
    index = SubscriptionIndex()

    def add(bucket: dict, key, entry) -> None:
        entries = bucket.setdefault(key, [])
        if entry not in entries:
            entries.append(entry)

    for spec in registry.models.values():
        for pname, rules in spec.flat.items():
            reactive = rules.setvalue is not None
            sources = []
            if rules.condition is not None:
                sources.append(("Condition", rules.condition))
            if rules.setvalue is not None:
                sources.append(("SetValue", rules.setvalue))
            for kind, expr in sources:
                for prop, via in iter_refs(expr):
                    add(index.by_property, prop, (spec.name, pname, kind))
                    if not reactive:
                        continue
                    if via is None:
                        add(index.recompute, prop, (spec.name, pname))
                    else:
                        add(index.recompute_deref, (via, prop), (spec.name, pname))
    return index
