"""ontoflow: an event-sourced runtime for executable ontologies.

Declarative BSL models are parsed into a schema registry, every change is
an immutable event in a causal graph, and agent behavior falls out of
dataflow evaluation of model conditions — no control flow to maintain.
"""

__version__ = "0.1.0"

from importlib import resources


def packaged_bsl(name: str) -> str:
    """Read one of the BSL documents shipped with the package."""
    return resources.files("ontoflow.data").joinpath(name).read_text(encoding="utf-8")
