"""Scenario registry.

Each scenario module owns a ``router`` and registers its handler with the
``scenario`` decorator; the CLI includes the routers and dispatches on the
subcommand name.
"""

from typing import Callable, Dict, List, NamedTuple

from app.models.config import RunConfig
from app.models.schemas import Report

Handler = Callable[[RunConfig], Report]


class Scenario(NamedTuple):
    name: str
    handler: Handler
    summary: str


class ScenarioRouter:
    def __init__(self) -> None:
        self.scenarios: List[Scenario] = []

    def scenario(self, name: str, summary: str = "") -> Callable[[Handler], Handler]:
        def register(handler: Handler) -> Handler:
            self.scenarios.append(Scenario(name, handler, summary or (handler.__doc__ or "").strip()))
            return handler

        return register

    def include_router(self, other: "ScenarioRouter") -> None:
        known = {s.name for s in self.scenarios}
        for entry in other.scenarios:
            if entry.name in known:
                raise ValueError(f"scenario {entry.name!r} registered twice")
            self.scenarios.append(entry)
            known.add(entry.name)

    def table(self) -> Dict[str, Scenario]:
        return {s.name: s for s in self.scenarios}
