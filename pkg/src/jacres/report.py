"""Pass/fail reports shared by the validators and checkers."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Check:
    """Outcome of one named condition."""

    name: str
    passed: bool
    message: str = ""
    witnesses: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "passed", bool(self.passed))

    def to_json(self) -> dict:
        return {"name": self.name, "passed": self.passed, "message": self.message,
                "witnesses": [_jsonable(w) for w in self.witnesses]}


def _jsonable(w):
    if isinstance(w, complex):
        return {"re": w.real, "im": w.imag}
    if isinstance(w, (list, tuple)):
        return [_jsonable(x) for x in w]
    if hasattr(w, "item"):
        return _jsonable(w.item())
    return w


@dataclass(frozen=True)
class Report:
    """A collection of checks; passes when every check passes."""

    checks: tuple[Check, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def __bool__(self) -> bool:
        return self.ok

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def failed_names(self) -> list[str]:
        return [c.name for c in self.failures()]

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def __str__(self) -> str:
        if self.ok:
            return "all conditions pass"
        return "; ".join(f"{c.name}: {c.message}" for c in self.failures())

    def to_json(self) -> dict:
        return {"ok": self.ok, "checks": [c.to_json() for c in self.checks]}
