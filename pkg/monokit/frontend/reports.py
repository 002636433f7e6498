import json
from dataclasses import dataclass, field
from typing import Any, Dict, List

from monokit import ExitStatus, Verdict, combine_verdicts
from monokit.frontend.utils import jsonable


@dataclass
class Report:
    """Everything one command run produced; timing is the only nondeterministic field."""

    command: str
    fingerprint: str
    parameters: Dict[str, Any]
    verdicts: Dict[str, Verdict] = field(default_factory=dict)
    witnesses: Dict[str, Any] = field(default_factory=dict)
    details: Dict[str, Any] = field(default_factory=dict)
    undecided: List[str] = field(default_factory=list)
    timing: float = 0.0

    def add(self, name: str, verdict: Verdict, witness: Any = None):
        self.verdicts[name] = verdict
        if witness is not None:
            self.witnesses[name] = witness

    @property
    def status(self) -> ExitStatus:
        verdict = combine_verdicts(*self.verdicts.values())
        if verdict == Verdict.PASSED and self.undecided:
            verdict = Verdict.UNDECIDED
        return ExitStatus(int(verdict))

    def as_dict(self) -> Dict[str, Any]:
        return {
            "command": self.command,
            "fingerprint": self.fingerprint,
            "parameters": jsonable(self.parameters),
            "status": self.status.name.lower(),
            "verdicts": jsonable(self.verdicts),
            "witnesses": jsonable(self.witnesses),
            "details": jsonable(self.details),
            "undecided": list(self.undecided),
            "timing": round(self.timing, 6),
        }

    def to_machine(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True, indent=2, ensure_ascii=False) + "\n"

    def to_human(self) -> str:
        lines = [f"monokit {self.command}: {self.status.name.lower()}",
                 f"  instance    {self.fingerprint[:16]}"]
        params = ", ".join(f"{k}={v}" for k, v in sorted(self.parameters.items()))
        lines.append(f"  parameters  {params}")
        for key, value in self.details.items():
            lines.append(f"  {key}: {_short(value)}")
        for name, verdict in self.verdicts.items():
            line = f"  [{verdict.name.lower():>9}] {name}"
            if name in self.witnesses:
                line += f"  witness: {_short(self.witnesses[name])}"
            lines.append(line)
        for marker in self.undecided:
            lines.append(f"  undecided: {marker}")
        lines.append(f"  time {self.timing:.3f}s")
        return "\n".join(lines) + "\n"

    def render(self, fmt: str) -> str:
        return self.to_machine() if fmt == "machine" else self.to_human()


def _short(value: Any) -> str:
    value = jsonable(value)
    if isinstance(value, str):
        return value
    return json.dumps(value, ensure_ascii=False, sort_keys=True)
