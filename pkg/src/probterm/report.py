"""Machine-readable analysis reports.

One document per program with the fields ``program``, ``past``, ``ast``,
``witnesses``, ``assumptions``, ``notes`` and ``phases`` (``parse_ms``,
``moments_ms``, ``bounds_ms``, ``rules_ms``).  ``past``/``ast`` are one of
``Yes``, ``No``, ``Maybe``.  Each witness is the record of one proof rule.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .rules import Verdict, answer

PHASES = ("parse_ms", "moments_ms", "bounds_ms", "rules_ms")


@dataclass
class AnalysisReport:
    program: str
    past: str
    ast: str
    witnesses: list = field(default_factory=list)
    assumptions: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    phases: dict = field(default_factory=dict)

    @classmethod
    def from_verdict(cls, program: str, verdict: Verdict, parse_ms: float = 0.0) -> "AnalysisReport":
        phases = {"parse_ms": parse_ms}
        phases.update({k: verdict.phases.get(k, 0.0) for k in PHASES[1:]})
        return cls(
            program=program,
            past=answer(verdict.past),
            ast=answer(verdict.ast),
            witnesses=[r.to_dict() for r in verdict.witnesses],
            assumptions=list(verdict.assumptions),
            notes=list(verdict.notes),
            phases=phases,
        )

    @classmethod
    def undecided(cls, program: str, note: str) -> "AnalysisReport":
        return cls(program, "Maybe", "Maybe", notes=[note], phases={k: 0.0 for k in PHASES})

    def certified(self) -> list:
        return [w for w in self.witnesses if w["certified"] == "true"]

    def to_dict(self, canonical: bool = False) -> dict:
        phases = {k: (0.0 if canonical else round(float(self.phases.get(k, 0.0)), 3)) for k in PHASES}
        return {
            "program": self.program,
            "past": self.past,
            "ast": self.ast,
            "witnesses": [dict(w) for w in self.witnesses],
            "assumptions": list(self.assumptions),
            "notes": list(self.notes),
            "phases": phases,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AnalysisReport":
        return cls(d["program"], d["past"], d["ast"], list(d["witnesses"]), list(d["assumptions"]),
                   list(d.get("notes", [])), dict(d["phases"]))

    def to_json(self, canonical: bool = False) -> str:
        return json.dumps(self.to_dict(canonical), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "AnalysisReport":
        return cls.from_dict(json.loads(text))

    def render(self) -> str:
        lines = [f"== {self.program}", f"PAST: {self.past}", f"AST: {self.ast}"]
        for w in self.certified():
            details = "; ".join(f"{k} = {v}" for k, v in w["witness"].items())
            lines.append(f"witness {w['rule']} ({w['title']}): {details}")
        lines += [f"assumption: {a}" for a in self.assumptions]
        lines += [f"note: {n}" for n in self.notes]
        return "\n".join(lines)
