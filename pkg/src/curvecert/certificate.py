"""Self-contained proof certificates.

A certificate is a line-oriented structured text document: a header echoing
the run configuration and environment, one ``record`` line per verified
inequality with its decimal margin, and a global verdict.  Margins are
stored as decimal strings of the conservative interval endpoint, so a
re-check can re-validate every inequality (margin > 0 matches the stored
verdict) without re-running the construction phases.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

SCHEMA_VERSION = "1"


@dataclass
class Record:
    kind: str
    label: str
    margin: str  # decimal string; positive iff the inequality held
    verdict: bool
    extras: dict = field(default_factory=dict)

    def to_line(self) -> str:
        parts = [f"record kind={self.kind}", f"label={self.label}"]
        for k in sorted(self.extras):
            parts.append(f"{k}={self.extras[k]}")
        parts.append(f"margin={self.margin}")
        parts.append(f"verdict={'pass' if self.verdict else 'FAIL'}")
        return " | ".join(parts)

    @classmethod
    def from_line(cls, line: str) -> "Record":
        fields = {}
        for part in line.split(" | "):
            if "=" in part:
                k, v = part.split("=", 1)
                fields[k.replace("record kind", "kind")] = v
        extras = {
            k: v for k, v in fields.items() if k not in ("kind", "label", "margin", "verdict")
        }
        return cls(
            kind=fields["kind"],
            label=fields["label"],
            margin=fields["margin"],
            verdict=(fields["verdict"] == "pass"),
            extras=extras,
        )


@dataclass
class Certificate:
    config: dict
    environment: dict
    records: list = field(default_factory=list)
    verdict: bool = False
    failure: str | None = None
    wall_clock: float = 0.0
    timestamp: float = field(default_factory=time.time)

    def add(self, kind, label, margin, verdict, **extras):
        self.records.append(Record(kind, label, margin, bool(verdict), extras))
        return self.records[-1]

    def finalize(self):
        self.verdict = bool(self.records) and all(r.verdict for r in self.records)
        if not self.verdict and self.failure is None:
            bad = next((r for r in self.records if not r.verdict), None)
            if bad is not None:
                self.failure = f"{bad.kind} {bad.label}"
        return self

    def failing_records(self):
        return [r for r in self.records if not r.verdict]

    def to_text(self) -> str:
        lines = [f"certificate-version: {SCHEMA_VERSION}"]
        lines.append(f"timestamp: {self.timestamp:.3f}")
        lines.append(f"wall-clock-seconds: {self.wall_clock:.3f}")
        for k in sorted(self.config):
            lines.append(f"config {k} = {self.config[k]}")
        for k in sorted(self.environment):
            lines.append(f"environment {k} = {self.environment[k]}")
        for r in self.records:
            lines.append(r.to_line())
        lines.append(f"failure: {self.failure or '-'}")
        lines.append(f"verdict: {'PASS' if self.verdict else 'FAIL'}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Certificate":
        config = {}
        environment = {}
        records = []
        verdict = False
        failure = None
        wall = 0.0
        stamp = 0.0
        for line in text.splitlines():
            if line.startswith("config "):
                k, v = line[len("config ") :].split(" = ", 1)
                config[k] = v
            elif line.startswith("environment "):
                k, v = line[len("environment ") :].split(" = ", 1)
                environment[k] = v
            elif line.startswith("record kind="):
                records.append(Record.from_line(line))
            elif line.startswith("verdict: "):
                verdict = line.split(": ", 1)[1] == "PASS"
            elif line.startswith("failure: "):
                failure = line.split(": ", 1)[1]
                failure = None if failure == "-" else failure
            elif line.startswith("wall-clock-seconds: "):
                wall = float(line.split(": ", 1)[1])
            elif line.startswith("timestamp: "):
                stamp = float(line.split(": ", 1)[1])
        cert = cls(config, environment, records, verdict, failure, wall, stamp)
        return cert

    def stable_text(self) -> str:
        """Certificate text without the wall-clock/timestamp lines."""
        return "\n".join(
            l
            for l in self.to_text().splitlines()
            if not l.startswith(("timestamp:", "wall-clock-seconds:"))
        )


def recheck(cert: Certificate) -> tuple[bool, list[str]]:
    """Re-validate every stored inequality record.

    Each record's verdict must equal (margin > 0), and the global verdict
    must equal the conjunction of record verdicts.  Returns (agrees, notes).
    """
    notes = []
    ok = True
    for r in cert.records:
        margin_pos = _decimal_positive(r.margin)
        if margin_pos != r.verdict:
            ok = False
            notes.append(f"record {r.kind} {r.label}: margin {r.margin} vs verdict {r.verdict}")
    conj = bool(cert.records) and all(r.verdict for r in cert.records)
    if conj != cert.verdict:
        ok = False
        notes.append(f"global verdict {cert.verdict} != conjunction {conj}")
    return ok, notes


def _decimal_positive(s: str) -> bool:
    s = s.strip()
    if s in ("True", "true"):
        return True
    if s in ("False", "false"):
        return False
    try:
        # margins serialize like -0.123e-4; sign of the mantissa decides
        return not s.startswith("-") and any(ch in s for ch in "123456789")
    except Exception:
        return False
