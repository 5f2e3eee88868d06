"""Attack manifests: the JSON record of every schedule used in a batch."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

from .attack import AttackMode, DropSchedule, PadPolicy
from .core import PHASES
from .errors import ManifestError, ScheduleError

__all__ = ["MANIFEST_VERSION", "ManifestEntry", "AttackManifest"]

MANIFEST_VERSION = 1


@dataclass(frozen=True)
class ManifestEntry:
    image_id: str
    width: int
    height: int
    mode: str
    phase: str
    pad: str
    seed: int
    n: int
    rows: tuple

    def __post_init__(self):
        try:
            object.__setattr__(self, "rows", tuple(int(r) for r in self.rows))
            object.__setattr__(self, "mode", AttackMode(self.mode).value)
            object.__setattr__(self, "pad", PadPolicy(self.pad).value)
            DropSchedule(self.rows, self.height, self.seed)
        except (ValueError, TypeError, ScheduleError) as exc:
            raise ManifestError(f"invalid entry for {self.image_id!r}: {exc}") from exc
        if self.phase not in PHASES:
            raise ManifestError(f"invalid phase {self.phase!r} for {self.image_id!r}")
        if self.n != len(self.rows):
            raise ManifestError(f"entry {self.image_id!r}: n={self.n} but {len(self.rows)} rows")
        if self.width < 1:
            raise ManifestError(f"entry {self.image_id!r}: width must be >= 1")

    @property
    def schedule(self) -> DropSchedule:
        return DropSchedule(self.rows, self.height, self.seed)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["rows"] = list(self.rows)
        return d


@dataclass(frozen=True)
class AttackManifest:
    entries: tuple = field(default_factory=tuple)
    version: int = MANIFEST_VERSION

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        ids = [e.image_id for e in self.entries]
        if len(set(ids)) != len(ids):
            raise ManifestError("duplicate image ids in manifest")

    def by_id(self) -> dict:
        return {e.image_id: e for e in self.entries}

    def to_json(self) -> str:
        doc = {"version": self.version, "entries": [e.to_dict() for e in self.entries]}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "AttackManifest":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ManifestError(f"manifest is not valid JSON: {exc}") from exc
        if not isinstance(doc, dict) or not isinstance(doc.get("entries"), list):
            raise ManifestError("manifest must be an object with an 'entries' list")
        if doc.get("version") != MANIFEST_VERSION:
            raise ManifestError(f"unsupported manifest version {doc.get('version')!r}")
        names = set(ManifestEntry.__dataclass_fields__)
        entries = []
        for raw in doc["entries"]:
            if not isinstance(raw, dict) or set(raw) != names:
                raise ManifestError(f"manifest entry must have exactly the fields {sorted(names)}")
            entries.append(ManifestEntry(**raw))
        return cls(tuple(entries), doc["version"])
