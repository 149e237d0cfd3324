"""Run configurations, their digests, and CSV output with a digest header."""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from ..errors import ParseError

PRECISIONS = ("f64", "f32")


@dataclass
class RunConfig:
    """Everything that determines a run's output.

    ``out`` and ``threads`` only affect where and how fast results are
    produced, so they are left out of :meth:`resolved` and of the digest.
    """

    subcommand: str
    seed: int = 0
    out: str = "."
    instances: dict = field(default_factory=dict)
    overrides: dict = field(default_factory=dict)
    precision: str = "f64"
    threads: int = 1

    def __post_init__(self):
        if self.precision not in PRECISIONS:
            raise ValueError(f"precision must be one of {PRECISIONS}")
        self.seed = int(self.seed)

    def resolved(self) -> dict:
        d = asdict(self)
        del d["out"], d["threads"]
        return d

    def canonical(self) -> str:
        return json.dumps(self.resolved(), sort_keys=True, separators=(",", ":"))

    @property
    def digest(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()[:16]

    def header(self) -> str:
        return f"config-digest={self.digest} config={self.canonical()}"

    def get(self, key: str, default=None):
        return self.overrides.get(key, default)

    def path(self, name: str) -> Path:
        p = Path(self.out)
        p.mkdir(parents=True, exist_ok=True)
        return p / name


def load_config_file(path) -> dict:
    """Read a JSON run configuration (``seed``, ``precision``, ``instances``, ``overrides``)."""
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"bad config JSON: {exc.msg}", exc.pos) from None
    if not isinstance(obj, dict):
        raise ParseError("config must be a JSON object")
    unknown = set(obj) - {"seed", "precision", "instances", "overrides", "threads"}
    if unknown:
        raise ParseError(f"unknown config keys: {sorted(unknown)}")
    return obj


def csv_text(header: list[str], rows, comment: str | None = None) -> str:
    buf = io.StringIO()
    if comment is not None:
        buf.write(f"# {comment}\r\n")
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def write_csv(path, header: list[str], rows, comment: str | None = None) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(csv_text(header, rows, comment))
    return path
