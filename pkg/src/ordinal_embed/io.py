"""File formats and run manifests.

Configurations are written as CSV (a ``dim=<p>`` header, one point per
row, 17 significant digits so every double round-trips exactly) or JSON.
Rank matrices are integer CSV, one viewer per row. Triple sets are CSV
rows ``i,j,k`` under a ``model=<point|vector|self>`` header.
"""

from __future__ import annotations

import csv
import datetime as _dt
import hashlib
import io as _io
import json
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .geometry import Configuration, GaugePair, SimilarityTransform, SphericalConfiguration
from .rankings import Model, RankMatrix, RankValidationError, TripleSet

FLOAT_FORMAT = "%.17g"


class FormatError(ValueError):
    """A file does not follow the expected layout."""


def _fmt(x: float) -> str:
    return FLOAT_FORMAT % x


def _write_text(path, text: str):
    if str(path) == "-":
        sys.stdout.write(text)
        return
    Path(path).write_text(text, encoding="utf-8", newline="\n")


# ----------------------------------------------------------- configurations


def configuration_to_csv(config: Configuration) -> str:
    out = [f"dim={config.dim}"]
    out += [",".join(_fmt(v) for v in row) for row in config.points]
    return "\n".join(out) + "\n"


def configuration_from_csv(text: str, spherical: bool = False) -> Configuration:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].strip().startswith("dim="):
        raise FormatError("configuration CSV must start with a 'dim=<p>' header")
    try:
        dim = int(lines[0].strip()[4:])
    except ValueError:
        raise FormatError(f"bad header {lines[0]!r}") from None
    if dim < 1:
        raise FormatError("dim must be >= 1")
    rows = []
    for r, ln in enumerate(lines[1:]):
        cells = next(csv.reader([ln]))
        if len(cells) != dim:
            raise FormatError(f"row {r}: expected {dim} coordinates, got {len(cells)}")
        try:
            rows.append([float(c) for c in cells])
        except ValueError:
            raise FormatError(f"row {r}: non-numeric coordinate in {ln!r}") from None
    if not rows:
        raise FormatError("configuration has no points")
    cls = SphericalConfiguration if spherical else Configuration
    return cls(np.array(rows, dtype=float).reshape(len(rows), dim))


def configuration_to_json(config: Configuration) -> str:
    return json.dumps(config.to_dict()) + "\n"


def configuration_from_json(text: str, spherical: bool = False) -> Configuration:
    try:
        d = json.loads(text)
        cls = SphericalConfiguration if spherical else Configuration
        config = cls.from_dict(d)
    except (KeyError, TypeError, json.JSONDecodeError) as e:
        raise FormatError(f"bad configuration JSON: {e}") from None
    return config


def write_configuration(path, config: Configuration):
    """Format chosen by extension: ``.json`` or anything else as CSV."""
    if str(path).endswith(".json"):
        _write_text(path, configuration_to_json(config))
    else:
        _write_text(path, configuration_to_csv(config))


def read_configuration(path, spherical: bool = False) -> Configuration:
    text = Path(path).read_text(encoding="utf-8")
    if str(path).endswith(".json"):
        return configuration_from_json(text, spherical)
    return configuration_from_csv(text, spherical)


# --------------------------------------------------------------- rank data


def ranks_to_csv(R: RankMatrix) -> str:
    return "".join(",".join(str(v) for v in row) + "\n" for row in R.ranks.tolist())


def ranks_from_csv(text: str) -> RankMatrix:
    """Parse and validate; errors name the 0-based offending row."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise FormatError("rank file is empty")
    rows = []
    for r, ln in enumerate(lines):
        try:
            rows.append([int(c) for c in next(csv.reader([ln]))])
        except ValueError:
            raise RankValidationError(r, f"non-integer rank in {ln!r}") from None
        if len(rows[-1]) != len(rows[0]):
            raise RankValidationError(r, f"has {len(rows[-1])} entries, expected {len(rows[0])}")
    return RankMatrix(np.array(rows, dtype=np.int64))


def write_ranks(path, R: RankMatrix):
    _write_text(path, ranks_to_csv(R))


def read_ranks(path) -> RankMatrix:
    return ranks_from_csv(Path(path).read_text(encoding="utf-8"))


def triples_to_csv(T: TripleSet) -> str:
    buf = _io.StringIO()
    buf.write(f"model={T.model.value}\n")
    for i, j, k in T.triples.tolist():
        buf.write(f"{i},{j},{k}\n")
    return buf.getvalue()


def triples_from_csv(text: str) -> TripleSet:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].strip().startswith("model="):
        raise FormatError("triple CSV must start with a 'model=<point|vector|self>' header")
    try:
        model = Model(lines[0].strip()[6:])
    except ValueError:
        raise FormatError(f"unknown model in header {lines[0]!r}") from None
    rows = []
    for r, ln in enumerate(lines[1:]):
        cells = next(csv.reader([ln]))
        if len(cells) != 3:
            raise FormatError(f"row {r}: expected 3 indices, got {len(cells)}")
        try:
            rows.append([int(c) for c in cells])
        except ValueError:
            raise FormatError(f"row {r}: non-integer index in {ln!r}") from None
    if any(min(row) < 0 for row in rows):
        raise FormatError("negative index in triple file")
    return TripleSet(model, np.array(rows, dtype=np.int64).reshape(-1, 3))


def write_triples(path, T: TripleSet):
    _write_text(path, triples_to_csv(T))


def read_triples(path) -> TripleSet:
    return triples_from_csv(Path(path).read_text(encoding="utf-8"))


def is_triple_file(path) -> bool:
    with open(path, encoding="utf-8") as fh:
        return fh.readline().strip().startswith("model=")


# -------------------------------------------------------------- transforms


def transform_from_dict(d: dict) -> SimilarityTransform | GaugePair:
    if "linear" in d:
        return GaugePair.from_dict(d)
    if "orthogonal" in d and "scale" not in d:
        p = len(d["orthogonal"])
        return SimilarityTransform(1.0, d["orthogonal"], np.zeros(p))
    return SimilarityTransform.from_dict(d)


def transform_to_dict(t) -> dict:
    if isinstance(t, np.ndarray):
        return SimilarityTransform(1.0, t, np.zeros(len(t))).to_dict()
    return t.to_dict()


def read_transform(path):
    try:
        return transform_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
    except (KeyError, TypeError, json.JSONDecodeError) as e:
        raise FormatError(f"bad transform JSON: {e}") from None


# ---------------------------------------------------------------- manifest


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def tool_version() -> str:
    try:
        from importlib.metadata import version

        return version("artifact")
    except Exception:
        from . import __version__

        return __version__


def deterministic_timestamp() -> str:
    """``SOURCE_DATE_EPOCH`` if set, else the Unix epoch.

    Never the wall clock or file mtimes (regenerated inputs get new mtimes
    but the same bytes), so repeated runs write identical output.
    """
    env = os.environ.get("SOURCE_DATE_EPOCH", "").strip()
    secs = int(env) if env else 0
    return _dt.datetime.fromtimestamp(secs, _dt.timezone.utc).isoformat().replace("+00:00", "Z")


@dataclass(frozen=True)
class InputFile:
    path: str
    sha256: str


@dataclass(frozen=True)
class RunManifest:
    command: str
    inputs: tuple[InputFile, ...]
    seed: int | None
    tool_version: str
    timestamp: str
    extra: dict = field(default_factory=dict)

    @classmethod
    def build(cls, command: str, inputs=(), seed: int | None = None, **extra) -> "RunManifest":
        paths = [str(p) for p in inputs if p is not None]
        return cls(
            command=command,
            inputs=tuple(InputFile(p, sha256_file(p)) for p in paths),
            seed=seed,
            tool_version=tool_version(),
            timestamp=deterministic_timestamp(),
            extra=dict(extra),
        )

    def verify(self) -> bool:
        """True if every input still hashes to its recorded digest."""
        return all(Path(f.path).exists() and sha256_file(f.path) == f.sha256 for f in self.inputs)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["inputs"] = [asdict(f) for f in self.inputs]
        if not d["extra"]:
            d.pop("extra")
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunManifest":
        d = dict(d)
        d["inputs"] = tuple(InputFile(**f) for f in d.get("inputs", []))
        return cls(**d)


def dump_json(path, payload: dict):
    """Stable key order and a trailing newline."""
    _write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")
