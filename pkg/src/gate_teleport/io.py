"""Coincidence tables and matrix serialization.

CSV tables use the header ``setting_q1,setting_q4,detector_pair,count``;
JSON tables are arrays of row objects with the same keys. Matrices are
written as ``{"dim": d, "re": [[...]], "im": [[...]]}``.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

CSV_HEADER = ("setting_q1", "setting_q4", "detector_pair", "count")


@dataclass(frozen=True)
class CoincidenceRow:
    setting_q1: str
    setting_q4: str
    detector_pair: str
    count: int


@dataclass(frozen=True)
class CoincidenceTable:
    rows: tuple[CoincidenceRow, ...]

    def __post_init__(self):
        rows = tuple(self.rows)
        seen = set()
        for r in rows:
            if isinstance(r.count, bool) or not isinstance(r.count, (int, np.integer)):
                raise ValueError(f"count must be an integer, got {r.count!r}")
            if r.count < 0:
                raise ValueError(f"negative count in row {r}")
            key = (r.setting_q1, r.setting_q4, r.detector_pair)
            if key in seen:
                raise ValueError(f"duplicate row for setting {key}")
            seen.add(key)
        object.__setattr__(self, "rows", rows)

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    @property
    def detector_pairs(self) -> list[str]:
        return sorted({r.detector_pair for r in self.rows})

    @property
    def total(self) -> int:
        return int(sum(r.count for r in self.rows))

    def counts(self, pair: str | Iterable[str] | None = None) -> dict[tuple[str, str], int]:
        """Counts per analyzer setting, summed over the selected detector pairs."""
        if isinstance(pair, str):
            pairs = {pair}
        elif pair is None:
            pairs = None
        else:
            pairs = set(pair)
        out: dict[tuple[str, str], int] = {}
        for r in self.rows:
            if pairs is None or r.detector_pair in pairs:
                key = (r.setting_q1, r.setting_q4)
                out[key] = out.get(key, 0) + int(r.count)
        return out

    # --- CSV ---------------------------------------------------------------

    def to_csv(self, path: str | Path | None = None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in self.rows:
            writer.writerow((r.setting_q1, r.setting_q4, r.detector_pair, int(r.count)))
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, source: str | Path) -> "CoincidenceTable":
        """Read a table from a path or from CSV text."""
        text = _read_text(source)
        reader = csv.reader(io.StringIO(text))
        header = tuple(next(reader, ()))
        if header != CSV_HEADER:
            raise ValueError(f"unexpected CSV header {header}")
        rows = [CoincidenceRow(a, b, c, int(n)) for a, b, c, n in reader]
        return cls(tuple(rows))

    # --- JSON --------------------------------------------------------------

    def to_json(self, path: str | Path | None = None) -> str:
        rows = [{**asdict(r), "count": int(r.count)} for r in self.rows]
        text = json.dumps(rows, indent=1)
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_json(cls, source: str | Path) -> "CoincidenceTable":
        data = json.loads(_read_text(source))
        rows = [CoincidenceRow(d["setting_q1"], d["setting_q4"], d["detector_pair"], int(d["count"]))
                for d in data]
        return cls(tuple(rows))

    @classmethod
    def read(cls, path: str | Path) -> "CoincidenceTable":
        path = Path(path)
        if path.suffix == ".json":
            return cls.from_json(path)
        return cls.from_csv(path)


def _read_text(source: str | Path) -> str:
    if isinstance(source, Path):
        return source.read_text()
    if "\n" not in source and Path(source).exists():
        return Path(source).read_text()
    return source


def write_probabilities(probs: Mapping[tuple[str, str, str], float], path: str | Path) -> None:
    """Exact (pre-sampling) probabilities in the table layout, last column ``probability``."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER[:3] + ("probability",))
    for (l1, l4, pair), p in probs.items():
        writer.writerow((l1, l4, pair, repr(float(p))))
    Path(path).write_text(buf.getvalue())


def read_probabilities(path: str | Path) -> dict[tuple[str, str, str], float]:
    reader = csv.reader(io.StringIO(Path(path).read_text()))
    header = tuple(next(reader, ()))
    if header != CSV_HEADER[:3] + ("probability",):
        raise ValueError(f"unexpected probability header {header}")
    return {(a, b, c): float(p) for a, b, c, p in reader}


def matrix_to_dict(matrix) -> dict:
    m = np.asarray(getattr(matrix, "elements", matrix))
    return {"dim": int(m.shape[0]), "re": m.real.tolist(), "im": m.imag.tolist()}


def matrix_from_dict(data: Mapping) -> np.ndarray:
    m = np.array(data["re"], dtype=float) + 1j * np.array(data["im"], dtype=float)
    if m.shape != (data["dim"], data["dim"]):
        raise ValueError(f"matrix shape {m.shape} does not match dim {data['dim']}")
    return m


def write_matrix(matrix, path: str | Path, **extra) -> None:
    Path(path).write_text(json.dumps({**matrix_to_dict(matrix), **extra}, indent=1))


def read_matrix(path: str | Path) -> np.ndarray:
    return matrix_from_dict(json.loads(Path(path).read_text()))
