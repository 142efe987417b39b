"""Append-only store for human 1/2/3 grades (1 = feasible and recognizable,
2 = only one of the two, 3 = neither)."""

from __future__ import annotations

import json
import threading
from dataclasses import asdict, dataclass
from pathlib import Path

GRADES = (1, 2, 3)


class GradeError(ValueError):
    pass


@dataclass(frozen=True)
class QualitativeRecord:
    design_id: str
    grade: int
    grader_id: str
    model: str = ""


class QualitativeStore:
    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path is not None else None
        self._records: list[QualitativeRecord] = []
        self._lock = threading.Lock()
        if self.path is not None and self.path.exists():
            for line in self.path.read_text().splitlines():
                if line.strip():
                    self._records.append(QualitativeRecord(**json.loads(line)))

    @property
    def records(self) -> tuple[QualitativeRecord, ...]:
        return tuple(self._records)

    def record(self, design_id: str, grade: int, grader_id: str, model: str = ""
               ) -> QualitativeRecord:
        if grade not in GRADES:
            raise GradeError(f"grade must be one of {GRADES}, got {grade!r}")
        rec = QualitativeRecord(str(design_id), int(grade), str(grader_id), str(model))
        with self._lock:
            if any((r.model, r.design_id, r.grader_id) == (rec.model, rec.design_id, rec.grader_id)
                   for r in self._records):
                raise GradeError(f"grader {grader_id!r} already graded {design_id!r}"
                                 + (f" for {model!r}" if model else ""))
            self._records.append(rec)
            if self.path is not None:
                with self.path.open("a", encoding="utf-8") as fh:
                    fh.write(json.dumps(asdict(rec), sort_keys=True) + "\n")
        return rec

    def counts(self, model: str | None = None) -> dict[int, int]:
        out = {g: 0 for g in GRADES}
        for r in self._records:
            if model is None or r.model == model:
                out[r.grade] += 1
        return out
