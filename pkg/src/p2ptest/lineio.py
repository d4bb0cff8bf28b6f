"""Line-list CSV ingestion and emission.

The on-disk format is a UTF-8 CSV with a mandatory header
``person_id,household_id,onset_day`` and LF line endings.  An empty
onset_day field means the person never showed symptoms.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Optional

from .model import Outbreak, Population, StudyConfig

__all__ = ["LineListRecord", "LineListError", "parse_line_list", "write_line_list"]

HEADER = ("person_id", "household_id", "onset_day")


@dataclass(frozen=True)
class LineListRecord:
    person_id: str
    household_id: str
    onset_day: Optional[int]


class LineListError(ValueError):
    """Malformed line-list input; message lists every offending line."""


def parse_line_list(text: str, config: StudyConfig) -> tuple[Population, Outbreak]:
    """Parse a line-list CSV into a population and outbreak.

    Rows are validated against the study bounds (onsets must lie in
    [latent.min_days + 1, t_days]); all problems are reported together
    with their line numbers.  No row is ever silently dropped.
    """
    reader = csv.reader(io.StringIO(text))
    rows = list(reader)
    if not rows:
        raise LineListError("empty input: missing header line")
    header = tuple(cell.strip() for cell in rows[0])
    if header != HEADER:
        raise LineListError(
            f"line 1: expected header {','.join(HEADER)!r}, got {','.join(header)!r}"
        )

    onset_lo = config.latent.min_days + 1
    onset_hi = config.horizon
    errors: list[str] = []
    records: list[LineListRecord] = []
    seen: set[str] = set()
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 3:
            errors.append(f"line {lineno}: expected 3 fields, got {len(row)}")
            continue
        pid, hid, onset_raw = (c.strip() for c in row)
        if not pid:
            errors.append(f"line {lineno}: empty person_id")
            continue
        if pid in seen:
            errors.append(f"line {lineno}: duplicate person_id {pid!r}")
            continue
        if not hid:
            errors.append(f"line {lineno}: empty household_id")
            continue
        onset: Optional[int] = None
        if onset_raw:
            try:
                onset = int(onset_raw)
            except ValueError:
                errors.append(
                    f"line {lineno}: onset_day must be an integer, got {onset_raw!r}"
                )
                continue
            if onset < onset_lo:
                errors.append(
                    f"line {lineno}: onset day {onset} is before the earliest "
                    f"possible onset (day {onset_lo})"
                )
                continue
            if onset > onset_hi:
                errors.append(
                    f"line {lineno}: onset day {onset} is after the study "
                    f"horizon (day {onset_hi})"
                )
                continue
        seen.add(pid)
        records.append(LineListRecord(pid, hid, onset))

    if errors:
        raise LineListError("\n".join(errors))
    if not records:
        raise LineListError("empty population: no data rows")

    hh_order: dict[str, list[int]] = {}
    for idx, rec in enumerate(records):
        hh_order.setdefault(rec.household_id, []).append(idx)
    population = Population(
        households=tuple(tuple(members) for members in hh_order.values()),
        ids=tuple(r.person_id for r in records),
        household_ids=tuple(hh_order.keys()),
    )
    outbreak = Outbreak(
        population, tuple(r.onset_day for r in records), config
    )
    return population, outbreak


def write_line_list(population: Population, outbreak: Outbreak) -> str:
    """Inverse of :func:`parse_line_list` on valid data."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(HEADER)
    hh_ids = population.household_ids
    for i in range(population.n_persons):
        onset = outbreak.onsets[i]
        writer.writerow(
            (
                population.ids[i],
                hh_ids[population.household_of[i]],
                "" if onset is None else onset,
            )
        )
    return out.getvalue()
