"""CSV ingestion and serialisation of reader tables, plus key=value configs.

Input format: a mandatory header `reader_id,tp,fp,fn,tn`, optionally with a
group column in second position (`reader_id,group,tp,fp,fn,tn`). Counts must
be non-negative integers; reader ids must be unique; file order is preserved.
UTF-8, LF or CRLF.
"""

from __future__ import annotations

import csv
import io
import os
from dataclasses import fields as dataclass_fields

from .errors import DatasetFormatError
from .simulate import SimConfig
from .tables import ContingencyTable, ReaderRecord, StudyDataset

_COUNT_COLUMNS = ("tp", "fp", "fn", "tn")


def parse_dataset_text(text: str, label: str = "study",
                       group_column: str | None = None) -> StudyDataset:
    """Parse CSV text into a dataset; see `parse_dataset` for the file variant."""
    reader = csv.reader(io.StringIO(text, newline=""))
    try:
        header = next(reader)
    except StopIteration:
        raise DatasetFormatError("empty file: expected a header row") from None
    header = [h.strip() for h in header]

    expected_plain = ["reader_id", *_COUNT_COLUMNS]
    if group_column is not None:
        expected = ["reader_id", group_column, *_COUNT_COLUMNS]
        if header != expected:
            raise DatasetFormatError(
                f"malformed header: expected {','.join(expected)}, got {','.join(header)}"
            )
        has_group = True
    elif header == expected_plain:
        has_group = False
    elif header == ["reader_id", "group", *_COUNT_COLUMNS]:
        has_group = True
    else:
        raise DatasetFormatError(
            f"malformed header: expected reader_id[,group],tp,fp,fn,tn, got {','.join(header)}"
        )

    n_cols = 6 if has_group else 5
    records = []
    seen: set[str] = set()
    for line_no, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != n_cols:
            raise DatasetFormatError(
                f"expected {n_cols} fields, got {len(row)}", line=line_no
            )
        reader_id = row[0].strip()
        if not reader_id:
            raise DatasetFormatError("empty reader_id", line=line_no, field="reader_id")
        if reader_id in seen:
            raise DatasetFormatError(f"duplicate reader_id {reader_id!r}", line=line_no,
                                     field="reader_id")
        seen.add(reader_id)
        group = row[1].strip() if has_group else None
        if has_group and not group:
            group = None
        counts = {}
        offset = 2 if has_group else 1
        for name, raw in zip(_COUNT_COLUMNS, row[offset:]):
            value = raw.strip()
            try:
                n = int(value)
            except ValueError:
                raise DatasetFormatError(
                    f"count must be an integer, got {value!r}", line=line_no, field=name
                ) from None
            if n < 0:
                raise DatasetFormatError(
                    f"count must be non-negative, got {n}", line=line_no, field=name
                )
            counts[name] = n
        if counts["tp"] + counts["fn"] < 1:
            raise DatasetFormatError("reader has no diseased cases (tp+fn=0)",
                                     line=line_no, field="tp")
        if counts["fp"] + counts["tn"] < 1:
            raise DatasetFormatError("reader has no healthy cases (fp+tn=0)",
                                     line=line_no, field="fp")
        records.append(ReaderRecord(reader_id=reader_id, group=group,
                                    table=ContingencyTable(**counts)))
    if not records:
        raise DatasetFormatError("no reader rows found after the header")
    return StudyDataset(records=tuple(records), label=label)


def parse_dataset(path: str, label: str | None = None,
                  group_column: str | None = None) -> StudyDataset:
    """Read a reader-table CSV from disk. IO errors surface as OSError.

    The default label is the file's basename, so reports do not depend on
    where the file happened to live.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        text = fh.read()
    if label is None:
        label = os.path.basename(path)
    return parse_dataset_text(text, label=label, group_column=group_column)


def serialize_dataset(dataset: StudyDataset) -> str:
    """CSV text that `parse_dataset_text` maps back to the same dataset.

    The group column is included only when some record carries a label.
    Corrected (non-integer) tables are not serialisable: counts are written
    as integers.
    """
    has_group = any(r.group is not None for r in dataset.records)
    lines = ["reader_id,group,tp,fp,fn,tn" if has_group else "reader_id,tp,fp,fn,tn"]
    for rec in dataset.records:
        t = rec.table
        cells = [t.tp, t.fp, t.fn, t.tn]
        if any(c != int(c) for c in cells):
            raise ValueError(
                f"reader {rec.reader_id!r} has non-integer cells; only raw tables serialise"
            )
        counts = ",".join(str(int(c)) for c in cells)
        if has_group:
            lines.append(f"{rec.reader_id},{rec.group or ''},{counts}")
        else:
            lines.append(f"{rec.reader_id},{counts}")
    return "\n".join(lines) + "\n"


_SIM_FIELDS = {f.name: f.type for f in dataclass_fields(SimConfig)}


def parse_sim_config_text(text: str, overrides: dict | None = None) -> SimConfig:
    """Build a SimConfig from key=value lines; '#' comments and blanks ignored.

    `overrides` (e.g. explicit CLI flags) take precedence over file values.
    """
    values: dict = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DatasetFormatError("expected key=value", line=line_no)
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _SIM_FIELDS:
            raise DatasetFormatError(f"unknown simulation key {key!r}", line=line_no,
                                     field=key)
        try:
            if key in ("n_readers", "n_diseased", "n_healthy", "seed"):
                values[key] = int(value)
            else:
                values[key] = float(value)
        except ValueError:
            raise DatasetFormatError(f"bad value {value!r}", line=line_no,
                                     field=key) from None
    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return SimConfig(**values)
    except (TypeError, ValueError) as exc:
        raise DatasetFormatError(f"invalid simulation config: {exc}") from None
