"""Text formats for marks, preference instances and configurations.

Peers appear 1-based in every file; in memory they are 0-based.

Marks::

    # optional comment lines, e.g. seed=7
    n=3 orientation=lo
    inf 2 5
    2 inf 1
    5 1 inf

Preference instance (one line per peer, best first)::

    1: 2 3 4
    2: 1 3 4

Configuration (one link per line)::

    1 2
    3 4
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import FormatError, StructuralError
from .prefcore import Configuration, MarkMatrix, Orientation, PreferenceInstance


def _fmt_mark(x: float) -> str:
    if math.isinf(x):
        return "inf"
    if x == int(x) and abs(x) < 2**53:
        return str(int(x))
    return repr(float(x))


def _meta_lines(meta) -> list[str]:
    out = []
    for k in sorted(meta):
        v = meta[k]
        out.append(f"# {k}={json.dumps(v) if not isinstance(v, str) else v}")
    return out


def format_marks(m: MarkMatrix) -> str:
    lines = _meta_lines(m.meta)
    lines.append(f"n={m.n} orientation={m.orientation.value}")
    for row in m.entries.tolist():
        lines.append(" ".join(_fmt_mark(x) for x in row))
    return "\n".join(lines) + "\n"


def parse_marks(text: str, path=None) -> MarkMatrix:
    meta = {}
    header = None
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body and header is None:
                k, _, v = body.partition("=")
                try:
                    meta[k.strip()] = json.loads(v)
                except ValueError:
                    meta[k.strip()] = v.strip()
            continue
        if header is None:
            header = _parse_header(line, lineno, path)
            continue
        row = []
        for tok in line.split():
            try:
                row.append(float(tok))
            except ValueError:
                raise FormatError(f"not a mark: {tok!r}", lineno, path) from None
        if len(row) != header[0]:
            raise FormatError(f"row has {len(row)} entries, expected {header[0]}", lineno, path)
        rows.append(row)
    if header is None:
        raise FormatError("missing 'n=<count> orientation=<lo|hi>' header", None, path)
    n, orientation = header
    if len(rows) != n:
        raise FormatError(f"expected {n} rows, found {len(rows)}", None, path)
    arr = np.array(rows, dtype=np.float64).reshape(n, n)
    if np.isnan(arr).any():
        raise FormatError("NaN mark", None, path)
    return MarkMatrix(arr, orientation, meta)


def _parse_header(line: str, lineno: int, path) -> tuple[int, Orientation]:
    fields = dict(tok.partition("=")[::2] for tok in line.split())
    if "n" not in fields:
        raise FormatError(f"header must start with n=<count>, got {line!r}", lineno, path)
    try:
        n = int(fields["n"])
        orientation = Orientation.parse(fields.get("orientation", "lo"))
    except (ValueError, StructuralError) as exc:
        raise FormatError(f"bad header {line!r}: {exc}", lineno, path) from None
    if n < 0:
        raise FormatError("negative peer count", lineno, path)
    return n, orientation


def format_instance(L: PreferenceInstance) -> str:
    return "".join(
        f"{p + 1}:" + "".join(f" {q + 1}" for q in lst) + "\n" for p, lst in enumerate(L.lists)
    )


def parse_instance(text: str, path=None) -> PreferenceInstance:
    entries: dict[int, list[int]] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        head, sep, tail = line.partition(":")
        if not sep:
            raise FormatError(f"expected 'p: q1 q2 ...', got {line!r}", lineno, path)
        try:
            p = int(head)
            qs = [int(t) for t in tail.split()]
        except ValueError:
            raise FormatError(f"non-integer peer in {line!r}", lineno, path) from None
        if p in entries:
            raise FormatError(f"peer {p} listed twice", lineno, path)
        entries[p] = qs
    n = len(entries)
    if sorted(entries) != list(range(1, n + 1)):
        raise FormatError(f"peers must be numbered 1..{n}", None, path)
    try:
        return PreferenceInstance([[q - 1 for q in entries[p]] for p in range(1, n + 1)])
    except StructuralError as exc:
        raise FormatError(str(exc), None, path) from None


def format_configuration(C: Configuration, header: Iterable[str] = ()) -> str:
    lines = [f"# {h}" for h in header]
    lines += [f"{p + 1} {q + 1}" for p, q in C]
    return "\n".join(lines) + ("\n" if lines else "")


def parse_configuration(text: str, path=None, n: int | None = None) -> Configuration:
    links = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise FormatError(f"expected two peers, got {line!r}", lineno, path)
        try:
            p, q = int(parts[0]), int(parts[1])
        except ValueError:
            raise FormatError(f"non-integer peer in {line!r}", lineno, path) from None
        if p < 1 or q < 1 or (n is not None and (p > n or q > n)):
            raise FormatError(f"peer out of range in {line!r}", lineno, path)
        if p == q:
            raise FormatError(f"self-loop {line!r}", lineno, path)
        links.append((p - 1, q - 1))
    return Configuration.of(links)


def _read(path) -> str:
    return Path(path).read_text(encoding="utf-8")


def _write(path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")


def read_marks(path) -> MarkMatrix:
    return parse_marks(_read(path), path=str(path))


def write_marks(path, m: MarkMatrix) -> None:
    _write(path, format_marks(m))


def read_instance(path) -> PreferenceInstance:
    return parse_instance(_read(path), path=str(path))


def write_instance(path, L: PreferenceInstance) -> None:
    _write(path, format_instance(L))


def read_configuration(path, n: int | None = None) -> Configuration:
    return parse_configuration(_read(path), path=str(path), n=n)


def write_configuration(path, C: Configuration, header: Iterable[str] = ()) -> None:
    _write(path, format_configuration(C, header))


def sniff(text: str) -> str:
    """Guess the format of ``text``: ``marks``, ``instance`` or ``configuration``."""
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("n="):
            return "marks"
        if ":" in line:
            return "instance"
        return "configuration"
    return "instance"


__all__ = [
    "format_marks",
    "parse_marks",
    "read_marks",
    "write_marks",
    "format_instance",
    "parse_instance",
    "read_instance",
    "write_instance",
    "format_configuration",
    "parse_configuration",
    "read_configuration",
    "write_configuration",
    "sniff",
]
