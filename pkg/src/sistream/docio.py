"""Shared reading/writing helpers for the line-oriented document formats.

Every document in this package follows the same conventions: '#' starts a
comment line, blank lines are ignored, an optional header block of
``key: value`` lines precedes the body, and CSV bodies start with an exact
column-header row. Unknown header keys or columns are rejected so schema
drift fails loudly.
"""

import os
import tempfile

from .errors import ParseError


def content_lines(text: str) -> list[tuple[int, str]]:
    """(line_number, stripped_text) for every non-blank, non-comment line."""
    out = []
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        out.append((i, line))
    return out


def is_header_line(line: str) -> bool:
    head, sep, _ = line.partition(":")
    return bool(sep) and head.strip().isidentifier()


def split_header(lines: list[tuple[int, str]], allowed: tuple[str, ...],
                 required: tuple[str, ...]) -> tuple[dict[str, str], list[tuple[int, str]]]:
    """Consume leading ``key: value`` lines; return (header dict, body lines)."""
    header: dict[str, str] = {}
    body_start = 0
    for body_start, (lineno, line) in enumerate(lines):
        if not is_header_line(line):
            break
        key, _, value = line.partition(":")
        key = key.strip()
        if key not in allowed:
            raise ParseError(f"unknown header field {key!r}", line=lineno, field=key)
        if key in header:
            raise ParseError(f"duplicate header field {key!r}", line=lineno, field=key)
        header[key] = value.strip()
    else:
        body_start = len(lines)
    for key in required:
        if key not in header:
            raise ParseError(f"missing header field {key!r}", field=key)
    return header, lines[body_start:]


def expect_columns(lines: list[tuple[int, str]], columns: tuple[str, ...],
                   optional_tail: tuple[str, ...] = ()) -> tuple[tuple[str, ...], list[tuple[int, str]]]:
    """Check the CSV column-header row; return (actual columns, data lines)."""
    if not lines:
        raise ParseError(f"missing column header row {','.join(columns)!r}")
    lineno, line = lines[0]
    actual = tuple(c.strip() for c in line.split(","))
    accepted = [columns + optional_tail[:k] for k in range(len(optional_tail) + 1)]
    if actual not in accepted:
        raise ParseError(
            f"unexpected columns {','.join(actual)!r}; expected {','.join(columns + optional_tail)!r}",
            line=lineno)
    return actual, lines[1:]


def parse_int(value: str, what: str, lineno: int | None = None) -> int:
    try:
        return int(value)
    except ValueError:
        raise ParseError(f"{what}: not an integer: {value!r}", line=lineno, field=what) from None


def parse_float(value: str, what: str, lineno: int | None = None) -> float:
    try:
        return float(value)
    except ValueError:
        raise ParseError(f"{what}: not a number: {value!r}", line=lineno, field=what) from None


def parse_bit(value: str, what: str, lineno: int | None = None) -> int:
    if value not in ("0", "1"):
        raise ParseError(f"{what}: expected 0 or 1, got {value!r}", line=lineno, field=what)
    return int(value)


def fmt(x: float) -> str:
    """Shortest round-trip representation; keeps emitted documents byte-stable."""
    return repr(float(x))


def atomic_write(path: str, text: str) -> None:
    """Write via a temp file + rename so readers never see partial documents."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-doc-")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_bytes(path: str, data: bytes) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-doc-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
