"""Line-oriented text formats for spaces and maps.

Space file (UTF-8)::

    gms v1
    points <n>
    kind <kind-token>
    v <int>
    s <real>            (or: theta inline)
    d <n reals>         (n rows)
    <n reals>           (n bare theta rows, only after "theta inline")
    distinct true|false (optional)

Map file::

    gms-map v1
    points <n>
    m <n image indices>

Parsers reject asymmetric distance tables with a positioned error; the
writer emits the canonical layout so identical structures serialize to
identical bytes.
"""

from __future__ import annotations

from pathlib import Path

from .solvers import TableMap
from .spaces import AxiomProfile, DistanceTable, KIND_SPECS, ThetaTable, cmp_tol


class FileFormatError(ValueError):
    """Parse failure carrying the 1-based offending line number."""

    def __init__(self, line: int, msg: str):
        super().__init__(f"line {line}: {msg}")
        self.line = line


def _fmt(x: float) -> str:
    return repr(float(x))


class _Lines:
    def __init__(self, text: str):
        self.raw = text.splitlines()
        self.pos = 0

    @property
    def lineno(self) -> int:
        return self.pos

    def next(self, what: str) -> str:
        while self.pos < len(self.raw):
            self.pos += 1
            line = self.raw[self.pos - 1].strip()
            if line:
                return line
        raise FileFormatError(self.pos + 1, f"unexpected end of file, expected {what}")

    def peek(self) -> str | None:
        pos = self.pos
        while pos < len(self.raw):
            line = self.raw[pos].strip()
            if line:
                return line
            pos += 1
        return None


def _expect_keyword(lines: _Lines, keyword: str) -> list[str]:
    line = lines.next(f"'{keyword} ...'")
    parts = line.split()
    if parts[0] != keyword:
        raise FileFormatError(lines.lineno, f"expected '{keyword}', got {parts[0]!r}")
    return parts[1:]

def _floats(tokens: list[str], lineno: int, n: int) -> list[float]:
    if len(tokens) != n:
        raise FileFormatError(lineno, f"expected {n} values, got {len(tokens)}")
    try:
        return [float(t) for t in tokens]
    except ValueError as exc:
        raise FileFormatError(lineno, f"bad number: {exc}") from None


def parse_space_text(text: str) -> tuple[DistanceTable, AxiomProfile]:
    lines = _Lines(text)
    if lines.next("header") != "gms v1":
        raise FileFormatError(lines.lineno, "bad header, expected 'gms v1'")
    tokens = _expect_keyword(lines, "points")
    try:
        n = int(tokens[0])
    except (IndexError, ValueError):
        raise FileFormatError(lines.lineno, "expected 'points <n>'") from None
    if n < 1:
        raise FileFormatError(lines.lineno, "point count must be positive")
    tokens = _expect_keyword(lines, "kind")
    if not tokens or tokens[0] not in KIND_SPECS:
        raise FileFormatError(lines.lineno, f"unknown kind {' '.join(tokens)!r}")
    kind = tokens[0]
    kind_line = lines.lineno
    tokens = _expect_keyword(lines, "v")
    try:
        v = int(tokens[0])
    except (IndexError, ValueError):
        raise FileFormatError(lines.lineno, "expected 'v <int>'") from None

    line = lines.next("'s <real>' or 'theta inline'")
    parts = line.split()
    s: float | None = None
    inline_theta = False
    if parts[0] == "s":
        s = _floats(parts[1:], lines.lineno, 1)[0]
    elif parts[:2] == ["theta", "inline"]:
        inline_theta = True
    else:
        raise FileFormatError(lines.lineno, "expected 's <real>' or 'theta inline'")

    rows: list[list[float]] = []
    for _ in range(n):
        tokens = _expect_keyword(lines, "d")
        rows.append(_floats(tokens, lines.lineno, n))
        i = len(rows) - 1
        for j in range(i):
            if abs(rows[i][j] - rows[j][i]) > cmp_tol(rows[i][j], rows[j][i]):
                raise FileFormatError(
                    lines.lineno,
                    f"asymmetric table: d[{i}][{j}]={_fmt(rows[i][j])}"
                    f" but d[{j}][{i}]={_fmt(rows[j][i])}",
                )
    try:
        table = DistanceTable(rows)
    except ValueError as exc:
        raise FileFormatError(lines.lineno, str(exc)) from None

    theta = None
    if inline_theta:
        trows = []
        for _ in range(n):
            line = lines.next("theta row")
            trows.append(_floats(line.split(), lines.lineno, n))
        try:
            theta = ThetaTable(trows)
        except ValueError as exc:
            raise FileFormatError(lines.lineno, str(exc)) from None

    distinct = None
    if lines.peek() is not None:
        tokens = _expect_keyword(lines, "distinct")
        if tokens not in (["true"], ["false"]):
            raise FileFormatError(lines.lineno, "expected 'distinct true|false'")
        distinct = tokens == ["true"]
    if lines.peek() is not None:
        lines.next("end of file")
        raise FileFormatError(lines.lineno, "unexpected trailing content")

    try:
        profile = AxiomProfile.for_kind(kind, v=v, s=s, theta=theta, distinct_chain=distinct)
    except ValueError as exc:
        raise FileFormatError(kind_line, str(exc)) from None
    return table, profile


def parse_space_file(path) -> tuple[DistanceTable, AxiomProfile]:
    return parse_space_text(Path(path).read_text(encoding="utf-8"))


def format_space(table: DistanceTable, profile: AxiomProfile) -> str:
    out = ["gms v1", f"points {table.n}", f"kind {profile.kind}", f"v {profile.v}"]
    out.append("theta inline" if profile.uses_theta else f"s {_fmt(profile.s)}")
    for row in table.rows():
        out.append("d " + " ".join(_fmt(x) for x in row))
    if profile.uses_theta:
        for row in profile.theta.rows():
            out.append(" ".join(_fmt(x) for x in row))
    out.append(f"distinct {'true' if profile.distinct_chain else 'false'}")
    return "\n".join(out) + "\n"


def write_space_file(path, table: DistanceTable, profile: AxiomProfile) -> None:
    Path(path).write_text(format_space(table, profile), encoding="utf-8")


def parse_map_text(text: str) -> TableMap:
    lines = _Lines(text)
    if lines.next("header") != "gms-map v1":
        raise FileFormatError(lines.lineno, "bad header, expected 'gms-map v1'")
    tokens = _expect_keyword(lines, "points")
    try:
        n = int(tokens[0])
    except (IndexError, ValueError):
        raise FileFormatError(lines.lineno, "expected 'points <n>'") from None
    tokens = _expect_keyword(lines, "m")
    if len(tokens) != n:
        raise FileFormatError(lines.lineno, f"expected {n} image indices, got {len(tokens)}")
    try:
        images = tuple(int(t) for t in tokens)
    except ValueError as exc:
        raise FileFormatError(lines.lineno, f"bad index: {exc}") from None
    if any(not (0 <= i < n) for i in images):
        raise FileFormatError(lines.lineno, "image index out of range")
    return TableMap(images)


def parse_map_file(path) -> TableMap:
    return parse_map_text(Path(path).read_text(encoding="utf-8"))


def format_map(tmap: TableMap) -> str:
    return (
        f"gms-map v1\npoints {len(tmap.images)}\nm "
        + " ".join(str(i) for i in tmap.images)
        + "\n"
    )
