"""Reading and writing the plain-text litmus wire format.

A file looks like::

    # optional comment
    test mutex
    locations 1
    values 2
    thread 0:
      0: axb loc=0 cmp=1 jump=0 exch=1
      1: axb loc=0 cmp=0 jump=2 exch=0
    thread 1:
      0: axb loc=0 cmp=1 jump=0 exch=1
      1: axb loc=0 cmp=0 jump=2 exch=0

`exch=none` encodes an instruction without an exchange write.  `#`
starts a comment anywhere; blank lines are ignored.  Serialization is
canonical (fixed field order, fixed two-space indent, no trailing
whitespace), so two tests are structurally equal exactly when their
serializations are byte-equal.
"""

from __future__ import annotations

from .axb import AxbInstruction, LitmusTest


class LitmusParseError(ValueError):
    """Parse failure with 1-based line/column position."""

    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


def _column_of(raw_line: str, token: str) -> int:
    pos = raw_line.find(token)
    return pos + 1 if pos >= 0 else 1


def _parse_nat(token: str, what: str, lineno: int, raw: str) -> int:
    try:
        value = int(token)
    except ValueError:
        raise LitmusParseError(
            f"expected a number for {what}, got {token!r}", lineno, _column_of(raw, token)
        ) from None
    if value < 0:
        raise LitmusParseError(f"{what} must be non-negative", lineno, _column_of(raw, token))
    return value


_FIELD_ORDER = ("loc", "cmp", "jump", "exch")


def parse_litmus(text: str) -> LitmusTest:
    """Parse one litmus test, rejecting malformed and out-of-range input."""
    name: str | None = None
    num_locations: int | None = None
    value_domain: int | None = None
    threads: list[list[AxbInstruction]] = []
    thread_lines: list[int] = []
    # Line number per instruction so jump targets can be checked once the
    # owning thread's length is known.
    instr_lines: list[list[int]] = []

    phase = "test"
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        words = line.split()

        if phase == "test":
            if words[0] != "test" or len(words) != 2:
                raise LitmusParseError("expected 'test NAME'", lineno, _column_of(raw, words[0]))
            name = words[1]
            phase = "locations"
        elif phase == "locations":
            if words[0] != "locations" or len(words) != 2:
                raise LitmusParseError("expected 'locations N'", lineno, _column_of(raw, words[0]))
            num_locations = _parse_nat(words[1], "locations", lineno, raw)
            phase = "values"
        elif phase == "values":
            if words[0] != "values" or len(words) != 2:
                raise LitmusParseError("expected 'values N'", lineno, _column_of(raw, words[0]))
            value_domain = _parse_nat(words[1], "values", lineno, raw)
            phase = "threads"
        elif words[0] == "thread":
            if len(words) != 2 or not words[1].endswith(":"):
                raise LitmusParseError("expected 'thread N:'", lineno, _column_of(raw, words[0]))
            tid = _parse_nat(words[1][:-1], "thread id", lineno, raw)
            if tid != len(threads):
                raise LitmusParseError(
                    f"thread ids must be sequential, expected {len(threads)}",
                    lineno,
                    _column_of(raw, words[1]),
                )
            threads.append([])
            thread_lines.append(lineno)
            instr_lines.append([])
        else:
            if not threads:
                raise LitmusParseError(
                    "instruction outside a thread block", lineno, _column_of(raw, words[0])
                )
            if len(words) != 6 or not words[0].endswith(":") or words[1] != "axb":
                raise LitmusParseError(
                    "expected 'IDX: axb loc=L cmp=V jump=J exch=E'",
                    lineno,
                    _column_of(raw, words[0]),
                )
            idx = _parse_nat(words[0][:-1], "instruction index", lineno, raw)
            if idx != len(threads[-1]):
                raise LitmusParseError(
                    f"instruction indices must be sequential, expected {len(threads[-1])}",
                    lineno,
                    _column_of(raw, words[0]),
                )
            fields: dict[str, str] = {}
            for word in words[2:]:
                key, eq, value = word.partition("=")
                if not eq or key not in _FIELD_ORDER:
                    raise LitmusParseError(
                        f"unknown field {word!r}", lineno, _column_of(raw, word)
                    )
                if key in fields:
                    raise LitmusParseError(
                        f"duplicate field {key!r}", lineno, _column_of(raw, word)
                    )
                fields[key] = value
            for key in _FIELD_ORDER:
                if key not in fields:
                    raise LitmusParseError(f"missing field {key!r}", lineno)

            loc = _parse_nat(fields["loc"], "loc", lineno, raw)
            cmp = _parse_nat(fields["cmp"], "cmp", lineno, raw)
            jump = _parse_nat(fields["jump"], "jump", lineno, raw)
            exch = (
                None
                if fields["exch"] == "none"
                else _parse_nat(fields["exch"], "exch", lineno, raw)
            )
            assert num_locations is not None and value_domain is not None
            if loc >= num_locations:
                raise LitmusParseError(
                    f"location {loc} out of range (locations {num_locations})",
                    lineno,
                    _column_of(raw, f"loc={fields['loc']}"),
                )
            if cmp >= value_domain:
                raise LitmusParseError(
                    f"compare value {cmp} out of range (values {value_domain})",
                    lineno,
                    _column_of(raw, f"cmp={fields['cmp']}"),
                )
            if exch is not None and exch >= value_domain:
                raise LitmusParseError(
                    f"exchange value {exch} out of range (values {value_domain})",
                    lineno,
                    _column_of(raw, f"exch={fields['exch']}"),
                )
            threads[-1].append(AxbInstruction(loc, cmp, jump, exch))
            instr_lines[-1].append(lineno)

    if name is None or num_locations is None or value_domain is None:
        raise LitmusParseError("incomplete test: missing header lines", 1)
    if not threads:
        raise LitmusParseError("test declares no threads", 1)
    for tid, program in enumerate(threads):
        if not program:
            raise LitmusParseError(f"thread {tid} has no instructions", thread_lines[tid])
        for idx, ins in enumerate(program):
            # jump == program length is the branch to "done"; beyond that is an error.
            if ins.jump > len(program):
                raise LitmusParseError(
                    f"jump target {ins.jump} out of range (thread {tid} has "
                    f"{len(program)} instructions)",
                    instr_lines[tid][idx],
                )
    return LitmusTest(name, num_locations, value_domain, tuple(tuple(p) for p in threads))


def _format_instruction(idx: int, ins: AxbInstruction) -> str:
    exch = "none" if ins.exch is None else str(ins.exch)
    return f"  {idx}: axb loc={ins.loc} cmp={ins.cmp} jump={ins.jump} exch={exch}"


def serialize_body(
    threads: tuple[tuple[AxbInstruction, ...], ...], num_locations: int, value_domain: int
) -> str:
    """Canonical text of a test minus its name line (used for dedup keys)."""
    lines = [f"locations {num_locations}", f"values {value_domain}"]
    for tid, program in enumerate(threads):
        lines.append(f"thread {tid}:")
        lines.extend(_format_instruction(idx, ins) for idx, ins in enumerate(program))
    return "\n".join(lines) + "\n"


def serialize_litmus(test: LitmusTest) -> str:
    """Canonical full text; `parse_litmus(serialize_litmus(t))` equals `t`."""
    return f"test {test.name}\n" + serialize_body(
        test.threads, test.num_locations, test.value_domain
    )
