"""Embedded-pair Butcher tableaus and their text format.

The text format is line oriented::

    RKPAIR <label> s=<int> p=<int> phat=<int>
    c: <s entries>
    A[2]: <entries of row 2 below the diagonal>
    ...
    A[s]: <s-1 entries>
    b: <s entries>
    bhat: <s entries>

Entries are ``num/den`` rationals or decimal literals; ``#`` starts a
comment.  Rational tableaus round-trip bit exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .coeffs import (
    Coefficient,
    format_entry,
    is_exact,
    parse_entry,
    to_float,
    to_mpf,
)

# row-sum consistency tolerance for inexact tableaus (relative); exact
# tableaus must match exactly
_ROWSUM_RTOL = 1e-13


class TableauError(ValueError):
    pass


class TableauParseError(TableauError):
    pass


@dataclass(frozen=True)
class Tableau:
    """Explicit embedded pair (A, b, b_hat, c) with declared orders p(p_hat)."""

    label: str
    A: tuple[tuple[Coefficient, ...], ...]
    b: tuple[Coefficient, ...]
    b_hat: tuple[Coefficient, ...]
    c: tuple[Coefficient, ...]
    p: int
    p_hat: int

    @property
    def s(self) -> int:
        return len(self.b)

    @property
    def exact(self) -> bool:
        """True iff every coefficient is rational."""
        entries = [x for row in self.A for x in row]
        entries += list(self.b) + list(self.b_hat) + list(self.c)
        return all(is_exact(x) for x in entries)

    def weights(self, which: str) -> tuple[Coefficient, ...]:
        if which == "b":
            return self.b
        if which in ("b_hat", "bhat"):
            return self.b_hat
        raise ValueError(f"unknown weight vector {which!r}")

    def __str__(self):
        return f"{self.label} {self.p}({self.p_hat}), {self.s} stages"


def make_tableau(label, A, b, b_hat, c=None, *, p, p_hat) -> Tableau:
    """Validate and freeze a tableau.

    A may be given as full square rows or as the strictly lower part; c is
    recomputed from row sums when omitted and checked against them when given.
    """
    s = len(b)
    if s < 1:
        raise TableauError("tableau needs at least one stage")
    if len(b_hat) != s:
        raise TableauError(f"b_hat has {len(b_hat)} entries, expected {s}")
    if not (p >= p_hat >= 1):
        raise TableauError(f"orders must satisfy p >= p_hat >= 1, got {p}({p_hat})")

    rows = []
    for i, row in enumerate(A):
        row = list(row)
        if len(row) > s:
            raise TableauError(f"A row {i + 1} has {len(row)} entries")
        if len(row) > i:
            for x in row[i:]:
                if is_exact(x) and x != 0:
                    raise TableauError(
                        f"A[{i + 1}][{row.index(x) + 1}] above the diagonal is nonzero"
                    )
        full = row[:i] + [Fraction(0)] * (s - i)
        rows.append(tuple(full))
    while len(rows) < s:
        raise TableauError(f"A has {len(rows)} rows, expected {s}")

    sums = [_sum_entries(rows[i][:i]) for i in range(s)]
    if c is None:
        c = sums
    else:
        c = list(c)
        if len(c) != s:
            raise TableauError(f"c has {len(c)} entries, expected {s}")
        # published pairs are sometimes rational roundings of the true
        # coefficients, so a declared c may miss the row sum by ~1e-18;
        # anything beyond _ROWSUM_RTOL is a genuine inconsistency
        for i in range(s):
            ci, si = to_mpf(c[i]), to_mpf(sums[i])
            scale = max(1.0, abs(to_float(ci)))
            if abs(to_float(ci - si)) > _ROWSUM_RTOL * scale:
                raise TableauError(
                    f"row-sum violation at stage {i + 1}: c={c[i]} vs sum(A)={sums[i]}"
                )

    return Tableau(
        label=label,
        A=tuple(rows),
        b=tuple(b),
        b_hat=tuple(b_hat),
        c=tuple(c),
        p=p,
        p_hat=p_hat,
    )


def _sum_entries(xs):
    if all(is_exact(x) for x in xs):
        total: Coefficient = Fraction(0)
        for x in xs:
            total = total + x
        return total
    from .coeffs import workprec

    with workprec():
        total = to_mpf(0)
        for x in xs:
            total = total + to_mpf(x)
    return total


def serialize_tableau(t: Tableau) -> str:
    lines = [f"RKPAIR {t.label} s={t.s} p={t.p} phat={t.p_hat}"]
    lines.append("c: " + " ".join(format_entry(x) for x in t.c))
    for i in range(1, t.s):
        lines.append(f"A[{i + 1}]: " + " ".join(format_entry(x) for x in t.A[i][:i]))
    lines.append("b: " + " ".join(format_entry(x) for x in t.b))
    lines.append("bhat: " + " ".join(format_entry(x) for x in t.b_hat))
    return "\n".join(lines) + "\n"


def parse_tableau(text: str) -> Tableau:
    lines = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].strip()
        if stripped:
            lines.append((lineno, stripped))
    if not lines:
        raise TableauParseError("empty tableau text")

    lineno, header = lines[0]
    parts = header.split()
    if len(parts) != 5 or parts[0] != "RKPAIR":
        raise TableauParseError(f"line {lineno}: malformed header {header!r}")
    label = parts[1]
    try:
        fields = dict(kv.split("=", 1) for kv in parts[2:])
        s = int(fields["s"])
        p = int(fields["p"])
        p_hat = int(fields["phat"])
    except (ValueError, KeyError) as exc:
        raise TableauParseError(f"line {lineno}: bad header field ({exc})") from exc

    expected = ["c"] + [f"A[{i}]" for i in range(2, s + 1)] + ["b", "bhat"]
    if len(lines) - 1 != len(expected):
        raise TableauParseError(
            f"expected {len(expected)} data lines for s={s}, found {len(lines) - 1}"
        )

    data = {}
    for (lineno, line), want in zip(lines[1:], expected):
        key, _, rest = line.partition(":")
        key = key.strip()
        if key != want:
            raise TableauParseError(f"line {lineno}: expected {want!r}, found {key!r}")
        entries = []
        for tok in rest.split():
            try:
                entries.append(parse_entry(tok))
            except (ValueError, ZeroDivisionError) as exc:
                raise TableauParseError(
                    f"line {lineno}: bad entry {tok!r} in {key} ({exc})"
                ) from exc
        data[key] = entries

    for key, want_len in [("c", s), ("b", s), ("bhat", s)] + [
        (f"A[{i}]", i - 1) for i in range(2, s + 1)
    ]:
        if len(data[key]) != want_len:
            raise TableauParseError(
                f"{key} has {len(data[key])} entries, expected {want_len}"
            )

    A = [[]] + [data[f"A[{i}]"] for i in range(2, s + 1)]
    try:
        return make_tableau(
            label, A, data["b"], data["bhat"], c=data["c"], p=p, p_hat=p_hat
        )
    except TableauError as exc:
        raise TableauParseError(str(exc)) from exc


def float_arrays(t: Tableau):
    """Tableau coefficients as float lists (A as full rows)."""
    A = [[to_float(x) for x in row] for row in t.A]
    return (
        A,
        [to_float(x) for x in t.b],
        [to_float(x) for x in t.b_hat],
        [to_float(x) for x in t.c],
    )
