"""Alternatives, comparison matrices, edits, and the row-wise partial order.

A comparison matrix stores one signed value per compared (unordered) pair of
alternatives. Values are kept once, in canonical orientation (lower index
first); querying the opposite orientation negates, so antisymmetry holds by
construction and cannot drift. Matrices are immutable: edits return new
values.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Mapping

import numpy as np

from .errors import EditError, InputError, MismatchError, ParameterError, SupportError
from .rootlaws import RootLaw

__all__ = [
    "AlternativeSet",
    "ComparisonMatrix",
    "ComparisonEdit",
    "EditKind",
    "OrderRelation",
    "read_comparisons_csv",
    "write_comparisons_csv",
    "read_scores_csv",
    "write_scores_csv",
]


@dataclass(frozen=True)
class AlternativeSet:
    """Ordered collection of unique alternative ids with a dense index."""

    ids: tuple[str, ...]

    def __post_init__(self):
        if len(self.ids) < 1:
            raise ParameterError("an alternative set needs at least one id")
        if len(set(self.ids)) != len(self.ids):
            dupes = sorted({i for i in self.ids if list(self.ids).count(i) > 1})
            raise ParameterError(f"duplicate alternative ids: {dupes[:5]}")
        object.__setattr__(self, "ids", tuple(str(i) for i in self.ids))

    @classmethod
    def from_ids(cls, ids: Iterable[str]) -> "AlternativeSet":
        return cls(tuple(str(i) for i in ids))

    @cached_property
    def _index(self) -> dict[str, int]:
        return {a: i for i, a in enumerate(self.ids)}

    def index_of(self, a: str) -> int:
        try:
            return self._index[a]
        except KeyError:
            raise MismatchError(f"unknown alternative id {a!r}") from None

    def __len__(self) -> int:
        return len(self.ids)

    def __iter__(self) -> Iterator[str]:
        return iter(self.ids)

    def __contains__(self, a) -> bool:
        return a in self._index


class EditKind(enum.Enum):
    ADD = "add"
    REMOVE = "remove"
    CHANGE = "change"


@dataclass(frozen=True)
class ComparisonEdit:
    """One elementary modification: add, remove, or change a single pair.

    ``pair`` is (a, b) by id; ``new_value`` is the value of the comparison
    oriented from a to b (required for ADD and CHANGE, forbidden for REMOVE).
    """

    kind: EditKind
    pair: tuple[str, str]
    new_value: float | None = None

    def __post_init__(self):
        if self.kind == EditKind.REMOVE:
            if self.new_value is not None:
                raise EditError("remove edits carry no value")
        elif self.new_value is None:
            raise EditError(f"{self.kind.value} edits require a value")


class OrderRelation(enum.Enum):
    """Classification of two matrices under the row-a partial order.

    STRICTLY_LESS means every comparison involving a weakly increased, at
    least one strictly, and nothing else moved. LESS_OR_EQUAL is the
    non-strict variant excluding equality; with exact values it can only be
    reported when a weak increase exists without a strict one, which
    collapses to EQUAL, so it is kept for completeness of the two-tier
    relation.
    """

    EQUAL = "equal"
    STRICTLY_LESS = "strictly_less"
    LESS_OR_EQUAL = "less_or_equal"
    INCOMPARABLE = "incomparable"


class ComparisonMatrix:
    """Antisymmetric sparse map from unordered pairs to comparison values.

    ``law`` is optional; when attached, every value must lie in the law's
    support closure and edits are validated against it as well.
    """

    def __init__(self, alternatives: AlternativeSet,
                 entries: Mapping[tuple[str, str], float] | Iterable[tuple[str, str, float]] = (),
                 law: RootLaw | None = None):
        self.alternatives = alternatives
        self.law = law
        triples: Iterable[tuple[str, str, float]]
        if isinstance(entries, Mapping):
            triples = ((a, b, v) for (a, b), v in entries.items())
        else:
            triples = entries
        store: dict[tuple[int, int], float] = {}
        for a, b, value in triples:
            key, v = self._canonical(a, b, float(value))
            if key in store:
                raise InputError(f"duplicate comparison for pair ({a!r}, {b!r})")
            self._check_support(v, a, b)
            store[key] = v
        self._entries = dict(sorted(store.items()))

    def _canonical(self, a: str, b: str, value: float):
        ia = self.alternatives.index_of(a)
        ib = self.alternatives.index_of(b)
        if ia == ib:
            raise InputError(f"self comparison for {a!r}")
        if not np.isfinite(value):
            raise InputError(f"non-finite comparison value for pair ({a!r}, {b!r})")
        return ((ia, ib), value) if ia < ib else ((ib, ia), -value)

    def _check_support(self, value: float, a: str, b: str):
        if self.law is not None and not (self.law.contains(value) and self.law.contains(-value)):
            raise SupportError(
                f"value {value!r} for pair ({a!r}, {b!r}) outside the "
                f"support of model {self.law.spec_string!r}")

    # ------------------------------------------------------------------ queries

    @property
    def num_pairs(self) -> int:
        return len(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def pair_keys(self) -> frozenset[tuple[int, int]]:
        return frozenset(self._entries)

    def has_pair(self, a: str, b: str) -> bool:
        ia, ib = self.alternatives.index_of(a), self.alternatives.index_of(b)
        return (min(ia, ib), max(ia, ib)) in self._entries

    def value(self, a: str, b: str) -> float:
        """Comparison value oriented from a to b; negates the stored one if needed."""
        ia, ib = self.alternatives.index_of(a), self.alternatives.index_of(b)
        if ia == ib:
            raise MismatchError(f"no self comparison for {a!r}")
        key = (min(ia, ib), max(ia, ib))
        try:
            stored = self._entries[key]
        except KeyError:
            raise MismatchError(f"pair ({a!r}, {b!r}) not compared") from None
        return stored if ia < ib else -stored

    def neighbors(self, a: str) -> list[tuple[str, float]]:
        """All partners of a with values oriented from a, in index order."""
        ia = self.alternatives.index_of(a)
        ids = self.alternatives.ids
        out = []
        for (i, j), v in self._entries.items():
            if i == ia:
                out.append((ids[j], v))
            elif j == ia:
                out.append((ids[i], -v))
        return out

    def degree(self, a: str) -> int:
        ia = self.alternatives.index_of(a)
        return sum(1 for (i, j) in self._entries if ia in (i, j))

    def iter_entries(self) -> Iterator[tuple[str, str, float]]:
        ids = self.alternatives.ids
        for (i, j), v in self._entries.items():
            yield ids[i], ids[j], v

    @cached_property
    def index_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(i, j, r) arrays in canonical orientation, ordered by (i, j)."""
        if not self._entries:
            empty = np.empty(0)
            return empty.astype(int), empty.astype(int), empty
        keys = np.array(list(self._entries), dtype=int)
        vals = np.array(list(self._entries.values()), dtype=float)
        return keys[:, 0], keys[:, 1], vals

    @cached_property
    def degrees(self) -> np.ndarray:
        deg = np.zeros(len(self.alternatives), dtype=int)
        i, j, _ = self.index_arrays
        np.add.at(deg, i, 1)
        np.add.at(deg, j, 1)
        return deg

    def __eq__(self, other) -> bool:
        return (isinstance(other, ComparisonMatrix)
                and self.alternatives == other.alternatives
                and self._entries == other._entries)

    def __hash__(self):
        return hash((self.alternatives, tuple(self._entries.items())))

    def __repr__(self):
        return (f"ComparisonMatrix(A={len(self.alternatives)}, "
                f"pairs={self.num_pairs})")

    # ------------------------------------------------------------------ edits

    def with_entries(self, entries, law=None) -> "ComparisonMatrix":
        return ComparisonMatrix(self.alternatives, entries, law=self.law if law is None else law)

    def apply_edit(self, edit: ComparisonEdit) -> "ComparisonMatrix":
        """Return a new matrix one elementary modification away."""
        a, b = edit.pair
        key, v = self._canonical(a, b, 0.0 if edit.new_value is None else float(edit.new_value))
        present = key in self._entries
        if edit.kind == EditKind.ADD:
            if present:
                raise EditError(f"pair ({a!r}, {b!r}) already compared")
            self._check_support(v, a, b)
        elif edit.kind == EditKind.REMOVE:
            if not present:
                raise EditError(f"pair ({a!r}, {b!r}) not compared")
        else:
            if not present:
                raise EditError(f"pair ({a!r}, {b!r}) not compared")
            if self._entries[key] == v:
                raise EditError(f"change edit must alter the value of ({a!r}, {b!r})")
            self._check_support(v, a, b)
        entries = dict(self._entries)
        if edit.kind == EditKind.REMOVE:
            del entries[key]
        else:
            entries[key] = v
        out = ComparisonMatrix.__new__(ComparisonMatrix)
        out.alternatives = self.alternatives
        out.law = self.law
        out._entries = dict(sorted(entries.items()))
        return out

    def edit_distance(self, other: "ComparisonMatrix") -> int:
        """Number of elementary modifications separating the two matrices:
        pairs present on one side only, plus shared pairs whose values differ."""
        if self.alternatives != other.alternatives:
            raise MismatchError("edit distance requires a common alternative set")
        mine, theirs = self._entries, other._entries
        domain = sum(1 for k in mine if k not in theirs)
        domain += sum(1 for k in theirs if k not in mine)
        changed = sum(1 for k, v in mine.items() if k in theirs and theirs[k] != v)
        return domain + changed

    # ------------------------------------------------------------------ ordering

    def leq_at(self, other: "ComparisonMatrix", a: str) -> OrderRelation:
        """Classify self vs other under the partial order at alternative a:
        comparisons involving a may only weakly increase, all others must be
        untouched. Defined only for matrices over the same comparison set."""
        if self.alternatives != other.alternatives:
            raise MismatchError("partial order requires a common alternative set")
        if self.pair_keys() != other.pair_keys():
            raise MismatchError("partial order is only defined for matrices "
                                "over the same comparison set")
        ia = self.alternatives.index_of(a)
        any_strict = False
        for key, v in self._entries.items():
            w = other._entries[key]
            if ia not in key:
                if v != w:
                    return OrderRelation.INCOMPARABLE
                continue
            # orient from a
            dv = (w - v) if key[0] == ia else (v - w)
            if dv < 0:
                return OrderRelation.INCOMPARABLE
            if dv > 0:
                any_strict = True
        return OrderRelation.STRICTLY_LESS if any_strict else OrderRelation.EQUAL


# ---------------------------------------------------------------------- CSV

_COMPARISON_HEADER = ["a", "b", "r"]
_SCORE_HEADER = ["a", "theta"]


def read_comparisons_csv(path, law: RootLaw | None = None) -> ComparisonMatrix:
    """Read a ``a,b,r`` CSV into a matrix over the sorted set of ids seen.

    Errors carry 1-based row numbers (the header is row 1). Duplicate
    unordered pairs are an error, not an aggregation.
    """
    rows: list[tuple[int, str, str, float]] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != _COMPARISON_HEADER:
            raise InputError(f"expected header {','.join(_COMPARISON_HEADER)!r}, "
                             f"got {header!r}", row=1)
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 3:
                raise InputError(f"expected 3 fields, got {len(row)}", row=lineno)
            a, b, raw = row[0].strip(), row[1].strip(), row[2].strip()
            if not a or not b:
                raise InputError("empty alternative id", row=lineno)
            if a == b:
                raise InputError(f"self comparison for {a!r}", row=lineno)
            try:
                value = float(raw)
            except ValueError:
                raise InputError(f"bad comparison value {raw!r}", row=lineno) from None
            rows.append((lineno, a, b, value))
    if not rows:
        raise InputError("no comparison rows")
    alts = AlternativeSet.from_ids(sorted({a for _, a, b, _ in rows} | {b for _, a, b, _ in rows}))
    seen: dict[tuple[int, int], int] = {}
    for lineno, a, b, value in rows:
        ia, ib = alts.index_of(a), alts.index_of(b)
        key = (min(ia, ib), max(ia, ib))
        if key in seen:
            raise InputError(f"pair ({a!r}, {b!r}) duplicates row {seen[key]}", row=lineno)
        seen[key] = lineno
        if law is not None and not law.contains(value):
            raise SupportError(f"value {value!r} outside the support of model "
                               f"{law.spec_string!r}", row=lineno)
    return ComparisonMatrix(alts, [(a, b, v) for _, a, b, v in rows], law=law)


def write_comparisons_csv(matrix: ComparisonMatrix, path) -> None:
    """Write canonical-orientation rows sorted by (a, b) ids."""
    rows = sorted(matrix.iter_entries(), key=lambda t: (t[0], t[1]))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(_COMPARISON_HEADER)
        for a, b, v in rows:
            writer.writerow([a, b, repr(v)])


def read_scores_csv(path):
    """Read an ``a,theta`` CSV; returns (AlternativeSet, values ndarray)."""
    pairs: list[tuple[str, float]] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != _SCORE_HEADER:
            raise InputError(f"expected header {','.join(_SCORE_HEADER)!r}, got {header!r}", row=1)
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 2:
                raise InputError(f"expected 2 fields, got {len(row)}", row=lineno)
            a, raw = row[0].strip(), row[1].strip()
            if not a:
                raise InputError("empty alternative id", row=lineno)
            try:
                pairs.append((a, float(raw)))
            except ValueError:
                raise InputError(f"bad score value {raw!r}", row=lineno) from None
    if not pairs:
        raise InputError("no score rows")
    ids = [a for a, _ in pairs]
    if len(set(ids)) != len(ids):
        raise InputError("duplicate alternative ids in score file")
    alts = AlternativeSet.from_ids(ids)
    return alts, np.array([v for _, v in pairs], dtype=float)


def write_scores_csv(alternatives: AlternativeSet, values, path) -> None:
    """Write ``a,theta`` rows sorted by id."""
    values = np.asarray(values, dtype=float)
    order = sorted(range(len(alternatives)), key=lambda i: alternatives.ids[i])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(_SCORE_HEADER)
        for i in order:
            writer.writerow([alternatives.ids[i], repr(float(values[i]))])
