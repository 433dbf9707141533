"""Coordinate-wise graded vector spaces.

A grading assigns a positive rational weight q_i to each coordinate of R^n.
Scalars act by lam * x = (lam**q_i * x_i), which makes dilations, norms and
projections grade-aware.  Grades are kept as exact fractions so that grade
comparisons and degree arithmetic never suffer rounding; values are plain
float64 arrays.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Optional, Sequence

import numpy as np


class GradedError(Exception):
    """Base class for errors raised by the graded toolkit."""


class GradingMismatchError(GradedError):
    """Lengths or gradings of two objects do not line up."""


class GradedDomainError(GradedError):
    """An input is outside the mathematical domain of an operation."""


class IllPosedSystemError(GradedError):
    """A linear system needed by a projection is singular or malformed."""


class IllConditionedWarning(UserWarning):
    """Emitted when a projection system is numerically fragile."""


def _as_fraction(value) -> Fraction:
    # floats are accepted only when integral; "1/3" style strings are exact
    if isinstance(value, bool):
        raise TypeError("grades must be rational numbers, not bool")
    if isinstance(value, Rational):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, float):
        if value.is_integer():
            return Fraction(int(value))
        raise TypeError(
            "non-integral float grade %r is ambiguous; pass a string like '1/3'" % value
        )
    raise TypeError("cannot interpret %r as a rational grade" % (value,))


class GradingVector:
    """Immutable tuple of positive rational grades, one per coordinate."""

    __slots__ = ("_grades", "_floats", "_hash")

    def __init__(self, grades: Iterable):
        gs = tuple(_as_fraction(g) for g in grades)
        if len(gs) == 0:
            raise ValueError("a grading needs at least one coordinate")
        for g in gs:
            if g <= 0:
                raise GradedDomainError("grades must be positive, got %s" % g)
        self._grades = gs
        floats = np.array([float(g) for g in gs], dtype=float)
        floats.flags.writeable = False
        self._floats = floats
        self._hash = hash(gs)

    @property
    def grades(self) -> tuple:
        return self._grades

    @property
    def floats(self) -> np.ndarray:
        """Grades as a read-only float64 array (correctly rounded)."""
        return self._floats

    @property
    def distinct(self) -> tuple:
        """Distinct grades in ascending order."""
        return tuple(sorted(set(self._grades)))

    @property
    def max_grade(self) -> Fraction:
        return max(self._grades)

    @property
    def is_integer(self) -> bool:
        return all(g.denominator == 1 for g in self._grades)

    def as_text(self) -> str:
        return ",".join(str(g) for g in self._grades)

    def __len__(self) -> int:
        return len(self._grades)

    def __iter__(self):
        return iter(self._grades)

    def __getitem__(self, idx):
        return self._grades[idx]

    def __eq__(self, other) -> bool:
        if isinstance(other, GradingVector):
            return self._grades == other._grades
        return NotImplemented

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return "GradingVector(%s)" % (self.as_text(),)


def parse_grading(text: str) -> GradingVector:
    """Parse a comma-separated rational literal such as "2,4,6,10" or "1/2,1/3"."""
    if not isinstance(text, str) or not text.strip():
        raise ValueError("empty grading literal")
    return GradingVector(tok for tok in text.split(","))


def ones_grading(n: int) -> GradingVector:
    return GradingVector([1] * n)


class GradedVector:
    """A float64 vector together with its grading.  Values are read-only."""

    __slots__ = ("_values", "_grading")

    def __init__(self, values, grading: GradingVector):
        if not isinstance(grading, GradingVector):
            grading = GradingVector(grading)
        arr = np.array(values, dtype=float)
        if arr.ndim != 1:
            raise GradingMismatchError("graded vectors are one-dimensional")
        if arr.shape[0] != len(grading):
            raise GradingMismatchError(
                "value length %d does not match grading length %d"
                % (arr.shape[0], len(grading))
            )
        if not np.all(np.isfinite(arr)):
            raise GradedDomainError("graded vector entries must be finite")
        arr.flags.writeable = False
        self._values = arr
        self._grading = grading

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def grading(self) -> GradingVector:
        return self._grading

    def with_values(self, values) -> "GradedVector":
        return GradedVector(values, self._grading)

    def __len__(self) -> int:
        return len(self._grading)

    def __repr__(self) -> str:
        return "GradedVector(%s, q=%s)" % (
            np.array2string(self._values, precision=6), self._grading.as_text())


@dataclass(frozen=True)
class GradedMatrix:
    """Matrix viewed as a map from a column-graded space to a row-graded space."""

    entries: np.ndarray
    row_grading: GradingVector
    col_grading: GradingVector

    def __post_init__(self):
        arr = np.array(self.entries, dtype=float)
        if arr.ndim != 2:
            raise GradingMismatchError("matrix entries must be two-dimensional")
        if arr.shape != (len(self.row_grading), len(self.col_grading)):
            raise GradingMismatchError(
                "matrix shape %s does not match gradings (%d, %d)"
                % (arr.shape, len(self.row_grading), len(self.col_grading))
            )
        if not np.all(np.isfinite(arr)):
            raise GradedDomainError("matrix entries must be finite")
        arr.flags.writeable = False
        object.__setattr__(self, "entries", arr)


def require_same_grading(x: GradedVector, y: GradedVector) -> None:
    if x.grading != y.grading:
        raise GradingMismatchError("operands carry different gradings")


def scalar_action(lam: float, x: GradedVector) -> GradedVector:
    """Graded scalar action: (lam * x)_i = lam**q_i * x_i, lam > 0."""
    lam = float(lam)
    if not lam > 0:
        raise GradedDomainError("scalar action requires lam > 0, got %r" % lam)
    return x.with_values(lam ** x.grading.floats * x.values)


def graded_euclidean_norm(x: GradedVector) -> float:
    """sqrt(sum_i q_i * x_i**2)."""
    return float(np.sqrt(np.sum(x.grading.floats * x.values ** 2)))


def max_graded_norm(x: GradedVector) -> float:
    """max_i sqrt(q_i) * |x_i|."""
    return float(np.max(np.sqrt(x.grading.floats) * np.abs(x.values)))


class ExponentScheme(Enum):
    """How the per-grade exponents of the homogeneous norm are chosen.

    BY_MAX_GRADE uses r = max grade (integer grades only) and exponent 2r/g
    for the grade-g group, which makes the norm exactly 1-homogeneous under
    the dilation that scales grade-g coordinates by t**g.  BY_DISTINCT_COUNT
    uses r = number of distinct grades and exponents 2r, 2r-2, ... down the
    ascending list of groups.
    """

    BY_MAX_GRADE = "by_max_grade"
    BY_DISTINCT_COUNT = "by_distinct_count"


def parse_scheme(text: str) -> ExponentScheme:
    try:
        return ExponentScheme(text.strip().lower())
    except ValueError:
        raise ValueError(
            "unknown exponent scheme %r (use by_max_grade or by_distinct_count)" % text
        ) from None


def decompose(x: GradedVector):
    """Split x into its graded components by coordinate masking.

    Returns [(grade, component)] over the distinct grades in ascending order.
    The components have the same length and grading as x and sum to x exactly.
    """
    parts = []
    for g in x.grading.distinct:
        mask = np.array([gi == g for gi in x.grading.grades])
        parts.append((g, x.with_values(np.where(mask, x.values, 0.0))))
    return parts


def homogeneous_terms(x: GradedVector, scheme: ExponentScheme):
    """Per-group data (grade, euclidean norm of the group, exponent) plus the
    outer exponent E of the homogeneous norm (sum of terms)**(1/E)."""
    groups = decompose(x)
    norms = [float(np.linalg.norm(part.values)) for _, part in groups]
    if scheme is ExponentScheme.BY_MAX_GRADE:
        if not x.grading.is_integer:
            raise GradedDomainError(
                "the max-grade exponent scheme requires integer grades"
            )
        r = int(x.grading.max_grade)
        exps = [2.0 * r / float(g) for g, _ in groups]
    else:
        r = len(groups)
        exps = [float(2 * r - 2 * j) for j in range(r)]
    big_e = 2 * r
    return [(g, n, e) for (g, _), n, e in zip(groups, norms, exps)], big_e


def homogeneous_norm(x: GradedVector, scheme: ExponentScheme) -> float:
    terms, big_e = homogeneous_terms(x, scheme)
    s = sum(n ** e for _, n, e in terms)
    if s == 0.0:
        return 0.0
    return float(s ** (1.0 / big_e))


def _gauss_solve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Partial-pivoted Gaussian elimination in extended precision."""
    n = a.shape[0]
    m = np.array(a, dtype=np.longdouble)
    v = np.array(b, dtype=np.longdouble)
    for k in range(n - 1):
        p = k + int(np.argmax(np.abs(m[k:, k])))
        if m[p, k] == 0:
            raise IllPosedSystemError("projection system is singular")
        if p != k:
            m[[k, p]] = m[[p, k]]
            v[[k, p]] = v[[p, k]]
        for i in range(k + 1, n):
            f = m[i, k] / m[k, k]
            if f != 0:
                m[i, k + 1:] -= f * m[k, k + 1:]
                v[i] -= f * v[k]
            m[i, k] = 0
    if m[n - 1, n - 1] == 0:
        raise IllPosedSystemError("projection system is singular")
    out = np.zeros(n, dtype=np.longdouble)
    for i in range(n - 1, -1, -1):
        out[i] = (v[i] - np.dot(m[i, i + 1:], out[i + 1:])) / m[i, i]
    return out.astype(float)


def vandermonde_project(x: GradedVector, target_grade, lambdas: Sequence[float]) -> GradedVector:
    """Extract the grade-q component of x from dilates, without masking.

    Solves sum_j c_j * lam_j**g_k = [g_k == target] over the distinct grades
    g_k, then returns sum_j c_j * (lam_j * x).  Needs as many distinct
    positive lambdas as there are distinct grades.
    """
    target = _as_fraction(target_grade)
    distinct = x.grading.distinct
    m = len(distinct)
    lams = [float(l) for l in lambdas]
    if len(lams) != m:
        raise IllPosedSystemError(
            "need %d scaling factors (one per distinct grade), got %d" % (m, len(lams))
        )
    if any(not l > 0 for l in lams):
        raise IllPosedSystemError("scaling factors must be positive")
    if len(set(lams)) != m:
        raise IllPosedSystemError("scaling factors must be pairwise distinct")
    if target not in distinct:
        raise GradedDomainError(
            "target grade %s does not occur in the grading" % target
        )
    mat = np.empty((m, m), dtype=float)
    for k, g in enumerate(distinct):
        for j, lam in enumerate(lams):
            mat[k, j] = lam ** float(g)
    cond = np.linalg.cond(mat)
    if cond > 1e12:
        warnings.warn(
            "projection system condition %.3g exceeds 1e12; results may lose "
            "precision" % cond,
            IllConditionedWarning,
            stacklevel=2,
        )
    rhs = np.array([1.0 if g == target else 0.0 for g in distinct])
    coeff = _gauss_solve(mat, rhs)
    acc = np.zeros(len(x), dtype=float)
    for c, lam in zip(coeff, lams):
        acc += c * scalar_action(lam, x).values
    return x.with_values(acc)


def tensor_grading(q: GradingVector, r: GradingVector) -> GradingVector:
    """Grading of the tensor product, row-major: grade(i,j) = q_i + r_j."""
    return GradingVector([qi + rj for qi in q.grades for rj in r.grades])


def dual_grading(q: GradingVector) -> tuple:
    """Grades of the dual space, as a signed tuple (negatives are legal here)."""
    return tuple(-g for g in q.grades)


def entry_degrees(a: GradedMatrix):
    """Implied degree r_i - q_j for every nonzero entry, as [(i, j, degree)]."""
    rows, cols = np.nonzero(a.entries)
    return [
        (int(i), int(j), a.row_grading.grades[i] - a.col_grading.grades[j])
        for i, j in zip(rows, cols)
    ]


def infer_map_degree(a: GradedMatrix) -> Optional[Fraction]:
    """The unique degree d with r_i = q_j + d over nonzero entries.

    Returns Fraction(0) for the zero matrix and None when the nonzero entries
    imply conflicting degrees (see entry_degrees for the offending pairs).
    """
    degs = entry_degrees(a)
    if not degs:
        return Fraction(0)
    first = degs[0][2]
    for _, _, d in degs[1:]:
        if d != first:
            return None
    return first
