"""Dense matrices over the min-plus semiring.

The semiring extends the reals with +inf. Addition is min, multiplication
is ordinary +, so +inf is the additive identity (it never wins a min) and
absorbs products, while 0 is the multiplicative identity. NaN and -inf are
rejected at construction: without -inf the sum of any two entries is well
defined, so no inf - inf indeterminacy can ever arise downstream.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError, NegativeCycleError, ParseError, ShapeError

INF = float("inf")

CSV_FLOAT_FORMAT = ".17g"


class TropicalMatrix:
    """Immutable dense n x m matrix with entries in R or +inf.

    Wraps a read-only float64 array. Use ``.data`` for raw access; all
    semiring operations live in module-level functions.
    """

    __slots__ = ("_data",)

    def __init__(self, entries) -> None:
        data = np.array(entries, dtype=float)
        if data.ndim != 2:
            raise ShapeError(f"matrix entries must form a 2-d table, got {data.ndim}-d")
        if np.isnan(data).any():
            raise DomainError("NaN entries are not representable")
        if np.isneginf(data).any():
            raise DomainError("-inf entries are not representable")
        data.setflags(write=False)
        self._data = data

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def rows(self) -> int:
        return self._data.shape[0]

    @property
    def cols(self) -> int:
        return self._data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self._data.shape

    def is_square(self) -> bool:
        return self.rows == self.cols

    def is_symmetric(self) -> bool:
        """Exact symmetry check; inf entries match only inf."""
        return self.is_square() and bool(np.array_equal(self._data, self._data.T))

    def transpose(self) -> "TropicalMatrix":
        return TropicalMatrix(self._data.T)

    def __repr__(self) -> str:  # pragma: no cover
        return f"TropicalMatrix({self.rows}x{self.cols})"


def _data_of(m) -> np.ndarray:
    """Validated float array behind a TropicalMatrix or array-like."""
    if isinstance(m, TropicalMatrix):
        return m.data
    return TropicalMatrix(m).data


def identity(n: int) -> TropicalMatrix:
    """Min-plus identity: 0 on the diagonal, +inf elsewhere."""
    data = np.full((n, n), INF)
    np.fill_diagonal(data, 0.0)
    return TropicalMatrix(data)


def _mp(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Raw min-plus product on float arrays; shapes must already agree."""
    if a.shape[1] == 0:
        # empty k-sum: the min over nothing is the additive identity
        return np.full((a.shape[0], b.shape[1]), INF)
    return np.min(a[:, :, None] + b[None, :, :], axis=1)


def mp_multiply(A: TropicalMatrix, B: TropicalMatrix) -> TropicalMatrix:
    """Min-plus matrix product: entry (i,j) = min_k(a_ik + b_kj)."""
    a, b = _data_of(A), _data_of(B)
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"inner dimensions disagree: {a.shape} x {b.shape}")
    return TropicalMatrix(_mp(a, b))


def mp_power(A: TropicalMatrix, k: int) -> TropicalMatrix:
    """k-fold min-plus product of a square matrix with itself; k=0 gives I."""
    a = _data_of(A)
    if a.shape[0] != a.shape[1]:
        raise ShapeError(f"power needs a square matrix, got {a.shape}")
    if k < 0:
        raise DomainError("negative powers are not defined")
    out = identity(a.shape[0]).data
    for _ in range(k):
        out = _mp(out, a)
    return TropicalMatrix(out)


def kleene_star(A: TropicalMatrix, max_power: int | None = None) -> TropicalMatrix:
    """Closure I min A min A^2 min ... of a square matrix.

    With ``max_power=None`` the full fixed point is computed by the
    Floyd-Warshall recurrence (identical limit, O(n^3)); for inputs free of
    negative cycles this is the all-pairs shortest-path matrix and the
    series stabilizes at power n-1. A strictly negative diagonal entry
    after closure means a negative-weight cycle exists and the series
    diverges, reported as NegativeCycleError.

    With ``max_power=p`` the truncated partial sum through A^p is returned
    instead, with no convergence claim (used to test stabilization).
    """
    a = _data_of(A)
    n = a.shape[0]
    if a.shape[0] != a.shape[1]:
        raise ShapeError(f"closure needs a square matrix, got {a.shape}")
    if max_power is not None:
        if max_power < 0:
            raise DomainError("max_power must be >= 0")
        out = identity(n).data
        power = identity(n).data
        for _ in range(max_power):
            power = _mp(power, a)
            out = np.minimum(out, power)
        return TropicalMatrix(out)
    d = np.minimum(a, identity(n).data)
    for k in range(n):
        d = np.minimum(d, d[:, k][:, None] + d[k, :][None, :])
    if (np.diag(d) < 0).any():
        raise NegativeCycleError("matrix contains a negative-weight cycle; the closure diverges")
    return TropicalMatrix(d)


def _entries_close(a: np.ndarray, b: np.ndarray, tol: float) -> bool:
    # inf must match inf exactly; finite entries compare within tol
    a_inf = np.isinf(a)
    if not np.array_equal(a_inf, np.isinf(b)):
        return False
    finite = ~a_inf
    return bool(np.all(np.abs(a[finite] - b[finite]) <= tol))


def tropical_allclose(A: TropicalMatrix, B: TropicalMatrix, tol: float = 1e-9) -> bool:
    """Entrywise comparison where inf matches only inf; tol=0 is exact."""
    a, b = _data_of(A), _data_of(B)
    if a.shape != b.shape:
        return False
    return _entries_close(a, b, tol)


def is_idempotent(A: TropicalMatrix, tol: float = 1e-9) -> bool:
    """True iff A (x) A equals A entrywise within tol (inf matches only inf)."""
    a = _data_of(A)
    if a.shape[0] != a.shape[1]:
        raise ShapeError(f"idempotency needs a square matrix, got {a.shape}")
    return _entries_close(_mp(a, a), a, tol)


def frobenius_distance(A: TropicalMatrix, B: TropicalMatrix) -> float:
    """Square root of the summed squared entrywise differences.

    Defined only for finite matrices; any inf entry raises DomainError.
    """
    a, b = _data_of(A), _data_of(B)
    if a.shape != b.shape:
        raise ShapeError(f"shape mismatch: {a.shape} vs {b.shape}")
    if np.isinf(a).any() or np.isinf(b).any():
        raise DomainError("Frobenius distance is only defined for finite matrices")
    return float(np.sqrt(np.sum((a - b) ** 2)))


def read_matrix_csv(text: str) -> TropicalMatrix:
    """Parse the matrix CSV format: comma-separated decimals, `inf` for +inf.

    Header-free; blank lines are skipped; rows must all have the same
    length. NaN and -inf tokens are outside the format.
    """
    rows: list[list[float]] = []
    width = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped:
            continue
        values = []
        for token in stripped.split(","):
            token = token.strip()
            try:
                value = float(token)
            except ValueError:
                raise ParseError(f"line {lineno}: cannot parse entry {token!r}") from None
            if np.isnan(value) or value == -INF:
                raise ParseError(f"line {lineno}: entry {token!r} is outside the format")
            values.append(value)
        if width is None:
            width = len(values)
        elif len(values) != width:
            raise ParseError(f"line {lineno}: expected {width} entries, got {len(values)}")
        rows.append(values)
    if not rows:
        return TropicalMatrix(np.empty((0, 0)))
    return TropicalMatrix(np.array(rows))


def write_matrix_csv(M: TropicalMatrix) -> str:
    """Render to the matrix CSV format; inverse of read_matrix_csv."""
    data = _data_of(M)
    lines = [",".join(format(v, CSV_FLOAT_FORMAT) for v in row) for row in data]
    return "\n".join(lines) + ("\n" if lines else "")
