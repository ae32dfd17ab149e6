"""
Dense linear algebra over GF(2).

Matrices are stored row-major and bit-packed: each row is ``ceil(cols / 64)``
uint64 words, column ``j`` living in bit ``j % 64`` of word ``j // 64``.
Padding bits past the last column are always zero. Row XOR, the elimination
kernel, is a whole-word XOR over the packed rows.
"""
import logging
from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from .exceptions import (
    DimensionMismatch,
    DuplicateIndex,
    IndexOutOfRange,
    NotASubspace,
    SingularMatrix,
    ValidationError,
)

logger = logging.getLogger(__name__)

WORD_BITS = 64
_ONE = np.uint64(1)
_ALL_ONES = np.uint64(0xFFFFFFFFFFFFFFFF)
_UNPACK_CHUNK = 1024


def _n_words(cols: int) -> int:
    return (cols + WORD_BITS - 1) // WORD_BITS


def _tail_mask(cols: int) -> np.uint64:
    tail = cols % WORD_BITS
    if tail == 0:
        return _ALL_ONES
    return np.uint64((1 << tail) - 1)


def _bit(col: int) -> np.uint64:
    return _ONE << np.uint64(col % WORD_BITS)


def _pack(dense: np.ndarray) -> np.ndarray:
    rows, cols = dense.shape
    words = _n_words(cols)
    if rows == 0 or words == 0:
        return np.zeros((rows, words), dtype=np.uint64)
    padded = np.zeros((rows, words * WORD_BITS), dtype=np.uint8)
    padded[:, :cols] = dense
    packed = np.packbits(padded, axis=1, bitorder="little")
    return packed.view("<u8").astype(np.uint64)


def _unpack(data: np.ndarray, cols: int) -> np.ndarray:
    rows = data.shape[0]
    if rows == 0 or cols == 0:
        return np.zeros((rows, cols), dtype=np.uint8)
    as_bytes = np.ascontiguousarray(data.astype("<u8")).view(np.uint8)
    return np.unpackbits(as_bytes, axis=1, count=cols, bitorder="little")


def _gather_columns(data: np.ndarray, col_idx: np.ndarray) -> np.ndarray:
    rows = data.shape[0]
    if rows == 0 or col_idx.size == 0:
        return np.zeros((rows, _n_words(col_idx.size)), dtype=np.uint64)
    words = col_idx // WORD_BITS
    shifts = (col_idx % WORD_BITS).astype(np.uint64)
    bits = ((data[:, words] >> shifts) & _ONE).astype(np.uint8)
    return _pack(bits)


def _eliminate(a: np.ndarray, cols: int, reduced: bool) -> List[int]:
    """
    Row-reduce the packed words ``a`` in place over the first ``cols`` columns.

    :param a: Packed matrix words, modified in place
    :param cols: Number of leading columns to pivot on
    :param reduced: Clear pivot columns above the pivot too (RREF), not only below
    :return: The pivot columns, ascending
    """
    rows = a.shape[0]
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        w = c // WORD_BITS
        bit = _bit(c)
        below = np.flatnonzero(a[r:, w] & bit)
        if below.size == 0:
            continue
        p = r + int(below[0])
        if p != r:
            a[[r, p]] = a[[p, r]]
        pivot_row = a[r, w:].copy()
        if reduced:
            hits = np.flatnonzero(a[:, w] & bit)
            hits = hits[hits != r]
        else:
            hits = r + 1 + np.flatnonzero(a[r + 1 :, w] & bit)
        if hits.size:
            a[hits, w:] ^= pivot_row
        pivots.append(c)
        r += 1
    return pivots


def _as_index_array(indices: Iterable[int], upper: int, name: str) -> np.ndarray:
    idx = np.asarray(list(indices), dtype=np.intp).reshape(-1)
    bad = idx[(idx < 0) | (idx >= upper)]
    if bad.size:
        raise IndexOutOfRange(bad.tolist(), upper, name)
    uniq, counts = np.unique(idx, return_counts=True)
    if (counts > 1).any():
        raise DuplicateIndex(uniq[counts > 1].tolist(), name)
    return idx


class BitMatrix:
    """
    An immutable ``rows x cols`` matrix over GF(2).

    :param rows: Number of rows
    :param cols: Number of columns
    :param optional data: Packed words of shape ``(rows, ceil(cols / 64))``; zeros if omitted
    """

    __slots__ = ("rows", "cols", "data")

    def __init__(self, rows: int, cols: int, data: np.ndarray = None):
        if rows < 0 or cols < 0:
            raise DimensionMismatch("negative shape {}x{}".format(rows, cols))
        words = _n_words(cols)
        if data is None:
            data = np.zeros((rows, words), dtype=np.uint64)
        else:
            data = np.array(data, dtype=np.uint64)
            if data.shape != (rows, words):
                raise DimensionMismatch(
                    "expected {} packed words, got {}".format((rows, words), data.shape)
                )
            if words:
                data[:, -1] &= _tail_mask(cols)
        data.setflags(write=False)
        self.rows = rows
        self.cols = cols
        self.data = data

    @classmethod
    def _wrap(cls, rows: int, cols: int, data: np.ndarray) -> "BitMatrix":
        # Takes ownership of ``data``, which must already have clean padding.
        m = cls.__new__(cls)
        data.setflags(write=False)
        m.rows = rows
        m.cols = cols
        m.data = data
        return m

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "BitMatrix":
        return cls(rows, cols)

    @classmethod
    def identity(cls, n: int) -> "BitMatrix":
        return cls.from_dense(np.eye(n, dtype=np.uint8))

    @classmethod
    def from_dense(cls, array) -> "BitMatrix":
        arr = np.asarray(array)
        if arr.ndim != 2:
            raise DimensionMismatch("expected a 2-d array, got {} dims".format(arr.ndim))
        if arr.size and (arr.min() < 0 or arr.max() > 1):
            raise ValidationError("matrix entries must be 0 or 1")
        arr = arr.astype(np.uint8)
        return cls._wrap(arr.shape[0], arr.shape[1], _pack(arr))

    @classmethod
    def from_rows(cls, rows: Sequence[str], cols: int = None) -> "BitMatrix":
        rows = [row.strip() for row in rows]
        if cols is None:
            cols = len(rows[0]) if rows else 0
        for row in rows:
            if len(row) != cols or set(row) - {"0", "1"}:
                raise ValidationError(
                    "bad matrix row {!r}: expected {} characters of 0/1".format(row, cols)
                )
        dense = np.zeros((len(rows), cols), dtype=np.uint8)
        for i, row in enumerate(rows):
            if cols:
                dense[i] = np.frombuffer(row.encode("ascii"), dtype=np.uint8) - ord("0")
        return cls.from_dense(dense)

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.rows, self.cols)

    def to_dense(self) -> np.ndarray:
        return _unpack(self.data, self.cols)

    def to_row_strings(self) -> List[str]:
        dense = self.to_dense()
        return ["".join("1" if b else "0" for b in row) for row in dense]

    def get(self, i: int, j: int) -> int:
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexOutOfRange([i, j], max(self.rows, self.cols), "entry")
        return int((self.data[i, j // WORD_BITS] >> np.uint64(j % WORD_BITS)) & _ONE)

    def row(self, i: int) -> np.ndarray:
        """Row ``i`` as a dense 0/1 vector."""
        if not 0 <= i < self.rows:
            raise IndexOutOfRange([i], self.rows, "row index")
        return _unpack(self.data[i : i + 1], self.cols)[0]

    def transpose(self) -> "BitMatrix":
        return BitMatrix.from_dense(self.to_dense().T)

    def take_rows(self, row_idx: Iterable[int]) -> "BitMatrix":
        idx = _as_index_array(row_idx, self.rows, "row index")
        return BitMatrix._wrap(idx.size, self.cols, self.data[idx].copy())

    def is_zero(self) -> bool:
        return not self.data.any()

    def has_clean_padding(self) -> bool:
        if self.data.shape[1] == 0:
            return True
        return not (self.data[:, -1] & ~_tail_mask(self.cols)).any()

    def column_weights(self) -> np.ndarray:
        """Number of ones in each column, computed over row chunks."""
        weights = np.zeros(self.cols, dtype=np.int64)
        for start in range(0, self.rows, _UNPACK_CHUNK):
            chunk = _unpack(self.data[start : start + _UNPACK_CHUNK], self.cols)
            weights += chunk.sum(axis=0, dtype=np.int64)
        return weights

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitMatrix):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self.data, other.data)

    def __hash__(self):
        return hash((self.rows, self.cols, self.data.tobytes()))

    def __repr__(self):
        if self.rows * self.cols <= 64:
            return "BitMatrix({}x{}, {})".format(
                self.rows, self.cols, self.to_row_strings()
            )
        return "BitMatrix({}x{})".format(self.rows, self.cols)


@dataclass(frozen=True)
class RowBasis:
    """A row space, held as a matrix in reduced row-echelon form."""

    matrix: BitMatrix
    pivot_cols: Tuple[int, ...]

    @property
    def rank(self) -> int:
        return self.matrix.rows

    def contains(self, m: BitMatrix) -> np.ndarray:
        """
        Test each row of ``m`` for membership in the spanned space.

        :param m: Matrix whose rows are tested
        :return: Boolean array, one entry per row of ``m``
        """
        if m.cols != self.matrix.cols:
            raise DimensionMismatch(
                "row length {} against basis of length {}".format(m.cols, self.matrix.cols)
            )
        coeffs = select_submatrix(m, range(m.rows), self.pivot_cols)
        residual = multiply(coeffs, self.matrix).data ^ m.data
        return ~residual.any(axis=1)


def rank(m: BitMatrix) -> int:
    return len(_eliminate(m.data.copy(), m.cols, reduced=False))


def row_reduce(m: BitMatrix) -> RowBasis:
    a = m.data.copy()
    pivots = _eliminate(a, m.cols, reduced=True)
    basis = BitMatrix._wrap(len(pivots), m.cols, a[: len(pivots)].copy())
    return RowBasis(basis, tuple(pivots))


def independent_rows(m: BitMatrix) -> List[int]:
    """
    Indices of the rows of ``m`` that are not in the span of the rows before them.

    These are the pivot columns of the transpose, so one elimination answers
    the question for every row at once.
    """
    t = m.transpose()
    return _eliminate(t.data.copy(), t.cols, reduced=False)


def multiply(a: BitMatrix, b: BitMatrix) -> BitMatrix:
    if a.cols != b.rows:
        raise DimensionMismatch(
            "cannot multiply {}x{} by {}x{}".format(a.rows, a.cols, b.rows, b.cols)
        )
    out = np.zeros((a.rows, b.data.shape[1]), dtype=np.uint64)
    if out.size:
        for j in range(a.cols):
            hits = np.flatnonzero(a.data[:, j // WORD_BITS] & _bit(j))
            if hits.size:
                out[hits] ^= b.data[j]
    return BitMatrix._wrap(a.rows, b.cols, out)


def invert(m: BitMatrix) -> BitMatrix:
    if m.rows != m.cols:
        raise DimensionMismatch("cannot invert a {}x{} matrix".format(m.rows, m.cols))
    n = m.rows
    augmented = hstack(m, BitMatrix.identity(n))
    a = augmented.data.copy()
    pivots = _eliminate(a, n, reduced=True)
    if len(pivots) < n:
        raise SingularMatrix("matrix has rank {} < {}".format(len(pivots), n))
    inverse = _gather_columns(a, np.arange(n, 2 * n, dtype=np.intp))
    return BitMatrix._wrap(n, n, inverse)


def select_submatrix(
    m: BitMatrix, row_idx: Iterable[int], col_idx: Iterable[int]
) -> BitMatrix:
    """
    Copy the rows ``row_idx`` and columns ``col_idx`` of ``m``, in the order given.

    :param m: Source matrix
    :param row_idx: 0-based row indices, duplicate-free
    :param col_idx: 0-based column indices, duplicate-free
    :return: ``len(row_idx) x len(col_idx)`` submatrix
    """
    rows = _as_index_array(row_idx, m.rows, "row index")
    cols = _as_index_array(col_idx, m.cols, "column index")
    return BitMatrix._wrap(rows.size, cols.size, _gather_columns(m.data[rows], cols))


def hstack(*ms: BitMatrix) -> BitMatrix:
    rows = {m.rows for m in ms}
    if len(rows) != 1:
        raise DimensionMismatch("hstack of matrices with row counts {}".format(sorted(rows)))
    return BitMatrix.from_dense(np.hstack([m.to_dense() for m in ms]))


def vstack(*ms: BitMatrix) -> BitMatrix:
    cols = {m.cols for m in ms}
    if len(cols) != 1:
        raise DimensionMismatch("vstack of matrices with column counts {}".format(sorted(cols)))
    (width,) = cols
    data = np.vstack([m.data for m in ms])
    return BitMatrix._wrap(data.shape[0], width, data)


def extend_basis(v: RowBasis, q: RowBasis) -> BitMatrix:
    """
    Pick rows of ``q`` completing a basis of ``v`` to a basis of ``q``'s span.

    Rows of ``q`` are scanned in order and accepted iff they raise the rank of
    ``v`` plus the rows accepted so far.

    :return: ``rank(q) - rank(v)`` rows, each in span(q)
    :raises NotASubspace: if span(v) is not contained in span(q)
    """
    if v.matrix.cols != q.matrix.cols:
        raise DimensionMismatch(
            "bases of row length {} and {}".format(v.matrix.cols, q.matrix.cols)
        )
    keep = independent_rows(vstack(v.matrix, q.matrix))
    if len(keep) != q.rank:
        raise NotASubspace(
            "span has dimension {} after adding the subspace, expected {}".format(
                len(keep), q.rank
            )
        )
    accepted = [i - v.rank for i in keep if i >= v.rank]
    return q.matrix.take_rows(accepted)


def format_matrix_text(m: BitMatrix, comments: Sequence[str] = ()) -> str:
    lines = ["# {}".format(c) for c in comments]
    lines.append("{} {}".format(m.rows, m.cols))
    lines.extend(m.to_row_strings())
    return "\n".join(lines) + "\n"


def parse_matrix_text(text: str) -> BitMatrix:
    lines = [line.strip() for line in text.splitlines()]
    lines = [line for line in lines if not line.startswith("#")]
    while lines and lines[0] == "":
        lines.pop(0)
    if not lines:
        raise ValidationError("empty matrix text")
    header = lines[0].split()
    if len(header) != 2 or not all(h.isdigit() for h in header):
        raise ValidationError("bad matrix header {!r}".format(lines[0]))
    rows, cols = int(header[0]), int(header[1])
    body = lines[1 : 1 + rows]
    if cols == 0:
        body = body + [""] * (rows - len(body))
    if len(body) != rows:
        raise ValidationError("expected {} matrix rows, got {}".format(rows, len(body)))
    if any(line for line in lines[1 + rows :]):
        raise ValidationError("trailing content after {} matrix rows".format(rows))
    return BitMatrix.from_rows(body, cols)
