"""GF(2^8) arithmetic and a systematic MDS erasure codec.

The field is GF(2^8) with reduction polynomial x^8 + x^4 + x^3 + x + 1
(0x11B) and generator element 0x03; multiplication goes through log/antilog
tables built at import time.  The codec uses a systematic Vandermonde
construction: evaluation rows at n distinct points, row-reduced so the top
k x k block is the identity.  Any k of the n coded chunks recover the k
data chunks, and any single chunk can be regenerated from the data by
applying one generator row.
"""

from __future__ import annotations

from dataclasses import dataclass

REDUCING_POLY = 0x11B
_GENERATOR_ELEMENT = 0x03


class InsufficientSharesError(ValueError):
    """Fewer shares supplied than the code dimension."""


class DuplicateShareError(ValueError):
    """Two shares carry the same code index."""


class SingularMatrixError(ArithmeticError):
    """Matrix has no inverse over GF(2^8)."""


def _mul_bitwise(a: int, b: int) -> int:
    # Shift-and-add reference multiply; builds the tables below and serves
    # as an independent oracle in the tests.
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        if a & 0x100:
            a ^= REDUCING_POLY
        b >>= 1
    return out


_EXP = [0] * 510
_LOG = [0] * 256
_acc = 1
for _i in range(255):
    _EXP[_i] = _acc
    _LOG[_acc] = _i
    _acc = _mul_bitwise(_acc, _GENERATOR_ELEMENT)
for _i in range(255, 510):
    _EXP[_i] = _EXP[_i - 255]


def gf_add(a: int, b: int) -> int:
    """Field addition and subtraction (bitwise XOR)."""
    return a ^ b


def gf_mul(a: int, b: int) -> int:
    """Field multiplication."""
    if a == 0 or b == 0:
        return 0
    return _EXP[_LOG[a] + _LOG[b]]


def gf_inv(a: int) -> int:
    """Multiplicative inverse; raises ZeroDivisionError for 0."""
    if a == 0:
        raise ZeroDivisionError("0 has no multiplicative inverse in GF(2^8)")
    return _EXP[255 - _LOG[a]]


def gf_pow(a: int, e: int) -> int:
    if e == 0:
        return 1
    if a == 0:
        return 0
    return _EXP[(_LOG[a] * e) % 255]


# Per-coefficient multiplication tables so byte strings scale via translate().
_SCALE_TABLES = tuple(bytes(gf_mul(c, v) for v in range(256)) for c in range(256))


def scale_bytes(coeff: int, data: bytes) -> bytes:
    """Multiply every byte of `data` by the field element `coeff`."""
    if coeff == 0:
        return bytes(len(data))
    if coeff == 1:
        return data
    return data.translate(_SCALE_TABLES[coeff])


def xor_bytes(a: bytes, b: bytes) -> bytes:
    if len(a) != len(b):
        raise ValueError("byte strings differ in length")
    n = len(a)
    return (int.from_bytes(a, "big") ^ int.from_bytes(b, "big")).to_bytes(n, "big")


@dataclass(frozen=True)
class GeneratorMatrix:
    """n x k generator over GF(2^8); row i produces coded chunk i+1."""

    n: int
    k: int
    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.k < 1 or self.n < self.k:
            raise ValueError("generator requires n >= k >= 1")
        if len(self.rows) != self.n:
            raise ValueError("row count does not match n")
        for row in self.rows:
            if len(row) != self.k:
                raise ValueError("row width does not match k")
            if any(not 0 <= v <= 255 for v in row):
                raise ValueError("entries must be field elements 0..255")

    def row(self, code_index: int) -> tuple[int, ...]:
        if not 1 <= code_index <= self.n:
            raise ValueError(f"code index {code_index} outside [1, {self.n}]")
        return self.rows[code_index - 1]


@dataclass(frozen=True)
class CodedChunk:
    """One coded share: which generator row produced it and its payload."""

    code_index: int
    payload: bytes

    @property
    def length_bits(self) -> int:
        return len(self.payload) * 8


def matrix_inverse(rows: list[list[int]]) -> list[list[int]]:
    """Gauss-Jordan inverse of a square matrix over GF(2^8)."""
    k = len(rows)
    aug = [list(rows[i]) + [1 if j == i else 0 for j in range(k)] for i in range(k)]
    for col in range(k):
        pivot = next((r for r in range(col, k) if aug[r][col] != 0), None)
        if pivot is None:
            raise SingularMatrixError("matrix is singular over GF(2^8)")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        inv_p = gf_inv(aug[col][col])
        aug[col] = [gf_mul(inv_p, v) for v in aug[col]]
        for r in range(k):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [v ^ gf_mul(f, p) for v, p in zip(aug[r], aug[col])]
    return [row[k:] for row in aug]


def build_generator(n: int, k: int) -> GeneratorMatrix:
    """Systematic (n, k) MDS generator from Vandermonde rows at points 0..n-1.

    Row-reducing the top k x k Vandermonde block to the identity keeps every
    k x k row sub-matrix invertible, so any k chunks decode.
    """
    if k < 1 or n < k:
        raise ValueError("build_generator requires n >= k >= 1")
    if n > 255:
        raise ValueError("GF(2^8) supports at most 255 code symbols")
    vand = [[gf_pow(point, j) for j in range(k)] for point in range(n)]
    top_inv = matrix_inverse([row[:] for row in vand[:k]])
    rows = []
    for row in vand:
        out = [0] * k
        for m, coeff in enumerate(row):
            if coeff == 0:
                continue
            for j in range(k):
                out[j] ^= gf_mul(coeff, top_inv[m][j])
        rows.append(tuple(out))
    mat = GeneratorMatrix(n=n, k=k, rows=tuple(rows))
    for i in range(k):  # systematic by construction; cheap to confirm
        assert mat.rows[i] == tuple(1 if j == i else 0 for j in range(k))
    return mat


def encode_row(mat: GeneratorMatrix, code_index: int, parts: list[bytes]) -> bytes:
    """Apply a single generator row to the k data parts."""
    if len(parts) != mat.k:
        raise ValueError(f"expected {mat.k} parts, got {len(parts)}")
    coeffs = mat.row(code_index)
    acc = bytes(len(parts[0]))
    for coeff, part in zip(coeffs, parts):
        if len(part) != len(parts[0]):
            raise ValueError("data parts differ in length")
        if coeff:
            acc = xor_bytes(acc, scale_bytes(coeff, part))
    return acc


def mds_encode(parts: list[bytes], mat: GeneratorMatrix) -> list[CodedChunk]:
    """Encode k equal-length parts into n coded chunks (first k systematic)."""
    if len(parts) != mat.k:
        raise ValueError(f"expected {mat.k} parts, got {len(parts)}")
    return [CodedChunk(i, encode_row(mat, i, parts)) for i in range(1, mat.n + 1)]


def mds_decode(shares: list[CodedChunk], mat: GeneratorMatrix) -> list[bytes]:
    """Recover the k data parts from any k of the coded chunks.

    With more than k shares, the k with the smallest code indices are used.
    """
    if len(shares) < mat.k:
        raise InsufficientSharesError(
            f"need {mat.k} shares to decode, got {len(shares)}"
        )
    indices = [s.code_index for s in shares]
    if len(set(indices)) != len(indices):
        raise DuplicateShareError("shares carry duplicate code indices")
    for s in shares:
        if not 1 <= s.code_index <= mat.n:
            raise ValueError(f"code index {s.code_index} outside [1, {mat.n}]")
        if len(s.payload) != len(shares[0].payload):
            raise ValueError("share payloads differ in length")
    use = sorted(shares, key=lambda s: s.code_index)[: mat.k]
    sub = [list(mat.row(s.code_index)) for s in use]
    inv = matrix_inverse(sub)
    out = []
    for j in range(mat.k):
        acc = bytes(len(use[0].payload))
        for i in range(mat.k):
            if inv[j][i]:
                acc = xor_bytes(acc, scale_bytes(inv[j][i], use[i].payload))
        out.append(acc)
    return out


def is_mds(mat: GeneratorMatrix) -> bool:
    """Exhaustively check that every k x k row sub-matrix is invertible.

    Cost grows as C(n, k); intended for small n (tests use n <= 12).
    """
    import itertools

    for combo in itertools.combinations(range(mat.n), mat.k):
        try:
            matrix_inverse([list(mat.rows[i]) for i in combo])
        except SingularMatrixError:
            return False
    return True
