"""Binary LDPC codec: alist I/O, systematic encoding, sum-product decoding.

Parity-check matrices are consumed as data (alist files or dense arrays);
redundant rows are kept for decoding (they help belief propagation on
cyclic codes) while the dimension k = n - rank is derived by GF(2)
elimination.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .llr import SATURATION_THRESHOLD

log = logging.getLogger(__name__)

# Messages out of a check node are capped at 2*atanh(1 - 1e-15) ~ 35.6;
# channel pins stay far above this, so hard decisions remain forced.
_TANH_CLIP = 1.0 - 1e-15


class AlistError(ValueError):
    """Malformed alist file; message carries the offending line number."""


@dataclass
class BpConfig:
    """Sum-product schedule knobs (flooding)."""

    max_iters: int = 100
    early_stop: bool = True
    damping: float = 1.0
    check_rule: str = "tanh"  # "tanh" or "maxstar" (pairwise boxplus)

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not 0.0 < self.damping <= 1.0:
            raise ValueError("damping must be in (0, 1]")
        if self.check_rule not in ("tanh", "maxstar"):
            raise ValueError(f"unknown check_rule {self.check_rule!r}")


@dataclass
class DecodeResult:
    """Outcome of one decoding attempt."""

    hard_bits: np.ndarray
    soft_llr: np.ndarray
    is_codeword: bool
    iterations_used: int


class ParityCheckMatrix:
    """Sparse binary parity-check matrix with cached decoder/encoder views.

    Adjacency is stored as padded index matrices (rows x max-degree) so the
    flooding BP update vectorizes; the systematic generator (pivot/message
    column split from GF(2) elimination) is computed lazily on first encode.
    """

    def __init__(self, row_supports, n: int, label: str = "",
                 claimed_min_distance: int | None = None):
        self.n = int(n)
        self.m = len(row_supports)
        self.label = label
        self.claimed_min_distance = claimed_min_distance
        self.rows = [np.asarray(sorted(set(int(i) for i in r)), dtype=np.int64)
                     for r in row_supports]
        for ri, r in enumerate(self.rows):
            if len(r) and (r[0] < 0 or r[-1] >= self.n):
                raise ValueError(f"row {ri} has column index outside [0, {self.n})")
        cols = [[] for _ in range(self.n)]
        for ri, r in enumerate(self.rows):
            for c in r:
                cols[c].append(ri)
        self.cols = [np.asarray(c, dtype=np.int64) for c in cols]
        self._build_edge_views()
        self._rank: int | None = None
        self._encoder: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None

    # -- construction ------------------------------------------------------

    @classmethod
    def from_dense(cls, H, label: str = "",
                   claimed_min_distance: int | None = None) -> "ParityCheckMatrix":
        H = np.asarray(H)
        supports = [np.nonzero(H[i])[0] for i in range(H.shape[0])]
        return cls(supports, n=H.shape[1], label=label,
                   claimed_min_distance=claimed_min_distance)

    def to_dense(self) -> np.ndarray:
        H = np.zeros((self.m, self.n), dtype=np.uint8)
        for ri, r in enumerate(self.rows):
            H[ri, r] = 1
        return H

    def _build_edge_views(self):
        edges = [(ri, c) for ri, r in enumerate(self.rows) for c in r]
        self.n_edges = len(edges)
        self.edge_row = np.array([e[0] for e in edges], dtype=np.int64)
        self.edge_col = np.array([e[1] for e in edges], dtype=np.int64)
        dr = np.array([len(r) for r in self.rows], dtype=np.int64)
        dc = np.array([len(c) for c in self.cols], dtype=np.int64)
        self.dr_max = int(dr.max()) if self.m else 0
        self.dc_max = int(dc.max()) if self.n else 0

        self.row_eid = np.full((self.m, self.dr_max), -1, dtype=np.int64)
        fill = np.zeros(self.m, dtype=np.int64)
        for e, ri in enumerate(self.edge_row):
            self.row_eid[ri, fill[ri]] = e
            fill[ri] += 1
        self.col_eid = np.full((self.n, self.dc_max), -1, dtype=np.int64)
        fill = np.zeros(self.n, dtype=np.int64)
        for e, c in enumerate(self.edge_col):
            self.col_eid[c, fill[c]] = e
            fill[c] += 1
        self.row_mask = self.row_eid >= 0
        self.col_mask = self.col_eid >= 0
        self.row_eid_safe = np.where(self.row_mask, self.row_eid, 0)
        self.col_eid_safe = np.where(self.col_mask, self.col_eid, 0)
        self._row_scatter = self.row_eid[self.row_mask]
        # edges are laid out row-major, so per-row XOR reduces via reduceat
        self._row_starts = np.concatenate([[0], np.cumsum(dr)[:-1]]).astype(np.int64)
        self._zero_rows = np.nonzero(dr == 0)[0]

    # -- linear algebra ------------------------------------------------------

    def syndrome(self, bits) -> np.ndarray:
        bits = np.asarray(bits, dtype=np.uint8)
        if bits.shape != (self.n,):
            raise ValueError(f"expected {self.n} bits, got shape {bits.shape}")
        if self.m == 0:
            return np.zeros(0, dtype=np.uint8)
        if self.n_edges == 0:
            return np.zeros(self.m, dtype=np.uint8)
        syn = np.bitwise_xor.reduceat(bits[self.edge_col], self._row_starts)
        if len(self._zero_rows):
            syn[self._zero_rows] = 0
        return syn.astype(np.uint8)

    def _eliminate(self):
        """Reduced row echelon form of H over GF(2); caches rank and encoder."""
        R = self.to_dense()
        pivots = []
        r = 0
        for c in range(self.n):
            hot = np.nonzero(R[r:, c])[0]
            if hot.size == 0:
                continue
            p = hot[0] + r
            if p != r:
                R[[r, p]] = R[[p, r]]
            elim = R[:, c].astype(bool).copy()
            elim[r] = False
            R[elim] ^= R[r]
            pivots.append(c)
            r += 1
            if r == self.m:
                break
        rank = len(pivots)
        pivot_cols = np.asarray(pivots, dtype=np.int64)
        message_cols = np.setdiff1d(np.arange(self.n), pivot_cols)
        # pivot bit i = sum over message cols of R[i, j] * c_j
        dependency = R[:rank][:, message_cols].astype(np.uint8)
        self._rank = rank
        self._encoder = (pivot_cols, message_cols, dependency)
        if rank < self.m:
            log.info("%s: rank %d < %d rows; k reduced to %d",
                     self.label or "H", rank, self.m, self.n - rank)

    @property
    def rank(self) -> int:
        if self._rank is None:
            self._eliminate()
        return self._rank

    @property
    def k(self) -> int:
        return self.n - self.rank

    @property
    def message_columns(self) -> np.ndarray:
        """Systematic positions: codeword[message_columns] equals the message."""
        if self._encoder is None:
            self._eliminate()
        return self._encoder[1]


def encode(H: ParityCheckMatrix, message) -> np.ndarray:
    """Systematic encoding: place the message, solve parity bits over GF(2)."""
    message = np.asarray(message, dtype=np.uint8)
    if H._encoder is None:
        H._eliminate()
    pivot_cols, message_cols, dependency = H._encoder
    if message.shape != (H.k,):
        raise ValueError(f"message must have length k={H.k}, got {message.shape}")
    c = np.zeros(H.n, dtype=np.uint8)
    c[message_cols] = message
    if len(pivot_cols):
        c[pivot_cols] = (dependency @ message) % 2
    return c


def extract_message(H: ParityCheckMatrix, codeword) -> np.ndarray:
    """Recover the systematic message bits from a codeword-length vector."""
    return np.asarray(codeword, dtype=np.uint8)[H.message_columns]


def _check_update_tanh(vc: np.ndarray, mat: ParityCheckMatrix) -> np.ndarray:
    t = np.tanh(0.5 * np.clip(vc[mat.row_eid_safe], -60.0, 60.0))
    t = np.where(mat.row_mask, t, 1.0)
    prefix = np.ones_like(t)
    suffix = np.ones_like(t)
    np.cumprod(t[:, :-1], axis=1, out=prefix[:, 1:])
    np.cumprod(t[:, :0:-1], axis=1, out=suffix[:, -2::-1])
    ext = np.clip(prefix * suffix, -_TANH_CLIP, _TANH_CLIP)
    return 2.0 * np.arctanh(ext)


def _boxplus(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # exact pairwise combiner: sign(a)sign(b)min(|a|,|b|) + max-star corrections
    m = np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b))
    return m + np.log1p(np.exp(-np.abs(a + b))) - np.log1p(np.exp(-np.abs(a - b)))


def _check_update_maxstar(vc: np.ndarray, mat: ParityCheckMatrix) -> np.ndarray:
    v = np.clip(vc[mat.row_eid_safe], -60.0, 60.0)
    big = 2.0 * np.arctanh(_TANH_CLIP)
    v = np.where(mat.row_mask, v, big)  # padded slots act as certain zeros
    d = v.shape[1]
    prefix = np.empty_like(v)
    suffix = np.empty_like(v)
    prefix[:, 0] = big
    suffix[:, -1] = big
    for j in range(1, d):
        prefix[:, j] = _boxplus(prefix[:, j - 1], v[:, j - 1])
        suffix[:, d - 1 - j] = _boxplus(suffix[:, d - j], v[:, d - j])
    return _boxplus(prefix, suffix)


def bp_decode(H: ParityCheckMatrix, channel_llr, cfg: BpConfig = BpConfig()) -> DecodeResult:
    """Log-domain sum-product decoding with a flooding schedule.

    channel_llr follows the package convention (positive favors bit 1);
    saturated entries (|llr| >= SATURATION_THRESHOLD) behave as hard
    constraints.  Always returns a DecodeResult; is_codeword records
    whether the final hard decision has zero syndrome.
    """
    llr = np.asarray(channel_llr, dtype=float)
    if llr.shape != (H.n,):
        raise ValueError(f"expected {H.n} LLRs, got shape {llr.shape}")
    # internal messages use the textbook log(P(bit 0)/P(bit 1)) sign
    L = -llr

    if H.n_edges == 0:
        hard = (llr > 0).astype(np.uint8)
        return DecodeResult(hard, llr.copy(), True, 0)

    update = _check_update_tanh if cfg.check_rule == "tanh" else _check_update_maxstar
    vc = L[H.edge_col].copy()
    cv = np.zeros(H.n_edges)
    hard = (llr > 0).astype(np.uint8)
    posterior = L.copy()
    iters = 0
    for iters in range(1, cfg.max_iters + 1):
        new_cv = np.empty(H.n_edges)
        values = update(vc, H)
        new_cv[H._row_scatter] = values[H.row_mask]
        cv = new_cv if cfg.damping == 1.0 else cfg.damping * new_cv + (1 - cfg.damping) * cv

        incoming = np.where(H.col_mask, cv[H.col_eid_safe], 0.0).sum(axis=1)
        posterior = L + incoming
        vc = posterior[H.edge_col] - cv

        hard = (posterior < 0).astype(np.uint8)
        if cfg.early_stop and not H.syndrome(hard).any():
            break

    is_codeword = not H.syndrome(hard).any()
    return DecodeResult(hard, -posterior, is_codeword, iters)


# -- alist I/O ---------------------------------------------------------------


def save_alist(H: ParityCheckMatrix, path) -> None:
    """Write the standard alist layout (1-indexed, zero-padded)."""
    dc = [len(c) for c in H.cols]
    dr = [len(r) for r in H.rows]
    lines = [
        f"{H.n} {H.m}",
        f"{max(dc) if dc else 0} {max(dr) if dr else 0}",
        " ".join(str(d) for d in dc),
        " ".join(str(d) for d in dr),
    ]
    dc_max = max(dc) if dc else 0
    dr_max = max(dr) if dr else 0
    for c in H.cols:
        entries = [str(ri + 1) for ri in c] + ["0"] * (dc_max - len(c))
        lines.append(" ".join(entries))
    for r in H.rows:
        entries = [str(ci + 1) for ci in r] + ["0"] * (dr_max - len(r))
        lines.append(" ".join(entries))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_alist(path, label: str | None = None) -> ParityCheckMatrix:
    """Parse an alist file; raises AlistError with a line number on damage."""
    with open(path) as fh:
        raw = fh.read().splitlines()

    def ints(line_no: int, expect: int | None = None) -> list[int]:
        if line_no >= len(raw):
            raise AlistError(f"line {line_no + 1}: file truncated")
        try:
            vals = [int(tok) for tok in raw[line_no].split()]
        except ValueError as exc:
            raise AlistError(f"line {line_no + 1}: non-integer token ({exc})") from None
        if expect is not None and len(vals) != expect:
            raise AlistError(
                f"line {line_no + 1}: expected {expect} entries, found {len(vals)}")
        return vals

    n, m = ints(0, 2)
    if n < 1 or m < 0:
        raise AlistError("line 1: dimensions must satisfy n >= 1, m >= 0")
    dc_max, dr_max = ints(1, 2)
    col_w = ints(2, n)
    row_w = ints(3, m) if m else []
    if m and 3 >= len(raw):
        raise AlistError("line 4: file truncated before row weights")
    if any(w < 0 or w > dc_max for w in col_w):
        raise AlistError("line 3: column weight outside [0, max column weight]")
    if any(w < 0 or w > dr_max for w in row_w):
        raise AlistError("line 4: row weight outside [0, max row weight]")

    rows: list[list[int]] = [[] for _ in range(m)]
    for c in range(n):
        line_no = 4 + c
        vals = ints(line_no)
        entries = [v for v in vals if v != 0]
        if len(entries) != col_w[c]:
            raise AlistError(
                f"line {line_no + 1}: column {c} lists {len(entries)} rows, "
                f"declared weight {col_w[c]}")
        if len(set(entries)) != len(entries):
            raise AlistError(f"line {line_no + 1}: duplicate entry in column {c}")
        for v in entries:
            if not 1 <= v <= m:
                raise AlistError(f"line {line_no + 1}: row index {v} out of range")
            rows[v - 1].append(c)
    # row adjacency section: validate against the column-derived structure
    for r in range(m):
        line_no = 4 + n + r
        vals = ints(line_no)
        entries = sorted(v for v in vals if v != 0)
        if len(entries) != row_w[r]:
            raise AlistError(
                f"line {line_no + 1}: row {r} lists {len(entries)} columns, "
                f"declared weight {row_w[r]}")
        if len(set(entries)) != len(entries):
            raise AlistError(f"line {line_no + 1}: duplicate entry in row {r}")
        for v in entries:
            if not 1 <= v <= n:
                raise AlistError(f"line {line_no + 1}: column index {v} out of range")
        if [e - 1 for e in entries] != sorted(rows[r]):
            raise AlistError(
                f"line {line_no + 1}: row {r} disagrees with the column lists")

    name = label if label is not None else str(path)
    return ParityCheckMatrix(rows, n=n, label=name)
