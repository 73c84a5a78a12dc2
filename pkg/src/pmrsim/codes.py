"""Constructions for the parity-check matrices shipped with the package.

Every code here is emitted as a standard alist file by the `gen-code` CLI
subcommand; decoding consumes only the files, never these constructors.
Redundant rows (full circulants) are kept on purpose: they strengthen
belief propagation on the cyclic codes.

Shipped set:
  hamming_7_4       3x7 textbook parity-check matrix (d = 3).
  cyclic_15_7       15x15 circulant of the difference set {0,1,3,7};
                    column/row weight 4, girth >= 6, rank 8 (d = 5).
  cyclic_127_84     127x127 circulant of a two-coset idempotent support
                    (cyclotomic cosets of 1 and 7 mod 127, plus {0});
                    column/row weight 15, rank 43.
  eg_255_175        255x255 circulant: incidence vectors of the
                    multiplicative orbit of one line of the affine plane
                    over GF(16) avoiding the origin; weight 16, girth >= 6,
                    rank 80 (d = 17).
  qc_1248_864       96x96 circulant-permutation array, 4x13 base with three
                    zero blocks (full rank 384, girth >= 6); column weight
                    <= 4, row weight <= 13.
"""

from __future__ import annotations

import numpy as np

from .ldpc import ParityCheckMatrix

# Cyclotomic cosets {c*2^j mod 127} of c = 1 and c = 7, plus {0}.  Searched
# over all two-coset unions for circulant GF(2) rank exactly 43.
_SUPPORT_127 = (0, 1, 2, 4, 7, 8, 14, 16, 28, 32, 56, 64, 67, 97, 112)

# Difference set mod 15: all pairwise differences distinct (girth >= 6).
_SUPPORT_15 = (0, 1, 3, 7)

# QC base: circulant size 96, entries are permutation shifts, -1 = zero
# block.  Random search constrained to no 4-cycles and full GF(2) rank 384.
_QC_Z = 96
_QC_BASE = (
    (50, 26, 46, 22, 20, 85, 80, 89, 56, 22, 62, 14, -1),
    (1, 54, 2, 78, 83, 25, 70, 83, 64, 28, 33, -1, 84),
    (63, 27, 23, 88, 47, 18, 68, 54, 53, 89, -1, 56, 38),
    (63, 46, 4, 87, 48, 68, 89, 62, 21, 38, 8, 91, 14),
)

# Primitive polynomial x^8 + x^4 + x^3 + x^2 + 1 for the GF(256) log table.
_GF256_POLY = 0x11D


def circulant(support, n: int, label: str = "",
              claimed_min_distance: int | None = None) -> ParityCheckMatrix:
    """n x n circulant whose row i is the support shifted by i (mod n)."""
    support = sorted(int(s) % n for s in support)
    rows = [[(s + i) % n for s in support] for i in range(n)]
    return ParityCheckMatrix(rows, n=n, label=label,
                             claimed_min_distance=claimed_min_distance)


def hamming_7_4() -> ParityCheckMatrix:
    H = [
        [1, 0, 1, 0, 1, 0, 1],
        [0, 1, 1, 0, 0, 1, 1],
        [0, 0, 0, 1, 1, 1, 1],
    ]
    return ParityCheckMatrix.from_dense(np.array(H), label="hamming_7_4",
                                        claimed_min_distance=3)


def cyclic_15_7() -> ParityCheckMatrix:
    return circulant(_SUPPORT_15, 15, label="cyclic_15_7", claimed_min_distance=5)


def cyclic_127_84() -> ParityCheckMatrix:
    # min distance 9 is the literature figure for codes of these
    # parameters; recorded as a claim, not verified here.
    return circulant(_SUPPORT_127, 127, label="cyclic_127_84",
                     claimed_min_distance=9)


def _gf256_tables():
    exp = [0] * 255
    log = [0] * 256
    x = 1
    for i in range(255):
        exp[i] = x
        log[x] = i
        x <<= 1
        if x & 0x100:
            x ^= _GF256_POLY
    return exp, log


def eg_255_175() -> ParityCheckMatrix:
    exp, log = _gf256_tables()
    # GF(16) inside GF(256): zero plus the elements of order dividing 15
    subfield = [0] + [exp[17 * j] for j in range(15)]
    alpha = exp[1]  # not in the subfield, so the line misses the origin
    support = sorted(log[alpha ^ t] for t in subfield)
    return circulant(support, 255, label="eg_255_175", claimed_min_distance=17)


def qc_1248_864() -> ParityCheckMatrix:
    z = _QC_Z
    rows = []
    for i, base_row in enumerate(_QC_BASE):
        for r in range(z):
            cols = [j * z + (r + shift) % z
                    for j, shift in enumerate(base_row) if shift >= 0]
            rows.append(cols)
    return ParityCheckMatrix(rows, n=len(_QC_BASE[0]) * z, label="qc_1248_864")


def uncoded(n: int) -> ParityCheckMatrix:
    """Rate-1 pseudo-code: no parity checks, every vector is a codeword."""
    return ParityCheckMatrix([], n=n, label=f"uncoded_{n}")


SHIPPED = {
    "hamming_7_4": hamming_7_4,
    "cyclic_15_7": cyclic_15_7,
    "cyclic_127_84": cyclic_127_84,
    "eg_255_175": eg_255_175,
    "qc_1248_864": qc_1248_864,
}
