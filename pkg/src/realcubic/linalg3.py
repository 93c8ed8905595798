"""Small dense linear algebra over F_3 (and a generic prime field)."""
from __future__ import annotations


def echelon(rows: list[list[int]], p: int = 3) -> tuple[list[list[int]], list[int]]:
    """Row echelon form mod p; returns (nonzero rows, pivot columns)."""
    M = [[x % p for x in r] for r in rows]
    if not M:
        return [], []
    ncols = len(M[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        k = next((i for i in range(r, len(M)) if M[i][c]), None)
        if k is None:
            continue
        M[r], M[k] = M[k], M[r]
        inv = pow(M[r][c], -1, p)
        M[r] = [x * inv % p for x in M[r]]
        for i in range(len(M)):
            if i != r and M[i][c]:
                fac = M[i][c]
                M[i] = [(x - fac * y) % p for x, y in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == len(M):
            break
    return M[:r], pivots


def rank(rows: list[list[int]], p: int = 3) -> int:
    return len(echelon(rows, p)[0])


def kernel(rows: list[list[int]], p: int = 3) -> list[list[int]]:
    """Basis of {x : sum_i x_i * rows[i] = 0} (left kernel) mod p."""
    n = len(rows)
    if n == 0:
        return []
    m = len(rows[0])
    # augment with identity to track combinations
    aug = [list(r) + [1 if j == i else 0 for j in range(n)] for i, r in enumerate(rows)]
    out = []
    # rows whose left part vanishes after elimination give kernel vectors
    full = _full_echelon(aug, p, m)
    for r in full:
        if all(x % p == 0 for x in r[:m]):
            out.append(r[m:])
    return out


def _full_echelon(aug: list[list[int]], p: int, m: int) -> list[list[int]]:
    M = [[x % p for x in r] for r in aug]
    r = 0
    for c in range(m):
        k = next((i for i in range(r, len(M)) if M[i][c]), None)
        if k is None:
            continue
        M[r], M[k] = M[k], M[r]
        inv = pow(M[r][c], -1, p)
        M[r] = [x * inv % p for x in M[r]]
        for i in range(len(M)):
            if i != r and M[i][c]:
                fac = M[i][c]
                M[i] = [(x - fac * y) % p for x, y in zip(M[i], M[r])]
        r += 1
    return M


def in_span(v: list[int], rows: list[list[int]], p: int = 3) -> bool:
    return rank(rows + [v], p) == rank(rows, p)
