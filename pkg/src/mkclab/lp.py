"""Exact two-phase simplex over rationals.

Maximizes ``c . x`` subject to ``A_ub x <= b_ub``, ``A_eq x = b_eq`` and
``x >= 0``. All arithmetic uses ``fractions.Fraction`` and pivoting follows
Bland's rule, so results are exact and deterministic: among several optimal
vertices the one reached first under column order is returned.

Only meant for the tiny programs in this package (a few rows, <= ~100 columns).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

Number = int | Fraction


@dataclass(frozen=True)
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: Optional[tuple[Fraction, ...]] = None
    value: Optional[Fraction] = None


def _pivot(rows: list[list[Fraction]], r: int, col: int) -> None:
    piv = rows[r][col]
    rows[r] = [v / piv for v in rows[r]]
    pr = rows[r]
    for i, row in enumerate(rows):
        if i != r and row[col] != 0:
            f = row[col]
            rows[i] = [a - f * b for a, b in zip(row, pr)]


def _run(rows, basis, cost, allowed) -> str:
    """Bland-rule simplex on a tableau in canonical form; maximizes ``cost``."""
    while True:
        entering = None
        for j in allowed:
            if j in basis:
                continue
            reduced = cost[j] - sum(cost[b] * rows[i][j] for i, b in enumerate(basis))
            if reduced > 0:
                entering = j
                break
        if entering is None:
            return "optimal"
        best = None
        for i, row in enumerate(rows):
            a = row[entering]
            if a > 0:
                ratio = row[-1] / a
                key = (ratio, basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
        if best is None:
            return "unbounded"
        r = best[1]
        _pivot(rows, r, entering)
        basis[r] = entering


def solve_lp(
    c: Sequence[Number],
    A_ub: Sequence[Sequence[Number]] = (),
    b_ub: Sequence[Number] = (),
    A_eq: Sequence[Sequence[Number]] = (),
    b_eq: Sequence[Number] = (),
) -> LPResult:
    n = len(c)
    m_ub, m_eq = len(A_ub), len(A_eq)
    m = m_ub + m_eq
    n_slack = m_ub
    # layout: [x (n) | slacks (m_ub) | artificials (k) | rhs]
    raw = []
    for i in range(m_ub):
        row = [Fraction(v) for v in A_ub[i]] + [Fraction(0)] * n_slack
        row[n + i] = Fraction(1)
        raw.append((row, Fraction(b_ub[i]), True))
    for i in range(m_eq):
        raw.append(([Fraction(v) for v in A_eq[i]] + [Fraction(0)] * n_slack, Fraction(b_eq[i]), False))

    need_art = []
    for i, (row, rhs, is_ub) in enumerate(raw):
        if rhs < 0:
            row[:] = [-v for v in row]
            rhs = -rhs
            raw[i] = (row, rhs, is_ub)
        need_art.append(not (is_ub and row[n + i] == 1))
    k = sum(need_art)
    width = n + n_slack + k
    rows: list[list[Fraction]] = []
    basis: list[int] = []
    a = 0
    for i, (row, rhs, _) in enumerate(raw):
        full = row + [Fraction(0)] * k + [rhs]
        if need_art[i]:
            full[n + n_slack + a] = Fraction(1)
            basis.append(n + n_slack + a)
            a += 1
        else:
            basis.append(n + i)
        rows.append(full)

    art = set(range(n + n_slack, width))
    if k:
        cost1 = [Fraction(0)] * (n + n_slack) + [Fraction(-1)] * k
        _run(rows, basis, cost1, range(width))
        phase1 = sum(rows[i][-1] for i, b in enumerate(basis) if b in art)
        if phase1 != 0:
            return LPResult("infeasible")
        # drive zero-level artificials out of the basis, dropping redundant rows
        i = 0
        while i < len(rows):
            if basis[i] in art:
                col = next((j for j in range(n + n_slack) if rows[i][j] != 0), None)
                if col is None:
                    del rows[i]
                    del basis[i]
                    continue
                _pivot(rows, i, col)
                basis[i] = col
            i += 1
    cost2 = [Fraction(v) for v in c] + [Fraction(0)] * (n_slack + k)
    status = _run(rows, basis, cost2, range(n + n_slack))
    if status != "optimal":
        return LPResult(status)
    x = [Fraction(0)] * width
    for i, b in enumerate(basis):
        x[b] = rows[i][-1]
    value = sum(Fraction(ci) * xi for ci, xi in zip(c, x[:n]))
    return LPResult("optimal", tuple(x[:n]), value)
