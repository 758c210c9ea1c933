"""Numpy implementations of the hot kernels.

These are the reference (fallback) versions; ``_ckernels.pyx`` mirrors them
loop-for-loop. The samplers and the quadruple scan must produce bit-identical
output; the Jacobi sweeps agree only to rounding because the compiled loops
accumulate in a different order.
"""
import math

import numpy as np

BACKEND = "python"

_M64 = (1 << 64) - 1
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_TO_UNIT = 2.0 ** -53

# axis index (0 = x, 1 = y) per detector for the combos xxx, xyy, yxy, yyx
COMBO_AXES = np.array([[0, 0, 0], [0, 1, 1], [1, 0, 1], [1, 1, 0]], dtype=np.int64)


def _splitmix64(z):
    z = z + _GOLDEN
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def seed_key(seed):
    """Scrambled 64-bit key for a user seed."""
    with np.errstate(over="ignore"):
        return int(_splitmix64(np.array([seed & _M64], dtype=np.uint64))[0])


def counter_uniforms(seed, start, n, stream):
    """Uniforms in [0, 1) for rounds ``start .. start+n-1`` on one stream.

    Each value depends only on (seed, round index, stream), so any subset of
    rounds can be regenerated independently of execution order.
    """
    key = np.uint64(seed_key(seed))
    idx = np.arange(start, start + n, dtype=np.uint64)
    with np.errstate(over="ignore"):
        h = _splitmix64(key ^ _splitmix64(idx * np.uint64(8) + np.uint64(stream)))
    return (h >> np.uint64(11)).astype(np.float64) * _TO_UNIT


def _pick(u, n):
    return np.minimum((u * n).astype(np.int64), n - 1)


def _categorical(u, cdf_rows):
    k = (cdf_rows[:, :-1] <= u[:, None]).sum(axis=1)
    return k.astype(np.int64)


def sample_contextual(seed, rounds, offsets, counts, cdf, hidden_first):
    """Sample rounds where the outcome law depends on the selected triplet.

    Returns ``(combo, member, pattern)``. ``pattern`` encodes the outcome
    signs with bit ``2 - r`` set when detector ``r`` reads -1.
    """
    offsets = np.asarray(offsets, dtype=np.int64)
    counts = np.asarray(counts, dtype=np.int64)
    cdf = np.ascontiguousarray(cdf, dtype=np.float64)
    if hidden_first:
        s_out, s_combo, s_member = 0, 1, 2
    else:
        s_combo, s_member, s_out = 0, 1, 2
    combo = _pick(counter_uniforms(seed, 0, rounds, s_combo), 4)
    member = offsets[combo] + _pick(counter_uniforms(seed, 0, rounds, s_member), counts[combo])
    pattern = _categorical(counter_uniforms(seed, 0, rounds, s_out), cdf[member])
    return combo.astype(np.int8), member, pattern.astype(np.int8)


def sample_product(seed, rounds, choice_counts, atom_cdf):
    """Sample rounds from a product-form valuation model.

    Returns ``(combo, choices, valuation, pattern)``; ``choices[i, r]`` indexes
    detector ``r``'s direction list for the axis its combo requires.
    """
    choice_counts = np.asarray(choice_counts, dtype=np.int64)
    atom_cdf = np.ascontiguousarray(atom_cdf, dtype=np.float64)
    combo = _pick(counter_uniforms(seed, 0, rounds, 0), 4)
    axes = COMBO_AXES[combo]
    choices = np.empty((rounds, 3), dtype=np.int64)
    for r in range(3):
        n = choice_counts[r][axes[:, r]]
        choices[:, r] = _pick(counter_uniforms(seed, 0, rounds, 1 + r), n)
    u = counter_uniforms(seed, 0, rounds, 4)
    valuation = np.searchsorted(atom_cdf[:-1], u, side="right").astype(np.int64)
    pattern = np.zeros(rounds, dtype=np.int64)
    for r in range(3):
        bit = (valuation >> (5 - (2 * r + axes[:, r]))) & 1
        pattern |= bit << (2 - r)
    return combo.astype(np.int8), choices, valuation.astype(np.int8), pattern.astype(np.int8)


def pythagorean_quadruples(bound):
    """All primitive (p1, p2, p3, q) with p1^2 + p2^2 + p3^2 = q^2, 1 <= q <= bound.

    Rows are sorted by q, then p1, p2, p3.
    """
    rows = []
    for q in range(1, bound + 1):
        p = np.arange(-q, q + 1, dtype=np.int64)
        rest = q * q - p[:, None] ** 2 - p[None, :] ** 2
        ok = rest >= 0
        s = np.zeros_like(rest)
        s[ok] = np.sqrt(rest[ok]).astype(np.int64)
        # float sqrt may be off by one for large values
        s += ((s + 1) ** 2 <= rest) & ok
        s -= (s * s > rest) & ok
        ok &= s * s == rest
        i, j = np.nonzero(ok)
        for a, b, c in zip(p[i], p[j], s[i, j]):
            g = math.gcd(math.gcd(int(a), int(b)), math.gcd(int(c), q))
            if g != 1:
                continue
            rows.append((a, b, -c, q))
            if c:
                rows.append((a, b, c, q))
    out = np.array(rows, dtype=np.int64).reshape(-1, 4)
    order = np.lexsort((out[:, 2], out[:, 1], out[:, 0], out[:, 3]))
    return out[order]


def jacobi_hermitian(m, tol, max_sweeps):
    """Cyclic complex Jacobi for a Hermitian matrix.

    Returns ascending eigenvalues and eigenvectors (columns), or
    ``(None, None)`` if the off-diagonal part is not below
    ``tol * max(1, max|m|)`` after ``max_sweeps`` sweeps.
    """
    a = np.array(m, dtype=np.complex128, copy=True)
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    thresh = tol * max(1.0, float(np.abs(a).max()))
    upper = np.triu_indices(n, 1)
    for _ in range(max_sweeps):
        if np.abs(a[upper]).max(initial=0.0) < thresh:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                # entries already below the stopping threshold are left alone;
                # rotating on subnormal values overflows the phase and theta
                if mag < thresh:
                    continue
                phase = (apq / mag).conjugate()
                theta = (a[q, q].real - a[p, p].real) / (2.0 * mag)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                # J = diag(1, phase) @ [[c, s], [-s, c]] zeroes a[p, q]
                j10, j11 = -s * phase, c * phase
                cp, cq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = cp * c + cq * j10
                a[:, q] = cp * s + cq * j11
                rp, rq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = rp * c + rq * np.conj(j10)
                a[q, :] = rp * s + rq * np.conj(j11)
                a[p, q] = a[q, p] = 0.0
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = vp * c + vq * j10
                v[:, q] = vp * s + vq * j11
    else:
        if np.abs(a[upper]).max(initial=0.0) >= thresh:
            return None, None
    w = a.diagonal().real.copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]
