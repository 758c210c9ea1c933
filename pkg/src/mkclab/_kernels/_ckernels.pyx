# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in ``pykernels``.

Every routine here must stay bit-identical to its numpy counterpart; the test
suite compares the two backends element by element.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt
from libc.stdint cimport uint64_t, int64_t

cnp.import_array()

BACKEND = "cython"

cdef uint64_t _GOLDEN = 0x9E3779B97F4A7C15ULL
cdef uint64_t _MIX1 = 0xBF58476D1CE4E5B9ULL
cdef uint64_t _MIX2 = 0x94D049BB133111EBULL
cdef double _TO_UNIT = 1.0 / 9007199254740992.0

cdef int64_t[4][3] _AXES
_AXES[0][:] = [0, 0, 0]
_AXES[1][:] = [0, 1, 1]
_AXES[2][:] = [1, 0, 1]
_AXES[3][:] = [1, 1, 0]


cdef inline uint64_t _splitmix64(uint64_t z) nogil:
    z = z + _GOLDEN
    z = (z ^ (z >> 30)) * _MIX1
    z = (z ^ (z >> 27)) * _MIX2
    return z ^ (z >> 31)


cdef inline double _uniform(uint64_t key, uint64_t i, uint64_t stream) nogil:
    cdef uint64_t h = _splitmix64(key ^ _splitmix64(i * 8 + stream))
    return <double>(h >> 11) * _TO_UNIT


cdef inline int64_t _pick(double u, int64_t n) nogil:
    cdef int64_t k = <int64_t>(u * <double>n)
    return k if k < n - 1 else n - 1


cdef inline int64_t _categorical(double u, const double[:] row) nogil:
    cdef Py_ssize_t k
    cdef int64_t count = 0
    for k in range(row.shape[0] - 1):
        if row[k] <= u:
            count += 1
    return count


def seed_key(seed):
    return _splitmix64(<uint64_t>(seed & 0xFFFFFFFFFFFFFFFF))


def counter_uniforms(seed, Py_ssize_t start, Py_ssize_t n, int stream):
    cdef uint64_t key = seed_key(seed)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double[:] ov = out
    cdef Py_ssize_t i
    for i in range(n):
        ov[i] = _uniform(key, <uint64_t>(start + i), <uint64_t>stream)
    return out


def sample_contextual(seed, Py_ssize_t rounds, offsets, counts, cdf, bint hidden_first):
    cdef const int64_t[:] off = np.ascontiguousarray(offsets, dtype=np.int64)
    cdef const int64_t[:] cnt = np.ascontiguousarray(counts, dtype=np.int64)
    cdef const double[:, :] table = np.ascontiguousarray(cdf, dtype=np.float64)
    cdef uint64_t key = seed_key(seed)
    combo_a = np.empty(rounds, dtype=np.int8)
    member_a = np.empty(rounds, dtype=np.int64)
    pattern_a = np.empty(rounds, dtype=np.int8)
    cdef signed char[:] combo = combo_a
    cdef int64_t[:] member = member_a
    cdef signed char[:] pattern = pattern_a
    cdef uint64_t s_combo, s_member, s_out
    if hidden_first:
        s_out, s_combo, s_member = 0, 1, 2
    else:
        s_combo, s_member, s_out = 0, 1, 2
    cdef Py_ssize_t i
    cdef int64_t c, m
    with nogil:
        for i in range(rounds):
            c = _pick(_uniform(key, i, s_combo), 4)
            m = off[c] + _pick(_uniform(key, i, s_member), cnt[c])
            combo[i] = <signed char>c
            member[i] = m
            pattern[i] = <signed char>_categorical(_uniform(key, i, s_out), table[m])
    return combo_a, member_a, pattern_a


def sample_product(seed, Py_ssize_t rounds, choice_counts, atom_cdf):
    cdef const int64_t[:, :] cc = np.ascontiguousarray(choice_counts, dtype=np.int64)
    cdef const double[:] acdf = np.ascontiguousarray(atom_cdf, dtype=np.float64)
    cdef uint64_t key = seed_key(seed)
    combo_a = np.empty(rounds, dtype=np.int8)
    choices_a = np.empty((rounds, 3), dtype=np.int64)
    valuation_a = np.empty(rounds, dtype=np.int8)
    pattern_a = np.empty(rounds, dtype=np.int8)
    cdef signed char[:] combo = combo_a
    cdef int64_t[:, :] choices = choices_a
    cdef signed char[:] valuation = valuation_a
    cdef signed char[:] pattern = pattern_a
    cdef Py_ssize_t i
    cdef int r
    cdef int64_t c, v, j, pat
    with nogil:
        for i in range(rounds):
            c = _pick(_uniform(key, i, 0), 4)
            for r in range(3):
                j = _AXES[c][r]
                choices[i, r] = _pick(_uniform(key, i, 1 + r), cc[r, j])
            v = _categorical(_uniform(key, i, 4), acdf)
            pat = 0
            for r in range(3):
                pat |= ((v >> (5 - (2 * r + _AXES[c][r]))) & 1) << (2 - r)
            combo[i] = <signed char>c
            valuation[i] = <signed char>v
            pattern[i] = <signed char>pat
    return combo_a, choices_a, valuation_a, pattern_a


cdef inline int64_t _gcd(int64_t a, int64_t b) nogil:
    cdef int64_t t
    if a < 0:
        a = -a
    if b < 0:
        b = -b
    while b:
        t = a % b
        a = b
        b = t
    return a


def pythagorean_quadruples(int64_t bound):
    cdef Py_ssize_t cap = 1024, n = 0
    cdef cnp.ndarray[cnp.int64_t, ndim=2] buf = np.empty((cap, 4), dtype=np.int64)
    cdef int64_t q, a, b, rest, s, sign
    for q in range(1, bound + 1):
        for a in range(-q, q + 1):
            for b in range(-q, q + 1):
                rest = q * q - a * a - b * b
                if rest < 0:
                    continue
                s = <int64_t>sqrt(<double>rest)
                while (s + 1) * (s + 1) <= rest:
                    s += 1
                while s * s > rest:
                    s -= 1
                if s * s != rest:
                    continue
                if _gcd(_gcd(a, b), _gcd(s, q)) != 1:
                    continue
                for sign in (-1, 1):
                    if sign == 1 and s == 0:
                        break
                    if n == cap:
                        cap *= 2
                        buf = np.resize(buf, (cap, 4))
                    buf[n, 0] = a
                    buf[n, 1] = b
                    buf[n, 2] = sign * s
                    buf[n, 3] = q
                    n += 1
    out = buf[:n].copy()
    order = np.lexsort((out[:, 2], out[:, 1], out[:, 0], out[:, 3]))
    return out[order]


cdef extern from "complex.h" nogil:
    double cabs(double complex)
    double complex conj(double complex)


def jacobi_hermitian(m, double tol, int max_sweeps):
    """Cyclic complex Jacobi; same contract as ``pykernels.jacobi_hermitian``."""
    a_arr = np.array(m, dtype=np.complex128, copy=True, order="C")
    cdef Py_ssize_t n = a_arr.shape[0]
    v_arr = np.eye(n, dtype=np.complex128)
    cdef double complex[:, ::1] a = a_arr
    cdef double complex[:, ::1] v = v_arr
    cdef double thresh = tol * max(1.0, float(np.abs(a_arr).max()))
    cdef Py_ssize_t p, q, i
    cdef int sweep
    cdef double mag, theta, t, c, s, off
    cdef double complex apq, phase, j10, j11, x, y
    cdef bint converged = False
    with nogil:
        for sweep in range(max_sweeps + 1):
            off = 0.0
            for p in range(n - 1):
                for q in range(p + 1, n):
                    if cabs(a[p, q]) > off:
                        off = cabs(a[p, q])
            if off < thresh:
                converged = True
                break
            if sweep == max_sweeps:
                break
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = a[p, q]
                    mag = cabs(apq)
                    if mag < thresh:
                        continue
                    phase = conj(apq / mag)
                    theta = (a[q, q].real - a[p, p].real) / (2.0 * mag)
                    if abs(theta) > 1e150:
                        t = 0.5 / theta
                    else:
                        t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + sqrt(theta * theta + 1.0))
                    c = 1.0 / sqrt(t * t + 1.0)
                    s = t * c
                    j10 = -s * phase
                    j11 = c * phase
                    for i in range(n):
                        x = a[i, p]
                        y = a[i, q]
                        a[i, p] = x * c + y * j10
                        a[i, q] = x * s + y * j11
                    for i in range(n):
                        x = a[p, i]
                        y = a[q, i]
                        a[p, i] = x * c + y * conj(j10)
                        a[q, i] = x * s + y * conj(j11)
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    for i in range(n):
                        x = v[i, p]
                        y = v[i, q]
                        v[i, p] = x * c + y * j10
                        v[i, q] = x * s + y * j11
    if not converged:
        return None, None
    w = a_arr.diagonal().real.copy()
    order = np.argsort(w, kind="stable")
    return w[order], v_arr[:, order]
