# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of flips.expand_key; output must match it exactly."""

from libc.string cimport memcpy

from .flips import CapExceeded

DEF NMAX = 16
DEF FMAX = 64

cdef enum:
    W1 = 0
    W2 = 1
    W3 = 2
    W4 = 3
    W5 = 4
    T1 = 5
    T2 = 6

cdef struct State:
    int n
    int q
    long long A[NMAX][NMAX]
    long long r[NMAX]
    int kinds[NMAX]

cdef struct Flip:
    int kind
    int site
    int sel  # W2: 0 up / 1 down; W3, W4: 0 left / 1 right; T2: 0 min_saddle / 1 saddle_max


cdef int decode(bytes key, State* s, int* ptype) except -1:
    cdef const unsigned char* b = key
    cdef int n = b[2], width = b[4], i, j, t = 0, off
    cdef short v16
    cdef long long v64
    if b[0] != 1:
        raise ValueError("unsupported key version")
    if n > NMAX:
        raise ValueError("too many cycles for the compiled kernel")
    ptype[0] = b[1]
    s.n = n
    s.q = b[3]
    for i in range(n):
        s.kinds[i] = b[5 + i]
        s.A[i][i] = -2
    off = 5 + n
    for i in range(n):
        for j in range(i + 1, n):
            if width == 2:
                v16 = <short>(b[off] | (b[off + 1] << 8))
                s.A[i][j] = v16
                off += 2
            else:
                v64 = 0
                for t in range(8):
                    v64 |= (<long long>b[off + t]) << (8 * t)
                s.A[i][j] = v64
                off += 8
            s.A[j][i] = s.A[i][j]
    for i in range(n):
        if width == 2:
            v16 = <short>(b[off] | (b[off + 1] << 8))
            s.r[i] = v16
            off += 2
        else:
            v64 = 0
            for t in range(8):
                v64 |= (<long long>b[off + t]) << (8 * t)
            s.r[i] = v64
            off += 8
    return 0


cdef bytes encode(State* s, int ptype):
    cdef int n = s.n, i, j, t, width = 2, off
    cdef long long v
    cdef unsigned char buf[5 + NMAX + 8 * (NMAX * NMAX)]
    for i in range(n):
        for j in range(i + 1, n):
            v = s.A[i][j]
            if v < -32768 or v > 32767:
                width = 8
        v = s.r[i]
        if v < -32768 or v > 32767:
            width = 8
    buf[0] = 1
    buf[1] = ptype
    buf[2] = n
    buf[3] = s.q
    buf[4] = width
    for i in range(n):
        buf[5 + i] = s.kinds[i]
    off = 5 + n
    for i in range(n):
        for j in range(i + 1, n):
            v = s.A[i][j]
            for t in range(width):
                buf[off + t] = (v >> (8 * t)) & 0xFF
            off += width
    for i in range(n):
        v = s.r[i]
        for t in range(width):
            buf[off + t] = (v >> (8 * t)) & 0xFF
        off += width
    return buf[:off]


cdef inline void reflect(State* s, int m, int c):
    cdef long long a = s.A[m][c], v
    cdef int k
    if a == 0:
        return
    for k in range(s.n):
        if k != m:
            v = s.A[m][k] + a * s.A[c][k]
            s.A[m][k] = v
            s.A[k][m] = v
    s.r[m] += a * s.r[c]


cdef void permute(State* s, int* p):
    cdef State t
    cdef int i, j, n = s.n
    memcpy(&t, s, sizeof(State))
    for i in range(n):
        s.r[i] = t.r[p[i]]
        s.kinds[i] = t.kinds[p[i]]
        for j in range(n):
            s.A[i][j] = t.A[p[i]][p[j]]


cdef inline bint is_real(int k):
    return k <= 2


cdef int blocks_of(State* s, int* start, int* length):
    cdef int i = 0, nb = 0
    while i < s.n:
        start[nb] = i
        if is_real(s.kinds[i]):
            length[nb] = 1
            i += 1
        else:
            length[nb] = 2
            i += 2
        nb += 1
    return nb


cdef int enumerate_flips(State* s, int* codes, Flip* out):
    cdef int n = s.n, q = s.q, i, b, nf = 0, c = 0, M, nb, reals_before
    cdef int neg[NMAX]
    cdef int start[NMAX]
    cdef int length[NMAX]
    cdef long long a
    for i in range(n):
        if is_real(s.kinds[i]):
            neg[i] = c < q
            c += 1
    M = c
    nb = blocks_of(s, start, length)
    for i in range(n - 1):
        if is_real(s.kinds[i]) and is_real(s.kinds[i + 1]) and s.A[i][i + 1] == 0:
            if codes[0] or neg[i] == neg[i + 1]:
                out[nf].kind = W1; out[nf].site = i; out[nf].sel = 0; nf += 1
    if q < M:
        out[nf].kind = W2; out[nf].site = 0; out[nf].sel = 0; nf += 1
    if q > 0:
        out[nf].kind = W2; out[nf].site = 0; out[nf].sel = 1; nf += 1
    for b in range(nb - 1):
        if length[b] == 1 and length[b + 1] == 2:
            out[nf].kind = W3; out[nf].site = start[b + 1]; out[nf].sel = 0; nf += 1
        elif length[b] == 2 and length[b + 1] == 1:
            out[nf].kind = W3; out[nf].site = start[b]; out[nf].sel = 1; nf += 1
    for b in range(nb - 1):
        if length[b] == 2 and length[b + 1] == 2:
            out[nf].kind = W4; out[nf].site = start[b]; out[nf].sel = 0; nf += 1
            out[nf].kind = W4; out[nf].site = start[b]; out[nf].sel = 1; nf += 1
    for b in range(nb):
        i = start[b]
        if length[b] == 2 and s.A[i][i + 1] == 0:
            out[nf].kind = W5; out[nf].site = i; out[nf].sel = 0; nf += 1
    for i in range(n - 1):
        if is_real(s.kinds[i]) and is_real(s.kinds[i + 1]):
            a = s.A[i][i + 1]
            if (s.kinds[i] - s.kinds[i + 1] == 1 or s.kinds[i + 1] - s.kinds[i] == 1) \
                    and (a == 1 or a == -1) and neg[i] == neg[i + 1]:
                out[nf].kind = T1; out[nf].site = i; out[nf].sel = 0; nf += 1
    reals_before = 0
    for b in range(nb):
        i = start[b]
        if length[b] == 1:
            reals_before += 1
            continue
        a = s.A[i][i + 1]
        if (a != 1 and a != -1) or reals_before < q:
            continue
        if codes[5] and (s.r[i] * s.r[i] != 4 or s.r[i + 1] * s.r[i + 1] != 4):
            continue
        out[nf].kind = T2; out[nf].site = i; out[nf].sel = 0; nf += 1
        out[nf].kind = T2; out[nf].site = i; out[nf].sel = 1; nf += 1
    return nf


cdef void apply_flip(State* s, Flip f, int* codes):
    cdef int n = s.n, i = f.site, k, t, c, m0, m1, o0, o1
    cdef int p[NMAX]
    cdef long long e, col[NMAX], row[NMAX], rv
    cdef int sgn
    for t in range(n):
        p[t] = t
    if f.kind == W1 or f.kind == W5:
        p[i] = i + 1
        p[i + 1] = i
        if f.kind == W1:
            permute(s, p)
        else:
            k = s.kinds[i]
            permute(s, p)
            s.kinds[i] = 3
            s.kinds[i + 1] = 4
    elif f.kind == W2:
        c = 0
        k = -1
        for t in range(n):
            if is_real(s.kinds[t]):
                if (f.sel == 0 and c == s.q) or (f.sel == 1 and c == s.q - 1):
                    k = t
                c += 1
        sgn = -1 if f.sel == 0 else 1
        if codes[1]:
            for t in range(n):
                col[t] = s.A[t][k]
            for t in range(n):
                s.r[t] += sgn * col[t]
        s.q += 1 if f.sel == 0 else -1
    elif f.kind == W3:
        if f.sel == 0:
            c = i - 1
            reflect(s, i, c)
            if not codes[2]:
                reflect(s, i + 1, c)
            p[i - 1] = i; p[i] = i + 1; p[i + 1] = i - 1
        else:
            c = i + 2
            reflect(s, i, c)
            if not codes[2]:
                reflect(s, i + 1, c)
            p[i] = i + 2; p[i + 1] = i; p[i + 2] = i + 1
        permute(s, p)
    elif f.kind == W4:
        if f.sel == 0:
            m0 = i + 2; m1 = i + 3; o0 = i; o1 = i + 1
        else:
            m0 = i; m1 = i + 1; o0 = i + 2; o1 = i + 3
        if codes[3]:
            if f.sel == 0:
                reflect(s, m0, o0); reflect(s, m0, o1)
                reflect(s, m1, o0); reflect(s, m1, o1)
            else:
                reflect(s, m0, o1); reflect(s, m0, o0)
                reflect(s, m1, o1); reflect(s, m1, o0)
        else:
            reflect(s, m0, o0)
            reflect(s, m1, o1)
        p[i] = i + 2; p[i + 1] = i + 3; p[i + 2] = i; p[i + 3] = i + 1
        permute(s, p)
    elif f.kind == T1:
        c = 0
        k = 0
        for t in range(i):
            if is_real(s.kinds[t]):
                c += 1
        k = c < s.q  # negative side
        if codes[4]:
            e = s.A[i][i + 1]
            for t in range(n):
                row[t] = s.A[i][t] + e * s.A[i + 1][t]
            rv = s.r[i] + e * s.r[i + 1]
            for t in range(n):
                if t != i and t != i + 1:
                    s.A[i][t] = row[t]; s.A[t][i] = row[t]
                    s.A[i + 1][t] = row[t]; s.A[t][i + 1] = row[t]
            s.r[i] = rv
            s.r[i + 1] = rv
            s.A[i][i + 1] = -2
            s.A[i + 1][i] = -2
        s.kinds[i] = 3
        s.kinds[i + 1] = 4
        if k:
            s.q -= 2
    elif f.kind == T2:
        if f.sel == 0:
            s.kinds[i] = 0; s.kinds[i + 1] = 1
        else:
            s.kinds[i] = 1; s.kinds[i + 1] = 2


def expand_key(bytes key, codes):
    """All (flip kind, neighbour key) pairs of a packed state, in enumeration order."""
    cdef State s, t
    cdef int ptype, nf, f, i, j
    cdef int cc[7]
    cdef Flip flips[FMAX]
    cdef long long cap
    for i in range(7):
        cc[i] = codes[i]
    cap = cc[6]
    decode(key, &s, &ptype)
    nf = enumerate_flips(&s, cc, flips)
    out = []
    for f in range(nf):
        memcpy(&t, &s, sizeof(State))
        apply_flip(&t, flips[f], cc)
        for i in range(t.n):
            for j in range(t.n):
                if t.A[i][j] > cap or t.A[i][j] < -cap:
                    raise CapExceeded("entry", f"|{t.A[i][j]}| > {cap}")
        out.append((flips[f].kind, encode(&t, ptype)))
    return out
