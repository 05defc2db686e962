# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled sparse polynomial kernels; see ``_kernel_py`` for the contract."""

import heapq

cdef int SLOT_BITS = 16
cdef object SLOT_MASK = (1 << 16) - 1


def add(dict a, dict b):
    cdef dict r
    cdef object m, c, s
    if len(a) < len(b):
        a, b = b, a
    r = a.copy()
    for m, c in b.items():
        s = r.get(m)
        if s is None:
            r[m] = c
        else:
            s = s + c
            if s:
                r[m] = s
            else:
                del r[m]
    return r


def sub(dict a, dict b):
    cdef dict r = a.copy()
    cdef object m, c, s
    for m, c in b.items():
        s = r.get(m)
        if s is None:
            r[m] = -c
        else:
            s = s - c
            if s:
                r[m] = s
            else:
                del r[m]
    return r


def neg(dict a):
    return {m: -c for m, c in a.items()}


def scale(dict a, object k):
    if not k:
        return {}
    return {m: c * k for m, c in a.items()}


def mul_term(dict a, object mono, object k):
    if not k:
        return {}
    return {m + mono: c * k for m, c in a.items()}


def mul(dict a, dict b):
    cdef dict r
    cdef list bi
    cdef object ma, ca, mb, cb, m, s
    cdef Py_ssize_t i, nb
    if len(a) > len(b):
        a, b = b, a
    if len(a) == 1:
        for ma, ca in a.items():
            return {mb + ma: cb * ca for mb, cb in b.items()}
    r = {}
    bi = list(b.items())
    nb = len(bi)
    for ma, ca in a.items():
        for i in range(nb):
            mb, cb = <tuple>bi[i]
            m = ma + mb
            s = r.get(m)
            if s is None:
                r[m] = ca * cb
            else:
                r[m] = s + ca * cb
    return {m: s for m, s in r.items() if s}


def diff(dict a, int shift):
    cdef dict r = {}
    cdef object unit = (<object>1) << shift
    cdef object m, c, e
    for m, c in a.items():
        e = (m >> shift) & SLOT_MASK
        if e:
            r[m - unit] = c * e
    return r


def div_exact(dict a, dict b, object guard):
    cdef dict r, q
    cdef list heap, rest
    cdef object lb, cb, lr, cr, t, k, m, c, mm, s
    if not b:
        raise ZeroDivisionError("division by zero polynomial")
    if not a:
        return {}
    lb = max(b)
    cb = b[lb]
    rest = [(m, c) for m, c in b.items() if m != lb]
    r = a.copy()
    heap = [-m for m in r]
    heapq.heapify(heap)
    q = {}
    while r:
        lr = -heapq.heappop(heap)
        cr = r.get(lr)
        if cr is None:
            continue
        if ((lr | guard) - lb) & guard != guard:
            return None
        t = lr - lb
        k = cr / cb
        q[t] = k
        del r[lr]
        for m, c in rest:
            mm = m + t
            s = r.get(mm)
            if s is None:
                r[mm] = -c * k
                heapq.heappush(heap, -mm)
            else:
                s = s - c * k
                if s:
                    r[mm] = s
                else:
                    del r[mm]
    return q


def mono_min(ms, object guard):
    cdef object r, m, ge, sel
    it = iter(ms)
    r = next(it, 0)
    for m in it:
        if not r:
            break
        ge = ((r | guard) - m) & guard
        sel = (ge >> 15) * SLOT_MASK
        r = (m & sel) | (r & ~sel)
    return r
