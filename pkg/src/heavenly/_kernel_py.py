"""Pure-Python sparse polynomial kernels.

A polynomial is a ``dict`` mapping a packed monomial (a non-negative ``int``
holding one 16-bit exponent slot per variable) to a nonzero rational
coefficient.  Monomial multiplication is integer addition.  Every function
here has a twin with the same signature in the compiled ``_kernel`` module.
"""

import heapq

SLOT_BITS = 16
SLOT_MASK = (1 << SLOT_BITS) - 1


def add(a, b):
    if len(a) < len(b):
        a, b = b, a
    r = dict(a)
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


def sub(a, b):
    r = dict(a)
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


def neg(a):
    return {m: -c for m, c in a.items()}


def scale(a, k):
    if not k:
        return {}
    return {m: c * k for m, c in a.items()}


def mul_term(a, mono, k):
    if not k:
        return {}
    return {m + mono: c * k for m, c in a.items()}


def mul(a, b):
    if len(a) > len(b):
        a, b = b, a
    if len(a) == 1:
        for ma, ca in a.items():
            return {mb + ma: cb * ca for mb, cb in b.items()}
    r = {}
    get = r.get
    bi = list(b.items())
    for ma, ca in a.items():
        for mb, cb in bi:
            m = ma + mb
            r[m] = get(m, 0) + ca * cb
    return {m: c for m, c in r.items() if c}


def diff(a, shift):
    """Partial derivative with respect to the variable living at bit ``shift``."""
    r = {}
    unit = 1 << shift
    for m, c in a.items():
        e = (m >> shift) & SLOT_MASK
        if e:
            r[m - unit] = c * e
    return r


def div_exact(a, b, guard):
    """Return ``a / b`` if ``b`` divides ``a`` exactly, else ``None``.

    Division runs in the lexicographic order given by the packed integers;
    ``guard`` has the top bit of every live slot set and is used for the
    borrow-free divisibility test on monomials.
    """
    if not b:
        raise ZeroDivisionError("division by zero polynomial")
    if not a:
        return {}
    lb = max(b)
    cb = b[lb]
    rest = [(m, c) for m, c in b.items() if m != lb]
    r = dict(a)
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


def mono_min(ms, guard):
    """Slot-wise minimum of packed monomials (gcd of monomials).

    Uses the guard bits as borrow catchers: a slot's guard bit survives
    ``(r | guard) - m`` exactly when ``r >= m`` in that slot.
    """
    it = iter(ms)
    r = next(it, 0)
    for m in it:
        if not r:
            break
        ge = ((r | guard) - m) & guard
        sel = (ge >> (SLOT_BITS - 1)) * SLOT_MASK
        r = (m & sel) | (r & ~sel)
    return r
