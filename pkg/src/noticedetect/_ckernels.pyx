# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled marker matching. Must agree exactly with _pykernels."""


cdef inline bint _alnum(Py_UCS4 c):
    return c.isalnum()


cpdef tuple match_prefix(str title, tuple markers):
    cdef Py_ssize_t i, end, n = len(title), k = len(markers)
    cdef str m
    for i in range(k):
        m = <str>markers[i]
        end = len(m)
        if end > n or end == 0:
            continue
        if title[0] != m[0]:
            continue
        if not title.startswith(m):
            continue
        if _alnum(m[end - 1]) and end < n and _alnum(title[end]):
            continue
        return i, end
    return -1, 0


cpdef tuple match_postfix(str title, tuple markers):
    cdef Py_ssize_t i, start, lm, n = len(title), k = len(markers)
    cdef str m
    for i in range(k):
        m = <str>markers[i]
        lm = len(m)
        if lm > n or lm == 0:
            continue
        if title[n - 1] != m[lm - 1]:
            continue
        if not title.endswith(m):
            continue
        start = n - lm
        if _alnum(m[0]) and start > 0 and _alnum(title[start - 1]):
            continue
        return i, start
    return -1, 0


def scan_titles(titles, tuple prefixes, tuple postfixes):
    cdef list out = []
    cdef str t
    cdef Py_ssize_t i
    for raw in titles:
        t = raw.strip() if raw else ""
        i = match_prefix(t, prefixes)[0]
        if i >= 0:
            out.append((0, i))
            continue
        i = match_postfix(t, postfixes)[0]
        out.append((1, i) if i >= 0 else None)
    return out
