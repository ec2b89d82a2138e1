"""Pure-Python marker matching; the reference the compiled kernel must agree with."""


def _boundary_after(title, end):
    return end >= len(title) or not title[end].isalnum()


def match_prefix(title, markers):
    """Index and end offset of the first marker (in order) that opens ``title``.

    Markers ending in a letter or digit must be followed by a non-alphanumeric
    character, so "Retraction for" does not fire on "Retraction formula".
    Returns ``(-1, 0)`` when nothing matches.
    """
    for i, m in enumerate(markers):
        if m and title.startswith(m):
            end = len(m)
            if m[-1].isalnum() and not _boundary_after(title, end):
                continue
            return i, end
    return -1, 0


def match_postfix(title, markers):
    """Index and start offset of the first marker that closes ``title``."""
    n = len(title)
    for i, m in enumerate(markers):
        if m and title.endswith(m):
            start = n - len(m)
            if m[0].isalnum() and start > 0 and title[start - 1].isalnum():
                continue
            return i, start
    return -1, 0


def scan_titles(titles, prefixes, postfixes):
    """Batch pre-filter: for each title, (0, i) prefix hit, (1, i) postfix hit, or None."""
    out = []
    for t in titles:
        t = t.strip() if t else ""
        i, _ = match_prefix(t, prefixes)
        if i >= 0:
            out.append((0, i))
            continue
        i, _ = match_postfix(t, postfixes)
        out.append((1, i) if i >= 0 else None)
    return out
