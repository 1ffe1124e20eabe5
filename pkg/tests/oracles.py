"""Independent reference implementations used only to check the package.

Nothing here may call back into the code paths under test: equality of
amalgam elements is decided by alternating-word reduction (normal form
theorem), distances by plain BFS, orbit counts by applying every stabilizer
element, and free-group quasimorphism values by string counting.
"""

from __future__ import annotations

from collections import deque


def reduce_amalgam_word(instance, letters):
    """Reduce a word over the factor groups to an alternating non-subgroup word.

    Returns (letters, c_flag): the reduced alternating word of letters lying
    outside the amalgamated subgroup, plus a trailing factor-A element index
    absorbing whatever collapsed (identity when nothing is left over).
    """
    fa = instance.factors[0]
    word = []
    for factor, elt in letters:
        word.append((factor, elt))
        # repeatedly merge adjacent same-factor letters and absorb subgroup letters
        while True:
            changed = False
            if len(word) >= 2 and word[-1][0] == word[-2][0]:
                f = word[-1][0]
                g = instance.factors[f].group
                merged = g.mul(word[-2][1], word[-1][1])
                word[-2:] = [(f, merged)]
                changed = True
            if word:
                f, x = word[-1]
                fd = instance.factors[f]
                if x == fd.group.identity:
                    word.pop()
                    changed = True
                elif x in fd.inv_image:
                    c = fd.inv_image[x]
                    word.pop()
                    if word:
                        pf, px = word[-1]
                        pg = instance.factors[pf].group
                        word[-1] = (pf, pg.mul(px, instance.factors[pf].image[c]))
                    else:
                        word.append((0, fa.image[c]))
                        break  # a lone subgroup letter in factor A; stop
                    changed = True
            if not changed:
                break
    return word


def amalgam_words_equal(instance, letters_u, letters_w) -> bool:
    """Element equality by reduction of u * w^-1 (Britton-style, independent)."""
    inv_w = [
        (f, instance.factors[f].group.inv(x)) for f, x in reversed(list(letters_w))
    ]
    reduced = reduce_amalgam_word(instance, list(letters_u) + inv_w)
    if not reduced:
        return True
    if len(reduced) == 1:
        f, x = reduced[0]
        return x == instance.factors[f].group.identity
    return False


def bfs_distance(view, x, y, limit=200000):
    """Shortest-path distance using only view.neighbors."""
    if x == y:
        return 0
    seen = {x}
    frontier = deque([(x, 0)])
    while frontier:
        v, d = frontier.popleft()
        for w in view.neighbors(v):
            if w == y:
                return d + 1
            if w not in seen:
                seen.add(w)
                frontier.append((w, d + 1))
                if len(seen) > limit:
                    raise RuntimeError("bfs oracle exceeded limit")
    raise RuntimeError("bfs oracle: target not reachable")


def paths_from(view, start, steps):
    """All non-backtracking vertex paths of the given raw step count."""
    out = []

    def grow(path):
        if len(path) == steps + 1:
            out.append(tuple(path))
            return
        for w in view.raw_neighbors(path[-1]):
            if len(path) >= 2 and w == path[-2]:
                continue
            path.append(w)
            grow(path)
            path.pop()

    grow([start])
    return out


def orbit_count_by_stabilizer(view, paths):
    """Number of Stab(base)-orbits among base-anchored paths, by exhaustion."""
    remaining = set(paths)
    stab = view.stabilizer(paths[0][0]) if paths else []
    count = 0
    while remaining:
        p = min(remaining)
        count += 1
        for s in stab:
            remaining.discard(tuple(view.act(s, v) for v in p))
    return count


def o_paths_from_base(view, n):
    """All oriented paths from the base with orbit length n and o-vertex ends."""
    out = []

    def grow(path, o_count):
        v = path[-1]
        if o_count == n + 1 and view.is_o_vertex(v):
            out.append(tuple(path))
            return
        for w in view.raw_neighbors(path[-1]):
            if len(path) >= 2 and w == path[-2]:
                continue
            path.append(w)
            grow(path, o_count + (1 if view.is_o_vertex(w) else 0))
            path.pop()

    grow([view.base], 1)
    return out


def count_subwords(haystack: tuple, needle: tuple) -> int:
    """Occurrences of needle as a contiguous subword of haystack."""
    n, m = len(haystack), len(needle)
    if m == 0 or m > n:
        return 0
    return sum(1 for i in range(n - m + 1) if haystack[i : i + m] == needle)


def brooks_value(g_word: tuple, w_word: tuple) -> int:
    """Subword-counting quasimorphism on a free group: #w - #w^-1."""
    w_inv = tuple(-x for x in reversed(w_word))
    return count_subwords(g_word, w_word) - count_subwords(g_word, w_inv)
