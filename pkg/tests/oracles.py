"""Slow reference resolvers used to check the fast engines.

Both return ``{pid: (kind, time, partners)}`` with 1-based ids, ``kind`` one
of ``pair``, ``triple``, ``absorb_left``, ``absorb_right``, ``survive`` and
``partners`` the frozenset of ids removed in the same event (itself included).
"""

from fractions import Fraction


def halfstep(velocities, positions, window):
    """March integer configurations in half time steps.

    In doubled coordinates every particle moves by its velocity each half
    step, all starting points are even, so opposite movers always meet on a
    grid point and never jump over each other. Left barrier at 0 absorbs,
    right-movers reaching ``window`` are absorbed there. Times are returned as
    ``2t`` integers.
    """
    alive = {i + 1: (2 * int(x), int(v)) for i, (x, v) in enumerate(zip(positions, velocities))}
    fates = {}
    step = 0
    limit = 4 * int(window) + 4
    while alive and step <= limit:
        if not any(v for _, v in alive.values()):
            break
        step += 1
        alive = {pid: (X + v, v) for pid, (X, v) in alive.items()}
        by_pos = {}
        for pid, (X, v) in alive.items():
            by_pos.setdefault(X, []).append(pid)
        for X, ids in by_pos.items():
            if len(ids) >= 2:
                kind = "triple" if len(ids) == 3 else "pair"
                assert len(ids) <= 3
                for pid in ids:
                    fates[pid] = (kind, step, frozenset(ids))
                    del alive[pid]
        for pid, (X, v) in list(alive.items()):
            if X <= 0 and v == -1:
                fates[pid] = ("absorb_left", step, frozenset([pid]))
                del alive[pid]
            elif X >= 2 * window and v == 1:
                fates[pid] = ("absorb_right", step, frozenset([pid]))
                del alive[pid]
    for pid in alive:
        fates[pid] = ("survive", None, frozenset())
    return fates


def earliest_pair(velocities, positions, left=Fraction(0), right=None):
    """Repeatedly remove the earliest collision among adjacent alive pairs.

    Exact rational arithmetic; simultaneous events are processed together
    and a stationary particle hit from both sides at once forms a triple.
    """
    xs = [Fraction(x) for x in positions]
    vs = [int(v) for v in velocities]
    n = len(xs)
    right = Fraction(right) if right is not None else None
    alive = list(range(n))
    fates = {}

    def meet(a, b):
        if a is None:
            return xs[b] - left if vs[b] == -1 else None
        if b is None:
            return right - xs[a] if (right is not None and vs[a] == 1) else None
        if vs[a] == 1 and vs[b] == -1:
            return (xs[b] - xs[a]) / 2
        if vs[a] == 1 and vs[b] == 0:
            return xs[b] - xs[a]
        if vs[a] == 0 and vs[b] == -1:
            return xs[b] - xs[a]
        return None

    while alive:
        cands = []
        seq = [None, *alive, None]
        for a, b in zip(seq[:-1], seq[1:]):
            if a is None and b is None:
                continue
            t = meet(a, b)
            if t is not None:
                cands.append((t, a, b))
        if not cands:
            break
        t0 = min(c[0] for c in cands)
        groups = []
        for t, a, b in cands:
            if t != t0:
                continue
            members = {m for m in (a, b) if m is not None}
            for g in groups:
                if g & members:
                    g |= members
                    break
            else:
                groups.append(set(members))
        for g in groups:
            ids = frozenset(m + 1 for m in g)
            if len(g) == 1:
                (m,) = g
                kind = "absorb_left" if vs[m] == -1 else "absorb_right"
            else:
                kind = "triple" if len(g) == 3 else "pair"
            for m in g:
                fates[m + 1] = (kind, t0, ids)
        removed = set().union(*groups)
        alive = [m for m in alive if m not in removed]
    for m in alive:
        fates[m + 1] = ("survive", None, frozenset())
    return fates


_KIND = {0: "pair", 1: "triple", 2: "absorb_left", 3: "absorb_right"}


def engine_fates(result, doubled=False):
    """Same format from a ``ResolutionResult``."""
    out = {}
    for i in range(result.fate_kind.size):
        e = int(result.fate_event[i])
        if e < 0:
            out[i + 1] = ("survive", None, frozenset())
            continue
        t = Fraction(float(result.times[e]))
        if doubled:
            t = int(2 * t)
        ids = frozenset(int(k) for k in result.ids[e] if k)
        out[i + 1] = (_KIND[int(result.kinds[e])], t, ids)
    return out
