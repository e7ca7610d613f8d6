"""Hot loops for the annihilation dynamics.

Two engines live here:

``resolve_heap``
    Event-driven resolution of a finite window. Alive particles form a
    doubly linked list; candidate collisions between adjacent pairs sit in a
    binary heap keyed by ``(time, position)`` and are invalidated lazily.

``scan_halfline``
    Streaming resolution of the half-line process as particles are revealed
    from the left. Revealing a particle never changes the outcome to its left
    except through the first worldline a new left-mover crosses, so the
    process state reduces to two stacks (stationary candidates and particles
    escaping to the right). One pass, O(n) amortised.

Both are plain functions over numpy arrays when numba is disabled.
Velocities are int8 in {-1, 0, 1}; discrete positions are integers stored in
float64, so every time and position computed below is exact for them.
"""

import heapq

import numpy as np

from ._jit import njit

PAIRWISE = 0
TRIPLE = 1
ABSORB_LEFT = 2
ABSORB_RIGHT = 3

SURVIVOR = 0
ANNIHILATED = 1
ABSORBED = 2

# first-particle classification used by scan_halfline
FIRST_ESCAPING = 0
FIRST_STAY = 1
FIRST_LEFT = 2
FIRST_TRIPLE = 3
FIRST_NOT_RIGHT = 4

STOP_NONE = 0
STOP_HIT = 1
STOP_FIRST = 2
STOP_R = 3

# fate codes written by scan_halfline when recording
REC_SURVIVOR = 0
REC_PAIR = 1
REC_TRIPLE = 2
REC_ABSORB_LEFT = 3
REC_ABSORB_RIGHT = 4


@njit
def _pair_event(a, b, x, v, n, left_pos, right_pos):
    """Collision (time, position) of adjacent a < b; -1 / n are the barriers."""
    if a == -1:
        if v[b] == -1:
            return x[b] - left_pos, left_pos
        return np.inf, 0.0
    if b == n:
        if v[a] == 1:
            return right_pos - x[a], right_pos
        return np.inf, 0.0
    va = v[a]
    vb = v[b]
    if va == 1:
        if vb == -1:
            return (x[b] - x[a]) / 2.0, (x[a] + x[b]) / 2.0
        if vb == 0:
            return x[b] - x[a], x[b]
    elif va == 0 and vb == -1:
        return x[b] - x[a], x[a]
    return np.inf, 0.0


@njit
def resolve_heap(x, v, left_pos, left_closed, right_pos, right_closed, corrupt,
                 watch=-1, t_stop=np.inf):
    """Resolve a window; optionally stop once particle ``watch`` is gone or the
    clock reaches ``t_stop`` (events at or after it are left unprocessed)."""
    n = x.shape[0]
    alive = np.zeros(n, dtype=np.bool_)
    nxt = np.empty(n, dtype=np.int64)
    prv = np.empty(n, dtype=np.int64)
    fate_kind = np.zeros(n, dtype=np.int8)
    fate_event = np.full(n, -1, dtype=np.int64)

    # open endpoints freeze a particle sitting exactly on them
    last = -1
    for i in range(n):
        if x[i] == left_pos and not left_closed:
            continue
        if x[i] == right_pos and not right_closed:
            continue
        alive[i] = True
        prv[i] = last
        if last >= 0:
            nxt[last] = i
        last = i
    if last >= 0:
        nxt[last] = n

    heap = [(np.inf, 0.0, np.int64(-2), np.int64(-2))]
    first = -1
    for i in range(n):
        if alive[i]:
            first = i
            break
    if first >= 0:
        t, y = _pair_event(-1, first, x, v, n, left_pos, right_pos)
        if t < np.inf:
            heap.append((t, y, np.int64(-1), np.int64(first)))
        i = first
        while i != n:
            j = nxt[i]
            t, y = _pair_event(i, j, x, v, n, left_pos, right_pos)
            if t < np.inf:
                heap.append((t, y, np.int64(i), np.int64(j)))
            i = j
    heapq.heapify(heap)

    ev_t = np.empty(n, dtype=np.float64)
    ev_y = np.empty(n, dtype=np.float64)
    ev_kind = np.empty(n, dtype=np.int8)
    ev_ids = np.zeros((n, 3), dtype=np.int64)
    m = 0

    while len(heap) > 0:
        t, y, a, b = heapq.heappop(heap)
        if t == np.inf or t >= t_stop:
            break
        if a == -1:
            if not alive[b] or prv[b] != -1:
                continue
            kind = ABSORB_LEFT
            lo = b
            hi = b
        elif b == n:
            if not alive[a] or nxt[a] != n:
                continue
            kind = ABSORB_RIGHT
            lo = a
            hi = a
        else:
            if not alive[a] or not alive[b] or nxt[a] != b:
                continue
            kind = PAIRWISE
            lo = a
            hi = b
            if v[a] == 1 and v[b] == 0:
                c = nxt[b]
                if c != n and v[c] == -1 and x[c] - x[b] == t:
                    if corrupt:
                        lo = b
                        hi = c
                    else:
                        kind = TRIPLE
                        hi = c
            elif v[a] == 0 and v[b] == -1:
                c = prv[a]
                if c != -1 and v[c] == 1 and x[a] - x[c] == t:
                    if not corrupt:
                        kind = TRIPLE
                        lo = c

        ev_t[m] = t
        ev_y[m] = y
        ev_kind[m] = kind
        k = 0
        i = lo
        while True:
            alive[i] = False
            ev_ids[m, k] = i + 1
            fate_event[i] = m
            fate_kind[i] = ABSORBED if kind >= ABSORB_LEFT else ANNIHILATED
            k += 1
            if i == hi:
                break
            i = nxt[i]
        m += 1
        if watch >= 0 and not alive[watch]:
            break

        left_nb = prv[lo]
        right_nb = nxt[hi]
        if left_nb >= 0:
            nxt[left_nb] = right_nb
        if right_nb < n:
            prv[right_nb] = left_nb
        if left_nb == -1 and right_nb == n:
            continue
        t2, y2 = _pair_event(left_nb, right_nb, x, v, n, left_pos, right_pos)
        if t2 < np.inf:
            heapq.heappush(heap, (t2, y2, np.int64(left_nb), np.int64(right_nb)))

    return ev_t[:m], ev_y[:m], ev_kind[:m], ev_ids[:m], fate_kind, fate_event


@njit
def scan_halfline(x, v, start, stop, frontier, stop_mode, record):
    """Resolve particles ``start..stop-1`` on a half-line with an absorbing
    barrier just left of ``x[start]``.

    Everything beyond ``frontier`` is unrevealed (frozen). Returns
    ``(hit, n_done, first_fate, first_decided, count, rec_kind, rec_partner)``
    where ``hit`` is the array index of the first particle absorbed at the
    origin (-1 if none) and ``count`` the number of qualifying indices seen.
    A first-particle fate of FIRST_STAY is decided once its light cone
    ``2 * target - x[start]`` lies strictly below the next revealed position.
    """
    m = stop - start
    st_pos = np.empty(m, dtype=np.float64)
    st_death = np.empty(m, dtype=np.float64)
    st_killer = np.empty(m, dtype=np.int64)
    st_id = np.empty(m, dtype=np.int64)
    esc = np.empty(m, dtype=np.int64)
    nrec = m if record else 0
    rec_kind = np.zeros(nrec, dtype=np.int8)
    rec_partner = np.full(nrec, -1, dtype=np.int64)
    sp = 0
    ep = 0
    hit = -1
    count = 0
    n_done = 0
    if m <= 0:
        return hit, n_done, FIRST_NOT_RIGHT, True, count, rec_kind, rec_partner

    x1 = x[start]
    if v[start] == 1:
        first_fate = FIRST_ESCAPING
        first_decided = False
    else:
        first_fate = FIRST_NOT_RIGHT
        first_decided = True
    target = 0.0

    for j in range(start, stop):
        xj = x[j]
        if first_fate == FIRST_STAY and not first_decided and 2.0 * target - x1 < xj:
            first_decided = True
        if stop_mode == STOP_HIT and hit >= 0:
            break
        if stop_mode == STOP_FIRST and first_decided:
            break
        if stop_mode == STOP_R and first_decided and (first_fate != FIRST_STAY or hit >= 0):
            break

        vj = v[j]
        if vj == 1:
            esc[ep] = j
            ep += 1
            if record:
                rec_kind[j - start] = REC_ABSORB_RIGHT
        elif vj == 0:
            if ep > 0:
                ep -= 1
                r = esc[ep]
                st_pos[sp] = xj
                st_death[sp] = xj - x[r]
                st_killer[sp] = r
                st_id[sp] = j
                sp += 1
                if r == start:
                    count += 1
                    first_fate = FIRST_STAY
                    target = xj
                if record:
                    rec_kind[j - start] = REC_PAIR
                    rec_partner[j - start] = r
                    rec_kind[r - start] = REC_PAIR
                    rec_partner[r - start] = j
            else:
                st_pos[sp] = xj
                st_death[sp] = np.inf
                st_killer[sp] = -1
                st_id[sp] = j
                sp += 1
        else:
            while True:
                if sp > 0 and (ep == 0 or st_pos[sp - 1] > x[esc[ep - 1]]):
                    arrival = xj - st_pos[sp - 1]
                    d = st_death[sp - 1]
                    if arrival < d:
                        w = st_killer[sp - 1]
                        vid = st_id[sp - 1]
                        sp -= 1
                        if w >= 0:
                            # the stationary's old killer now runs free
                            esc[ep] = w
                            ep += 1
                            if w == start:
                                first_fate = FIRST_ESCAPING
                            if record:
                                rec_kind[w - start] = REC_ABSORB_RIGHT
                                rec_partner[w - start] = -1
                        if record:
                            rec_kind[j - start] = REC_PAIR
                            rec_partner[j - start] = vid
                            rec_kind[vid - start] = REC_PAIR
                            rec_partner[vid - start] = j
                        break
                    elif arrival == d:
                        w = st_killer[sp - 1]
                        vid = st_id[sp - 1]
                        sp -= 1
                        if w == start:
                            first_fate = FIRST_TRIPLE
                            first_decided = True
                        if record:
                            rec_kind[j - start] = REC_TRIPLE
                            rec_kind[vid - start] = REC_TRIPLE
                            rec_kind[w - start] = REC_TRIPLE
                            rec_partner[j - start] = vid
                            rec_partner[vid - start] = vid
                            rec_partner[w - start] = vid
                        break
                    else:
                        sp -= 1
                elif ep > 0:
                    ep -= 1
                    r = esc[ep]
                    if r == start:
                        first_fate = FIRST_LEFT
                        first_decided = True
                    if record:
                        rec_kind[j - start] = REC_PAIR
                        rec_partner[j - start] = r
                        rec_kind[r - start] = REC_PAIR
                        rec_partner[r - start] = j
                    break
                else:
                    if hit < 0:
                        hit = j
                    if record:
                        rec_kind[j - start] = REC_ABSORB_LEFT
                    break
        n_done = j - start + 1

    if n_done == m and first_fate == FIRST_STAY and not first_decided:
        if 2.0 * target - x1 < frontier:
            first_decided = True
    return hit, n_done, first_fate, first_decided, count, rec_kind, rec_partner
