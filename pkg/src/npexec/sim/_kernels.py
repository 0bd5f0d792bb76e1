"""Event loops for the executor variants.

Everything here is restricted to int64 arrays and scalars so that it
compiles under numba. Tasks are addressed by their position in the task
arrays, not by TaskSpec.id. Job rows use the column layout below; ready
queues append the three ordering keys.
"""
import numpy as np

from .._jit import kernel

BIG = 1 << 62

TIMER = 0
SUBSCRIPTION = 1

P_FIFO = 0
P_STATIC = 1
P_EDF = 2

TASK = 0
INDEX = 1
NOMINAL = 2
ENQ = 3
START = 4
FINISH = 5
ABSDL = 6
SKIPPED = 7
PARENT = 8
EXEC = 9
K1 = 10
K2 = 11
SEQ = 12
NJOB = 10
NRQ = 13


@kernel
def next_timestamp(ts, period, now):
    n = (now - ts) // period + 1
    return ts + n * period, n - 1


@kernel
def _initial_timestamps(kind, phase, horizon):
    n = kind.shape[0]
    nxt = np.full(n, BIG, np.int64)
    for i in range(n):
        if kind[i] == TIMER and phase[i] < horizon:
            nxt[i] = phase[i]
    return nxt


@kernel
def _due_timer(next_rel, rank, t):
    # earliest reached timestamp, ties by rank
    best = -1
    for i in range(next_rel.shape[0]):
        ts = next_rel[i]
        if ts <= t:
            if best < 0 or ts < next_rel[best] or (ts == next_rel[best] and rank[i] < rank[best]):
                best = i
    return best


@kernel
def _advance(ts, period, new_ts, horizon):
    if new_ts < horizon:
        return new_ts
    return BIG


@kernel
def _skipped_in_horizon(ts, period, skipped, horizon):
    if skipped <= 0:
        return 0
    lim = (horizon - 1 - ts) // period
    if lim <= 0:
        return 0
    return min(skipped, lim)


@kernel
def _drop(drops, nd, task, ts, count):
    drops[nd, 0] = task
    drops[nd, 1] = ts
    drops[nd, 2] = count
    return nd + 1


@kernel
def _exec(wcet, exec_tab, task, index):
    if index < exec_tab.shape[1]:
        return exec_tab[task, index]
    return wcet[task]


@kernel
def _release(rq, size, seq, task, nominal, enq, skipped, parent, count, rel_dl, rank, policy):
    idx = count[task]
    count[task] += 1
    absdl = -1
    key = BIG
    if rel_dl[task] >= 0:
        absdl = nominal + rel_dl[task]
        key = absdl
    row = rq[size]
    row[TASK] = task
    row[INDEX] = idx
    row[NOMINAL] = nominal
    row[ENQ] = enq
    row[START] = -1
    row[FINISH] = -1
    row[ABSDL] = absdl
    row[SKIPPED] = skipped
    row[PARENT] = parent
    row[EXEC] = 0
    if policy == P_FIFO:
        row[K1] = 0
        row[K2] = 0
    elif policy == P_STATIC:
        row[K1] = rank[task]
        row[K2] = 0
    else:
        row[K1] = key
        row[K2] = rank[task]
    row[SEQ] = seq
    return size + 1


@kernel
def _pop(rq, size):
    best = 0
    for i in range(1, size):
        a = rq[i]
        b = rq[best]
        if a[K1] < b[K1] or (a[K1] == b[K1] and (a[K2] < b[K2] or (a[K2] == b[K2] and a[SEQ] < b[SEQ]))):
            best = i
    row = rq[best].copy()
    rq[best, :] = rq[size - 1, :]
    return row, size - 1


@kernel
def _record(out, nj, row, start, finish, ex):
    for c in range(NJOB):
        out[nj, c] = row[c]
    out[nj, START] = start
    out[nj, FINISH] = finish
    out[nj, EXEC] = ex
    return nj + 1


@kernel
def _publish(task, t, parent, sub_ptr, sub_idx, msg_t, msg_p, msg_head, msg_cnt, drops, nd):
    depth = msg_t.shape[1]
    for e in range(sub_ptr[task], sub_ptr[task + 1]):
        s = sub_idx[e]
        if msg_cnt[s] == depth:
            h = msg_head[s]
            nd = _drop(drops, nd, s, msg_t[s, h], 1)
            msg_head[s] = (h + 1) % depth
            msg_cnt[s] -= 1
        pos = (msg_head[s] + msg_cnt[s]) % depth
        msg_t[s, pos] = t
        msg_p[s, pos] = parent
        msg_cnt[s] += 1
    return nd


@kernel
def _oldest_msg(msg_t, msg_head, msg_cnt, rank):
    best = -1
    bt = 0
    for s in range(msg_cnt.shape[0]):
        if msg_cnt[s] > 0:
            ts = msg_t[s, msg_head[s]]
            if best < 0 or ts < bt or (ts == bt and rank[s] < rank[best]):
                best = s
                bt = ts
    return best


@kernel
def _take_msg(s, msg_t, msg_p, msg_head, msg_cnt):
    depth = msg_t.shape[1]
    h = msg_head[s]
    mt = msg_t[s, h]
    mp = msg_p[s, h]
    msg_head[s] = (h + 1) % depth
    msg_cnt[s] -= 1
    return mt, mp


@kernel
def ro_kernel(kind, wcet, period, phase, rel_dl, rank, policy, elevated,
              sub_ptr, sub_idx, delta, horizon, exec_tab, depth, cap):
    """Release-only events executor (FIFO or priority-ordered events queue).

    The releaser runs at timestamps and, when elevated, suspends the job in
    progress for ``delta`` per release. The default thread releases pending
    subscription messages (``delta`` each) before every scheduling decision.
    """
    n = kind.shape[0]
    out = np.empty((cap, NJOB), np.int64)
    drops = np.empty((cap + n + 1, 3), np.int64)
    rq = np.empty((cap, NRQ), np.int64)
    count = np.zeros(n, np.int64)
    next_rel = _initial_timestamps(kind, phase, horizon)
    msg_t = np.zeros((n, depth), np.int64)
    msg_p = np.zeros((n, depth), np.int64)
    msg_head = np.zeros(n, np.int64)
    msg_cnt = np.zeros(n, np.int64)
    nj = 0
    nd = 0
    size = 0
    seq = 0
    t = 0
    running = False
    cur = np.zeros(NRQ, np.int64)
    rem = 0
    start = 0
    ex = 0
    while True:
        if not running:
            while True:
                i = _due_timer(next_rel, rank, t)
                if i >= 0:
                    ts = next_rel[i]
                    if elevated:
                        new_ts = ts + period[i]
                        skipped = 0
                    else:
                        new_ts, skipped = next_timestamp(ts, period[i], t)
                        c = _skipped_in_horizon(ts, period[i], skipped, horizon)
                        if c > 0:
                            nd = _drop(drops, nd, i, ts + period[i], c)
                    next_rel[i] = _advance(ts, period[i], new_ts, horizon)
                    t += delta
                    size = _release(rq, size, seq, i, ts, t, skipped, -1, count, rel_dl, rank, policy)
                    seq += 1
                    continue
                s = _oldest_msg(msg_t, msg_head, msg_cnt, rank)
                if s >= 0:
                    mt, mp = _take_msg(s, msg_t, msg_p, msg_head, msg_cnt)
                    t += delta
                    size = _release(rq, size, seq, s, mt, t, 0, mp, count, rel_dl, rank, policy)
                    seq += 1
                    continue
                break
            if size == 0:
                nxt = np.min(next_rel)
                if nxt >= BIG:
                    break
                t = nxt
                continue
            cur, size = _pop(rq, size)
            ex = _exec(wcet, exec_tab, cur[TASK], cur[INDEX])
            rem = ex
            start = t
            running = True
        else:
            nxt = BIG
            if elevated:
                nxt = np.min(next_rel)
                if nxt < t:
                    nxt = t
            if t + rem <= nxt:
                t += rem
                nj = _record(out, nj, cur, start, t, ex)
                nd = _publish(cur[TASK], t, nj - 1, sub_ptr, sub_idx, msg_t, msg_p,
                              msg_head, msg_cnt, drops, nd)
                running = False
            else:
                rem -= nxt - t
                t = nxt
                i = _due_timer(next_rel, rank, t)
                ts = next_rel[i]
                next_rel[i] = _advance(ts, period[i], ts + period[i], horizon)
                t += delta
                size = _release(rq, size, seq, i, ts, t, 0, -1, count, rel_dl, rank, policy)
                seq += 1
    return out[:nj].copy(), drops[:nd].copy(), count


@kernel
def re_kernel(kind, wcet, period, phase, rel_dl, rank, policy, prioritized,
              sub_ptr, sub_idx, delta, horizon, exec_tab, depth, cap):
    """Release-and-execute events executor.

    Unprioritized: the timer thread releases and runs the timer with the
    earliest reached timestamp, one at a time. Prioritized: every reached
    timestamp is released into a ready queue before each decision, which
    then picks by policy. Subscriptions run FIFO on the default thread and
    only start while the timer thread has nothing to do.
    """
    n = kind.shape[0]
    out = np.empty((cap, NJOB), np.int64)
    drops = np.empty((cap + n + 1, 3), np.int64)
    trq = np.empty((cap, NRQ), np.int64)
    srq = np.empty((cap, NRQ), np.int64)
    count = np.zeros(n, np.int64)
    next_rel = _initial_timestamps(kind, phase, horizon)
    msg_t = np.zeros((n, depth), np.int64)
    msg_p = np.zeros((n, depth), np.int64)
    msg_head = np.zeros(n, np.int64)
    msg_cnt = np.zeros(n, np.int64)
    nj = 0
    nd = 0
    tsize = 0
    ssize = 0
    seq = 0
    t = 0
    while True:
        if prioritized:
            while True:
                i = _due_timer(next_rel, rank, t)
                if i < 0:
                    break
                ts = next_rel[i]
                new_ts, skipped = next_timestamp(ts, period[i], t)
                c = _skipped_in_horizon(ts, period[i], skipped, horizon)
                if c > 0:
                    nd = _drop(drops, nd, i, ts + period[i], c)
                next_rel[i] = _advance(ts, period[i], new_ts, horizon)
                t += delta
                tsize = _release(trq, tsize, seq, i, ts, t, skipped, -1, count, rel_dl, rank, policy)
                seq += 1
        else:
            i = _due_timer(next_rel, rank, t)
            if i >= 0:
                ts = next_rel[i]
                new_ts, skipped = next_timestamp(ts, period[i], t)
                c = _skipped_in_horizon(ts, period[i], skipped, horizon)
                if c > 0:
                    nd = _drop(drops, nd, i, ts + period[i], c)
                next_rel[i] = _advance(ts, period[i], new_ts, horizon)
                t += delta
                tsize = _release(trq, tsize, seq, i, ts, t, skipped, -1, count, rel_dl, rank, P_FIFO)
                seq += 1
        if tsize > 0:
            cur, tsize = _pop(trq, tsize)
            ex = _exec(wcet, exec_tab, cur[TASK], cur[INDEX])
            start = t
            t += ex
            nj = _record(out, nj, cur, start, t, ex)
            nd = _publish(cur[TASK], t, nj - 1, sub_ptr, sub_idx, msg_t, msg_p,
                          msg_head, msg_cnt, drops, nd)
            continue
        s = _oldest_msg(msg_t, msg_head, msg_cnt, rank)
        if s >= 0:
            while s >= 0:
                mt, mp = _take_msg(s, msg_t, msg_p, msg_head, msg_cnt)
                t += delta
                ssize = _release(srq, ssize, seq, s, mt, t, 0, mp, count, rel_dl, rank, P_FIFO)
                seq += 1
                s = _oldest_msg(msg_t, msg_head, msg_cnt, rank)
            continue
        if ssize > 0:
            cur, ssize = _pop(srq, ssize)
            ex = _exec(wcet, exec_tab, cur[TASK], cur[INDEX])
            start = t
            t += ex
            nj = _record(out, nj, cur, start, t, ex)
            nd = _publish(cur[TASK], t, nj - 1, sub_ptr, sub_idx, msg_t, msg_p,
                          msg_head, msg_cnt, drops, nd)
            continue
        nxt = np.min(next_rel)
        if nxt >= BIG:
            break
        if nxt > t:
            t = nxt
    return out[:nj].copy(), drops[:nd].copy(), count


@kernel
def default_kernel(kind, wcet, period, phase, rel_dl, ws_order, sub_ptr, sub_idx,
                   horizon, exec_tab, depth, cap):
    """Polling points and processing windows of the default executor."""
    n = kind.shape[0]
    out = np.empty((cap, NJOB), np.int64)
    drops = np.empty((cap + n + 1, 3), np.int64)
    count = np.zeros(n, np.int64)
    next_rel = _initial_timestamps(kind, phase, horizon)
    msg_t = np.zeros((n, depth), np.int64)
    msg_p = np.zeros((n, depth), np.int64)
    msg_head = np.zeros(n, np.int64)
    msg_cnt = np.zeros(n, np.int64)
    sel_task = np.empty(n, np.int64)
    sel_nom = np.empty(n, np.int64)
    sel_par = np.empty(n, np.int64)
    nj = 0
    nd = 0
    t = 0
    while True:
        m = 0
        for j in range(n):
            i = ws_order[j]
            if kind[i] == TIMER:
                if next_rel[i] <= t:
                    sel_task[m] = i
                    m += 1
            elif msg_cnt[i] > 0:
                mt, mp = _take_msg(i, msg_t, msg_p, msg_head, msg_cnt)
                sel_task[m] = i
                sel_nom[m] = mt
                sel_par[m] = mp
                m += 1
        if m == 0:
            nxt = np.min(next_rel)
            if nxt >= BIG:
                break
            t = nxt
            continue
        poll = t
        for j in range(m):
            i = sel_task[j]
            skipped = 0
            if kind[i] == TIMER:
                nominal = next_rel[i]
                parent = -1
                new_ts, skipped = next_timestamp(nominal, period[i], t)
                c = _skipped_in_horizon(nominal, period[i], skipped, horizon)
                if c > 0:
                    nd = _drop(drops, nd, i, nominal + period[i], c)
                next_rel[i] = _advance(nominal, period[i], new_ts, horizon)
            else:
                nominal = sel_nom[j]
                parent = sel_par[j]
            idx = count[i]
            count[i] += 1
            ex = _exec(wcet, exec_tab, i, idx)
            out[nj, TASK] = i
            out[nj, INDEX] = idx
            out[nj, NOMINAL] = nominal
            out[nj, ENQ] = poll
            out[nj, START] = t
            out[nj, FINISH] = t + ex
            out[nj, ABSDL] = nominal + rel_dl[i] if rel_dl[i] >= 0 else -1
            out[nj, SKIPPED] = skipped
            out[nj, PARENT] = parent
            out[nj, EXEC] = ex
            nj += 1
            t += ex
            nd = _publish(i, t, nj - 1, sub_ptr, sub_idx, msg_t, msg_p,
                          msg_head, msg_cnt, drops, nd)
    return out[:nj].copy(), drops[:nd].copy(), count
