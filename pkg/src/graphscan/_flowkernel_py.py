"""Pure-Python highest-label push-relabel kernel (fallback for ``_flowkernel``).

Both kernels share one calling convention. Arcs come in residual pairs: arc
``a`` and its reverse ``a ^ 1``. ``first``/``arcs_of`` is a CSR index of the
arcs leaving each node, ``head[a]`` the arc's head, ``cap`` the residual
capacities (modified in place).

Only the first phase runs (a maximum preflow). On return ``reach[v]`` is 1
iff ``v`` can still reach the sink through arcs with residual above ``eps``,
which identifies the minimum cut with the largest source side.
"""


def push_relabel(n, s, t, first, arcs_of, head, cap, eps, reach):
    first = list(first)
    arcs_of = list(arcs_of)
    head = list(head)
    c = [float(v) for v in cap]
    d = [n] * n
    excess = [0.0] * n
    cur = [0] * n
    count = [0] * (n + 1)
    buckets = [[] for _ in range(n)]
    pushes = 0
    relabels = 0

    for i in range(first[s], first[s + 1]):
        a = arcs_of[i]
        delta = c[a]
        if delta > 0.0:
            c[a] = 0.0
            c[a ^ 1] += delta
            excess[head[a]] += delta
            excess[s] -= delta

    def global_relabel():
        for v in range(n):
            d[v] = n
        for b in buckets:
            b.clear()
        for k in range(n + 1):
            count[k] = 0
        d[t] = 0
        queue = [t]
        qi = 0
        while qi < len(queue):
            w = queue[qi]
            qi += 1
            dw = d[w] + 1
            for i in range(first[w], first[w + 1]):
                a = arcs_of[i]
                v = head[a]
                if d[v] == n and v != s and c[a ^ 1] > eps:
                    d[v] = dw
                    queue.append(v)
        hi = -1
        for v in range(n):
            cur[v] = first[v]
            if d[v] < n:
                count[d[v]] += 1
                if v != t and v != s and excess[v] > eps:
                    buckets[d[v]].append(v)
                    if d[v] > hi:
                        hi = d[v]
        return hi

    hi = global_relabel()
    since_global = 0
    while hi >= 0:
        if not buckets[hi]:
            hi -= 1
            continue
        u = buckets[hi].pop()
        du = d[u]
        if du != hi:
            continue
        relabelled = False
        end = first[u + 1]
        while excess[u] > eps:
            if cur[u] == end:
                newd = n
                for i in range(first[u], end):
                    a = arcs_of[i]
                    if c[a] > eps and d[head[a]] + 1 < newd:
                        newd = d[head[a]] + 1
                relabels += 1
                since_global += 1
                count[du] -= 1
                if count[du] == 0:
                    # gap: nothing above du can reach the sink any more
                    for v in range(n):
                        if du < d[v] < n:
                            count[d[v]] -= 1
                            d[v] = n
                    newd = n
                d[u] = newd
                relabelled = True
                if newd < n:
                    count[newd] += 1
                    cur[u] = first[u]
                break
            a = arcs_of[cur[u]]
            v = head[a]
            if c[a] > eps and du == d[v] + 1:
                delta = excess[u] if excess[u] < c[a] else c[a]
                c[a] -= delta
                c[a ^ 1] += delta
                excess[u] -= delta
                was_idle = excess[v] <= eps
                excess[v] += delta
                pushes += 1
                if was_idle and v != t and v != s and excess[v] > eps:
                    buckets[d[v]].append(v)
            else:
                cur[u] += 1
        if relabelled and d[u] < n and excess[u] > eps:
            buckets[d[u]].append(u)
            hi = d[u]
        if since_global > n:
            since_global = 0
            hi = global_relabel()

    for v in range(n):
        reach[v] = 0
    reach[t] = 1
    queue = [t]
    qi = 0
    while qi < len(queue):
        w = queue[qi]
        qi += 1
        for i in range(first[w], first[w + 1]):
            a = arcs_of[i]
            v = head[a]
            if not reach[v] and c[a ^ 1] > eps:
                reach[v] = 1
                queue.append(v)
    for i, v in enumerate(c):
        cap[i] = v
    return excess[t], pushes, relabels
