# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled highest-label push-relabel kernel.

Same calling convention and semantics as ``_flowkernel_py.push_relabel``.
"""
import numpy as np

from libc.stdlib cimport malloc, free


def push_relabel(int n, int s, int t,
                 const int[::1] first, const int[::1] arcs_of, const int[::1] head,
                 double[::1] cap, double eps, unsigned char[::1] reach):
    cdef long long pushes = 0, relabels = 0
    cdef double flow
    with nogil:
        flow = _run(n, s, t, &first[0], &arcs_of[0], &head[0], &cap[0], eps,
                    &reach[0], &pushes, &relabels)
    if flow < -0.5:
        raise MemoryError()
    return flow, pushes, relabels


cdef int _global_relabel(int n, int s, int t, const int* first, const int* arcs_of,
                         const int* head, const double* c, double eps, int* d,
                         const double* excess, int* cur, int* count, int* bucket,
                         int* nxt, int* queue) noexcept nogil:
    cdef int v, w, i, a, dw, qh = 0, qt = 0, hi = -1
    for v in range(n):
        d[v] = n
        bucket[v] = -1
        count[v] = 0
    count[n] = 0
    d[t] = 0
    queue[qt] = t
    qt += 1
    while qh < qt:
        w = queue[qh]
        qh += 1
        dw = d[w] + 1
        for i in range(first[w], first[w + 1]):
            a = arcs_of[i]
            v = head[a]
            if d[v] == n and v != s and c[a ^ 1] > eps:
                d[v] = dw
                queue[qt] = v
                qt += 1
    for v in range(n):
        cur[v] = first[v]
        if d[v] < n:
            count[d[v]] += 1
            if v != t and v != s and excess[v] > eps:
                nxt[v] = bucket[d[v]]
                bucket[d[v]] = v
                if d[v] > hi:
                    hi = d[v]
    return hi


cdef double _run(int n, int s, int t, const int* first, const int* arcs_of,
                 const int* head, double* c, double eps, unsigned char* reach,
                 long long* pushes, long long* relabels) noexcept nogil:
    cdef int* d = <int*> malloc(n * sizeof(int))
    cdef int* cur = <int*> malloc(n * sizeof(int))
    cdef int* count = <int*> malloc((n + 1) * sizeof(int))
    cdef int* bucket = <int*> malloc(n * sizeof(int))
    cdef int* nxt = <int*> malloc(n * sizeof(int))
    cdef int* queue = <int*> malloc(n * sizeof(int))
    cdef double* excess = <double*> malloc(n * sizeof(double))
    if not (d and cur and count and bucket and nxt and queue and excess):
        free(d); free(cur); free(count); free(bucket); free(nxt); free(queue); free(excess)
        return -1.0

    cdef int v, u, w, i, a, du, newd, end, hi, qh, qt, since_global = 0
    cdef bint relabelled, was_idle
    cdef double delta, flow

    for v in range(n):
        excess[v] = 0.0
    for i in range(first[s], first[s + 1]):
        a = arcs_of[i]
        delta = c[a]
        if delta > 0.0:
            c[a] = 0.0
            c[a ^ 1] += delta
            excess[head[a]] += delta
            excess[s] -= delta

    hi = _global_relabel(n, s, t, first, arcs_of, head, c, eps, d, excess, cur,
                         count, bucket, nxt, queue)
    while hi >= 0:
        u = bucket[hi]
        if u < 0:
            hi -= 1
            continue
        bucket[hi] = nxt[u]
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
                relabels[0] += 1
                since_global += 1
                count[du] -= 1
                if count[du] == 0:
                    for v in range(n):
                        if d[v] > du and d[v] < n:
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
                pushes[0] += 1
                if was_idle and v != t and v != s and excess[v] > eps:
                    nxt[v] = bucket[d[v]]
                    bucket[d[v]] = v
            else:
                cur[u] += 1
        if relabelled and d[u] < n and excess[u] > eps:
            nxt[u] = bucket[d[u]]
            bucket[d[u]] = u
            hi = d[u]
        if since_global > n:
            since_global = 0
            hi = _global_relabel(n, s, t, first, arcs_of, head, c, eps, d, excess,
                                 cur, count, bucket, nxt, queue)

    for v in range(n):
        reach[v] = 0
    reach[t] = 1
    qh = 0
    qt = 0
    queue[qt] = t
    qt += 1
    while qh < qt:
        w = queue[qh]
        qh += 1
        for i in range(first[w], first[w + 1]):
            a = arcs_of[i]
            v = head[a]
            if not reach[v] and c[a ^ 1] > eps:
                reach[v] = 1
                queue[qt] = v
                qt += 1

    flow = excess[t]
    free(d); free(cur); free(count); free(bucket); free(nxt); free(queue); free(excess)
    return flow
