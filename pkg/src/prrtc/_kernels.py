"""Compiled inner loops for collision checking. All kernels release the GIL.

Primitive kinds: 0 sphere, 1 box, 2 capsule. Joint kinds: 0 revolute,
1 prismatic, 2 fixed.
"""

import numpy as np
from numba import njit

JIT = dict(nogil=True, cache=True, fastmath=False)


@njit(**JIT)
def sphere_hits_primitive(cx, cy, cz, r, k, pc, prot, ph, pab, plen2, pr):
    """Strict penetration test of one sphere against primitive ``k``."""
    kind = int(pc[k, 3])
    dx = cx - pc[k, 0]
    dy = cy - pc[k, 1]
    dz = cz - pc[k, 2]
    if kind == 0:
        rr = r + pr[k]
        return dx * dx + dy * dy + dz * dz < rr * rr
    if kind == 1:
        d2 = 0.0
        for a in range(3):
            local = prot[k, 0, a] * dx + prot[k, 1, a] * dy + prot[k, 2, a] * dz
            e = abs(local) - ph[k, a]
            if e > 0.0:
                d2 += e * e
        return d2 < r * r
    t = 0.0
    if plen2[k] > 0.0:
        t = (dx * pab[k, 0] + dy * pab[k, 1] + dz * pab[k, 2]) / plen2[k]
        if t < 0.0:
            t = 0.0
        elif t > 1.0:
            t = 1.0
    ex = dx - t * pab[k, 0]
    ey = dy - t * pab[k, 1]
    ez = dz - t * pab[k, 2]
    rr = r + pr[k]
    return ex * ex + ey * ey + ez * ez < rr * rr


@njit(**JIT)
def _fk(q, parent, jkind, qidx, a0, a1, a2, ot, slide, R, T):
    n = parent.shape[0]
    lr = np.empty((3, 3))
    lt = np.empty(3)
    for i in range(n):
        jk = jkind[i]
        if jk == 0:
            th = q[qidx[i]]
            s = np.sin(th)
            c = 1.0 - np.cos(th)
            for a in range(3):
                for b in range(3):
                    lr[a, b] = a0[i, a, b] + s * a1[i, a, b] + c * a2[i, a, b]
                lt[a] = ot[i, a]
        else:
            d = q[qidx[i]] if jk == 1 else 0.0
            for a in range(3):
                for b in range(3):
                    lr[a, b] = a0[i, a, b]
                lt[a] = ot[i, a] + d * slide[i, a]
        p = parent[i]
        if p < 0:
            for a in range(3):
                for b in range(3):
                    R[i, a, b] = lr[a, b]
                T[i, a] = lt[a]
        else:
            for a in range(3):
                for b in range(3):
                    R[i, a, b] = R[p, a, 0] * lr[0, b] + R[p, a, 1] * lr[1, b] + R[p, a, 2] * lr[2, b]
                T[i, a] = R[p, a, 0] * lt[0] + R[p, a, 1] * lt[1] + R[p, a, 2] * lt[2] + T[p, a]


@njit(**JIT)
def _place(R, T, link, c, out, j):
    for a in range(3):
        out[j, a] = R[link, a, 0] * c[0] + R[link, a, 1] * c[1] + R[link, a, 2] * c[2] + T[link, a]


@njit(**JIT)
def config_collides(
    q, two_stage, R, T, cw, fw, placed,
    parent, jkind, qidx, a0, a1, a2, ot, slide,
    cc, cr, fc, fr, flink, fstart, pairs, pfi, pfj, pstart,
    pc, prot, ph, pab, plen2, pr,
):  # fmt: skip
    """Returns (colliding, sphere tests, entered fine stage). Stops at the first confirmed hit."""
    _fk(q, parent, jkind, qidx, a0, a1, a2, ot, slide, R, T)
    n_links = parent.shape[0]
    n_prim = pc.shape[0]
    tests = 0
    entered = False
    for f in range(fr.shape[0]):
        placed[f] = False

    if not two_stage:
        for f in range(fr.shape[0]):
            _place(R, T, flink[f], fc[f], fw, f)
            placed[f] = True
            for k in range(n_prim):
                tests += 1
                if sphere_hits_primitive(fw[f, 0], fw[f, 1], fw[f, 2], fr[f], k, pc, prot, ph, pab, plen2, pr):
                    return True, tests, False
        for m in range(pfi.shape[0]):
            i = pfi[m]
            j = pfj[m]
            tests += 1
            dx = fw[i, 0] - fw[j, 0]
            dy = fw[i, 1] - fw[j, 1]
            dz = fw[i, 2] - fw[j, 2]
            rr = fr[i] + fr[j]
            if dx * dx + dy * dy + dz * dz < rr * rr:
                return True, tests, False
        return False, tests, False

    for l in range(n_links):
        _place(R, T, l, cc[l], cw, l)
    for l in range(n_links):
        for k in range(n_prim):
            tests += 1
            if sphere_hits_primitive(cw[l, 0], cw[l, 1], cw[l, 2], cr[l], k, pc, prot, ph, pab, plen2, pr):
                entered = True
                for f in range(fstart[l], fstart[l + 1]):
                    if not placed[f]:
                        _place(R, T, l, fc[f], fw, f)
                        placed[f] = True
                    tests += 1
                    if sphere_hits_primitive(fw[f, 0], fw[f, 1], fw[f, 2], fr[f], k, pc, prot, ph, pab, plen2, pr):
                        return True, tests, entered
    for m in range(pairs.shape[0]):
        a = pairs[m, 0]
        b = pairs[m, 1]
        tests += 1
        dx = cw[a, 0] - cw[b, 0]
        dy = cw[a, 1] - cw[b, 1]
        dz = cw[a, 2] - cw[b, 2]
        rr = cr[a] + cr[b]
        if dx * dx + dy * dy + dz * dz < rr * rr:
            entered = True
            for n in range(pstart[m], pstart[m + 1]):
                i = pfi[n]
                j = pfj[n]
                if not placed[i]:
                    _place(R, T, flink[i], fc[i], fw, i)
                    placed[i] = True
                if not placed[j]:
                    _place(R, T, flink[j], fc[j], fw, j)
                    placed[j] = True
                tests += 1
                ex = fw[i, 0] - fw[j, 0]
                ey = fw[i, 1] - fw[j, 1]
                ez = fw[i, 2] - fw[j, 2]
                ss = fr[i] + fr[j]
                if ex * ex + ey * ey + ez * ez < ss * ss:
                    return True, tests, entered
    return False, tests, entered


@njit(**JIT)
def collide_batch(
    qs, two_stage, out,
    parent, jkind, qidx, a0, a1, a2, ot, slide,
    cc, cr, fc, fr, flink, fstart, pairs, pfi, pfj, pstart,
    pc, prot, ph, pab, plen2, pr,
):  # fmt: skip
    """Fill ``out[b]`` with the collision flag of ``qs[b]``; returns (tests, fine entries)."""
    n_links = parent.shape[0]
    R = np.empty((n_links, 3, 3))
    T = np.empty((n_links, 3))
    cw = np.empty((n_links, 3))
    fw = np.empty((fr.shape[0], 3))
    placed = np.zeros(fr.shape[0], dtype=np.bool_)
    tests = 0
    entries = 0
    for b in range(qs.shape[0]):
        hit, t, e = config_collides(
            qs[b], two_stage, R, T, cw, fw, placed,
            parent, jkind, qidx, a0, a1, a2, ot, slide,
            cc, cr, fc, fr, flink, fstart, pairs, pfi, pfj, pstart,
            pc, prot, ph, pab, plen2, pr,
        )  # fmt: skip
        out[b] = hit
        tests += t
        if e:
            entries += 1
    return tests, entries


@njit(**JIT)
def chain_first_bad(
    points, n_cc, order, order_start, early_exit, two_stage,
    parent, jkind, qidx, a0, a1, a2, ot, slide,
    cc, cr, fc, fr, flink, fstart, pairs, pfi, pfj, pstart,
    pc, prot, ph, pab, plen2, pr,
):  # fmt: skip
    """Index of the first invalid edge of the polyline ``points`` (len - 1 if all valid).

    Samples i/n_cc, i = 1..n_cc, of each edge are visited batch by batch
    (``order[order_start[k]:order_start[k+1]]`` is batch k). Each round
    checks the current batch of every edge still of interest: with early
    exit those before the first known-bad edge, otherwise all of them.
    Returns (first_bad, tests, fine entries, configurations checked).
    """
    n_edges = points.shape[0] - 1
    dof = points.shape[1]
    n_links = parent.shape[0]
    R = np.empty((n_links, 3, 3))
    T = np.empty((n_links, 3))
    cw = np.empty((n_links, 3))
    fw = np.empty((fr.shape[0], 3))
    placed = np.zeros(fr.shape[0], dtype=np.bool_)
    q = np.empty(dof)
    first_bad = n_edges
    tests = 0
    entries = 0
    checked = 0
    for k in range(order_start.shape[0] - 1):
        live = first_bad if early_exit else n_edges
        if live == 0:
            break
        for e in range(live):
            for s in range(order_start[k], order_start[k + 1]):
                i = order[s]
                if i == n_cc:
                    for d in range(dof):
                        q[d] = points[e + 1, d]
                else:
                    frac = i / n_cc
                    for d in range(dof):
                        q[d] = points[e, d] + frac * (points[e + 1, d] - points[e, d])
                hit, t, en = config_collides(
                    q, two_stage, R, T, cw, fw, placed,
                    parent, jkind, qidx, a0, a1, a2, ot, slide,
                    cc, cr, fc, fr, flink, fstart, pairs, pfi, pfj, pstart,
                    pc, prot, ph, pab, plen2, pr,
                )  # fmt: skip
                tests += t
                checked += 1
                if en:
                    entries += 1
                if hit and e < first_bad:
                    first_bad = e
    return first_bad, tests, entries, checked


@njit(**JIT)
def edges_valid(
    starts, ends, n_cc, order, order_start, early_exit, two_stage, valid,
    parent, jkind, qidx, a0, a1, a2, ot, slide,
    cc, cr, fc, fr, flink, fstart, pairs, pfi, pfj, pstart,
    pc, prot, ph, pab, plen2, pr,
):  # fmt: skip
    """Independent edges checked together, one batch of every live edge per round.

    ``valid`` (pre-filled True) is cleared for edges with a colliding sample.
    With early exit an edge drops out of later rounds once it fails.
    Returns (tests, fine entries, configurations checked).
    """
    n_edges = starts.shape[0]
    dof = starts.shape[1]
    n_links = parent.shape[0]
    R = np.empty((n_links, 3, 3))
    T = np.empty((n_links, 3))
    cw = np.empty((n_links, 3))
    fw = np.empty((fr.shape[0], 3))
    placed = np.zeros(fr.shape[0], dtype=np.bool_)
    q = np.empty(dof)
    tests = 0
    entries = 0
    checked = 0
    for k in range(order_start.shape[0] - 1):
        for e in range(n_edges):
            if early_exit and not valid[e]:
                continue
            for s in range(order_start[k], order_start[k + 1]):
                i = order[s]
                if i == n_cc:
                    for d in range(dof):
                        q[d] = ends[e, d]
                else:
                    frac = i / n_cc
                    for d in range(dof):
                        q[d] = starts[e, d] + frac * (ends[e, d] - starts[e, d])
                hit, t, en = config_collides(
                    q, two_stage, R, T, cw, fw, placed,
                    parent, jkind, qidx, a0, a1, a2, ot, slide,
                    cc, cr, fc, fr, flink, fstart, pairs, pfi, pfj, pstart,
                    pc, prot, ph, pab, plen2, pr,
                )  # fmt: skip
                tests += t
                checked += 1
                if en:
                    entries += 1
                if hit:
                    valid[e] = False
                    if early_exit:
                        break
    return tests, entries, checked
