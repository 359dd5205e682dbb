"""Pure numpy implementations of the hot kernels.

Mirrors the compiled ``_core`` module function for function; the compiled
version is preferred at import time when available (see ``_backend``).
"""

import math

import numpy as np

TAU = 1e-12


def two_means(X, ia, ib, max_iter=100, tol=1e-8):
    """Lloyd iterations with K=2 started from rows ``ia`` and ``ib``.

    Returns an int8 array of 0/1 cluster labels. Both clusters are always
    non-empty: an emptied cluster takes the point farthest from the other
    cluster's center.
    """
    X = np.ascontiguousarray(X, dtype=float)
    u = X.shape[0]
    c0 = X[ia].copy()
    c1 = X[ib].copy()
    labels = np.zeros(u, dtype=np.int8)
    for _ in range(max_iter):
        d0 = ((X - c0) ** 2).sum(axis=1)
        d1 = ((X - c1) ** 2).sum(axis=1)
        labels = (d1 < d0).astype(np.int8)
        n1 = int(labels.sum())
        if n1 == 0:
            labels[int(np.argmax(d0))] = 1
        elif n1 == u:
            labels[int(np.argmax(d1))] = 0
        mask = labels.astype(bool)
        new0 = X[~mask].mean(axis=0)
        new1 = X[mask].mean(axis=0)
        shift = max(np.sqrt(((new0 - c0) ** 2).sum()), np.sqrt(((new1 - c1) ** 2).sum()))
        c0, c1 = new0, new1
        if shift <= tol:
            break
    return labels


def ball_summary(X, y, labels, members, use_max=False):
    """(center, radius, y_hat, majority label, majority count) of one ball."""
    P = X[members]
    center = P.mean(axis=0)
    dist = np.sqrt(((P - center) ** 2).sum(axis=1))
    r = float(dist.max() if use_max else dist.mean())
    counts = np.bincount(labels[members])
    majority = int(np.argmax(counts))  # first maximum = smallest label
    return center, r, float(y[members].mean()), majority, int(counts[majority])


def _balance(t, a, astar, C):
    return np.clip(a - t, 0.0, C).sum() - np.clip(astar + t, 0.0, C).sum()


def project_box_hyperplane(a, astar, C):
    """Euclidean projection onto {0 <= a, a* <= C, sum(a - a*) = 0}.

    The projection is ``a - t, a* + t`` clipped to the box, where the shift t
    is the root of a monotone piecewise-linear balance function. The root is
    bracketed between sorted breakpoints and then solved exactly on the
    final linear piece.
    """
    a = np.asarray(a, dtype=float)
    astar = np.asarray(astar, dtype=float)
    if (a.min() >= 0 and astar.min() >= 0 and a.max() <= C and astar.max() <= C
            and abs(a.sum() - astar.sum()) <= 1e-12 * max(1.0, C * a.size)):
        return a.copy(), astar.copy()
    bps = np.unique(np.concatenate([a - C, a, -astar, C - astar]))
    # balance > 0 at bps[0] and < 0 at bps[-1]; keep that bracket invariant
    lo, hi = 0, bps.size - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _balance(bps[mid], a, astar, C) > 0:
            lo = mid
        else:
            hi = mid
    tl, th = bps[lo], bps[hi]
    hl, hh = _balance(tl, a, astar, C), _balance(th, a, astar, C)
    t = tl + hl * (th - tl) / (hl - hh)
    return np.clip(a - t, 0.0, C), np.clip(astar + t, 0.0, C)


def _value(a, s, Gb, r, yhat, eps):
    beta = a - s
    gap = math.sqrt(max(0.0, float(beta @ Gb))) - float(beta @ r)
    return -0.5 * gap * gap + float(beta @ yhat) - eps * float(a.sum() + s.sum())


def _grad(a, s, Gb, r, yhat, eps):
    beta = a - s
    norm_A = math.sqrt(max(0.0, float(beta @ Gb)))
    gap = norm_A - float(beta @ r)
    core = -gap * ((Gb / norm_A if norm_A >= TAU else 0.0) - r)
    return core + yhat - eps, -core - yhat - eps


def _pg(a, s, ga, gs, C):
    pa, ps = project_box_hyperplane(a + ga, s + gs, C)
    return math.sqrt(float(((pa - a) ** 2).sum() + ((ps - s) ** 2).sum()))


def accel_ascent(G, r, yhat, eps, C, lip, a0, s0, max_iter, tol, trace=False):
    """Monotone FISTA on the ball dual.

    Steps from an extrapolated point y; ``lip`` (inverse step) doubles until
    the quadratic lower model at y holds, then relaxes by 0.9 for the next
    iteration. The iterate x moves only when the objective does not drop;
    otherwise momentum restarts from x. Returns
    (alpha, alpha*, objective, pg norm, iterations, trace).
    """
    xa = np.array(a0, dtype=float)
    xs = np.array(s0, dtype=float)
    Gx = G @ (xa - xs)
    fx = _value(xa, xs, Gx, r, yhat, eps)
    if not math.isfinite(fx):
        raise ArithmeticError("non-finite dual objective at start")
    gxa, gxs = _grad(xa, xs, Gx, r, yhat, eps)
    pg = _pg(xa, xs, gxa, gxs, C)
    ya, ys, Gy, gya, gys, fy = xa, xs, Gx, gxa, gxs, fx
    out = [(fx, pg)] if trace else None
    t = 1.0
    it = 0
    y_is_x = True
    while it < max_iter and pg > tol:
        lip0 = lip
        while True:
            za, zs = project_box_hyperplane(ya + gya / lip, ys + gys / lip, C)
            Gz = G @ (za - zs)
            fz = _value(za, zs, Gz, r, yhat, eps)
            if not math.isfinite(fz):
                raise ArithmeticError("non-finite dual objective")
            da, ds = za - ya, zs - ys
            lin = float(gya @ da + gys @ ds)
            quad = float(da @ da + ds @ ds)
            if fz >= fy + lin - 0.5 * lip * quad - 1e-12 * abs(fy):
                break
            lip *= 2.0
            if lip > 1e12 * lip0:
                # kink of ||A|| at a rank-deficient Gram: no quadratic model holds,
                # leave the decision to the monotone acceptance test below
                lip = lip0
                break
        lip *= 0.9
        t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        if fz >= fx:
            mom = (t - 1.0) / t_next
            ya = za + mom * (za - xa)
            ys = zs + mom * (zs - xs)
            Gy = Gz + mom * (Gz - Gx)
            xa, xs, Gx, fx = za, zs, Gz, fz
            y_is_x = mom == 0.0
            t = t_next
        elif y_is_x:
            break  # a plain projected step from x failed: no ascent left at double precision
        else:
            ya, ys, Gy = xa, xs, Gx
            y_is_x = True
            t = 1.0
        gxa, gxs = _grad(xa, xs, Gx, r, yhat, eps)
        if y_is_x:
            gya, gys, fy = gxa, gxs, fx
        else:
            gya, gys = _grad(ya, ys, Gy, r, yhat, eps)
            fy = _value(ya, ys, Gy, r, yhat, eps)
        pg = _pg(xa, xs, gxa, gxs, C)
        it += 1
        if trace:
            out.append((fx, pg))
    return xa, xs, fx, pg, it, out


def smo_svr(K, y, eps, C, tol=1e-3, max_iter=100000, trace=False):
    """SMO for the epsilon-SVR dual with second-order working set selection.

    Variables are stacked as z = (alpha, alpha*) with signs s = (+1, -1);
    the minimized form is 0.5 z'Qz + p'z, Q_st = s_s s_t K, p = (eps - y, eps + y).
    Returns (z, iterations, objective trace or None); the trace holds the
    maximized dual objective after every accepted pair update.
    """
    K = np.ascontiguousarray(K, dtype=float)
    y = np.asarray(y, dtype=float)
    m = y.size
    n2 = 2 * m
    s = np.concatenate([np.ones(m), -np.ones(m)])
    p = np.concatenate([eps - y, eps + y])
    idx = np.concatenate([np.arange(m), np.arange(m)])
    Kd = np.diag(K).copy()
    z = np.zeros(n2)
    G = p.copy()
    objs = [] if trace else None
    it = 0
    while it < max_iter:
        # i: maximal violator in I_up
        up = np.where(s > 0, z < C, z > 0)
        low = np.where(s > 0, z > 0, z < C)
        score = -s * G
        if not up.any() or not low.any():
            break
        cand = np.flatnonzero(up)
        i = cand[_last_argmax(score[cand])]
        gmax = score[i]
        lows = np.flatnonzero(low)
        gmin = score[lows].min()
        if gmax - gmin < tol:
            break
        pi = idx[i]
        grad_diff = gmax - score[lows]
        ok = grad_diff > 0
        lows = lows[ok]
        grad_diff = grad_diff[ok]
        quad = Kd[pi] + Kd[idx[lows]] - 2.0 * K[pi, idx[lows]]
        quad = np.where(quad > 0, quad, TAU)
        obj_diff = -(grad_diff * grad_diff) / quad
        j = lows[_last_argmin(obj_diff)]
        pj = idx[j]
        old_i, old_j = z[i], z[j]
        zi, zj = _pair_update(z[i], z[j], G[i], G[j], s[i], s[j], Kd[pi], Kd[pj], K[pi, pj], C)
        z[i], z[j] = zi, zj
        di, dj = zi - old_i, zj - old_j
        # G_t += Q_ti di + Q_tj dj
        G += s * (s[i] * di * K[idx, pi] + s[j] * dj * K[idx, pj])
        it += 1
        if objs is not None:
            objs.append(-0.5 * float(z @ (G + p)))
    return z, it, objs


def _last_argmax(v):
    # ties resolve to the last index, matching the >= scan of the compiled loop
    return v.size - 1 - int(np.argmax(v[::-1]))


def _last_argmin(v):
    return v.size - 1 - int(np.argmin(v[::-1]))


def _pair_update(ai, aj, Gi, Gj, yi, yj, Kii, Kjj, Kij, C):
    quad = Kii + Kjj - 2.0 * Kij
    if quad <= 0:
        quad = TAU
    if yi != yj:
        delta = (-Gi - Gj) / quad
        diff = ai - aj
        ai += delta
        aj += delta
        if diff > 0:
            if aj < 0:
                aj = 0.0
                ai = diff
        else:
            if ai < 0:
                ai = 0.0
                aj = -diff
        if diff > 0:
            if ai > C:
                ai = C
                aj = C - diff
        else:
            if aj > C:
                aj = C
                ai = C + diff
    else:
        delta = (Gi - Gj) / quad
        total = ai + aj
        ai -= delta
        aj += delta
        if total > C:
            if ai > C:
                ai = C
                aj = total - C
        else:
            if aj < 0:
                aj = 0.0
                ai = total
        if total > C:
            if aj > C:
                aj = C
                ai = total - C
        else:
            if ai < 0:
                ai = 0.0
                aj = total
    return ai, aj
