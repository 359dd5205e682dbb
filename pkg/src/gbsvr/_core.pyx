# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: Lloyd 2-means, ball summaries, box/hyperplane projection,
accelerated dual ascent, SMO for eps-SVR.

Semantics (including tie-breaking) match gbsvr._fallback exactly.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, isfinite

cnp.import_array()

cdef double TAU = 1e-12


def two_means(const double[:, ::1] X, Py_ssize_t ia, Py_ssize_t ib,
              int max_iter=100, double tol=1e-8):
    cdef Py_ssize_t u = X.shape[0], l = X.shape[1]
    cdef Py_ssize_t i, k, far
    cdef int it
    cdef double d0, d1, diff, shift0, shift1, best
    cdef Py_ssize_t n0, n1
    cdef double[::1] c0 = np.array(X[ia], dtype=np.float64)
    cdef double[::1] c1 = np.array(X[ib], dtype=np.float64)
    cdef double[::1] s0 = np.zeros(l)
    cdef double[::1] s1 = np.zeros(l)
    cdef double[::1] dist0 = np.empty(u)
    cdef double[::1] dist1 = np.empty(u)
    labels_arr = np.zeros(u, dtype=np.int8)
    cdef cnp.int8_t[::1] labels = labels_arr

    for it in range(max_iter):
        n1 = 0
        for i in range(u):
            d0 = 0.0
            d1 = 0.0
            for k in range(l):
                diff = X[i, k] - c0[k]
                d0 += diff * diff
                diff = X[i, k] - c1[k]
                d1 += diff * diff
            dist0[i] = d0
            dist1[i] = d1
            if d1 < d0:
                labels[i] = 1
                n1 += 1
            else:
                labels[i] = 0
        if n1 == 0:
            far = 0
            best = dist0[0]
            for i in range(1, u):
                if dist0[i] > best:
                    best = dist0[i]
                    far = i
            labels[far] = 1
            n1 = 1
        elif n1 == u:
            far = 0
            best = dist1[0]
            for i in range(1, u):
                if dist1[i] > best:
                    best = dist1[i]
                    far = i
            labels[far] = 0
            n1 = u - 1
        n0 = u - n1
        for k in range(l):
            s0[k] = 0.0
            s1[k] = 0.0
        for i in range(u):
            if labels[i]:
                for k in range(l):
                    s1[k] += X[i, k]
            else:
                for k in range(l):
                    s0[k] += X[i, k]
        shift0 = 0.0
        shift1 = 0.0
        for k in range(l):
            s0[k] /= n0
            s1[k] /= n1
            diff = s0[k] - c0[k]
            shift0 += diff * diff
            diff = s1[k] - c1[k]
            shift1 += diff * diff
            c0[k] = s0[k]
            c1[k] = s1[k]
        if sqrt(shift0 if shift0 > shift1 else shift1) <= tol:
            break
    return labels_arr


cdef inline double _clip(double v, double C) nogil:
    if v < 0.0:
        return 0.0
    if v > C:
        return C
    return v


def ball_summary(const double[:, ::1] X, const double[::1] y, const cnp.int64_t[::1] labels,
                 const cnp.int64_t[::1] members, bint use_max=False):
    cdef Py_ssize_t u = members.shape[0], l = X.shape[1]
    cdef Py_ssize_t i, k, row
    cdef double acc, diff, d, r = 0.0, ysum = 0.0
    cdef cnp.int64_t maxlab = 0
    center_arr = np.zeros(l)
    cdef double[::1] center = center_arr
    for i in range(u):
        row = members[i]
        ysum += y[row]
        if labels[row] > maxlab:
            maxlab = labels[row]
        for k in range(l):
            center[k] += X[row, k]
    for k in range(l):
        center[k] /= u
    for i in range(u):
        row = members[i]
        acc = 0.0
        for k in range(l):
            diff = X[row, k] - center[k]
            acc += diff * diff
        d = sqrt(acc)
        if use_max:
            if d > r:
                r = d
        else:
            r += d
    if not use_max:
        r /= u
    counts_arr = np.zeros(maxlab + 1, dtype=np.int64)
    cdef cnp.int64_t[::1] counts = counts_arr
    for i in range(u):
        counts[labels[members[i]]] += 1
    cdef Py_ssize_t majority = 0
    for k in range(1, maxlab + 1):
        if counts[k] > counts[majority]:
            majority = k
    return center_arr, r, ysum / u, majority, int(counts[majority])


cdef void _project_into(const double[::1] a, const double[::1] astar, double C,
                        double[::1] oa, double[::1] os) noexcept nogil:
    """Projection onto box ∩ hyperplane written into oa/os.

    The shift t solves h(t) = sum clip(a - t) - sum clip(a* + t) = 0. h is
    monotone and piecewise linear, so Newton steps inside a shrinking bracket
    land on the exact root once they reach its linear piece; bisection covers
    flat pieces and steps leaving the bracket.
    """
    cdef Py_ssize_t n = a.shape[0], i, k
    cdef double total = 0.0, lo, hi, t, h, slope, v, tn, scale
    cdef bint feasible = True
    lo = 0.0
    hi = 0.0
    for i in range(n):
        if a[i] < 0.0 or a[i] > C or astar[i] < 0.0 or astar[i] > C:
            feasible = False
        total += a[i] - astar[i]
        # h >= 0 at min(a - C, -a*) and h <= 0 at max(a, C - a*)
        if i == 0 or a[i] - C < lo:
            lo = a[i] - C
        if -astar[i] < lo:
            lo = -astar[i]
        if i == 0 or a[i] > hi:
            hi = a[i]
        if C - astar[i] > hi:
            hi = C - astar[i]
    scale = C * n if C * n > 1.0 else 1.0
    if feasible and fabs(total) <= 1e-12 * scale:
        for i in range(n):
            oa[i] = a[i]
            os[i] = astar[i]
        return
    t = 0.5 * (lo + hi)
    for k in range(200):
        h = 0.0
        slope = 0.0
        for i in range(n):
            v = a[i] - t
            if v <= 0.0:
                pass
            elif v >= C:
                h += C
            else:
                h += v
                slope += 1.0
            v = astar[i] + t
            if v <= 0.0:
                pass
            elif v >= C:
                h -= C
            else:
                h -= v
                slope += 1.0
        if h == 0.0:
            break
        if h > 0.0:
            lo = t
        else:
            hi = t
        if hi - lo <= 1e-15 * (fabs(lo) + fabs(hi) + 1.0) or fabs(h) <= 1e-14 * scale:
            break
        tn = t + h / slope if slope > 0.0 else 0.5 * (lo + hi)
        if not lo < tn < hi:
            tn = 0.5 * (lo + hi)
        t = tn
    for i in range(n):
        oa[i] = _clip(a[i] - t, C)
        os[i] = _clip(astar[i] + t, C)


def project_box_hyperplane(a_in, astar_in, double C):
    cdef const double[::1] a = np.ascontiguousarray(a_in, dtype=np.float64)
    cdef const double[::1] astar = np.ascontiguousarray(astar_in, dtype=np.float64)
    cdef Py_ssize_t n = a.shape[0]
    out_a = np.empty(n)
    out_s = np.empty(n)
    _project_into(a, astar, C, out_a, out_s)
    return out_a, out_s


cdef double _value(const double[::1] a, const double[::1] s, const double[::1] Gb,
                   const double[::1] r, const double[::1] yhat, double eps) noexcept nogil:
    cdef Py_ssize_t i, n = a.shape[0]
    cdef double quad = 0.0, B = 0.0, lin = 0.0, tot = 0.0, b, gap
    for i in range(n):
        b = a[i] - s[i]
        quad += b * Gb[i]
        B += b * r[i]
        lin += b * yhat[i]
        tot += a[i] + s[i]
    gap = sqrt(quad if quad > 0.0 else 0.0) - B
    return -0.5 * gap * gap + lin - eps * tot


cdef void _grad(const double[::1] a, const double[::1] s, const double[::1] Gb,
                const double[::1] r, const double[::1] yhat, double eps,
                double[::1] ga, double[::1] gs) noexcept nogil:
    cdef Py_ssize_t i, n = a.shape[0]
    cdef double quad = 0.0, B = 0.0, b, norm_A, gap, inv, core
    for i in range(n):
        b = a[i] - s[i]
        quad += b * Gb[i]
        B += b * r[i]
    norm_A = sqrt(quad if quad > 0.0 else 0.0)
    gap = norm_A - B
    inv = 1.0 / norm_A if norm_A >= TAU else 0.0
    for i in range(n):
        core = -gap * (Gb[i] * inv - r[i])
        ga[i] = core + yhat[i] - eps
        gs[i] = -core - yhat[i] - eps


cdef double _pg(const double[::1] a, const double[::1] s, const double[::1] ga, const double[::1] gs,
                double C, double[::1] va, double[::1] vs, double[::1] pa, double[::1] ps) noexcept nogil:
    cdef Py_ssize_t i, n = a.shape[0]
    cdef double acc = 0.0, d
    for i in range(n):
        va[i] = a[i] + ga[i]
        vs[i] = s[i] + gs[i]
    _project_into(va, vs, C, pa, ps)
    for i in range(n):
        d = pa[i] - a[i]
        acc += d * d
        d = ps[i] - s[i]
        acc += d * d
    return sqrt(acc)


def accel_ascent(G_in, r_in, yhat_in, double eps, double C, double lip, a0, s0,
                 long max_iter, double tol, bint trace=False):
    """Monotone FISTA for the ball dual; see gbsvr._fallback.accel_ascent."""
    G = np.ascontiguousarray(G_in, dtype=np.float64)
    cdef const double[::1] r = np.ascontiguousarray(r_in, dtype=np.float64)
    cdef const double[::1] yhat = np.ascontiguousarray(yhat_in, dtype=np.float64)
    cdef Py_ssize_t n = r.shape[0], i
    xa_arr = np.array(a0, dtype=np.float64)
    xs_arr = np.array(s0, dtype=np.float64)
    za_arr = np.empty(n); zs_arr = np.empty(n)
    ya_arr = xa_arr.copy(); ys_arr = xs_arr.copy()
    beta_arr = np.empty(n)
    Gx_arr = G.dot(xa_arr - xs_arr)
    Gy_arr = Gx_arr.copy()
    Gz_arr = np.empty(n)
    cdef double[::1] xa = xa_arr, xs = xs_arr, za = za_arr, zs = zs_arr
    cdef double[::1] ya = ya_arr, ys = ys_arr, beta = beta_arr
    cdef double[::1] Gx = Gx_arr, Gy = Gy_arr, Gz = Gz_arr
    cdef double[::1] gxa = np.empty(n), gxs = np.empty(n), gya = np.empty(n), gys = np.empty(n)
    cdef double[::1] va = np.empty(n), vs = np.empty(n), pa = np.empty(n), ps = np.empty(n)
    cdef double fx, fy, fz, pg, t = 1.0, t_next, mom, lin, quad, d, lip0
    cdef long it = 0
    cdef bint y_is_x = True

    fx = _value(xa, xs, Gx, r, yhat, eps)
    if not isfinite(fx):
        raise ArithmeticError("non-finite dual objective at start")
    _grad(xa, xs, Gx, r, yhat, eps, gxa, gxs)
    pg = _pg(xa, xs, gxa, gxs, C, va, vs, pa, ps)
    fy = fx
    gya[:] = gxa
    gys[:] = gxs
    out = [(fx, pg)] if trace else None
    while it < max_iter and pg > tol:
        lip0 = lip
        while True:
            for i in range(n):
                va[i] = ya[i] + gya[i] / lip
                vs[i] = ys[i] + gys[i] / lip
            _project_into(va, vs, C, za, zs)
            for i in range(n):
                beta[i] = za[i] - zs[i]
            G.dot(beta_arr, out=Gz_arr)
            fz = _value(za, zs, Gz, r, yhat, eps)
            if not isfinite(fz):
                raise ArithmeticError("non-finite dual objective")
            lin = 0.0
            quad = 0.0
            for i in range(n):
                d = za[i] - ya[i]
                lin += gya[i] * d
                quad += d * d
                d = zs[i] - ys[i]
                lin += gys[i] * d
                quad += d * d
            if fz >= fy + lin - 0.5 * lip * quad - 1e-12 * fabs(fy):
                break
            lip *= 2.0
            if lip > 1e12 * lip0:
                # kink of ||A|| at a rank-deficient Gram: no quadratic model holds,
                # leave the decision to the monotone acceptance test below
                lip = lip0
                break
        lip *= 0.9
        t_next = 0.5 * (1.0 + sqrt(1.0 + 4.0 * t * t))
        if fz >= fx:
            mom = (t - 1.0) / t_next
            for i in range(n):
                ya[i] = za[i] + mom * (za[i] - xa[i])
                ys[i] = zs[i] + mom * (zs[i] - xs[i])
                Gy[i] = Gz[i] + mom * (Gz[i] - Gx[i])
                xa[i] = za[i]
                xs[i] = zs[i]
                Gx[i] = Gz[i]
            fx = fz
            y_is_x = mom == 0.0
            t = t_next
        elif y_is_x:
            break  # a plain projected step from x failed: no ascent left at double precision
        else:
            for i in range(n):
                ya[i] = xa[i]
                ys[i] = xs[i]
                Gy[i] = Gx[i]
            y_is_x = True
            t = 1.0
        _grad(xa, xs, Gx, r, yhat, eps, gxa, gxs)
        if y_is_x:
            gya[:] = gxa
            gys[:] = gxs
            fy = fx
        else:
            _grad(ya, ys, Gy, r, yhat, eps, gya, gys)
            fy = _value(ya, ys, Gy, r, yhat, eps)
        pg = _pg(xa, xs, gxa, gxs, C, va, vs, pa, ps)
        it += 1
        if trace:
            out.append((fx, pg))
    return xa_arr, xs_arr, fx, pg, it, out


def smo_svr(const double[:, ::1] K, y_in, double eps, double C, double tol=1e-3,
            long max_iter=100000, bint trace=False):
    cdef const double[::1] y = np.ascontiguousarray(y_in, dtype=np.float64)
    cdef Py_ssize_t m = y.shape[0], n2 = 2 * m
    cdef Py_ssize_t t, i, j, pi, pj, pt
    cdef long it = 0
    cdef double gmax, gmax2, score, grad_diff, quad, obj_diff, obj_min
    cdef double zi, zj, Gi, Gj, delta, diff, total, di, dj, si, sj, st, obj
    z_arr = np.zeros(n2)
    G_arr = np.empty(n2)
    cdef double[::1] z = z_arr
    cdef double[::1] G = G_arr
    cdef double[::1] p = np.empty(n2)
    cdef double[::1] s = np.empty(n2)
    cdef double[::1] Kd = np.empty(m)
    for t in range(m):
        p[t] = eps - y[t]
        p[t + m] = eps + y[t]
        s[t] = 1.0
        s[t + m] = -1.0
        Kd[t] = K[t, t]
    for t in range(n2):
        G[t] = p[t]
    objs = [] if trace else None

    with nogil:
        while it < max_iter:
            gmax = -1e300
            i = -1
            for t in range(n2):
                if s[t] > 0:
                    if z[t] < C and -G[t] >= gmax:
                        gmax = -G[t]
                        i = t
                else:
                    if z[t] > 0 and G[t] >= gmax:
                        gmax = G[t]
                        i = t
            if i < 0:
                break
            pi = i % m
            gmax2 = -1e300
            j = -1
            obj_min = 1e300
            for t in range(n2):
                pt = t % m
                if s[t] > 0:
                    if z[t] > 0:
                        score = G[t]
                    else:
                        continue
                else:
                    if z[t] < C:
                        score = -G[t]
                    else:
                        continue
                # score here is -(-s_t G_t); gmax + score is the violation gap
                if score >= gmax2:
                    gmax2 = score
                grad_diff = gmax + score
                if grad_diff > 0:
                    quad = Kd[pi] + Kd[pt] - 2.0 * K[pi, pt]
                    if quad <= 0:
                        quad = TAU
                    obj_diff = -(grad_diff * grad_diff) / quad
                    if obj_diff <= obj_min:
                        obj_min = obj_diff
                        j = t
            if gmax + gmax2 < tol or j < 0:
                break
            pj = j % m
            zi = z[i]
            zj = z[j]
            Gi = G[i]
            Gj = G[j]
            quad = Kd[pi] + Kd[pj] - 2.0 * K[pi, pj]
            if quad <= 0:
                quad = TAU
            if s[i] != s[j]:
                delta = (-Gi - Gj) / quad
                diff = zi - zj
                zi += delta
                zj += delta
                if diff > 0:
                    if zj < 0:
                        zj = 0.0
                        zi = diff
                else:
                    if zi < 0:
                        zi = 0.0
                        zj = -diff
                if diff > 0:
                    if zi > C:
                        zi = C
                        zj = C - diff
                else:
                    if zj > C:
                        zj = C
                        zi = C + diff
            else:
                delta = (Gi - Gj) / quad
                total = zi + zj
                zi -= delta
                zj += delta
                if total > C:
                    if zi > C:
                        zi = C
                        zj = total - C
                else:
                    if zj < 0:
                        zj = 0.0
                        zi = total
                if total > C:
                    if zj > C:
                        zj = C
                        zi = total - C
                else:
                    if zi < 0:
                        zi = 0.0
                        zj = total
            di = zi - z[i]
            dj = zj - z[j]
            z[i] = zi
            z[j] = zj
            si = s[i] * di
            sj = s[j] * dj
            for t in range(n2):
                pt = t % m
                G[t] += s[t] * (si * K[pt, pi] + sj * K[pt, pj])
            it += 1
            if trace:
                obj = 0.0
                for t in range(n2):
                    obj += z[t] * (G[t] + p[t])
                with gil:
                    objs.append(-0.5 * obj)
    return z_arr, it, objs
