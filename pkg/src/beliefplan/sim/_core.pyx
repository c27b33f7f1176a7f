# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False, nonecheck=False
"""Compiled simulation kernel.

Operation-for-operation twin of ``_kernel_py.run_chunk`` and
``geom2d.collide_into``; the build disables FP contraction so both
backends produce bit-identical results. Keep in sync when editing.
"""

from libc.math cimport INFINITY, cos, fmod, sin

cdef double TWO_PI = 6.283185307179586
cdef double PI = 3.141592653589793

# Stack buffer capacities; keep in sync with scene.MAX_PART_VERTS (64)
# and geom2d.MAX_CONTACTS (16).
cdef enum:
    MAX_PART_VERTS = 64
    MAX_CONTACTS = 16


cdef inline double _wrap(double a) noexcept nogil:
    cdef double r = fmod(a, TWO_PI)
    if r <= -PI:
        r += TWO_PI
    elif r > PI:
        r -= TWO_PI
    return r


cdef int _collide_into(const double* va, const double* na, int nva,
                       const double* vb, const double* nb, int nvb,
                       double* cpx, double* cpy, double* cnx, double* cny,
                       double* cdep, int base) noexcept nogil:
    cdef double sep_a, sep_b, nx, ny, ax, ay, smin, s, d, best_dot
    cdef double nrx, nry, px, py, qx, qy, v1x, v1y, v2x, v2y, tx, ty
    cdef double off, dp, dq, t, x0, y0, x1, y1, ccnx, ccny, sep0, sep1, tmp
    cdef const double* rv
    cdef const double* rn
    cdef const double* iv
    cdef const double* inorm
    cdef int i, j, face_a, face_b, ref_face, inc_face, i2, r2
    cdef int nref, ninc, count, n
    cdef bint flip, keep0, keep1

    # Most-separating face of A against B.
    sep_a = -INFINITY
    face_a = 0
    for i in range(nva):
        nx = na[2 * i]
        ny = na[2 * i + 1]
        ax = va[2 * i]
        ay = va[2 * i + 1]
        smin = INFINITY
        for j in range(nvb):
            s = nx * (vb[2 * j] - ax) + ny * (vb[2 * j + 1] - ay)
            if s < smin:
                smin = s
        if smin > sep_a:
            sep_a = smin
            face_a = i
        if sep_a > 0.0:
            return base
    # Most-separating face of B against A.
    sep_b = -INFINITY
    face_b = 0
    for i in range(nvb):
        nx = nb[2 * i]
        ny = nb[2 * i + 1]
        ax = vb[2 * i]
        ay = vb[2 * i + 1]
        smin = INFINITY
        for j in range(nva):
            s = nx * (va[2 * j] - ax) + ny * (va[2 * j + 1] - ay)
            if s < smin:
                smin = s
        if smin > sep_b:
            sep_b = smin
            face_b = i
        if sep_b > 0.0:
            return base
    if sep_b > sep_a:
        rv = vb; rn = nb; nref = nvb
        iv = va; inorm = na; ninc = nva
        ref_face = face_b
        flip = False
    else:
        rv = va; rn = na; nref = nva
        iv = vb; inorm = nb; ninc = nvb
        ref_face = face_a
        flip = True
    nrx = rn[2 * ref_face]
    nry = rn[2 * ref_face + 1]
    # Incident face: most anti-parallel to the reference normal.
    inc_face = 0
    best_dot = INFINITY
    for i in range(ninc):
        d = nrx * inorm[2 * i] + nry * inorm[2 * i + 1]
        if d < best_dot:
            best_dot = d
            inc_face = i
    i2 = inc_face + 1
    if i2 == ninc:
        i2 = 0
    px = iv[2 * inc_face]
    py = iv[2 * inc_face + 1]
    qx = iv[2 * i2]
    qy = iv[2 * i2 + 1]
    r2 = ref_face + 1
    if r2 == nref:
        r2 = 0
    v1x = rv[2 * ref_face]
    v1y = rv[2 * ref_face + 1]
    v2x = rv[2 * r2]
    v2y = rv[2 * r2 + 1]
    tx = v2x - v1x
    ty = v2y - v1y
    # Clip to the side plane at v1 (keep dot(t, p) >= dot(t, v1)).
    off = tx * v1x + ty * v1y
    dp = off - (tx * px + ty * py)
    dq = off - (tx * qx + ty * qy)
    count = 0
    x0 = y0 = x1 = y1 = 0.0
    if dp <= 0.0:
        x0 = px; y0 = py
        count = 1
    if dq <= 0.0:
        if count == 0:
            x0 = qx; y0 = qy
        else:
            x1 = qx; y1 = qy
        count += 1
    if dp * dq < 0.0 and count == 1:
        t = dp / (dp - dq)
        x1 = px + t * (qx - px)
        y1 = py + t * (qy - py)
        count = 2
    if count < 2:
        return base
    px = x0; py = y0; qx = x1; qy = y1
    # Clip to the side plane at v2 (keep dot(t, p) <= dot(t, v2)).
    off = tx * v2x + ty * v2y
    dp = (tx * px + ty * py) - off
    dq = (tx * qx + ty * qy) - off
    count = 0
    if dp <= 0.0:
        x0 = px; y0 = py
        count = 1
    if dq <= 0.0:
        if count == 0:
            x0 = qx; y0 = qy
        else:
            x1 = qx; y1 = qy
        count += 1
    if dp * dq < 0.0 and count == 1:
        t = dp / (dp - dq)
        x1 = px + t * (qx - px)
        y1 = py + t * (qy - py)
        count = 2
    if count < 2:
        return base
    if flip:
        ccnx = -nrx
        ccny = -nry
    else:
        ccnx = nrx
        ccny = nry
    sep0 = nrx * (x0 - v1x) + nry * (y0 - v1y)
    sep1 = nrx * (x1 - v1x) + nry * (y1 - v1y)
    keep0 = sep0 <= 0.0
    keep1 = sep1 <= 0.0
    # Deterministic manifold order: sort the pair by (x, y).
    if keep0 and keep1 and (x1 < x0 or (x1 == x0 and y1 < y0)):
        tmp = x0; x0 = x1; x1 = tmp
        tmp = y0; y0 = y1; y1 = tmp
        tmp = sep0; sep0 = sep1; sep1 = tmp
    n = base
    if keep0 and n < MAX_CONTACTS:
        cpx[n] = x0
        cpy[n] = y0
        cnx[n] = ccnx
        cny[n] = ccny
        cdep[n] = -sep0
        n += 1
    if keep1 and n < MAX_CONTACTS:
        cpx[n] = x1
        cpy[n] = y1
        cnx[n] = ccnx
        cny[n] = ccny
        cdep[n] = -sep1
        n += 1
    return n


def run_chunk(
    double[:, ::1] pose, double[:, ::1] twist,
    const double[:, ::1] grasp,
    unsigned char[::1] alive, int[::1] death,
    double[:, :] cost_out, double[::1] maxw,
    const double[:, ::1] sp_pose, const double[:, ::1] sp_twist,
    int i_lo, int i_hi, int k0,
    double dt, double kp_t, double kp_r, double kd_t, double kd_r,
    double mass, double inertia, double gx, double gy,
    double fmax2, double tmax2, double mu, double bias_coef, double slop,
    int n_iters,
    const double[:, ::1] emap, const double[::1] ustar,
    const double[:, ::1] pverts, const double[:, ::1] pnorms,
    const int[::1] poffs, const double[:, ::1] pcirc,
    const double[:, ::1] sverts, const double[:, ::1] snorms,
    const int[::1] soffs, const double[:, ::1] scirc,
):
    """See _kernel_py.run_chunk; identical contract and semantics."""
    cdef int M = sp_twist.shape[0]
    cdef int PP = pcirc.shape[0]
    cdef int SP = scirc.shape[0]
    cdef int PV = pverts.shape[0]
    cdef double inv_m = 1.0 / mass
    cdef double inv_i = 1.0 / inertia
    cdef double e00x = emap[0, 0], e01x = emap[0, 1], e10x = emap[0, 2], e11x = emap[0, 3]
    cdef double e00y = emap[1, 0], e01y = emap[1, 1], e10y = emap[1, 2], e11y = emap[1, 3]
    cdef double e00t = emap[2, 0], e01t = emap[2, 1], e10t = emap[2, 2], e11t = emap[2, 3]
    cdef double usx = ustar[0], usy = ustar[1], ust = ustar[2]
    cdef double wv[2 * MAX_PART_VERTS]
    cdef double wn[2 * MAX_PART_VERTS]
    cdef double cpx[MAX_CONTACTS]
    cdef double cpy[MAX_CONTACTS]
    cdef double cnx_[MAX_CONTACTS]
    cdef double cny_[MAX_CONTACTS]
    cdef double cdep[MAX_CONTACTS]
    cdef double crx[MAX_CONTACTS]
    cdef double cry[MAX_CONTACTS]
    cdef double cmn[MAX_CONTACTS]
    cdef double cmt[MAX_CONTACTS]
    cdef double cbias[MAX_CONTACTS]
    cdef double cpn[MAX_CONTACTS]
    cdef double cpt[MAX_CONTACTS]
    cdef double max_f2 = maxw[0]
    cdef double max_t2 = maxw[1]
    cdef double x, y, th, vx, vy, w, gpx, gpy, gpt
    cdef double dvx, dvy, dw, ex, ey, eth, hx, hy, ht, f2, t2, d
    cdef double cth, sth, wcx, wcy, ddx, ddy, rr
    cdef double u, un, dun
    cdef double rx, ry, nx, ny, rn_, rt, pen
    cdef double vpx, vpy, vn, vt, dpj, pn0, pn1, pt0, pt1, lim, ix, iy
    cdef int i, k, kk, pp, sp, t, j, it, ncon, a0
    cdef bint transformed

    with nogil:
        for i in range(i_lo, i_hi):
            if alive[i] == 0:
                for k in range(M):
                    cost_out[i, k] = 0.0
                continue
            x = pose[i, 0]
            y = pose[i, 1]
            th = pose[i, 2]
            vx = twist[i, 0]
            vy = twist[i, 1]
            w = twist[i, 2]
            gpx = grasp[i, 0]
            gpy = grasp[i, 1]
            gpt = grasp[i, 2]
            for k in range(M):
                dvx = vx - sp_twist[k, 0]
                dvy = vy - sp_twist[k, 1]
                dw = w - sp_twist[k, 2]
                ex = x - sp_pose[k, 0] - gpx
                ey = y - sp_pose[k, 1] - gpy
                eth = _wrap(th - sp_pose[k, 2] - gpt)
                hx = kp_t * ex + kd_t * dvx
                hy = kp_t * ey + kd_t * dvy
                ht = kp_r * eth + kd_r * dw
                f2 = hx * hx + hy * hy
                t2 = ht * ht
                if f2 > fmax2 or t2 > tmax2:
                    alive[i] = 0
                    death[i] = k0 + k
                    for kk in range(k, M):
                        cost_out[i, kk] = 0.0
                    break
                d = hx * vx + hy * vy + ht * w
                cost_out[i, k] = d if d > 0.0 else 0.0
                if f2 > max_f2:
                    max_f2 = f2
                if t2 > max_t2:
                    max_t2 = t2
                ncon = 0
                if SP > 0:
                    cth = cos(th)
                    sth = sin(th)
                    transformed = False
                    for pp in range(PP):
                        wcx = x + cth * pcirc[pp, 0] - sth * pcirc[pp, 1]
                        wcy = y + sth * pcirc[pp, 0] + cth * pcirc[pp, 1]
                        for sp in range(SP):
                            ddx = scirc[sp, 0] - wcx
                            ddy = scirc[sp, 1] - wcy
                            rr = pcirc[pp, 2] + scirc[sp, 2]
                            if ddx * ddx + ddy * ddy > rr * rr:
                                continue
                            if not transformed:
                                for t in range(PV):
                                    wv[2 * t] = x + cth * pverts[t, 0] - sth * pverts[t, 1]
                                    wv[2 * t + 1] = y + sth * pverts[t, 0] + cth * pverts[t, 1]
                                    wn[2 * t] = cth * pnorms[t, 0] - sth * pnorms[t, 1]
                                    wn[2 * t + 1] = sth * pnorms[t, 0] + cth * pnorms[t, 1]
                                transformed = True
                            a0 = poffs[pp]
                            ncon = _collide_into(
                                &wv[2 * a0], &wn[2 * a0], poffs[pp + 1] - a0,
                                &sverts[soffs[sp], 0], &snorms[soffs[sp], 0],
                                soffs[sp + 1] - soffs[sp],
                                cpx, cpy, cnx_, cny_, cdep, ncon,
                            )
                if ncon == 0:
                    u = ex - usx
                    un = e00x * u + e01x * dvx
                    dun = e10x * u + e11x * dvx
                    x = sp_pose[k + 1, 0] + gpx + un + usx
                    vx = sp_twist[k, 0] + dun
                    u = ey - usy
                    un = e00y * u + e01y * dvy
                    dun = e10y * u + e11y * dvy
                    y = sp_pose[k + 1, 1] + gpy + un + usy
                    vy = sp_twist[k, 1] + dun
                    u = eth - ust
                    un = e00t * u + e01t * dw
                    dun = e10t * u + e11t * dw
                    th = _wrap(sp_pose[k + 1, 2] + gpt + un + ust)
                    w = sp_twist[k, 2] + dun
                else:
                    vx += dt * (gx - hx * inv_m)
                    vy += dt * (gy - hy * inv_m)
                    w += dt * (-ht * inv_i)
                    for j in range(ncon):
                        rx = cpx[j] - x
                        ry = cpy[j] - y
                        nx = cnx_[j]
                        ny = cny_[j]
                        rn_ = rx * ny - ry * nx
                        cmn[j] = 1.0 / (inv_m + rn_ * rn_ * inv_i)
                        # tangent is the normal rotated +90deg; cross(r, t) = dot(r, n)
                        rt = rx * nx + ry * ny
                        cmt[j] = 1.0 / (inv_m + rt * rt * inv_i)
                        pen = cdep[j] - slop
                        cbias[j] = bias_coef * pen if pen > 0.0 else 0.0
                        crx[j] = rx
                        cry[j] = ry
                        cpn[j] = 0.0
                        cpt[j] = 0.0
                    for it in range(n_iters):
                        for j in range(ncon):
                            nx = cnx_[j]
                            ny = cny_[j]
                            rx = crx[j]
                            ry = cry[j]
                            vpx = vx - w * ry
                            vpy = vy + w * rx
                            vn = vpx * nx + vpy * ny
                            dpj = cmn[j] * (cbias[j] - vn)
                            pn0 = cpn[j]
                            pn1 = pn0 + dpj
                            if pn1 < 0.0:
                                pn1 = 0.0
                            dpj = pn1 - pn0
                            cpn[j] = pn1
                            ix = dpj * nx
                            iy = dpj * ny
                            vx += ix * inv_m
                            vy += iy * inv_m
                            w += (rx * iy - ry * ix) * inv_i
                            vpx = vx - w * ry
                            vpy = vy + w * rx
                            vt = -vpx * ny + vpy * nx
                            dpj = -cmt[j] * vt
                            lim = mu * cpn[j]
                            pt0 = cpt[j]
                            pt1 = pt0 + dpj
                            if pt1 > lim:
                                pt1 = lim
                            elif pt1 < -lim:
                                pt1 = -lim
                            dpj = pt1 - pt0
                            cpt[j] = pt1
                            ix = -dpj * ny
                            iy = dpj * nx
                            vx += ix * inv_m
                            vy += iy * inv_m
                            w += (rx * iy - ry * ix) * inv_i
                    x += dt * vx
                    y += dt * vy
                    th = _wrap(th + dt * w)
            pose[i, 0] = x
            pose[i, 1] = y
            pose[i, 2] = th
            twist[i, 0] = vx
            twist[i, 1] = vy
            twist[i, 2] = w
    maxw[0] = max_f2
    maxw[1] = max_t2
