"""Pure-Python simulation kernel.

Semantics twin of the compiled kernel in ``_core.pyx``: both execute the
same floating-point operations in the same order (libm calls included),
so a belief propagated by either backend is bit-identical. Keep every
arithmetic expression in sync with the .pyx file when editing.

Per particle, per substep:

1. impedance deflection wrench h at the substep-start state;
2. wrench-limit check; on violation the particle is removed before it
   moves and contributes zero cost from this substep on;
3. stretch power cost max(0, h . v): positive exactly when the applied
   wrench -h extracts energy from the object (spring being stretched);
4. contact manifold against the static scene at the start pose;
5. no contacts: exact damped-oscillator map per axis about the moving
   set-point (the three world axes decouple because the gain matrices
   are diagonal);
   contacts: explicit force integration + sequential impulses with
   Baumgarte stabilization, Coulomb friction, zero restitution, then an
   Euler position update.
"""

from __future__ import annotations

import math

import numpy as np

from ..geom2d import MAX_CONTACTS, collide_into as _collide_into

TWO_PI = 6.283185307179586


def _wrap(a: float) -> float:
    r = math.fmod(a, TWO_PI)
    if r <= -math.pi:
        r += TWO_PI
    elif r > math.pi:
        r -= TWO_PI
    return r


def run_chunk(
    pose, twist, grasp, alive, death, cost_out, maxw,
    sp_pose, sp_twist, i_lo, i_hi, k0,
    dt, kp_t, kp_r, kd_t, kd_r, mass, inertia, gx, gy,
    fmax2, tmax2, mu, bias_coef, slop, n_iters,
    emap, ustar,
    pverts, pnorms, poffs, pcirc,
    sverts, snorms, soffs, scirc,
):
    """Advance particles i_lo..i_hi over the substep window in sp_twist.

    pose (N,3), twist (N,3), alive (N,) uint8 and death (N,) int32 are
    updated in place; grasp (N,3) holds each particle's constant offset,
    which displaces that particle's set-point; cost_out (N,M) receives
    per-particle stretch power per substep (zero once dead); maxw (2,)
    accumulates the running max of squared force and squared torque seen
    by live particles. sp_pose has M+1 rows (substep-start set-points
    plus the window end), k0 is the absolute index of the window's first
    substep.
    """
    M = sp_twist.shape[0]
    PP = pcirc.shape[0]
    SP = scirc.shape[0]
    PV = pverts.shape[0]
    inv_m = 1.0 / mass
    inv_i = 1.0 / inertia
    e00x = emap[0, 0]; e01x = emap[0, 1]; e10x = emap[0, 2]; e11x = emap[0, 3]
    e00y = emap[1, 0]; e01y = emap[1, 1]; e10y = emap[1, 2]; e11y = emap[1, 3]
    e00t = emap[2, 0]; e01t = emap[2, 1]; e10t = emap[2, 2]; e11t = emap[2, 3]
    usx = ustar[0]; usy = ustar[1]; ust = ustar[2]
    wv = np.empty((PV, 2))
    wn = np.empty((PV, 2))
    cpx = np.empty(MAX_CONTACTS)
    cpy = np.empty(MAX_CONTACTS)
    cnx = np.empty(MAX_CONTACTS)
    cny = np.empty(MAX_CONTACTS)
    cdep = np.empty(MAX_CONTACTS)
    crx = np.empty(MAX_CONTACTS)
    cry = np.empty(MAX_CONTACTS)
    cmn = np.empty(MAX_CONTACTS)
    cmt = np.empty(MAX_CONTACTS)
    cbias = np.empty(MAX_CONTACTS)
    cpn = np.empty(MAX_CONTACTS)
    cpt = np.empty(MAX_CONTACTS)
    max_f2 = maxw[0]
    max_t2 = maxw[1]
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
                cth = math.cos(th)
                sth = math.sin(th)
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
                                wv[t, 0] = x + cth * pverts[t, 0] - sth * pverts[t, 1]
                                wv[t, 1] = y + sth * pverts[t, 0] + cth * pverts[t, 1]
                                wn[t, 0] = cth * pnorms[t, 0] - sth * pnorms[t, 1]
                                wn[t, 1] = sth * pnorms[t, 0] + cth * pnorms[t, 1]
                            transformed = True
                        a0 = poffs[pp]
                        b0 = soffs[sp]
                        ncon = _collide_into(
                            wv[a0:poffs[pp + 1]], wn[a0:poffs[pp + 1]],
                            poffs[pp + 1] - a0,
                            sverts[b0:soffs[sp + 1]], snorms[b0:soffs[sp + 1]],
                            soffs[sp + 1] - b0,
                            cpx, cpy, cnx, cny, cdep, ncon,
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
                    nx = cnx[j]
                    ny = cny[j]
                    rn = rx * ny - ry * nx
                    cmn[j] = 1.0 / (inv_m + rn * rn * inv_i)
                    # tangent is the normal rotated +90deg; cross(r, t) = dot(r, n)
                    rt = rx * nx + ry * ny
                    cmt[j] = 1.0 / (inv_m + rt * rt * inv_i)
                    pen = cdep[j] - slop
                    cbias[j] = bias_coef * pen if pen > 0.0 else 0.0
                    crx[j] = rx
                    cry[j] = ry
                    cpn[j] = 0.0
                    cpt[j] = 0.0
                for _ in range(n_iters):
                    for j in range(ncon):
                        nx = cnx[j]
                        ny = cny[j]
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
