"""Pure-numpy kernels, vectorized over the sample axis.

Same contracts as :mod:`._loops`; used when numba is disabled and as the
second route in backend cross-checks.
"""

import numpy as np

from . import _layout as L


def _esp_mask(x, keep, kmax):
    # keep: boolean (n,) column mask shared by the batch
    s = x.shape[0]
    out = np.zeros((s, kmax + 1))
    out[:, 0] = 1.0
    m = 0
    for i in np.flatnonzero(keep):
        m += 1
        xi = x[:, i]
        for j in range(min(m, kmax), 0, -1):
            out[:, j] += xi * out[:, j - 1]
    return out


def esp(x, kmax):
    return _esp_mask(x, np.ones(x.shape[1], dtype=bool), kmax)


def esp_deleted1(x, kmax):
    s, n = x.shape
    out = np.empty((s, n, kmax + 1))
    for a in range(n):
        keep = np.ones(n, dtype=bool)
        keep[a] = False
        out[:, a] = _esp_mask(x, keep, kmax)
    return out


def esp_deleted2(x, kmax):
    s, n = x.shape
    out = np.zeros((s, n, n, kmax + 1))
    for a in range(n):
        for b in range(a + 1, n):
            keep = np.ones(n, dtype=bool)
            keep[[a, b]] = False
            out[:, a, b] = out[:, b, a] = _esp_mask(x, keep, kmax)
    return out


def _take(tab, j):
    # tab[..., j] with sigma_j := 0 outside the table
    if j < 0 or j >= tab.shape[-1]:
        return np.zeros(tab.shape[:-1])
    return tab[..., j]


def quad_pieces(lam, xi, k, c_nk, r_nk):
    s, n = lam.shape
    out = np.empty((s, L.NFIELDS))
    kap = 1.0 / lam
    e = esp(kap, k)
    d1 = esp_deleted1(kap, k)
    d2 = esp_deleted2(kap, k)
    S = e[:, k]
    S2 = S * S
    s1 = _take(d1, k - 1)                      # (s, n)
    s2m = _take(d2, k - 2)                     # (s, n, n), zero diagonal
    s2k1 = _take(d2, k - 1)
    s2k = _take(d2, k)
    off = ~np.eye(n, dtype=bool)
    diag = np.einsum("sii->si", xi)
    q = xi * xi
    k2 = kap * kap
    fd = s1 * k2 / S2[:, None]

    pair = s2m * k2[:, :, None] * k2[:, None, :]
    xx = diag[:, :, None] * diag[:, None, :]
    t1 = np.sum(pair * (q - xx), axis=(1, 2))
    t1m = np.sum(np.abs(pair) * (q + np.abs(xx)), axis=(1, 2))
    w = (s1 * k2)[:, :, None] * kap[:, None, :] * q
    t2 = -2.0 * w.sum(axis=(1, 2))
    t2m = 2.0 * np.abs(w).sum(axis=(1, 2))
    lin = np.sum(s1 * k2 * diag, axis=1)
    t3 = 2.0 * lin * lin / S
    out[:, L.TOTAL] = (t1 + t2 + t3) / S2
    out[:, L.TOTAL_MAG] = (t1m + t2m + np.abs(t3)) / S2

    dd = kap * diag
    wgt = kap[:, :, None] * kap[:, None, :] * (dd[:, :, None] - dd[:, None, :]) ** 2
    wgt = np.where(off, wgt, 0.0)
    gap = s2k1 * s2k1 - s2k * s2m
    i1p = np.sum(gap * wgt, axis=(1, 2)) / (2.0 * S)
    i1pm = np.sum((s2k1 * s2k1 + np.abs(s2k * s2m)) * wgt, axis=(1, 2)) / (2.0 * S)
    i1 = c_nk * np.sum(s2k1 * s2k1 * wgt, axis=(1, 2)) / (2.0 * S)

    i2a = np.sum(s1 * kap**3 * diag**2, axis=1)
    i2b = lin * lin / S
    i2 = i2a - i2b

    qo = np.where(off, q, 0.0)
    kk = k2[:, :, None] * k2[:, None, :]
    u = s2m * kk * qo
    v = 2.0 * s1[:, :, None] * kk * lam[:, None, :] * qo
    i3 = np.sum(v - u, axis=(1, 2))
    i3m = np.sum(np.abs(u) + np.abs(v), axis=(1, 2))
    i3r = np.sum((s1[:, :, None] + s2k1) * lam[:, None, :] * kk * qo, axis=(1, 2))
    g = s2m * kk * np.where(off, xx, 0.0)
    gml = -g.sum(axis=(1, 2)) + i2b - i2a
    gmm = np.abs(g).sum(axis=(1, 2)) + np.abs(i2a) + np.abs(i2b)

    out[:, L.TOTAL_SPLIT] = -(i1p + i2 + i3) / S2
    out[:, L.SPLIT_MAG] = (i1pm + np.abs(i2a) + np.abs(i2b) + i3m) / S2
    out[:, L.I1P] = i1p
    out[:, L.I1] = i1
    out[:, L.I2] = i2
    out[:, L.I3] = i3
    out[:, L.I3_REWRITE] = i3r
    out[:, L.I3_MAG] = i3m
    out[:, L.GM_LEFT] = gml
    out[:, L.GM_RIGHT] = -i1p
    out[:, L.GM_MAG] = gmm + i1pm

    col = q[:, 1:, 0]
    out[:, L.J1] = np.sum(fd[:, 1:] * col, axis=1) / lam[:, 0]
    out[:, L.J2] = fd[:, 0] * np.sum(col / lam[:, 1:], axis=1)
    sub = np.where(off[1:, 1:], q[:, 1:, 1:], 0.0)
    out[:, L.J3] = np.sum(fd[:, 1:, None] * sub / lam[:, None, 1:], axis=(1, 2))
    out[:, L.K1] = np.sum(s2k1[:, 1:, 0] * k2[:, 1:] * col, axis=1) / (S2 * lam[:, 0])

    out[:, L.GRAD] = np.sum(fd * diag, axis=1)
    out[:, L.TRACE] = fd.sum(axis=1)
    out[:, L.FVAL] = 1.0 / S
    out[:, L.A11] = fd[:, 0] * diag[:, 0] ** 2 / lam[:, 0]
    out[:, L.BDIAG] = np.sum(fd[:, 1:] * diag[:, 1:] ** 2 / lam[:, 1:], axis=1)

    if n > 1:
        base = s1[:, 1:]
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(base > 0.0, (s2k1[:, 1:, 0] - r_nk * base) / base, np.inf)
        sr = ratio.min(axis=1)
        out[:, L.SIGRATIO_MIN] = np.where(np.isfinite(sr), sr, 0.0)
        mono = (fd[:, 1:] * lam[:, 1:] / lam[:, :1] - fd[:, :1]) / fd[:, :1]
        out[:, L.F1MONO_MIN] = mono.min(axis=1)
    else:
        out[:, L.SIGRATIO_MIN] = 0.0
        out[:, L.F1MONO_MIN] = 0.0

    nrm = np.sum(q, axis=(1, 2))
    out[:, L.XI_NORM2] = nrm
    out[:, L.SCALE] = nrm / (S * lam[:, -1] ** 2)
    return out


def glz_pieces(lam, xi, k):
    s, n = lam.shape
    out = np.empty((s, L.GLZ_NFIELDS))
    e = esp(lam, k)
    d1 = esp_deleted1(lam, k)
    d2 = esp_deleted2(lam, k)
    s1 = _take(d1, k - 1)
    s2m = _take(d2, k - 2)
    diag = np.einsum("sii->si", xi)
    q = xi * xi
    off = ~np.eye(n, dtype=bool)
    xx = diag[:, :, None] * diag[:, None, :]
    lhs = np.sum(s1[:, None, :] * q / lam[:, :, None], axis=(1, 2))
    lhs += np.sum(np.where(off, s2m * (xx - q), 0.0), axis=(1, 2))
    lin = np.sum(s1 * diag, axis=1)
    out[:, L.GLZ_LHS] = lhs
    out[:, L.GLZ_RHS] = lin * lin / e[:, k]
    out[:, L.GLZ_SCALE] = e[:, k] * q.sum(axis=(1, 2)) / lam[:, -1] ** 2
    return out


def eigh_jacobi(a_in, tol, max_sweeps):
    a = np.array(a_in, dtype=float, copy=True)
    s, n, _ = a.shape
    v = np.broadcast_to(np.eye(n), (s, n, n)).copy()
    sweeps = np.zeros(s, dtype=np.int64)
    thresh = tol * np.abs(a).max(axis=(1, 2), initial=0.0)
    iu = np.triu_indices(n, 1)
    for _ in range(max_sweeps):
        off = np.abs(a[:, iu[0], iu[1]]).max(axis=1, initial=0.0)
        active = off > thresh
        if not active.any():
            break
        sweeps += active
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = np.where(active, a[:, p, q], 0.0)
                nz = apq != 0.0
                if not nz.any():
                    continue
                safe = np.where(nz, apq, 1.0)
                theta = (a[:, q, q] - a[:, p, p]) / (2.0 * safe)
                t = 1.0 / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
                t = np.where(theta < 0.0, -t, t)
                t = np.where(nz, t, 0.0)
                c = 1.0 / np.sqrt(t * t + 1.0)
                sn = t * c
                cc = c[:, None]
                ss = sn[:, None]
                ap = a[:, :, p].copy()
                aq = a[:, :, q].copy()
                a[:, :, p] = cc * ap - ss * aq
                a[:, :, q] = ss * ap + cc * aq
                rp = a[:, p, :].copy()
                rq = a[:, q, :].copy()
                a[:, p, :] = cc * rp - ss * rq
                a[:, q, :] = ss * rp + cc * rq
                a[nz, p, q] = 0.0
                a[nz, q, p] = 0.0
                vp = v[:, :, p].copy()
                vq = v[:, :, q].copy()
                v[:, :, p] = cc * vp - ss * vq
                v[:, :, q] = ss * vp + cc * vq
    w = np.einsum("sii->si", a).copy()
    return w, v, sweeps
