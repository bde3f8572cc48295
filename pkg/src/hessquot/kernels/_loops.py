"""Scalar-loop kernels, compiled by numba when available.

Every function here processes a batch with an explicit outer loop over
samples; the inner loops are written for the nopython compiler.
"""

import math

import numpy as np

from .._backend import njit
from . import _layout as L


@njit
def _esp_skip(x, skip1, skip2, kmax, out):
    # out[j] = sigma_j of x with entries skip1, skip2 removed; j = 0..kmax
    for j in range(kmax + 1):
        out[j] = 0.0
    out[0] = 1.0
    m = 0
    for i in range(x.shape[0]):
        if i == skip1 or i == skip2:
            continue
        m += 1
        top = m if m < kmax else kmax
        xi = x[i]
        for j in range(top, 0, -1):
            out[j] += xi * out[j - 1]


@njit
def _sig(arr, j):
    if j < 0 or j >= arr.shape[0]:
        return 0.0
    return arr[j]


@njit
def esp(x, kmax):
    s, n = x.shape
    out = np.empty((s, kmax + 1))
    for t in range(s):
        _esp_skip(x[t], -1, -1, kmax, out[t])
    return out


@njit
def esp_deleted1(x, kmax):
    s, n = x.shape
    out = np.empty((s, n, kmax + 1))
    for t in range(s):
        for a in range(n):
            _esp_skip(x[t], a, -1, kmax, out[t, a])
    return out


@njit
def esp_deleted2(x, kmax):
    s, n = x.shape
    out = np.zeros((s, n, n, kmax + 1))
    for t in range(s):
        for a in range(n):
            for b in range(a + 1, n):
                _esp_skip(x[t], a, b, kmax, out[t, a, b])
                for j in range(kmax + 1):
                    out[t, b, a, j] = out[t, a, b, j]
    return out


@njit
def _pieces_one(lam, xi, k, c_nk, r_nk, e, d1, d2, fd, out):
    n = lam.shape[0]
    kap = 1.0 / lam
    _esp_skip(kap, -1, -1, k, e)
    for a in range(n):
        _esp_skip(kap, a, -1, k, d1[a])
        for b in range(a + 1, n):
            _esp_skip(kap, a, b, k, d2[a, b])
            for j in range(k + 1):
                d2[b, a, j] = d2[a, b, j]
    S = e[k]
    S2 = S * S

    for a in range(n):
        fd[a] = _sig(d1[a], k - 1) * kap[a] * kap[a] / S2

    # direct contraction, times S^2
    t1 = 0.0
    t1m = 0.0
    t2 = 0.0
    t2m = 0.0
    lin = 0.0
    for a in range(n):
        ka2 = kap[a] * kap[a]
        s1a = _sig(d1[a], k - 1)
        lin += s1a * ka2 * xi[a, a]
        for c in range(n):
            q = xi[a, c] * xi[a, c]
            w = s1a * ka2 * kap[c] * q
            t2 -= 2.0 * w
            t2m += 2.0 * abs(w)
            if c != a:
                s2 = _sig(d2[a, c], k - 2) * ka2 * kap[c] * kap[c]
                v = s2 * (q - xi[a, a] * xi[c, c])
                t1 += v
                t1m += abs(s2) * (q + abs(xi[a, a] * xi[c, c]))
    t3 = 2.0 * lin * lin / S
    out[L.TOTAL] = (t1 + t2 + t3) / S2
    out[L.TOTAL_MAG] = (t1m + t2m + abs(t3)) / S2

    # I1', I1, the bracketed diagonal expression
    i1p = 0.0
    i1pm = 0.0
    i1 = 0.0
    for a in range(n):
        for b in range(n):
            if a == b:
                continue
            sk1 = _sig(d2[a, b], k - 1)
            sk = _sig(d2[a, b], k)
            sk2 = _sig(d2[a, b], k - 2)
            dd = kap[a] * xi[a, a] - kap[b] * xi[b, b]
            wgt = kap[a] * kap[b] * dd * dd
            i1p += (sk1 * sk1 - sk * sk2) * wgt
            i1pm += (sk1 * sk1 + abs(sk * sk2)) * wgt
            i1 += sk1 * sk1 * wgt
    i1p /= 2.0 * S
    i1pm /= 2.0 * S
    i1 *= c_nk / (2.0 * S)

    i2a = 0.0
    for a in range(n):
        i2a += _sig(d1[a], k - 1) * kap[a] ** 3 * xi[a, a] ** 2
    i2b = lin * lin / S
    i2 = i2a - i2b

    i3 = 0.0
    i3m = 0.0
    i3r = 0.0
    gml = 0.0
    gmm = 0.0
    for a in range(n):
        ka2 = kap[a] * kap[a]
        s1a = _sig(d1[a], k - 1)
        for c in range(n):
            if c == a:
                continue
            q = xi[a, c] * xi[a, c]
            kc2 = kap[c] * kap[c]
            s2 = _sig(d2[a, c], k - 2)
            u = s2 * ka2 * kc2 * q
            v = 2.0 * s1a * ka2 * kc2 * lam[c] * q
            i3 += v - u
            i3m += abs(u) + abs(v)
            i3r += (s1a + _sig(d2[a, c], k - 1)) * lam[c] * ka2 * kc2 * q
            g = s2 * ka2 * kc2 * xi[a, a] * xi[c, c]
            gml -= g
            gmm += abs(g)
    gml += i2b - i2a
    gmm += abs(i2a) + abs(i2b)

    out[L.TOTAL_SPLIT] = -(i1p + i2 + i3) / S2
    out[L.SPLIT_MAG] = (i1pm + abs(i2a) + abs(i2b) + i3m) / S2
    out[L.I1P] = i1p
    out[L.I1] = i1
    out[L.I2] = i2
    out[L.I3] = i3
    out[L.I3_REWRITE] = i3r
    out[L.I3_MAG] = i3m
    out[L.GM_LEFT] = gml
    out[L.GM_RIGHT] = -i1p
    out[L.GM_MAG] = gmm + i1pm

    # J/K pieces
    j1 = 0.0
    j2 = 0.0
    j3 = 0.0
    k1 = 0.0
    for a in range(1, n):
        q = xi[a, 0] * xi[a, 0]
        j1 += fd[a] * q / lam[0]
        j2 += fd[0] * q / lam[a]
        k1 += _sig(d2[a, 0], k - 1) * kap[a] * kap[a] * q / (S2 * lam[0])
        for c in range(1, n):
            if c != a:
                j3 += fd[a] * xi[a, c] * xi[a, c] / lam[c]
    out[L.J1] = j1
    out[L.J2] = j2
    out[L.J3] = j3
    out[L.K1] = k1

    grad = 0.0
    tr = 0.0
    bd = 0.0
    for a in range(n):
        grad += fd[a] * xi[a, a]
        tr += fd[a]
        if a > 0:
            bd += fd[a] * xi[a, a] * xi[a, a] / lam[a]
    out[L.GRAD] = grad
    out[L.TRACE] = tr
    out[L.FVAL] = 1.0 / S
    out[L.A11] = fd[0] * xi[0, 0] * xi[0, 0] / lam[0]
    out[L.BDIAG] = bd

    sr = 0.0
    fm = 0.0
    for a in range(1, n):
        base = _sig(d1[a], k - 1)
        if base > 0.0:
            v = (_sig(d2[a, 0], k - 1) - r_nk * base) / base
            if a == 1 or v < sr:
                sr = v
        v = (fd[a] * lam[a] / lam[0] - fd[0]) / fd[0]
        if a == 1 or v < fm:
            fm = v
    out[L.SIGRATIO_MIN] = sr
    out[L.F1MONO_MIN] = fm

    nrm = 0.0
    for a in range(n):
        for c in range(n):
            nrm += xi[a, c] * xi[a, c]
    out[L.XI_NORM2] = nrm
    out[L.SCALE] = nrm / (S * lam[n - 1] * lam[n - 1])


@njit
def quad_pieces(lam, xi, k, c_nk, r_nk):
    s, n = lam.shape
    out = np.empty((s, L.NFIELDS))
    e = np.empty(k + 1)
    d1 = np.empty((n, k + 1))
    d2 = np.zeros((n, n, k + 1))
    fd = np.empty(n)
    for t in range(s):
        _pieces_one(lam[t], xi[t], k, c_nk, r_nk, e, d1, d2, fd, out[t])
    return out


@njit
def glz_pieces(lam, xi, k):
    s, n = lam.shape
    out = np.empty((s, L.GLZ_NFIELDS))
    e = np.empty(k + 1)
    d1 = np.empty((n, k + 1))
    d2 = np.zeros((n, n, k + 1))
    for t in range(s):
        la = lam[t]
        x = xi[t]
        _esp_skip(la, -1, -1, k, e)
        for a in range(n):
            _esp_skip(la, a, -1, k, d1[a])
            for b in range(a + 1, n):
                _esp_skip(la, a, b, k, d2[a, b])
                for j in range(k + 1):
                    d2[b, a, j] = d2[a, b, j]
        lhs = 0.0
        lin = 0.0
        nrm = 0.0
        for a in range(n):
            lin += _sig(d1[a], k - 1) * x[a, a]
            for c in range(n):
                q = x[a, c] * x[a, c]
                nrm += q
                lhs += _sig(d1[c], k - 1) * q / la[a]
                if c != a:
                    lhs += _sig(d2[a, c], k - 2) * (x[a, a] * x[c, c] - q)
        out[t, L.GLZ_LHS] = lhs
        out[t, L.GLZ_RHS] = lin * lin / e[k]
        out[t, L.GLZ_SCALE] = e[k] * nrm / (la[n - 1] * la[n - 1])
    return out


@njit
def eigh_jacobi(a_in, tol, max_sweeps):
    # cyclic Jacobi; returns unsorted eigenvalues and eigenvector columns
    s, n, _ = a_in.shape
    w = np.empty((s, n))
    vecs = np.empty((s, n, n))
    sweeps = np.zeros(s, dtype=np.int64)
    a = np.empty((n, n))
    v = np.empty((n, n))
    for t in range(s):
        amax = 0.0
        for i in range(n):
            for j in range(n):
                a[i, j] = a_in[t, i, j]
                v[i, j] = 1.0 if i == j else 0.0
                if abs(a[i, j]) > amax:
                    amax = abs(a[i, j])
        thresh = tol * amax
        it = 0
        while it < max_sweeps:
            off = 0.0
            for p in range(n):
                for q in range(p + 1, n):
                    if abs(a[p, q]) > off:
                        off = abs(a[p, q])
            if off <= thresh:
                break
            it += 1
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = a[p, q]
                    if apq == 0.0:
                        continue
                    theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                    tt = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        tt = -tt
                    c = 1.0 / math.sqrt(tt * tt + 1.0)
                    sn = tt * c
                    for r in range(n):
                        arp = a[r, p]
                        arq = a[r, q]
                        a[r, p] = c * arp - sn * arq
                        a[r, q] = sn * arp + c * arq
                    for r in range(n):
                        apr = a[p, r]
                        aqr = a[q, r]
                        a[p, r] = c * apr - sn * aqr
                        a[q, r] = sn * apr + c * aqr
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    for r in range(n):
                        vrp = v[r, p]
                        vrq = v[r, q]
                        v[r, p] = c * vrp - sn * vrq
                        v[r, q] = sn * vrp + c * vrq
        sweeps[t] = it
        for i in range(n):
            w[t, i] = a[i, i]
            for j in range(n):
                vecs[t, i, j] = v[i, j]
    return w, vecs, sweeps
