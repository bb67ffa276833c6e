# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops: closed point-in-triangle masks and Gabriel witness tests."""

import numpy as np
cimport numpy as cnp

cnp.import_array()

cdef double EPS = 1e-6


cdef inline bint _inside(double x0, double y0, double x1, double y1,
                         double x2, double y2, double qx, double qy) nogil:
    cdef double d1 = (x1 - x0) * (qy - y0) - (y1 - y0) * (qx - x0)
    cdef double d2 = (x2 - x1) * (qy - y1) - (y2 - y1) * (qx - x1)
    cdef double d3 = (x0 - x2) * (qy - y2) - (y0 - y2) * (qx - x2)
    cdef bint neg = d1 < -EPS or d2 < -EPS or d3 < -EPS
    cdef bint pos = d1 > EPS or d2 > EPS or d3 > EPS
    return not (neg and pos)


def triangle_mask(double[::1] px, double[::1] py, tri):
    cdef Py_ssize_t i, n = px.shape[0]
    cdef double x0 = tri[0], y0 = tri[1], x1 = tri[2], y1 = tri[3], x2 = tri[4], y2 = tri[5]
    out = np.empty(n, dtype=np.uint8)
    cdef cnp.uint8_t[::1] o = out
    with nogil:
        for i in range(n):
            o[i] = _inside(x0, y0, x1, y1, x2, y2, px[i], py[i])
    return out


def coverage_matrix(double[::1] px, double[::1] py, double[:, ::1] tris):
    cdef Py_ssize_t k, i, n = px.shape[0], t = tris.shape[0]
    out = np.empty((t, n), dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] o = out
    with nogil:
        for k in range(t):
            for i in range(n):
                o[k, i] = _inside(tris[k, 0], tris[k, 1], tris[k, 2], tris[k, 3],
                                  tris[k, 4], tris[k, 5], px[i], py[i])
    return out


def gabriel_mask(double ox, double oy, double[::1] nx, double[::1] ny):
    cdef Py_ssize_t i, j, n = nx.shape[0]
    cdef double duv, dw1, dw2
    out = np.ones(n, dtype=np.uint8)
    cdef cnp.uint8_t[::1] o = out
    with nogil:
        for i in range(n):
            duv = (nx[i] - ox) * (nx[i] - ox) + (ny[i] - oy) * (ny[i] - oy)
            for j in range(n):
                if j == i:
                    continue
                dw1 = (nx[j] - ox) * (nx[j] - ox) + (ny[j] - oy) * (ny[j] - oy)
                dw2 = (nx[j] - nx[i]) * (nx[j] - nx[i]) + (ny[j] - ny[i]) * (ny[j] - ny[i])
                if dw1 + dw2 < duv:
                    o[i] = 0
                    break
    return out
