"""Pure-Python (numpy) versions of the compiled kernels in ``_ckernels.pyx``.

Both implementations must agree bit-for-bit on their outputs; the test suite
checks them against each other when the extension is built.
"""

import numpy as np

EPS = 1e-6


def _signs(tri, px, py):
    x0, y0, x1, y1, x2, y2 = (float(v) for v in tri)
    d1 = (x1 - x0) * (py - y0) - (y1 - y0) * (px - x0)
    d2 = (x2 - x1) * (py - y1) - (y2 - y1) * (px - x1)
    d3 = (x0 - x2) * (py - y2) - (y0 - y2) * (px - x2)
    neg = (d1 < -EPS) | (d2 < -EPS) | (d3 < -EPS)
    pos = (d1 > EPS) | (d2 > EPS) | (d3 > EPS)
    return ~(neg & pos)


def triangle_mask(px, py, tri):
    return _signs(tri, np.asarray(px, dtype=float), np.asarray(py, dtype=float)).astype(np.uint8)


def coverage_matrix(px, py, tris):
    px = np.asarray(px, dtype=float)
    py = np.asarray(py, dtype=float)
    out = np.empty((len(tris), len(px)), dtype=np.uint8)
    for k, tri in enumerate(tris):
        out[k] = _signs(tri, px, py)
    return out


def gabriel_mask(ox, oy, nx, ny):
    nx = np.asarray(nx, dtype=float)
    ny = np.asarray(ny, dtype=float)
    n = len(nx)
    out = np.ones(n, dtype=np.uint8)
    for i in range(n):
        duv = (nx[i] - ox) * (nx[i] - ox) + (ny[i] - oy) * (ny[i] - oy)
        for j in range(n):
            if j == i:
                continue
            dw1 = (nx[j] - ox) * (nx[j] - ox) + (ny[j] - oy) * (ny[j] - oy)
            dw2 = (nx[j] - nx[i]) * (nx[j] - nx[i]) + (ny[j] - ny[i]) * (ny[j] - ny[i])
            if dw1 + dw2 < duv:
                out[i] = 0
                break
    return out
