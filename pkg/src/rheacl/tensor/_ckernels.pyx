# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the conv/pool inner loops and the view-mask flood.

Contract-identical to ``_kernels_np``; selected at import by
``rheacl.tensor.kernels`` when the build is available.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def conv2d_forward(double[:, :, :, ::1] x, double[:, :, :, ::1] w, double[::1] b):
    cdef Py_ssize_t n = x.shape[0], h = x.shape[1], ww = x.shape[2], ci = x.shape[3]
    cdef Py_ssize_t kh = w.shape[0], kw = w.shape[1], co = w.shape[3]
    cdef Py_ssize_t ho = h - kh + 1, wo = ww - kw + 1
    out_arr = np.empty((n, ho, wo, co), dtype=np.float64)
    cdef double[:, :, :, ::1] out = out_arr
    cdef Py_ssize_t i, r, c, k, l, p, q
    cdef double acc, xv
    for i in range(n):
        for r in range(ho):
            for c in range(wo):
                for q in range(co):
                    out[i, r, c, q] = b[q]
                for k in range(kh):
                    for l in range(kw):
                        for p in range(ci):
                            xv = x[i, r + k, c + l, p]
                            for q in range(co):
                                out[i, r, c, q] += xv * w[k, l, p, q]
    return out_arr


def conv2d_backward(double[:, :, :, ::1] x, double[:, :, :, ::1] w,
                    double[:, :, :, ::1] gout, bint need_gx):
    cdef Py_ssize_t n = x.shape[0], h = x.shape[1], ww = x.shape[2], ci = x.shape[3]
    cdef Py_ssize_t kh = w.shape[0], kw = w.shape[1], co = w.shape[3]
    cdef Py_ssize_t ho = h - kh + 1, wo = ww - kw + 1
    gw_arr = np.zeros((kh, kw, ci, co), dtype=np.float64)
    gb_arr = np.zeros(co, dtype=np.float64)
    cdef double[:, :, :, ::1] gw = gw_arr
    cdef double[::1] gb = gb_arr
    cdef double[:, :, :, ::1] gx
    gx_arr = None
    cdef Py_ssize_t i, r, c, k, l, p, q
    cdef double g, xv
    for i in range(n):
        for r in range(ho):
            for c in range(wo):
                for q in range(co):
                    gb[q] += gout[i, r, c, q]
                for k in range(kh):
                    for l in range(kw):
                        for p in range(ci):
                            xv = x[i, r + k, c + l, p]
                            for q in range(co):
                                gw[k, l, p, q] += xv * gout[i, r, c, q]
    if need_gx:
        gx_arr = np.zeros((n, h, ww, ci), dtype=np.float64)
        gx = gx_arr
        for i in range(n):
            for r in range(ho):
                for c in range(wo):
                    for k in range(kh):
                        for l in range(kw):
                            for q in range(co):
                                g = gout[i, r, c, q]
                                for p in range(ci):
                                    gx[i, r + k, c + l, p] += g * w[k, l, p, q]
    return gx_arr, gw_arr, gb_arr


def maxpool2_forward(double[:, :, :, ::1] x):
    cdef Py_ssize_t n = x.shape[0], h = x.shape[1], w = x.shape[2], c = x.shape[3]
    cdef Py_ssize_t ho = h // 2, wo = w // 2
    out_arr = np.empty((n, ho, wo, c), dtype=np.float64)
    idx_arr = np.empty((n, ho, wo, c), dtype=np.int64)
    cdef double[:, :, :, ::1] out = out_arr
    cdef long long[:, :, :, ::1] idx = idx_arr
    cdef Py_ssize_t i, r, ccol, q, k
    cdef double best, v
    cdef long long bi
    for i in range(n):
        for r in range(ho):
            for ccol in range(wo):
                for q in range(c):
                    best = x[i, 2 * r, 2 * ccol, q]
                    bi = 0
                    v = x[i, 2 * r, 2 * ccol + 1, q]
                    if v > best:
                        best = v
                        bi = 1
                    v = x[i, 2 * r + 1, 2 * ccol, q]
                    if v > best:
                        best = v
                        bi = 2
                    v = x[i, 2 * r + 1, 2 * ccol + 1, q]
                    if v > best:
                        best = v
                        bi = 3
                    out[i, r, ccol, q] = best
                    idx[i, r, ccol, q] = bi
    return out_arr, idx_arr


def maxpool2_backward(long long[:, :, :, ::1] argmax, double[:, :, :, ::1] gout, x_shape):
    gx_arr = np.zeros(x_shape, dtype=np.float64)
    cdef double[:, :, :, ::1] gx = gx_arr
    cdef Py_ssize_t n = gout.shape[0], ho = gout.shape[1], wo = gout.shape[2], c = gout.shape[3]
    cdef Py_ssize_t i, r, ccol, q
    cdef long long bi
    for i in range(n):
        for r in range(ho):
            for ccol in range(wo):
                for q in range(c):
                    bi = argmax[i, r, ccol, q]
                    gx[i, 2 * r + bi // 2, 2 * ccol + bi % 2, q] += gout[i, r, ccol, q]
    return gx_arr


def visibility_mask(unsigned char[:, ::1] opaque):
    cdef Py_ssize_t rows = opaque.shape[0], cols = opaque.shape[1]
    mask_arr = np.zeros((rows, cols), dtype=np.uint8)
    cdef unsigned char[:, ::1] mask = mask_arr
    cdef Py_ssize_t r, c
    mask[rows - 1, cols // 2] = 1
    for r in range(rows - 1, -1, -1):
        for c in range(cols - 1):
            if mask[r, c] and not opaque[r, c]:
                mask[r, c + 1] = 1
                if r > 0:
                    mask[r - 1, c + 1] = 1
                    mask[r - 1, c] = 1
        for c in range(cols - 1, 0, -1):
            if mask[r, c] and not opaque[r, c]:
                mask[r, c - 1] = 1
                if r > 0:
                    mask[r - 1, c - 1] = 1
                    mask[r - 1, c] = 1
    return mask_arr.astype(bool)
