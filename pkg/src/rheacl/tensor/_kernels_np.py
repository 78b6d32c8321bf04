"""Pure-NumPy kernels: the fallback backend for the hot inner loops.

Same contracts as the compiled twin in ``_ckernels.pyx``. All arrays are
C-contiguous float64; image tensors are laid out (N, H, W, C).
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def conv2d_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Valid cross-correlation, stride 1. x:(N,H,W,Ci) w:(kh,kw,Ci,Co) b:(Co,)."""
    kh, kw = w.shape[0], w.shape[1]
    win = sliding_window_view(x, (kh, kw), axis=(1, 2))  # (N,Ho,Wo,Ci,kh,kw)
    out = np.tensordot(win, w, axes=([4, 5, 3], [0, 1, 2]))
    out += b
    return np.ascontiguousarray(out)


def conv2d_backward(x, w, gout, need_gx: bool):
    """Gradients of conv2d_forward. Returns (gx_or_None, gw, gb)."""
    kh, kw = w.shape[0], w.shape[1]
    win = sliding_window_view(x, (kh, kw), axis=(1, 2))
    # gw[k,l,i,o] = sum_nhw x[n,h+k,w+l,i] * gout[n,h,w,o]
    gw = np.tensordot(win, gout, axes=([0, 1, 2], [0, 1, 2]))  # (Ci,kh,kw,Co)
    gw = np.ascontiguousarray(gw.transpose(1, 2, 0, 3))
    gb = gout.sum(axis=(0, 1, 2))
    gx = None
    if need_gx:
        # Full correlation of gout with the spatially flipped kernel.
        pad = ((0, 0), (kh - 1, kh - 1), (kw - 1, kw - 1), (0, 0))
        gpad = np.pad(gout, pad)
        gwin = sliding_window_view(gpad, (kh, kw), axis=(1, 2))  # (N,H,W,Co,kh,kw)
        wflip = w[::-1, ::-1]  # (kh,kw,Ci,Co)
        gx = np.tensordot(gwin, wflip, axes=([4, 5, 3], [0, 1, 3]))
        gx = np.ascontiguousarray(gx)
    return gx, gw, gb


def maxpool2_forward(x: np.ndarray):
    """2x2 max pool, floor semantics. Returns (out, argmax).

    argmax holds the in-window flat index (0..3, row-major scan order);
    ties resolve to the first index, which fixes the gradient routing.
    """
    n, h, w, c = x.shape
    ho, wo = h // 2, w // 2
    v = x[:, : 2 * ho, : 2 * wo, :].reshape(n, ho, 2, wo, 2, c)
    v = v.transpose(0, 1, 3, 2, 4, 5).reshape(n, ho, wo, 4, c)
    idx = v.argmax(axis=3).astype(np.int64)
    out = np.take_along_axis(v, idx[:, :, :, None, :], axis=3)[:, :, :, 0, :]
    return np.ascontiguousarray(out), idx


def maxpool2_backward(argmax: np.ndarray, gout: np.ndarray, x_shape) -> np.ndarray:
    gx = np.zeros(x_shape, dtype=np.float64)
    n, ho, wo, c = gout.shape
    ni, hi, wi, ci = np.ogrid[:n, :ho, :wo, :c]
    rows = 2 * hi + argmax // 2
    cols = 2 * wi + argmax % 2
    np.add.at(gx, (ni, rows, cols, ci), gout)
    return gx


def visibility_mask(opaque: np.ndarray) -> np.ndarray:
    """Line-of-sight mask over an egocentric view grid.

    ``opaque`` is a (rows, cols) uint8 grid in view coordinates: the agent
    sits at (rows-1, cols//2) looking toward row 0. Visibility floods from
    the agent cell sideways and forward; opaque cells are visible themselves
    but block everything behind them.
    """
    rows, cols = opaque.shape
    mask = np.zeros((rows, cols), dtype=np.uint8)
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
    return mask.astype(bool)
