"""Hot numeric kernels: numba-jitted fast path with a pure-numpy fallback.

The fallback is selected by setting the environment variable
``STMATCH_NO_NUMBA`` to a non-empty value other than ``0``/``false``/``no``
before the package is imported, and is also used automatically when numba
cannot be imported.  Both paths implement identical selection and voting
rules; ``benchmarks/bench_kernels.py`` times them side by side.
"""

import math
import os

import numpy as np

ENV_FLAG = "STMATCH_NO_NUMBA"


def _want_numba() -> bool:
    flag = os.environ.get(ENV_FLAG, "").strip().lower()
    if flag not in ("", "0", "false", "no"):
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


NUMBA_ACTIVE = _want_numba()


# ---------------------------------------------------------------------------
# per-column top-tau magnitude selection
# ---------------------------------------------------------------------------

def _threshold_columns_numpy(m, tau):
    # stable sort of -|v| keeps equal magnitudes in ascending row order,
    # which is exactly the smaller-row-index tie rule
    order = np.argsort(-np.abs(m), axis=0, kind="stable")
    keep = order[:tau, :]
    cols = np.arange(m.shape[1])[None, :]
    out = np.zeros_like(m)
    out[keep, cols] = m[keep, cols]
    return out


def _threshold_columns_loops(m, tau):
    n, n_cols = m.shape
    out = np.zeros((n, n_cols), dtype=np.float64)
    neg_abs = np.empty(n, dtype=np.float64)
    for j in range(n_cols):
        for i in range(n):
            neg_abs[i] = -abs(m[i, j])
        # stable sort keeps equal magnitudes in ascending row order
        order = np.argsort(neg_abs, kind="mergesort")
        for k in range(tau):
            row = order[k]
            out[row, j] = m[row, j]
    return out


# ---------------------------------------------------------------------------
# orientation-histogram voting per cell (HOG inner loop)
# ---------------------------------------------------------------------------

def _cell_histograms_numpy(gx, gy, cell_size, nbins):
    h = (gx.shape[0] // cell_size) * cell_size
    w = (gx.shape[1] // cell_size) * cell_size
    gx = gx[:h, :w]
    gy = gy[:h, :w]
    mag = np.hypot(gx, gy)
    theta = np.degrees(np.arctan2(gy, gx)) % 180.0
    pos = theta * (nbins / 180.0)
    low = pos.astype(np.int64)
    frac = pos - low
    wrap = low >= nbins  # fp edge: theta rounded up to exactly 180
    low[wrap] = 0
    frac[wrap] = pos[wrap] - nbins
    up = (low + 1) % nbins
    rows, cols = np.indices((h, w))
    cy = rows // cell_size
    cx = cols // cell_size
    hist = np.zeros((h // cell_size, w // cell_size, nbins), dtype=np.float64)
    np.add.at(hist, (cy, cx, low), mag * (1.0 - frac))
    np.add.at(hist, (cy, cx, up), mag * frac)
    return hist


def _cell_histograms_loops(gx, gy, cell_size, nbins):
    n_cy = gx.shape[0] // cell_size
    n_cx = gx.shape[1] // cell_size
    hist = np.zeros((n_cy, n_cx, nbins), dtype=np.float64)
    bin_width = 180.0 / nbins
    for y in range(n_cy * cell_size):
        cy = y // cell_size
        for x in range(n_cx * cell_size):
            cx = x // cell_size
            gxx = gx[y, x]
            gyy = gy[y, x]
            mag = math.hypot(gxx, gyy)
            if mag == 0.0:
                continue
            theta = math.degrees(math.atan2(gyy, gxx)) % 180.0
            pos = theta / bin_width
            low = int(pos)
            frac = pos - low
            if low >= nbins:
                low = 0
                frac = pos - nbins
            hist[cy, cx, low] += mag * (1.0 - frac)
            hist[cy, cx, (low + 1) % nbins] += mag * frac
    return hist


if NUMBA_ACTIVE:
    from numba import njit

    _threshold_columns_numba = njit(cache=True)(_threshold_columns_loops)
    _cell_histograms_numba = njit(cache=True)(_cell_histograms_loops)

    def threshold_columns(m, tau):
        return _threshold_columns_numba(np.ascontiguousarray(m, dtype=np.float64), int(tau))

    def cell_histograms(gx, gy, cell_size, nbins):
        return _cell_histograms_numba(
            np.ascontiguousarray(gx, dtype=np.float64),
            np.ascontiguousarray(gy, dtype=np.float64),
            int(cell_size),
            int(nbins),
        )
else:
    def threshold_columns(m, tau):
        return _threshold_columns_numpy(np.asarray(m, dtype=np.float64), int(tau))

    def cell_histograms(gx, gy, cell_size, nbins):
        return _cell_histograms_numpy(
            np.asarray(gx, dtype=np.float64),
            np.asarray(gy, dtype=np.float64),
            int(cell_size),
            int(nbins),
        )
