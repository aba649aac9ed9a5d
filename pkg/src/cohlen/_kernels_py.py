"""Pure numpy coherence-length scans, vectorized over interior pixels.

Same contract and same floating-point operation order as the compiled
``_kernels`` module; used when the extension is not built.
"""

from concurrent.futures import ThreadPoolExecutor

import numpy as np

BACKEND = "numpy"


def _sample_plane(padded, margin, rows, cols, ix, iy, fx, fy):
    y0 = margin + int(iy)
    x0 = margin + int(ix)
    a = padded[y0:y0 + rows, x0:x0 + cols]
    b = padded[y0:y0 + rows, x0 + 1:x0 + 1 + cols]
    c = padded[y0 + 1:y0 + 1 + rows, x0:x0 + cols]
    e = padded[y0 + 1:y0 + 1 + rows, x0 + 1:x0 + 1 + cols]
    top = a + fx * (b - a)
    bot = c + fx * (e - c)
    return top + fy * (bot - top)


def _ipow(x, k):
    out = x
    for _ in range(k - 1):
        out = out * x
    return out


def _map_directions(fn, ndir, threads):
    if threads > 1 and ndir > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, range(ndir)))
    return [fn(d) for d in range(ndir)]


def scan_order0(padded, margin, rows, cols, ix, iy, fx, fy, m0, t, threads=1):
    ndir, rmax = ix.shape

    def one_direction(d):
        lengths = np.full((rows, cols), rmax, dtype=np.uint16)
        done = np.zeros((rows, cols), dtype=bool)
        s = np.zeros((rows, cols))
        for j in range(rmax):
            s = s + _sample_plane(padded, margin, rows, cols, ix[d, j], iy[d, j], fx[d, j], fy[d, j])
            mean = s / float(j + 1)
            hit = (np.abs(mean - m0) <= t) & ~done
            lengths[hit] = j + 1
            done |= hit
            if done.all():
                break
        return lengths, ~done

    results = _map_directions(one_direction, ndir, threads)
    lengths = np.stack([r[0] for r in results], axis=-1)
    censored = np.stack([r[1] for r in results], axis=-1)
    return lengths, censored


def scan_orderk(padded, margin, rows, cols, ix, iy, fx, fy, k, mk, band, threads=1):
    if k < 2:
        raise ValueError("moment order must be >= 2")
    ndir, rmax = ix.shape

    def one_direction(d):
        lengths = np.full(rows * cols, rmax, dtype=np.uint16)
        pending = np.arange(rows * cols)
        samples = []
        s = np.zeros(rows * cols)
        for n in range(rmax):
            plane = _sample_plane(padded, margin, rows, cols, ix[d, n], iy[d, n], fx[d, n], fy[d, n])
            samples.append(plane.reshape(-1))
            s = s + samples[-1]
            # only still-undecided pixels need the O(n) moment pass
            mean = s[pending] / float(n + 1)
            acc = np.zeros(pending.size)
            for j in range(n + 1):
                acc = acc + _ipow(samples[j][pending] - mean, k)
            mkn = acc / float(n + 1)
            hit = np.abs(mkn - mk) <= band
            lengths[pending[hit]] = n + 1
            pending = pending[~hit]
            if pending.size == 0:
                break
        censored = np.zeros(rows * cols, dtype=bool)
        censored[pending] = True
        return lengths.reshape(rows, cols), censored.reshape(rows, cols)

    results = _map_directions(one_direction, ndir, threads)
    lengths = np.stack([r[0] for r in results], axis=-1)
    censored = np.stack([r[1] for r in results], axis=-1)
    return lengths, censored
