"""Straight-line reference implementations used as test oracles.

Deliberately loop-based and independent of the package internals.
"""

from bisect import bisect_left

CHANNEL_OF = {"R": 0, "G": 1, "B": 2}


def channel_at(phase, row, col):
    return CHANNEL_OF[phase[(row % 2) * 2 + (col % 2)]]


def mosaic_ref(img, phase):
    h, w = len(img), len(img[0])
    return [[int(img[y][x][channel_at(phase, y, x)]) for x in range(w)] for y in range(h)]


def demosaic_ref(samples, phase):
    h, w = len(samples), len(samples[0])
    out = [[[0, 0, 0] for _ in range(w)] for _ in range(h)]
    for y in range(h):
        for x in range(w):
            for c in range(3):
                if channel_at(phase, y, x) == c:
                    out[y][x][c] = samples[y][x]
                    continue
                vals = []
                for yy in range(y - 1, y + 2):
                    for xx in range(x - 1, x + 2):
                        if 0 <= yy < h and 0 <= xx < w and channel_at(phase, yy, xx) == c:
                            vals.append(samples[yy][xx])
                if vals:
                    # round half up on exact integers
                    out[y][x][c] = min(255, (2 * sum(vals) + len(vals)) // (2 * len(vals)))
    return out


def kept_ref(height, rows):
    dropped = set(rows)
    return [r for r in range(height) if r not in dropped]


def drop_shift_ref(grid, rows, pad):
    """Shift-up reconstruction on a list of rows."""
    height = len(grid)
    kept = kept_ref(height, rows)
    out = [grid[k] for k in kept]
    while len(out) < height:
        if pad == "replicate" and kept:
            out.append(grid[kept[-1]])
        else:
            out.append(None)  # black
    return out


def strip_parity_ref(height, rows):
    """Per output row: 'padded', 'corrupted' or 'clean' via the drop-count parity."""
    kept = kept_ref(height, rows)
    status = []
    for j in range(height):
        if j >= height - len(rows):
            status.append("padded")
        else:
            above = bisect_left(rows, kept[j])  # number of drops r < kept[j]
            status.append("corrupted" if above % 2 else "clean")
    return status


def strip_pairs_ref(height, rows):
    """Corrupted rows from the pair construction.

    The pair (r_i, r_{i+1}), i even, corrupts the kept source rows strictly
    between them; an unpaired last drop corrupts everything below it.  A
    kept source row s lands at output row s - #{r < s}.
    """
    n = len(rows)
    dropped = set(rows)
    corrupted = set()
    for i in range(0, n, 2):
        lo = rows[i]
        hi = rows[i + 1] if i + 1 < n else height
        for s in range(lo + 1, hi):
            if s not in dropped:
                corrupted.add(s - (i + 1))
    return corrupted


def lower_median(values):
    values = sorted(values)
    return values[(len(values) - 1) // 2]


def median_fill_ref(img, hole_rows, bounds=None):
    """Multi-pass 3x3 lower-median fill on nested lists (H x W x 3).

    If ``bounds`` is a dict it receives, per filled pixel, the per-channel
    (min, max) of the neighbor values the fill was chosen from.
    """
    h, w = len(img), len(img[0])
    cur = [[list(px) for px in row] for row in img]
    missing = [[y in hole_rows for _ in range(w)] for y in range(h)]
    passes = 0
    while any(any(r) for r in missing):
        passes += 1
        updates = []
        for y in range(h):
            for x in range(w):
                if not missing[y][x]:
                    continue
                neigh = []
                for yy in range(y - 1, y + 2):
                    for xx in range(x - 1, x + 2):
                        if (yy, xx) != (y, x) and 0 <= yy < h and 0 <= xx < w and not missing[yy][xx]:
                            neigh.append(cur[yy][xx])
                if neigh:
                    if bounds is not None:
                        bounds[(y, x)] = [(min(p[c] for p in neigh), max(p[c] for p in neigh))
                                          for c in range(3)]
                    updates.append((y, x, [lower_median([p[c] for p in neigh]) for c in range(3)]))
        if not updates:
            raise RuntimeError("no progress")
        for y, x, px in updates:
            cur[y][x] = px
            missing[y][x] = False
    return cur, passes


def dominant_ref(img):
    sums = [0, 0, 0]
    for row in img:
        for px in row:
            for c in range(3):
                sums[c] += int(px[c])
    best = 0
    for c in (1, 2):
        if sums[c] > sums[best]:
            best = c
    return ("red", "green", "blue")[best]
