"""Compiled inner loops."""
import numpy as np
from numba import njit


@njit(cache=True)
def sweep_front(rows):
    """Front mask for ``rows`` already sorted lexicographically.

    Each row is checked only against the front found so far: anything that
    could dominate it sorts earlier, and a dominated dominator is itself
    dominated by some earlier front row. Two columns need only a running
    minimum.
    """
    n, d = rows.shape
    if d == 2:
        return _sweep_front_2d(rows)
    keep = np.zeros(n, dtype=np.bool_)
    # Front rows are copied side by side so the inner scan reads contiguous memory.
    front = np.empty((n, d), dtype=rows.dtype)
    m = 0
    for i in range(n):
        row = rows[i]
        dominated = False
        for t in range(m):
            # Sorted order already gives front[t, 0] <= row[0].
            strictly = front[t, 0] < row[0]
            no_worse = True
            for q in range(1, d):
                a = front[t, q]
                b = row[q]
                if a > b:
                    no_worse = False
                    break
                if a < b:
                    strictly = True
            if no_worse and strictly:
                dominated = True
                break
        if not dominated:
            keep[i] = True
            front[m] = row
            m += 1
    return keep


@njit(cache=True)
def _sweep_front_2d(rows):
    n = rows.shape[0]
    keep = np.zeros(n, dtype=np.bool_)
    best = np.inf  # smallest second column among rows with a strictly smaller first column
    i = 0
    while i < n:
        # One block of equal first-column values; its first row has the smallest second column.
        j = i
        while j < n and rows[j, 0] == rows[i, 0]:
            j += 1
        low = rows[i, 1]
        for k in range(i, j):
            keep[k] = rows[k, 1] == low and low < best
        if low < best:
            best = low
        i = j
    return keep


@njit(cache=True)
def lex_order(rows):
    """Row order sorting ``rows`` lexicographically (first column most significant)."""
    n, d = rows.shape
    order = np.arange(n)
    for q in range(d - 1, -1, -1):
        order = order[np.argsort(rows[order, q], kind="mergesort")]
    return order


@njit(cache=True)
def front_mask(values, active):
    """Non-dominated mask over the ``active`` columns of ``values``."""
    cols = np.flatnonzero(active)
    sub = np.ascontiguousarray(values[:, cols])
    order = lex_order(sub)
    keep = np.empty(values.shape[0], dtype=np.bool_)
    keep[order] = sweep_front(np.ascontiguousarray(sub[order]))
    return keep


@njit(cache=True)
def column_scale(values, lo_out, span_out):
    """Per-column minimum and range; the first two columns share the larger range."""
    n, d = values.shape
    for q in range(d):
        lo = values[0, q]
        hi = values[0, q]
        for i in range(1, n):
            v = values[i, q]
            if v < lo:
                lo = v
            elif v > hi:
                hi = v
        lo_out[q] = lo
        span_out[q] = hi - lo
    if d >= 2:
        s = max(span_out[0], span_out[1])
        span_out[0] = s
        span_out[1] = s


@njit(cache=True)
def scores(values, rows, lo, span, weights):
    """Weighted sum of min-max normalized values for the given rows (zero range counts as 0)."""
    d = values.shape[1]
    out = np.empty(rows.size, dtype=np.float64)
    for t in range(rows.size):
        i = rows[t]
        acc = 0.0
        for q in range(d):
            if span[q] > 0.0 and weights[q] != 0.0:
                x = (values[i, q] - lo[q]) / span[q]
                if x > 1.0:
                    x = 1.0
                elif x < 0.0:
                    x = 0.0
                acc += weights[q] * x
        out[t] = acc
    return out


@njit(cache=True)
def argmin_by_id(score, ids):
    best = 0
    for t in range(1, score.size):
        if score[t] < score[best] or (score[t] == score[best] and ids[t] < ids[best]):
            best = t
    return best


@njit(cache=True)
def select_open(values, ids, weights, select_weights, active, pareto, front_scope, span_out):
    """Pick one open node; returns ``(position, front size or -1)``.

    Composite mode ranks every row by ``weights``. Pareto mode restricts the
    choice to rows non-dominated over ``active`` and ranks them by
    ``select_weights``, normalizing over the open list or, with
    ``front_scope``, over the front alone. ``span_out`` receives the open
    list's column ranges.
    """
    n, d = values.shape
    lo = np.empty(d)
    column_scale(values, lo, span_out)
    if not pareto:
        rows = np.arange(n)
        return argmin_by_id(scores(values, rows, lo, span_out, weights), ids), -1
    rows = np.flatnonzero(front_mask(values, active))
    if front_scope:
        sub = np.ascontiguousarray(values[rows])
        flo = np.empty(d)
        fspan = np.empty(d)
        column_scale(sub, flo, fspan)
        score = scores(values, rows, flo, fspan, select_weights)
    else:
        score = scores(values, rows, lo, span_out, select_weights)
    return rows[argmin_by_id(score, ids[rows])], rows.size
