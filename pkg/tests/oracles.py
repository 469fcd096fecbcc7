"""Reference implementations the tests check the package against.

Each one is deliberately naive and shares no code with the package.
"""
import heapq
import math
from collections import deque

import numpy as np
from numba import njit


@njit(cache=True)
def brute_force_front(values):
    """Pairwise O(n^2) domination filter."""
    n, d = values.shape
    keep = np.ones(n, dtype=np.bool_)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            all_le = True
            any_lt = False
            for q in range(d):
                if values[j, q] > values[i, q]:
                    all_le = False
                    break
                if values[j, q] < values[i, q]:
                    any_lt = True
            if all_le and any_lt:
                keep[i] = False
                break
    return keep


def brute_dominates(a, b):
    return all(x <= y for x, y in zip(a, b)) and any(x < y for x, y in zip(a, b))


def dijkstra(cells, start, goal):
    """Shortest 8-connected distance over free cells (inf when unreachable)."""
    cells = np.asarray(cells)
    h, w = cells.shape
    dist = {tuple(start): 0.0}
    heap = [(0.0, tuple(start))]
    done = set()
    while heap:
        d, (r, c) = heapq.heappop(heap)
        if (r, c) in done:
            continue
        if (r, c) == tuple(goal):
            return d
        done.add((r, c))
        for dr in (-1, 0, 1):
            for dc in (-1, 0, 1):
                if dr == dc == 0:
                    continue
                rr, cc = r + dr, c + dc
                if 0 <= rr < h and 0 <= cc < w and cells[rr, cc] == 0:
                    nd = d + (math.sqrt(2.0) if dr and dc else 1.0)
                    if nd < dist.get((rr, cc), math.inf):
                        dist[(rr, cc)] = nd
                        heapq.heappush(heap, (nd, (rr, cc)))
    return math.inf


def dijkstra_field(cells, source):
    """Distance from ``source`` to every free cell."""
    cells = np.asarray(cells)
    h, w = cells.shape
    out = np.full(cells.shape, math.inf)
    out[source] = 0.0
    heap = [(0.0, tuple(source))]
    while heap:
        d, (r, c) = heapq.heappop(heap)
        if d > out[r, c]:
            continue
        for dr in (-1, 0, 1):
            for dc in (-1, 0, 1):
                if dr == dc == 0:
                    continue
                rr, cc = r + dr, c + dc
                if 0 <= rr < h and 0 <= cc < w and cells[rr, cc] == 0:
                    nd = d + (math.sqrt(2.0) if dr and dc else 1.0)
                    if nd < out[rr, cc]:
                        out[rr, cc] = nd
                        heapq.heappush(heap, (nd, (rr, cc)))
    return out


def flood_connected(cells, a, b):
    cells = np.asarray(cells)
    h, w = cells.shape
    seen = {tuple(a)}
    queue = deque([tuple(a)])
    while queue:
        r, c = queue.popleft()
        if (r, c) == tuple(b):
            return True
        for dr in (-1, 0, 1):
            for dc in (-1, 0, 1):
                rr, cc = r + dr, c + dc
                if 0 <= rr < h and 0 <= cc < w and cells[rr, cc] == 0 and (rr, cc) not in seen:
                    seen.add((rr, cc))
                    queue.append((rr, cc))
    return False
