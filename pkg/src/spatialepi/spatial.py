"""Positions, daily random movement, and fixed-radius neighbor search.

The neighbor index is a uniform bucket grid with cell size >= query radius,
so every radius query is answered by scanning a 3x3 block of cells. Cells
are linearized column-major (cell id = cx * m + cy), which makes the three
cells (cx', cy-1..cy+1) one contiguous slice of the sorted point array; a
batched query is then pure numpy: three (start, end) ranges per query
point, expanded with repeat/arange, distance-filtered, and bin-counted.
"""

from __future__ import annotations

import numpy as np


def _expand_ranges(starts, ends):
    """Concatenate integer ranges [starts[k], ends[k]).

    Returns (flat, lens): flat indices of every range element, and the
    per-range lengths (for attributing elements back to their range).
    """
    lens = ends - starts
    total = int(lens.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64), lens
    cum = np.cumsum(lens)
    flat = np.arange(total, dtype=np.int64)
    flat -= np.repeat(cum - lens, lens)
    flat += np.repeat(starts, lens)
    return flat, lens


class UniformGridIndex:
    """Bucket grid over [0, side]^2 answering exact radius-<= queries."""

    def __init__(self, positions, radius, side=1.0):
        positions = np.ascontiguousarray(positions, dtype=np.float64)
        self.positions = positions
        self.radius = float(radius)
        self.side = float(side)
        m = int(self.side / self.radius) if self.radius < self.side else 1
        self.m = max(m, 1)
        self.cell = self.side / self.m
        n = len(positions)
        if n:
            cx = np.clip((positions[:, 0] / self.cell).astype(np.int64), 0, self.m - 1)
            cy = np.clip((positions[:, 1] / self.cell).astype(np.int64), 0, self.m - 1)
            cid = cx * self.m + cy
        else:
            cid = np.zeros(0, dtype=np.int64)
        self.order = np.argsort(cid, kind="stable")
        counts = np.bincount(cid, minlength=self.m * self.m)
        self.cell_start = np.concatenate(([0], np.cumsum(counts))).astype(np.int64)
        self.sorted_pos = positions[self.order]

    def _candidate_ranges(self, qpos):
        """(Q, 3) start/end ranges into sorted_pos covering the 3x3 block."""
        m = self.m
        cx = np.clip((qpos[:, 0] / self.cell).astype(np.int64), 0, m - 1)
        cy = np.clip((qpos[:, 1] / self.cell).astype(np.int64), 0, m - 1)
        ylo = np.maximum(cy - 1, 0)
        yhi = np.minimum(cy + 1, m - 1)
        cols = cx[:, None] + np.array([-1, 0, 1])
        valid = (cols >= 0) & (cols < m)
        cols_c = np.clip(cols, 0, m - 1)
        starts = self.cell_start[cols_c * m + ylo[:, None]]
        ends = self.cell_start[cols_c * m + yhi[:, None] + 1]
        starts[~valid] = 0
        ends[~valid] = 0
        return starts, ends

    def count_within(self, qpos, radius=None):
        """Number of indexed points within `radius` of each query point.

        A query point that coincides with an indexed point counts it
        (including itself, if the query is one of the indexed points).
        """
        r = self.radius if radius is None else float(radius)
        if r > self.cell:
            raise ValueError(f"query radius {r} exceeds grid cell size {self.cell}")
        qpos = np.atleast_2d(np.asarray(qpos, dtype=np.float64))
        q = len(qpos)
        if q == 0 or len(self.positions) == 0:
            return np.zeros(q, dtype=np.int64)
        starts, ends = self._candidate_ranges(qpos)
        flat, lens = _expand_ranges(starts.ravel(), ends.ravel())
        if len(flat) == 0:
            return np.zeros(q, dtype=np.int64)
        q_of = np.repeat(np.arange(3 * q, dtype=np.int64) // 3, lens)
        dx = self.sorted_pos[flat, 0] - qpos[q_of, 0]
        dy = self.sorted_pos[flat, 1] - qpos[q_of, 1]
        within = dx * dx + dy * dy <= r * r
        return np.bincount(q_of[within], minlength=q)

    def query_point(self, point, radius=None):
        """Original indices of indexed points within radius of `point`, ascending."""
        r = self.radius if radius is None else float(radius)
        if r > self.cell:
            raise ValueError(f"query radius {r} exceeds grid cell size {self.cell}")
        qpos = np.asarray(point, dtype=np.float64).reshape(1, 2)
        starts, ends = self._candidate_ranges(qpos)
        flat, _ = _expand_ranges(starts.ravel(), ends.ravel())
        if len(flat) == 0:
            return np.empty(0, dtype=np.int64)
        d = self.sorted_pos[flat] - qpos[0]
        within = (d * d).sum(axis=1) <= r * r
        return np.sort(self.order[flat[within]])

    def pairs_within(self):
        """All ordered pairs (i, j), i != j, of indexed points within radius."""
        starts, ends = self._candidate_ranges(self.positions)
        flat, lens = _expand_ranges(starts.ravel(), ends.ravel())
        n = len(self.positions)
        q_of = np.repeat(np.arange(3 * n, dtype=np.int64) // 3, lens)
        cand = self.order[flat]
        d = self.sorted_pos[flat] - self.positions[q_of]
        within = ((d * d).sum(axis=1) <= self.radius * self.radius) & (cand != q_of)
        return q_of[within], cand[within]


def neighbors_within(index: UniformGridIndex, agent_id: int, radius=None):
    """Ids of indexed agents within radius of agent `agent_id`, excluding it."""
    ids = index.query_point(index.positions[agent_id], radius)
    return ids[ids != agent_id]


def brute_force_neighbors(positions, agent_id, radius):
    """Reference O(n^2) neighbor scan (oracle for the grid index)."""
    d = positions - positions[agent_id]
    within = (d * d).sum(axis=1) <= radius * radius
    within[agent_id] = False
    return np.flatnonzero(within)


def move_agents(positions, move_mask, mu, rng, side=1.0, boundary="reflect-redraw"):
    """Displace masked agents by distance mu at independent uniform angles.

    One angle is drawn for every agent regardless of the mask so that the
    movement stream stays aligned across counterfactual runs that differ
    only in who goes out. Out-of-domain proposals redraw the angle until
    the point is interior; torus mode wraps instead.
    """
    n = len(positions)
    angles = rng.uniform(0.0, 2.0 * np.pi, size=n)
    if mu == 0.0:
        return positions.copy()
    new = positions.copy()
    idx = np.flatnonzero(move_mask)
    if len(idx) == 0:
        return new
    prop = positions[idx] + mu * np.column_stack([np.cos(angles[idx]), np.sin(angles[idx])])
    if boundary == "torus":
        new[idx] = np.mod(prop, side)
        return new
    bad = (prop[:, 0] < 0.0) | (prop[:, 0] > side) | (prop[:, 1] < 0.0) | (prop[:, 1] > side)
    while bad.any():
        j = np.flatnonzero(bad)
        ang = rng.uniform(0.0, 2.0 * np.pi, size=len(j))
        prop[j] = positions[idx[j]] + mu * np.column_stack([np.cos(ang), np.sin(ang)])
        bad[j] = (prop[j, 0] < 0.0) | (prop[j, 0] > side) | (prop[j, 1] < 0.0) | (prop[j, 1] > side)
    new[idx] = prop
    return new


def mean_contacts(n, side, radius, trials=50, rng=None):
    """Monte Carlo estimate of the mean number of agents within `radius`
    of an agent, for n agents uniform in a side x side square (edge effects
    included: agents near the border see truncated contact circles)."""
    if radius <= 0.0:
        return 0.0
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    if radius >= side * np.sqrt(2.0):
        return float(n - 1)  # the circle covers the square from any center
    brute = radius > side  # grid needs cell >= radius; fall back to all pairs
    if brute and n > 5000:
        raise ValueError("mean_contacts: radius > side is only supported for n <= 5000")
    r2 = radius * radius
    total = 0.0
    for _ in range(trials):
        pos = rng.uniform(0.0, side, size=(n, 2))
        if brute:
            d = pos[:, None, :] - pos[None, :, :]
            counts = ((d * d).sum(axis=2) <= r2).sum(axis=1)
        else:
            index = UniformGridIndex(pos, radius, side=side)
            counts = index.count_within(pos)
        total += float(counts.mean()) - 1.0  # counts include self
    return total / trials
