"""Vectorized float evaluation of a PL map, used only for heuristic search.

Points are arrays ``(edge_index, offset)``.  Vertex points are represented
by any incident edge, so float points are not canonical; nothing here is
used to decide a verdict.
"""
from __future__ import annotations

import numpy as np

from .plmap import PLMap
from .tree import TreePoint


class FloatMap:
    def __init__(self, f: PLMap):
        tree = f.tree
        self.tree = tree
        self.edge_ids = list(tree.edges)
        self.edge_index = {eid: i for i, eid in enumerate(self.edge_ids)}
        self.lengths = np.array([float(tree.edges[e].length) for e in self.edge_ids])
        self.base = np.concatenate([[0.0], np.cumsum(self.lengths)[:-1]])
        vidx = {v: i for i, v in enumerate(tree.vertices)}
        nv = len(tree.vertices)
        self.vdist = np.zeros((nv, nv))
        for u in tree.vertices:
            for w in tree.vertices:
                self.vdist[vidx[u], vidx[w]] = float(tree.vertex_distance(u, w))
        self.tail = np.array([vidx[tree.edges[e].tail] for e in self.edge_ids])
        self.head = np.array([vidx[tree.edges[e].head] for e in self.edge_ids])

        gstart, speed, t0 = [], [], []
        segs = []
        for eid in self.edge_ids:
            for p in f.pieces[eid]:
                gstart.append(self.base[self.edge_index[eid]] + float(p.t0))
                t0.append(float(p.t0))
                speed.append(float(p.speed))
                if p.length == 0:
                    e, o = self.encode(p.start)
                    segs.append([(e, o, 0.0, 0.0)])
                else:
                    arc = p.arc(tree)
                    segs.append([(self.edge_index[se], float(a), 1.0 if b > a else -1.0, float(s0))
                                 for (se, a, b), s0 in zip(arc.segments, arc.starts)])
        self.gstart = np.array(gstart)
        self.speed = np.array(speed)
        self.t0 = np.array(t0)
        width = max(len(s) for s in segs)
        npieces = len(segs)
        self.seg_edge = np.zeros((npieces, width), dtype=np.int64)
        self.seg_from = np.zeros((npieces, width))
        self.seg_dir = np.zeros((npieces, width))
        self.seg_start = np.full((npieces, width), np.inf)
        for i, row in enumerate(segs):
            for j, (e, o, d, s0) in enumerate(row):
                self.seg_edge[i, j] = e
                self.seg_from[i, j] = o
                self.seg_dir[i, j] = d
                self.seg_start[i, j] = s0

    def encode(self, p: TreePoint) -> tuple[int, float]:
        if p.vertex is not None:
            eid = self.tree.incident[p.vertex][0]
            e = self.tree.edges[eid]
            return self.edge_index[eid], (0.0 if e.tail == p.vertex else float(e.length))
        return self.edge_index[p.edge], float(p.offset)

    def apply(self, edges: np.ndarray, offs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        g = self.base[edges] + offs
        idx = np.searchsorted(self.gstart, g, side="right") - 1
        np.clip(idx, 0, len(self.gstart) - 1, out=idx)
        s = (offs - self.t0[idx]) * self.speed[idx]
        starts = self.seg_start[idx]
        j = (s[:, None] >= starts).sum(axis=1) - 1
        np.clip(j, 0, starts.shape[1] - 1, out=j)
        new_e = self.seg_edge[idx, j]
        new_o = self.seg_from[idx, j] + self.seg_dir[idx, j] * (s - starts[np.arange(len(j)), j])
        np.clip(new_o, 0.0, self.lengths[new_e], out=new_o)
        return new_e, new_o

    def distance(self, e1, o1, e2, o2) -> np.ndarray:
        L1, L2 = self.lengths[e1], self.lengths[e2]
        t1, h1, t2, h2 = self.tail[e1], self.head[e1], self.tail[e2], self.head[e2]
        d = np.minimum.reduce([
            o1 + self.vdist[t1, t2] + o2,
            o1 + self.vdist[t1, h2] + (L2 - o2),
            (L1 - o1) + self.vdist[h1, t2] + o2,
            (L1 - o1) + self.vdist[h1, h2] + (L2 - o2),
        ])
        return np.where(e1 == e2, np.minimum(np.abs(o1 - o2), d), d)
