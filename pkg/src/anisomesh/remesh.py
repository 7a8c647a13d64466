"""Metric-conforming local remeshing.

Sweeps of edge split / edge collapse / edge flip / vertex smoothing drive
all metric edge lengths into [1/sqrt(2), sqrt(2)] while keeping the mesh
conforming, oriented and boundary-preserving. The metric at new or moved
points is interpolated (log-Euclidean) from the input background field.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.spatial import cKDTree

from . import kernels
from .mesh import (
    KIND_BOUNDARY,
    KIND_CORNER,
    KIND_INTERIOR,
    TriMesh,
    build_mesh,
)
from .metric import MetricField, metric_volumes

SQRT2 = math.sqrt(2.0)
_DEAD = -9


class RemeshError(RuntimeError):
    pass


@dataclass
class RemeshOptions:
    split_threshold: float = SQRT2
    collapse_threshold: float = 1.0 / SQRT2
    max_sweeps: int = 20
    smooth_passes: int = 2
    min_quality: float = 0.1
    max_out_fraction: float = 0.005
    smooth_relaxation: float = 0.5
    smooth_min_move: float = 0.02  # metric units; smaller moves are skipped

    def validate(self):
        if not (self.collapse_threshold < 1.0 < self.split_threshold):
            raise ValueError("need collapse_threshold < 1 < split_threshold")
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be at least 1")


@dataclass
class QualityReport:
    """Mesh-vs-metric diagnostics after (or without) adaptation."""

    edge_lengths: np.ndarray
    edge_length_hist: tuple
    volumes: np.ndarray
    qualities: np.ndarray
    fraction_in_bracket: float
    op_counts: dict = dc_field(default_factory=dict)

    @property
    def q_mean(self) -> float:
        return float(self.qualities.mean()) if len(self.qualities) else 0.0

    @property
    def q_min(self) -> float:
        return float(self.qualities.min()) if len(self.qualities) else 0.0


def _key(a, b):
    return (a, b) if a < b else (b, a)


class _Background:
    """Point location and log-metric interpolation on the input mesh."""

    def __init__(self, mesh: TriMesh, field: MetricField):
        self.tris = mesh.triangles
        self.logs = field.log_tensors()
        pts = mesh.vertices[mesh.triangles]
        self.a = pts[:, 0]
        self.e1 = pts[:, 1] - pts[:, 0]
        self.e2 = pts[:, 2] - pts[:, 0]
        self.det = (
            self.e1[:, 0] * self.e2[:, 1] - self.e1[:, 1] * self.e2[:, 0]
        )
        self.tree = cKDTree(pts.mean(axis=1))
        self.k = min(12, len(self.tris))

    def _bary(self, tids, pts):
        d = pts - self.a[tids]
        l2 = (d[:, 0] * self.e2[tids, 1] - d[:, 1] * self.e2[tids, 0]) / self.det[tids]
        l3 = (self.e1[tids, 0] * d[:, 1] - self.e1[tids, 1] * d[:, 0]) / self.det[tids]
        return np.column_stack([1.0 - l2 - l3, l2, l3])

    def interp_logs(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        _, nearest = self.tree.query(pts, k=self.k)
        nearest = np.atleast_2d(nearest)
        best_t = nearest[:, 0].copy()
        best_b = self._bary(best_t, pts)
        best_m = best_b.min(axis=1)
        for col in range(1, nearest.shape[1]):
            need = best_m < -1e-12
            if not need.any():
                break
            t = nearest[need, col]
            b = self._bary(t, pts[need])
            mn = b.min(axis=1)
            better = mn > best_m[need]
            rows = np.nonzero(need)[0][better]
            best_t[rows] = t[better]
            best_b[rows] = b[better]
            best_m[rows] = mn[better]
        # Clamp points that fell marginally outside (boundary round-off).
        np.clip(best_b, 0.0, None, out=best_b)
        best_b /= best_b.sum(axis=1, keepdims=True)
        v = self.tris[best_t]
        return (
            self.logs[v[:, 0]] * best_b[:, 0, None]
            + self.logs[v[:, 1]] * best_b[:, 1, None]
            + self.logs[v[:, 2]] * best_b[:, 2, None]
        )


class _EditMesh:
    def __init__(self, mesh: TriMesh, field: MetricField):
        self.verts = [tuple(p) for p in mesh.vertices]
        self.vkind = list(mesh.vertex_kind)
        self.met = [tuple(row) for row in field.tensors]
        self.logm = [tuple(row) for row in field.log_tensors()]
        self.tris: list = [tuple(int(v) for v in t) for t in mesh.triangles]
        self.e2t: dict = {}
        self.v2t: list = [set() for _ in range(len(self.verts))]
        self.btag: dict = {
            _key(int(i), int(j)): int(tag) for i, j, tag in mesh.boundary_edges
        }
        for tid, t in enumerate(self.tris):
            self._register(tid)

    # -- bookkeeping -------------------------------------------------------

    def _register(self, tid):
        a, b, c = self.tris[tid]
        for e in (_key(a, b), _key(b, c), _key(c, a)):
            self.e2t.setdefault(e, []).append(tid)
        self.v2t[a].add(tid)
        self.v2t[b].add(tid)
        self.v2t[c].add(tid)

    def _unregister(self, tid):
        a, b, c = self.tris[tid]
        for e in (_key(a, b), _key(b, c), _key(c, a)):
            lst = self.e2t[e]
            lst.remove(tid)
            if not lst:
                del self.e2t[e]
        self.v2t[a].discard(tid)
        self.v2t[b].discard(tid)
        self.v2t[c].discard(tid)

    def _tri_quality(self, a, b, c):
        la = self.logm[a]
        lb = self.logm[b]
        lc = self.logm[c]
        g11 = (la[0] + lb[0] + lc[0]) / 3.0
        g12 = (la[1] + lb[1] + lc[1]) / 3.0
        g22 = (la[2] + lb[2] + lc[2]) / 3.0
        pa, pb, pc = self.verts[a], self.verts[b], self.verts[c]
        return kernels.quality_one(
            pa[0], pa[1], pb[0], pb[1], pc[0], pc[1], g11, g12, g22
        )

    def _edge_arrays(self):
        edges = sorted(self.e2t.keys())
        earr = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        coords = np.asarray(self.verts)
        mets = np.asarray(self.met)
        return edges, kernels.edge_lengths(coords, mets, earr)

    def fraction_out(self, opts: RemeshOptions) -> float:
        _, lens = self._edge_arrays()
        if len(lens) == 0:
            return 0.0
        out = (lens < opts.collapse_threshold) | (lens > opts.split_threshold)
        return float(out.mean())

    def _endpoint_lengths(self, a, b):
        pa, pb = self.verts[a], self.verts[b]
        dx, dy = pb[0] - pa[0], pb[1] - pa[1]
        ma, mb = self.met[a], self.met[b]
        la = math.sqrt(
            max(dx * (ma[0] * dx + ma[1] * dy) + dy * (ma[1] * dx + ma[2] * dy), 0.0)
        )
        lb = math.sqrt(
            max(dx * (mb[0] * dx + mb[1] * dy) + dy * (mb[1] * dx + mb[2] * dy), 0.0)
        )
        return la, lb

    # -- operations --------------------------------------------------------

    def split_edge(self, e):
        a, b = e
        la, lb = self._endpoint_lengths(a, b)
        if la <= 0.0 or lb <= 0.0:
            t = 0.5
        else:
            r = lb / la
            t = 0.5 if abs(r - 1.0) < 1e-9 else math.log(0.5 * (1.0 + r)) / math.log(r)
            t = min(max(t, 0.05), 0.95)
        pa, pb = self.verts[a], self.verts[b]
        pos = (pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1]))
        la_, lb_ = self.logm[a], self.logm[b]
        lw = tuple((1.0 - t) * u + t * v for u, v in zip(la_, lb_))
        w = len(self.verts)
        self.verts.append(pos)
        self.logm.append(lw)
        self.met.append(kernels.sym2_exp_one(*lw))
        tag = self.btag.get(e)
        self.vkind.append(KIND_INTERIOR if tag is None else KIND_BOUNDARY)
        self.v2t.append(set())
        for tid in list(self.e2t[e]):
            tri = self.tris[tid]
            for i in range(3):
                s, tt = tri[i], tri[(i + 1) % 3]
                if _key(s, tt) == e:
                    c = tri[(i + 2) % 3]
                    break
            self._unregister(tid)
            self.tris[tid] = (s, w, c)
            self._register(tid)
            tid2 = len(self.tris)
            self.tris.append((w, tt, c))
            self._register(tid2)
        if tag is not None:
            del self.btag[e]
            self.btag[_key(a, w)] = tag
            self.btag[_key(w, b)] = tag
        return w

    def _neighbors(self, v):
        out = set()
        for tid in self.v2t[v]:
            out.update(self.tris[tid])
        out.discard(v)
        return out

    def _collapse_valid(self, kill, keep, shared, opts: RemeshOptions):
        opposite = set()
        for tid in shared:
            opposite.update(self.tris[tid])
        opposite -= {kill, keep}
        nbrs_kill = self._neighbors(kill)
        if nbrs_kill & self._neighbors(keep) != opposite:
            return None  # link condition: would create a non-manifold edge
        # Anti-thrash guard: never create an edge the split pass would cut.
        pk = self.verts[keep]
        mk = self.met[keep]
        for n in nbrs_kill:
            if n == keep:
                continue
            pn = self.verts[n]
            mn = self.met[n]
            length = kernels.metric_length_one(
                pn[0] - pk[0], pn[1] - pk[1], mk[0], mk[1], mk[2],
                mn[0], mn[1], mn[2],
            )
            if length > opts.split_threshold:
                return None
        rewrites = []
        q_old = math.inf
        for tid in self.v2t[kill]:
            if tid in shared:
                continue
            tri = self.tris[tid]
            q_old = min(q_old, self._tri_quality(*tri))
            new = tuple(keep if v == kill else v for v in tri)
            pa, pb, pc = (self.verts[v] if v != keep else pk for v in new)
            area = kernels.signed_area(pa[0], pa[1], pb[0], pb[1], pc[0], pc[1])
            if area <= 0.0:
                return None
            rewrites.append((tid, new))
        q_new = math.inf
        for _, new in rewrites:
            q_new = min(q_new, self._tri_quality(*new))
        if rewrites and q_new < min(opts.min_quality, q_old - 1e-12):
            return None
        return rewrites

    def try_collapse(self, e, opts: RemeshOptions):
        a, b = e
        ka, kb = self.vkind[a], self.vkind[b]
        if ka == _DEAD or kb == _DEAD:
            return False
        is_bedge = e in self.btag
        candidates = []
        if is_bedge:
            if ka == KIND_BOUNDARY:
                candidates.append((a, b))
            if kb == KIND_BOUNDARY:
                candidates.append((b, a))
        else:
            if ka == KIND_INTERIOR:
                candidates.append((a, b))
            if kb == KIND_INTERIOR:
                candidates.append((b, a))
        shared = set(self.e2t[e])
        for kill, keep in candidates:
            rewrites = self._collapse_valid(kill, keep, shared, opts)
            if rewrites is None:
                continue
            for tid in sorted(shared, reverse=True):
                self._unregister(tid)
                self.tris[tid] = None
            for tid, new in rewrites:
                self._unregister(tid)
                self.tris[tid] = new
                self._register(tid)
            if is_bedge or self.vkind[kill] == KIND_BOUNDARY:
                for bk in [k for k in self.btag if kill in k]:
                    tag = self.btag.pop(bk)
                    other = bk[0] if bk[1] == kill else bk[1]
                    if other != keep:
                        self.btag[_key(keep, other)] = tag
            self.vkind[kill] = _DEAD
            self.v2t[kill] = set()
            return True
        return False

    def try_flip(self, e):
        tids = self.e2t.get(e)
        if not tids or len(tids) != 2:
            return False
        t1, t2 = tids
        tri1 = self.tris[t1]
        for i in range(3):
            if _key(tri1[i], tri1[(i + 1) % 3]) == e:
                s, t = tri1[i], tri1[(i + 1) % 3]
                c = tri1[(i + 2) % 3]
                break
        d = next(v for v in self.tris[t2] if v not in e)
        ps, pt, pc, pd = (self.verts[v] for v in (s, t, c, d))
        if (
            kernels.signed_area(ps[0], ps[1], pd[0], pd[1], pc[0], pc[1]) <= 0.0
            or kernels.signed_area(pd[0], pd[1], pt[0], pt[1], pc[0], pc[1]) <= 0.0
        ):
            return False
        g = [0.0, 0.0, 0.0]
        for v in (s, t, c, d):
            lv = self.logm[v]
            g[0] += lv[0]
            g[1] += lv[1]
            g[2] += lv[2]
        m = kernels.sym2_exp_one(g[0] / 4.0, g[1] / 4.0, g[2] / 4.0)
        # Flip only when the Delaunay criterion in the averaged metric is
        # violated and the worst quality strictly improves.
        if (
            kernels.incircle_metric(
                ps[0], ps[1], pt[0], pt[1], pc[0], pc[1], pd[0], pd[1], *m
            )
            <= 0.0
        ):
            return False
        q_old = min(self._tri_quality(*tri1), self._tri_quality(*self.tris[t2]))
        q_new = min(self._tri_quality(s, d, c), self._tri_quality(d, t, c))
        if q_new <= q_old + 1e-12:
            return False
        self._unregister(t1)
        self._unregister(t2)
        self.tris[t1] = (s, d, c)
        self.tris[t2] = (d, t, c)
        self._register(t1)
        self._register(t2)
        return True

    # -- sweeps ------------------------------------------------------------

    def split_sweep(self, opts: RemeshOptions):
        edges, lens = self._edge_arrays()
        order = np.argsort(-lens, kind="stable")
        count = 0
        for k in order:
            if lens[k] <= opts.split_threshold:
                break
            if edges[k] in self.e2t:
                self.split_edge(edges[k])
                count += 1
        return count

    def collapse_sweep(self, opts: RemeshOptions):
        edges, lens = self._edge_arrays()
        order = np.argsort(lens, kind="stable")
        count = 0
        for k in order:
            if lens[k] >= opts.collapse_threshold:
                break
            e = edges[k]
            if e in self.e2t and self.try_collapse(e, opts):
                count += 1
        return count

    def flip_sweep(self):
        count = 0
        for e in sorted(self.e2t.keys()):
            if e in self.e2t and self.try_flip(e):
                count += 1
        return count

    def smooth_pass(self, bg: _Background, opts: RemeshOptions):
        coords = np.asarray(self.verts)
        mets = np.asarray(self.met)
        edges = sorted(self.e2t.keys())
        earr = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        w = kernels.edge_lengths(coords, mets, earr)
        acc = np.zeros_like(coords)
        wsum = np.zeros(len(coords))
        i, j = earr[:, 0], earr[:, 1]
        np.add.at(acc, i, w[:, None] * coords[j])
        np.add.at(acc, j, w[:, None] * coords[i])
        np.add.at(wsum, i, w)
        np.add.at(wsum, j, w)
        movable = [
            v
            for v in range(len(self.verts))
            if self.vkind[v] == KIND_INTERIOR and wsum[v] > 0.0 and self.v2t[v]
        ]
        omega = opts.smooth_relaxation
        moved = []
        for v in movable:
            ox, oy = self.verts[v]
            nx = ox + omega * (acc[v][0] / wsum[v] - ox)
            ny = oy + omega * (acc[v][1] / wsum[v] - oy)
            mv = self.met[v]
            step = kernels.metric_length_one(
                nx - ox, ny - oy, mv[0], mv[1], mv[2], mv[0], mv[1], mv[2]
            )
            if step < opts.smooth_min_move:
                continue
            ok = True
            for tid in self.v2t[v]:
                a, b, c = self.tris[tid]
                pa = (nx, ny) if a == v else self.verts[a]
                pb = (nx, ny) if b == v else self.verts[b]
                pc = (nx, ny) if c == v else self.verts[c]
                if kernels.signed_area(pa[0], pa[1], pb[0], pb[1], pc[0], pc[1]) <= 0.0:
                    ok = False
                    break
            if ok:
                self.verts[v] = (nx, ny)
                moved.append(v)
        if moved:
            logs = bg.interp_logs(np.asarray([self.verts[v] for v in moved]))
            mets_new = kernels.sym2_exp_batch(logs)
            for row, v in enumerate(moved):
                self.logm[v] = tuple(logs[row])
                self.met[v] = tuple(mets_new[row])
        return len(moved)

    # -- extraction --------------------------------------------------------

    def to_trimesh(self):
        alive = [tid for tid, t in enumerate(self.tris) if t is not None]
        used = sorted({v for tid in alive for v in self.tris[tid]})
        remap = {v: i for i, v in enumerate(used)}
        vertices = np.asarray([self.verts[v] for v in used])
        triangles = np.asarray(
            [[remap[v] for v in self.tris[tid]] for tid in alive], dtype=np.int64
        )
        bedges = np.asarray(
            [[remap[i], remap[j], tag] for (i, j), tag in sorted(self.btag.items())],
            dtype=np.int64,
        )
        mesh = build_mesh(vertices, triangles, bedges)
        tensors = np.asarray([self.met[v] for v in used])
        return mesh, tensors


def adapt_mesh(mesh: TriMesh, field: MetricField, options: RemeshOptions | None = None):
    """Adapt ``mesh`` toward a quasi-uniform mesh in ``field``.

    Returns the new TriMesh and a QualityReport measured against the metric
    carried to the new vertices.
    """
    options = options or RemeshOptions()
    options.validate()
    if field.mesh is not mesh and not (
        field.mesh.num_vertices == mesh.num_vertices
        and np.array_equal(field.mesh.vertices, mesh.vertices)
    ):
        raise RemeshError("metric field is not aligned with the input mesh")
    if len(field.tensors) != mesh.num_vertices:
        raise RemeshError("metric field size does not match the mesh")

    bg = _Background(mesh, field)
    em = _EditMesh(mesh, field)
    ops = {"split": 0, "collapse": 0, "flip": 0, "smooth": 0, "sweeps": 0}
    for _ in range(options.max_sweeps):
        if em.fraction_out(options) < options.max_out_fraction:
            break
        ops["sweeps"] += 1
        changed = em.split_sweep(options)
        ops["split"] += changed
        n = em.collapse_sweep(options)
        ops["collapse"] += n
        changed += n
        n = em.flip_sweep()
        ops["flip"] += n
        changed += n
        for _ in range(options.smooth_passes):
            n = em.smooth_pass(bg, options)
            ops["smooth"] += n
            changed += n
        if changed == 0:
            break
    new_mesh, tensors = em.to_trimesh()
    out_field = field.with_mesh(new_mesh, tensors)
    report = quality_report(new_mesh, out_field, op_counts=ops, options=options)
    return new_mesh, report


def quality_report(
    mesh: TriMesh,
    field: MetricField,
    *,
    op_counts: dict | None = None,
    options: RemeshOptions | None = None,
) -> QualityReport:
    if len(field.tensors) != mesh.num_vertices:
        raise RemeshError("metric field size does not match the mesh")
    opts = options or RemeshOptions()
    lens = kernels.edge_lengths(mesh.vertices, field.tensors, mesh.edges())
    quals = kernels.tri_quality(mesh.vertices, field.log_tensors(), mesh.triangles)
    vols = metric_volumes(field)
    hist = np.histogram(lens, bins=np.linspace(0.0, 2.0, 41))
    inside = (lens >= opts.collapse_threshold) & (lens <= opts.split_threshold)
    return QualityReport(
        edge_lengths=lens,
        edge_length_hist=hist,
        volumes=vols,
        qualities=quals,
        fraction_in_bracket=float(inside.mean()) if len(lens) else 1.0,
        op_counts=op_counts or {},
    )
