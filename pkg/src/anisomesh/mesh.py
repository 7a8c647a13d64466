"""Conforming 2D triangulations with boundary tags and geometric queries."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

KIND_INTERIOR = 0
KIND_BOUNDARY = 1
KIND_CORNER = 2


class MeshError(ValueError):
    """Invalid mesh input."""


class NonManifoldError(MeshError):
    """An edge is shared by more than two triangles, or the boundary list
    disagrees with the triangle connectivity."""


class DegenerateElementError(MeshError):
    """A triangle has zero area or repeated vertices."""


class UntaggedBoundaryError(MeshError):
    """An edge used by exactly one triangle is missing from the tagged
    boundary list."""


@dataclass(frozen=True)
class ElementGeometry:
    """Edge vectors and area of one triangle.

    ``edge_vectors[i]`` is the edge opposite vertex ``i`` with cyclic sign,
    so the three vectors sum to zero.
    """

    edge_vectors: np.ndarray  # (3, 2)
    area: float

    def edge_lengths_sq(self) -> np.ndarray:
        return np.sum(self.edge_vectors**2, axis=1)


@dataclass(frozen=True)
class TriMesh:
    """Immutable conforming triangulation of a planar domain.

    vertices       (nv, 2) float64
    triangles      (nt, 3) int64, counter-clockwise
    boundary_edges (nbe, 3) int64 rows (i, j, tag), i < j
    vertex_kind    (nv,) int8: interior / boundary-segment / corner
    vertex_tag     (nv,) int64: segment tag for boundary vertices, -1 otherwise
    """

    vertices: np.ndarray
    triangles: np.ndarray
    boundary_edges: np.ndarray
    vertex_kind: np.ndarray
    vertex_tag: np.ndarray
    _edges: np.ndarray = field(repr=False, default=None)

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)

    @property
    def num_triangles(self) -> int:
        return len(self.triangles)

    def edges(self) -> np.ndarray:
        """Unique undirected edges as (ne, 2) sorted pairs, lexicographic."""
        return self._edges

    def tri_edge_vectors(self) -> np.ndarray:
        """(nt, 3, 2) array, entry [t, i] the edge opposite vertex i of t."""
        v = self.vertices
        t = self.triangles
        ell = np.empty((len(t), 3, 2))
        for i in range(3):
            ell[:, i, :] = v[t[:, (i + 2) % 3]] - v[t[:, (i + 1) % 3]]
        return ell

    def areas(self) -> np.ndarray:
        ell = self.tri_edge_vectors()
        return 0.5 * np.abs(
            ell[:, 1, 0] * ell[:, 2, 1] - ell[:, 1, 1] * ell[:, 2, 0]
        )

    def element_geometry(self, triangle_id: int) -> ElementGeometry:
        if not 0 <= triangle_id < self.num_triangles:
            raise IndexError(f"triangle id {triangle_id} out of range")
        v = self.vertices[self.triangles[triangle_id]]
        ell = np.array([v[2] - v[1], v[0] - v[2], v[1] - v[0]])
        area = 0.5 * abs(ell[1, 0] * ell[2, 1] - ell[1, 1] * ell[2, 0])
        return ElementGeometry(ell, float(area))

    def centroids(self) -> np.ndarray:
        return self.vertices[self.triangles].mean(axis=1)


def element_geometry(mesh: TriMesh, triangle_id: int) -> ElementGeometry:
    return mesh.element_geometry(triangle_id)


def _signed_areas(vertices, triangles):
    a = vertices[triangles[:, 0]]
    b = vertices[triangles[:, 1]]
    c = vertices[triangles[:, 2]]
    return 0.5 * (
        (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1])
        - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0])
    )


def build_mesh(vertices, triangles, boundary_edges) -> TriMesh:
    """Validate raw arrays and assemble a TriMesh.

    Triangles listed clockwise are reoriented. Raises NonManifoldError,
    DegenerateElementError or UntaggedBoundaryError on invalid input.
    """
    vertices = np.ascontiguousarray(np.asarray(vertices, dtype=np.float64))
    triangles = np.ascontiguousarray(np.asarray(triangles, dtype=np.int64))
    boundary_edges = np.asarray(boundary_edges, dtype=np.int64)
    if vertices.ndim != 2 or vertices.shape[1] != 2:
        raise MeshError("vertices must be an (n, 2) array")
    if triangles.ndim != 2 or triangles.shape[1] != 3:
        raise MeshError("triangles must be an (m, 3) array")
    if boundary_edges.size == 0:
        boundary_edges = boundary_edges.reshape(0, 3)
    if boundary_edges.ndim != 2 or boundary_edges.shape[1] != 3:
        raise MeshError("boundary_edges must be (k, 3) rows (i, j, tag)")
    nv = len(vertices)
    if triangles.size and (triangles.min() < 0 or triangles.max() >= nv):
        raise MeshError("triangle vertex index out of range")
    if boundary_edges.size and (
        boundary_edges[:, :2].min() < 0 or boundary_edges[:, :2].max() >= nv
    ):
        raise MeshError("boundary edge vertex index out of range")
    for t in triangles:
        if t[0] == t[1] or t[1] == t[2] or t[0] == t[2]:
            raise DegenerateElementError(f"triangle {t.tolist()} repeats a vertex")

    triangles = triangles.copy()
    sa = _signed_areas(vertices, triangles)
    flip = sa < 0
    triangles[flip] = triangles[flip][:, [0, 2, 1]]
    sa = np.abs(sa)
    scale = max(np.ptp(vertices[:, 0]), np.ptp(vertices[:, 1]), 1e-300)
    bad = np.nonzero(sa <= 1e-14 * scale**2)[0]
    if len(bad):
        raise DegenerateElementError(
            f"triangle {bad[0]} has zero area after reorientation"
        )

    # Edge census: interior edges in exactly 2 triangles, boundary in 1.
    pairs = np.concatenate(
        [triangles[:, [0, 1]], triangles[:, [1, 2]], triangles[:, [2, 0]]]
    )
    pairs.sort(axis=1)
    uniq, counts = np.unique(pairs, axis=0, return_counts=True)
    if counts.max(initial=0) > 2:
        e = uniq[np.argmax(counts)]
        raise NonManifoldError(
            f"edge ({e[0]}, {e[1]}) is shared by {counts.max()} triangles"
        )
    count_of = {(int(i), int(j)): int(c) for (i, j), c in zip(uniq, counts)}

    tagged = {}
    for i, j, tag in boundary_edges:
        key = (int(min(i, j)), int(max(i, j)))
        c = count_of.get(key)
        if c is None:
            raise NonManifoldError(
                f"boundary edge {key} does not belong to any triangle"
            )
        if c != 1:
            raise NonManifoldError(
                f"boundary edge {key} is interior (shared by {c} triangles)"
            )
        tagged[key] = int(tag)
    for key, c in count_of.items():
        if c == 1 and key not in tagged:
            raise UntaggedBoundaryError(f"boundary edge {key} carries no tag")

    vertex_kind = np.full(nv, KIND_INTERIOR, dtype=np.int8)
    vertex_tag = np.full(nv, -1, dtype=np.int64)
    tags_at: dict[int, set[int]] = {}
    for (i, j), tag in tagged.items():
        tags_at.setdefault(i, set()).add(tag)
        tags_at.setdefault(j, set()).add(tag)
    for v, tags in tags_at.items():
        if len(tags) > 1:
            vertex_kind[v] = KIND_CORNER
        else:
            vertex_kind[v] = KIND_BOUNDARY
            vertex_tag[v] = next(iter(tags))

    be = np.array(
        [(i, j, t) for (i, j), t in sorted(tagged.items())], dtype=np.int64
    ).reshape(-1, 3)
    for arr in (vertices, triangles, be, vertex_kind, vertex_tag, uniq):
        arr.setflags(write=False)
    return TriMesh(vertices, triangles, be, vertex_kind, vertex_tag, uniq)


def structured_rect_mesh(x_range, y_range, nx: int, ny: int) -> TriMesh:
    """Structured triangulation of a rectangle; 2*nx*ny triangles, one
    boundary tag per side (bottom 1, right 2, top 3, left 4)."""
    x0, x1 = map(float, x_range)
    y0, y1 = map(float, y_range)
    if not (x1 > x0 and y1 > y0):
        raise MeshError("degenerate rectangle range")
    if nx < 1 or ny < 1:
        raise MeshError("nx and ny must be at least 1")
    xs = np.linspace(x0, x1, nx + 1)
    ys = np.linspace(y0, y1, ny + 1)
    xx, yy = np.meshgrid(xs, ys, indexing="ij")
    vertices = np.column_stack([xx.ravel(), yy.ravel()])

    def vid(i, j):
        return i * (ny + 1) + j

    tris = []
    for i in range(nx):
        for j in range(ny):
            v00, v10 = vid(i, j), vid(i + 1, j)
            v01, v11 = vid(i, j + 1), vid(i + 1, j + 1)
            tris.append((v00, v10, v11))
            tris.append((v00, v11, v01))
    bedges = []
    for i in range(nx):
        bedges.append((vid(i, 0), vid(i + 1, 0), 1))
        bedges.append((vid(i, ny), vid(i + 1, ny), 3))
    for j in range(ny):
        bedges.append((vid(nx, j), vid(nx, j + 1), 2))
        bedges.append((vid(0, j), vid(0, j + 1), 4))
    return build_mesh(vertices, np.array(tris), np.array(bedges))


def single_triangle_mesh(p0, p1, p2) -> TriMesh:
    """One-triangle mesh, used by the formula/oracle arbitration suites."""
    vertices = np.array([p0, p1, p2], dtype=float)
    return build_mesh(
        vertices, [[0, 1, 2]], [[0, 1, 1], [1, 2, 2], [2, 0, 3]]
    )
