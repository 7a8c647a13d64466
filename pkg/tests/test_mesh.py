import numpy as np
import pytest

from anisomesh.mesh import (
    KIND_BOUNDARY,
    KIND_CORNER,
    DegenerateElementError,
    NonManifoldError,
    UntaggedBoundaryError,
    build_mesh,
    single_triangle_mesh,
    structured_rect_mesh,
)

SQUARE_VERTS = [[0, 0], [1, 0], [1, 1], [0, 1]]
SQUARE_TRIS = [[0, 1, 2], [0, 2, 3]]
SQUARE_BND = [[0, 1, 1], [1, 2, 2], [2, 3, 3], [3, 0, 4]]


def square_mesh():
    return build_mesh(SQUARE_VERTS, SQUARE_TRIS, SQUARE_BND)


def test_square_mesh_valid():
    mesh = square_mesh()
    assert mesh.num_vertices == 4
    assert mesh.num_triangles == 2
    assert len(mesh.boundary_edges) == 4
    # one interior edge
    assert len(mesh.edges()) == 5
    assert np.all(mesh.vertex_kind == KIND_CORNER)


def test_clockwise_triangle_reoriented():
    mesh = build_mesh(
        [[0, 0], [1, 0], [0, 1]], [[0, 2, 1]], [[0, 1, 1], [1, 2, 2], [2, 0, 3]]
    )
    a, b, c = mesh.vertices[mesh.triangles[0]]
    cross = (b - a)[0] * (c - a)[1] - (b - a)[1] * (c - a)[0]
    assert cross > 0


def test_nonmanifold_claimed_edge():
    # Two triangles share only vertex 0 but the boundary list claims an
    # edge that belongs to no triangle.
    verts = [[0, 0], [1, 0], [0, 1], [-1, 0], [0, -1]]
    tris = [[0, 1, 2], [0, 3, 4]]
    bnd = [[1, 3, 1]]
    with pytest.raises(NonManifoldError):
        build_mesh(verts, tris, bnd)


def test_edge_shared_three_times():
    verts = [[0, 0], [1, 0], [0, 1], [0, -1], [1, 1]]
    tris = [[0, 1, 2], [0, 3, 1], [0, 1, 4]]
    with pytest.raises(NonManifoldError):
        build_mesh(verts, tris, [])


def test_untagged_boundary_edge():
    with pytest.raises(UntaggedBoundaryError):
        build_mesh(SQUARE_VERTS, SQUARE_TRIS, SQUARE_BND[:-1])


def test_zero_area_triangle():
    with pytest.raises(DegenerateElementError):
        build_mesh([[0, 0], [1, 0], [2, 0]], [[0, 1, 2]], [])


def test_repeated_vertex_in_triangle():
    with pytest.raises(DegenerateElementError):
        build_mesh([[0, 0], [1, 0], [0, 1]], [[0, 1, 1]], [])


def test_element_geometry_unit_right_triangle():
    mesh = single_triangle_mesh((0, 0), (1, 0), (0, 1))
    geom = mesh.element_geometry(0)
    assert np.allclose(geom.edge_vectors[0], [-1, 1])
    assert np.allclose(geom.edge_vectors[1], [0, -1])
    assert np.allclose(geom.edge_vectors[2], [1, 0])
    assert geom.area == pytest.approx(0.5)


def test_element_geometry_translation_and_scaling():
    base = single_triangle_mesh((0, 0), (1, 0), (0, 1)).element_geometry(0)
    shifted = single_triangle_mesh((5, -3), (6, -3), (5, -2)).element_geometry(0)
    assert np.allclose(base.edge_vectors, shifted.edge_vectors)
    assert shifted.area == pytest.approx(base.area)
    scaled = single_triangle_mesh((0, 0), (2, 0), (0, 2)).element_geometry(0)
    assert np.allclose(scaled.edge_vectors, 2 * base.edge_vectors)
    assert scaled.area == pytest.approx(4 * base.area)


def test_element_geometry_out_of_range():
    with pytest.raises(IndexError):
        square_mesh().element_geometry(2)


def test_edge_vectors_sum_to_zero():
    mesh = structured_rect_mesh((0.1, 1.0), (0.1, 1.0), 7, 5)
    ell = mesh.tri_edge_vectors()
    assert np.abs(ell.sum(axis=1)).max() < 1e-12


def test_structured_mesh_counts_and_area():
    mesh = structured_rect_mesh((0.1, 1.0), (0.1, 1.0), 16, 16)
    assert mesh.num_vertices == 17 * 17
    assert mesh.num_triangles == 512
    areas = mesh.areas()
    assert np.ptp(areas) < 1e-15
    assert areas.sum() == pytest.approx(0.81, rel=1e-10)
    assert set(np.unique(mesh.boundary_edges[:, 2])) == {1, 2, 3, 4}


def test_structured_mesh_single_cell():
    mesh = structured_rect_mesh((0, 1), (0, 1), 1, 1)
    assert mesh.num_triangles == 2


def test_structured_mesh_bad_args():
    from anisomesh.mesh import MeshError

    with pytest.raises(MeshError):
        structured_rect_mesh((0, 1), (0, 1), 0, 4)
    with pytest.raises(MeshError):
        structured_rect_mesh((1, 0), (0, 1), 4, 4)


def test_corner_flags():
    mesh = structured_rect_mesh((0, 1), (0, 1), 2, 2)
    kinds = mesh.vertex_kind
    assert (kinds == KIND_CORNER).sum() == 4
    assert (kinds == KIND_BOUNDARY).sum() == 4
    # corner vertices are the rectangle corners
    corners = mesh.vertices[kinds == KIND_CORNER]
    assert sorted(map(tuple, corners)) == [(0, 0), (0, 1), (1, 0), (1, 1)]


def test_build_mesh_idempotent():
    mesh = structured_rect_mesh((0, 2), (0, 1), 3, 4)
    rebuilt = build_mesh(mesh.vertices, mesh.triangles, mesh.boundary_edges)
    assert np.array_equal(rebuilt.vertices, mesh.vertices)
    assert np.array_equal(rebuilt.triangles, mesh.triangles)
    assert np.array_equal(rebuilt.boundary_edges, mesh.boundary_edges)
    assert np.array_equal(rebuilt.vertex_kind, mesh.vertex_kind)
