"""Text formats for meshes and metric fields, SVG rendering, run manifests.

Mesh format ("tmsh 1"): header line, then "nv nt nbe", nv lines "x y",
nt lines "i j k" (1-based), nbe lines "i j tag" (1-based). Metric format
("tmtr 1"): header line then one "m11 m12 m22" row per vertex. Floats are
written with 17 significant digits so round-trips are bit-exact.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .mesh import TriMesh, build_mesh

MESH_MAGIC = "tmsh 1"
METRIC_MAGIC = "tmtr 1"
MANIFEST_MAGIC = "anisomesh-run 1"


class FormatError(ValueError):
    def __init__(self, path, line, message):
        super().__init__(f"{path}:{line}: {message}")
        self.line = line


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_mesh(path, mesh: TriMesh) -> None:
    lines = [MESH_MAGIC]
    lines.append(
        f"{mesh.num_vertices} {mesh.num_triangles} {len(mesh.boundary_edges)}"
    )
    for x, y in mesh.vertices:
        lines.append(f"{_fmt(x)} {_fmt(y)}")
    for i, j, k in mesh.triangles:
        lines.append(f"{i + 1} {j + 1} {k + 1}")
    for i, j, tag in mesh.boundary_edges:
        lines.append(f"{i + 1} {j + 1} {tag}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_mesh(path) -> TriMesh:
    raw = Path(path).read_text().splitlines()
    if not raw or raw[0].strip() != MESH_MAGIC:
        raise FormatError(path, 1, f"expected header '{MESH_MAGIC}'")
    try:
        nv, nt, nbe = (int(tok) for tok in raw[1].split())
    except (IndexError, ValueError):
        raise FormatError(path, 2, "expected counts line 'nv nt nbe'") from None
    need = 2 + nv + nt + nbe
    if len(raw) < need:
        raise FormatError(
            path, len(raw), f"expected {need} lines, found {len(raw)}"
        )

    def parse(line_no, tokens_expected, kind):
        toks = raw[line_no - 1].split()
        if len(toks) != tokens_expected:
            raise FormatError(
                path, line_no, f"expected {tokens_expected} {kind} fields"
            )
        return toks

    vertices = np.empty((nv, 2))
    for r in range(nv):
        toks = parse(3 + r, 2, "coordinate")
        try:
            vertices[r] = (float(toks[0]), float(toks[1]))
        except ValueError:
            raise FormatError(path, 3 + r, "bad coordinate") from None
    triangles = np.empty((nt, 3), dtype=np.int64)
    for r in range(nt):
        line_no = 3 + nv + r
        toks = parse(line_no, 3, "index")
        try:
            vals = [int(t) for t in toks]
        except ValueError:
            raise FormatError(path, line_no, "bad triangle index") from None
        if min(vals) < 1:
            raise FormatError(path, line_no, "indices are 1-based; found < 1")
        triangles[r] = [v - 1 for v in vals]
    bedges = np.empty((nbe, 3), dtype=np.int64)
    for r in range(nbe):
        line_no = 3 + nv + nt + r
        toks = parse(line_no, 3, "boundary")
        try:
            i, j, tag = (int(t) for t in toks)
        except ValueError:
            raise FormatError(path, line_no, "bad boundary edge") from None
        if i < 1 or j < 1:
            raise FormatError(path, line_no, "indices are 1-based; found < 1")
        bedges[r] = (i - 1, j - 1, tag)
    return build_mesh(vertices, triangles, bedges)


def write_metric(path, tensors) -> None:
    tensors = np.asarray(getattr(tensors, "tensors", tensors), dtype=float)
    lines = [METRIC_MAGIC]
    for m11, m12, m22 in tensors:
        lines.append(f"{_fmt(m11)} {_fmt(m12)} {_fmt(m22)}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_metric(path) -> np.ndarray:
    raw = Path(path).read_text().splitlines()
    if not raw or raw[0].strip() != METRIC_MAGIC:
        raise FormatError(path, 1, f"expected header '{METRIC_MAGIC}'")
    rows = []
    for line_no, line in enumerate(raw[1:], start=2):
        if not line.strip():
            continue
        toks = line.split()
        if len(toks) != 3:
            raise FormatError(path, line_no, "expected 'm11 m12 m22'")
        try:
            rows.append([float(t) for t in toks])
        except ValueError:
            raise FormatError(path, line_no, "bad tensor entry") from None
    out = np.asarray(rows)
    det = out[:, 0] * out[:, 2] - out[:, 1] ** 2
    bad = np.nonzero((out[:, 0] <= 0) | (det <= 0))[0]
    if len(bad):
        raise FormatError(
            path, int(bad[0]) + 2, f"tensor at vertex {int(bad[0])} is not SPD"
        )
    return out


def render_svg(mesh: TriMesh, path, *, shade=None, width: int = 800) -> None:
    """Deterministic SVG: one line per unique edge, optional per-element
    fill by a scalar."""
    if mesh.num_triangles == 0:
        raise ValueError("cannot render an empty mesh")
    v = mesh.vertices
    x0, y0 = v.min(axis=0)
    x1, y1 = v.max(axis=0)
    span = max(x1 - x0, y1 - y0)
    height = int(round(width * (y1 - y0) / (x1 - x0)))
    pad = 0.02 * span
    sw = span / 900.0

    def sx(x):
        return x

    def sy(y):
        return y1 + y0 - y  # flip so +y is up

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="{_fmt(x0 - pad)} {_fmt(y0 - pad)} '
        f'{_fmt(x1 - x0 + 2 * pad)} {_fmt(y1 - y0 + 2 * pad)}">'
    ]
    if shade is not None:
        shade = np.asarray(shade, dtype=float)
        lo, hi = float(shade.min()), float(shade.max())
        rng = hi - lo if hi > lo else 1.0
        for t, s in zip(mesh.triangles, shade):
            frac = (float(s) - lo) / rng
            col = int(round(255 * (1.0 - frac)))
            pts = " ".join(
                f"{_fmt(sx(v[i][0]))},{_fmt(sy(v[i][1]))}" for i in t
            )
            parts.append(
                f'<polygon points="{pts}" fill="rgb(255,{col},{col})" stroke="none"/>'
            )
    for i, j in mesh.edges():
        parts.append(
            f'<line x1="{_fmt(sx(v[i][0]))}" y1="{_fmt(sy(v[i][1]))}" '
            f'x2="{_fmt(sx(v[j][0]))}" y2="{_fmt(sy(v[j][1]))}" '
            f'stroke="black" stroke-width="{_fmt(sw)}"/>'
        )
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n")


HISTORY_HEADER = "iter,nbt,error_lp,grad_error_lp,cv_equidistribution,q_mean"
SLOPES_HEADER = "p,m,variant,slope,intercept,residual"


def write_history_csv(path, records) -> None:
    lines = [HISTORY_HEADER]
    for r in records:
        lines.append(
            f"{r.iteration},{r.nbt},{_fmt(r.error_lp)},{_fmt(r.grad_error_lp)},"
            f"{_fmt(r.cv_equidistribution)},{_fmt(r.q_mean)}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def write_slopes_csv(path, rows) -> None:
    lines = [SLOPES_HEADER]
    for p, m, variant, slope, intercept, residual in rows:
        p_str = "inf" if np.isinf(float(p)) else _fmt(float(p))
        lines.append(
            f"{p_str},{m},{variant},{_fmt(slope)},{_fmt(intercept)},{_fmt(residual)}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def write_manifest(path, command: str, options: dict, seed: int = 0,
                   outputs=()) -> None:
    doc = {
        "format": MANIFEST_MAGIC,
        "command": command,
        "seed": seed,
        "options": options,
        "outputs": list(outputs),
    }
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def read_manifest(path) -> dict:
    doc = json.loads(Path(path).read_text())
    if doc.get("format") != MANIFEST_MAGIC:
        raise FormatError(path, 1, f"expected manifest format '{MANIFEST_MAGIC}'")
    return doc
