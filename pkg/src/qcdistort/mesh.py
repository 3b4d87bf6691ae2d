"""Indexed triangle meshes, OBJ/OFF/PLY file I/O, and basic geometric queries.

Conventions used throughout the package:

* ``faces[f, k]`` is the k-th vertex of face ``f``; "corner k" of a face is
  the interior angle at that vertex.  All per-corner fields downstream share
  this indexing.
* Corner angles are computed as ``atan2(|u x w|, u . w)``, which is stable
  near 0 and pi where ``acos`` is not.
* Degeneracy thresholds are relative to the bounding-box diagonal, so meshes
  may use arbitrary length units.
* n-gon faces in input files are fan-triangulated around their first vertex.
* A mesh whose vertices all satisfy ``|z| <= 1e-12`` is treated as planar
  (dimension 2), matching how flat meshes round-trip through 3D file formats.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateFaceError,
    NonManifoldEdgeError,
    ParseError,
    ValidationError,
)

PLANAR_Z_TOL = 1e-12
AREA_EPS_FACTOR = 1e-12     # times (bbox diagonal)^2
LENGTH_EPS_FACTOR = 1e-12   # times bbox diagonal

_LOAD_FORMATS = ("obj", "off")
_SAVE_FORMATS = ("obj", "off", "ply")


def _cross_magnitude(u: np.ndarray, w: np.ndarray) -> np.ndarray:
    """|u x w| for stacks of 2D or 3D vectors (coordinates on the last axis)."""
    if u.shape[-1] == 2:
        return np.abs(u[..., 0] * w[..., 1] - u[..., 1] * w[..., 0])
    return np.linalg.norm(np.cross(u, w), axis=-1)


@dataclass(frozen=True, eq=False)
class TriMesh:
    """Immutable indexed triangle mesh with 2D or 3D vertex positions.

    Parameters
    ----------
    vertices : array_like, shape (n, 2) or (n, 3)
        Vertex coordinates, float.
    faces : array_like, shape (m, 3)
        Ordered vertex-index triples (0-based).

    Construction performs the structural checks (index range, no repeated
    vertex within a face); the geometric invariants (non-degenerate faces,
    consistent combinatorial orientation) are enforced by
    :func:`validate_mesh`, which file loading and map construction call.
    """

    vertices: np.ndarray = field(repr=False)
    faces: np.ndarray = field(repr=False)
    dimension: int = field(init=False)

    def __post_init__(self):
        verts = np.asarray(self.vertices, dtype=np.float64)
        faces = np.asarray(self.faces, dtype=np.int64)
        if faces.size == 0:
            faces = faces.reshape(0, 3)
        if verts.ndim != 2 or verts.shape[1] not in (2, 3):
            raise ValidationError("vertices must have shape (n, 2) or (n, 3)")
        if faces.ndim != 2 or faces.shape[1] != 3:
            raise ValidationError("faces must have shape (m, 3)")
        if not np.all(np.isfinite(verts)):
            raise ValidationError("non-finite vertex coordinate")
        if faces.size:
            if faces.min() < 0 or faces.max() >= verts.shape[0]:
                bad = int(np.argmax((faces < 0) | (faces >= verts.shape[0]), axis=None) // 3)
                raise ValidationError(f"face {bad} has an out-of-range vertex index")
            repeated = (
                (faces[:, 0] == faces[:, 1])
                | (faces[:, 1] == faces[:, 2])
                | (faces[:, 2] == faces[:, 0])
            )
            if repeated.any():
                raise ValidationError(
                    f"face {int(np.argmax(repeated))} has a repeated vertex index"
                )
        verts = verts.copy()
        verts.flags.writeable = False
        faces = faces.copy()
        faces.flags.writeable = False
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "faces", faces)
        dim = 2
        if verts.shape[1] == 3:
            dim = 3
            if verts.shape[0] == 0 or np.abs(verts[:, 2]).max() <= PLANAR_Z_TOL:
                dim = 2
        object.__setattr__(self, "dimension", dim)

    def __repr__(self):
        return (
            f"TriMesh(n_vertices={self.n_vertices}, n_faces={self.n_faces}, "
            f"dimension={self.dimension})"
        )

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_faces(self) -> int:
        return self.faces.shape[0]

    @property
    def bbox_diagonal(self) -> float:
        if self.n_vertices == 0:
            return 0.0
        extent = self.vertices.max(axis=0) - self.vertices.min(axis=0)
        return float(np.linalg.norm(extent))

    @property
    def area_epsilon(self) -> float:
        """Faces with area at or below this are degenerate (unit-free)."""
        return AREA_EPS_FACTOR * self.bbox_diagonal ** 2

    @property
    def length_epsilon(self) -> float:
        """Edges at or below this length are degenerate (unit-free)."""
        return LENGTH_EPS_FACTOR * self.bbox_diagonal

    def face_corners(self) -> np.ndarray:
        """Vertex positions per face, shape (n_faces, 3, dim_of_storage)."""
        return self.vertices[self.faces]


def face_areas(mesh: TriMesh) -> np.ndarray:
    """Unsigned area of every face (cross-product formula)."""
    tri = mesh.face_corners()
    e1 = tri[:, 1] - tri[:, 0]
    e2 = tri[:, 2] - tri[:, 0]
    return 0.5 * _cross_magnitude(e1, e2)


def corner_angles(mesh: TriMesh) -> np.ndarray:
    """Interior angles of every face corner.

    Returns
    -------
    np.ndarray, shape (n_faces, 3)
        ``angles[f, k]`` is the angle (radians) at the k-th listed vertex of
        face ``f``.  Each angle lies in (0, pi) and the three angles of a
        face sum to pi up to roundoff.

    Raises
    ------
    DegenerateFaceError
        If any face edge is shorter than the mesh length threshold.
    """
    tri = mesh.face_corners()
    edges = tri[:, [1, 2, 0], :] - tri[:, [0, 1, 2], :]
    lengths = np.linalg.norm(edges, axis=2)
    short = lengths <= mesh.length_epsilon
    if short.any():
        idx = int(np.argwhere(short)[0, 0])
        raise DegenerateFaceError(
            f"face {idx} has an edge shorter than {mesh.length_epsilon:.3e}",
            face=idx,
        )
    angles = np.empty((mesh.n_faces, 3), dtype=np.float64)
    for k in range(3):
        u = tri[:, (k + 1) % 3, :] - tri[:, k, :]
        w = tri[:, (k + 2) % 3, :] - tri[:, k, :]
        angles[:, k] = np.arctan2(_cross_magnitude(u, w), (u * w).sum(axis=1))
    return angles


def _directed_edges(faces: np.ndarray) -> np.ndarray:
    return np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]], axis=0)


def boundary_loops(mesh: TriMesh) -> list[list[int]]:
    """Ordered cycles of boundary vertices; empty list for closed meshes.

    Boundary edges are undirected edges incident to exactly one face; each
    loop follows the direction the incident faces induce, so consistently
    oriented meshes yield consistently oriented loops.

    Raises
    ------
    NonManifoldEdgeError
        If an edge is shared by more than two faces.
    ValidationError
        If the boundary edges do not chain into closed loops (inconsistent
        face orientation).
    """
    if mesh.n_faces == 0:
        return []
    n = max(mesh.n_vertices, 1)
    directed = _directed_edges(mesh.faces)
    und = np.sort(directed, axis=1)
    keys = und[:, 0] * n + und[:, 1]
    uniq, counts = np.unique(keys, return_counts=True)
    if counts.max() > 2:
        bad = int(uniq[int(np.argmax(counts > 2))])
        raise NonManifoldEdgeError(
            f"edge ({bad // n}, {bad % n}) is shared by {int(counts.max())} faces"
        )
    per_edge_count = counts[np.searchsorted(uniq, keys)]
    border = directed[per_edge_count == 1]

    successors: dict[int, list[int]] = {}
    for i, j in border.tolist():
        successors.setdefault(i, []).append(j)
    for heads in successors.values():
        heads.sort(reverse=True)  # pop() walks to the smallest head first

    loops: list[list[int]] = []
    for start in sorted(successors):
        while successors.get(start):
            loop = [start]
            current = successors[start].pop()
            while current != start:
                loop.append(current)
                heads = successors.get(current)
                if not heads:
                    raise ValidationError(
                        "boundary edges do not form closed loops; "
                        "check face orientation"
                    )
                current = heads.pop()
            loops.append(loop)
    return loops


def is_edge_manifold(mesh: TriMesh) -> bool:
    """True when no edge is shared by more than two faces."""
    if mesh.n_faces == 0:
        return True
    n = max(mesh.n_vertices, 1)
    und = np.sort(_directed_edges(mesh.faces), axis=1)
    _, counts = np.unique(und[:, 0] * n + und[:, 1], return_counts=True)
    return int(counts.max()) <= 2


def validate_mesh(mesh: TriMesh) -> None:
    """Enforce the geometric mesh invariants.

    Checks that no face is degenerate (area above the relative threshold)
    and that face orientation is combinatorially consistent wherever the
    mesh is manifold: every edge shared by exactly two faces must be
    traversed once in each direction.  Inconsistent orientation is reported,
    never repaired, because a silent flip would corrupt the sign conventions
    of the per-face distortion fields.

    Raises
    ------
    ValidationError
    """
    areas = face_areas(mesh)
    degenerate = areas <= mesh.area_epsilon
    if degenerate.any():
        idx = int(np.argmax(degenerate))
        raise ValidationError(
            f"face {idx} is degenerate (area {areas[idx]:.3e} <= "
            f"{mesh.area_epsilon:.3e})"
        )
    if mesh.n_faces == 0:
        return
    n = max(mesh.n_vertices, 1)
    directed = _directed_edges(mesh.faces)
    dir_keys = directed[:, 0] * n + directed[:, 1]
    dir_uniq, dir_counts = np.unique(dir_keys, return_counts=True)
    dup = dir_uniq[dir_counts > 1]
    if dup.size:
        # a duplicated directed edge is an orientation flip unless the edge
        # is non-manifold (>2 faces), which is reported by the ops needing it
        und = np.sort(directed, axis=1)
        und_keys = und[:, 0] * n + und[:, 1]
        und_uniq, und_counts = np.unique(und_keys, return_counts=True)
        for key in dup.tolist():
            i, j = key // n, key % n
            und_key = min(i, j) * n + max(i, j)
            total = int(und_counts[np.searchsorted(und_uniq, und_key)])
            if total <= 2:
                raise ValidationError(
                    f"inconsistent face orientation across edge ({i}, {j})"
                )


# ---------------------------------------------------------------------------
# file I/O
# ---------------------------------------------------------------------------

def _resolve_format(path: str | os.PathLike, format: str | None, allowed) -> str:
    if format is None:
        format = os.path.splitext(os.fspath(path))[1].lstrip(".")
    fmt = format.lower()
    if fmt not in allowed:
        raise ValueError(f"unsupported mesh format {format!r}; expected one of {allowed}")
    return fmt


def _fan_triangulate(polys: list[tuple[list[int], int]], path) -> np.ndarray:
    faces = []
    for indices, lineno in polys:
        if len(indices) < 3:
            raise ParseError(f"{path}:{lineno}: face needs at least 3 vertices")
        for k in range(1, len(indices) - 1):
            faces.append((indices[0], indices[k], indices[k + 1]))
    return np.asarray(faces, dtype=np.int64).reshape(-1, 3)


def _parse_obj(path):
    vertices: list[list[float]] = []
    polys: list[tuple[list[int], int]] = []
    with open(path, "r", encoding="utf-8", errors="replace") as fh:
        for lineno, raw in enumerate(fh, 1):
            parts = raw.split()
            if not parts or parts[0].startswith("#"):
                continue
            key = parts[0]
            if key == "v":
                try:
                    coords = [float(tok) for tok in parts[1:4]]
                except ValueError:
                    raise ParseError(f"{path}:{lineno}: bad vertex coordinate") from None
                if len(coords) < 2:
                    raise ParseError(f"{path}:{lineno}: vertex needs at least 2 coordinates")
                while len(coords) < 3:
                    coords.append(0.0)
                vertices.append(coords)
            elif key == "f":
                indices = []
                for tok in parts[1:]:
                    head = tok.split("/", 1)[0]
                    try:
                        i = int(head)
                    except ValueError:
                        raise ParseError(f"{path}:{lineno}: bad face index {tok!r}") from None
                    if i == 0:
                        raise ParseError(f"{path}:{lineno}: face indices are 1-based")
                    indices.append(i - 1 if i > 0 else len(vertices) + i)
                polys.append((indices, lineno))
            # vn/vt/o/g/s/usemtl/mtllib/l and other directives are ignored
    verts = np.asarray(vertices, dtype=np.float64).reshape(-1, 3)
    return verts, _fan_triangulate(polys, path)


def _parse_off(path):
    tokens: list[tuple[str, int]] = []
    with open(path, "r", encoding="utf-8", errors="replace") as fh:
        for lineno, raw in enumerate(fh, 1):
            body = raw.split("#", 1)[0]
            tokens.extend((tok, lineno) for tok in body.split())
    if not tokens or tokens[0][0].upper() != "OFF":
        raise ParseError(f"{path}:1: missing OFF header")
    cursor = 1

    def take(kind, convert):
        nonlocal cursor
        if cursor >= len(tokens):
            last = tokens[-1][1] if tokens else 1
            raise ParseError(f"{path}:{last}: unexpected end of file (wanted {kind})")
        tok, lineno = tokens[cursor]
        cursor += 1
        try:
            return convert(tok)
        except ValueError:
            raise ParseError(f"{path}:{lineno}: bad {kind} {tok!r}") from None

    n_vert = take("vertex count", int)
    n_face = take("face count", int)
    take("edge count", int)
    if n_vert < 0 or n_face < 0:
        raise ParseError(f"{path}: negative element count in header")
    verts = np.empty((n_vert, 3), dtype=np.float64)
    for i in range(n_vert):
        for axis in range(3):
            verts[i, axis] = take("coordinate", float)
    polys: list[tuple[list[int], int]] = []
    for _ in range(n_face):
        lineno = tokens[cursor][1] if cursor < len(tokens) else tokens[-1][1]
        size = take("face size", int)
        if size < 3:
            raise ParseError(f"{path}:{lineno}: face needs at least 3 vertices")
        polys.append(([take("face index", int) for _ in range(size)], lineno))
    return verts, _fan_triangulate(polys, path)


def load_mesh(path: str | os.PathLike, format: str | None = None) -> TriMesh:
    """Load and validate a triangle mesh from an OBJ or OFF file.

    Parameters
    ----------
    path : path-like
    format : "obj" | "off" | None
        Explicit format; inferred from the file extension when None.

    Returns
    -------
    TriMesh
        Validated mesh.  Non-triangular faces are fan-triangulated; the
        dimension is 2 when every ``|z| <= 1e-12``, else 3.

    Raises
    ------
    ParseError, ValidationError, OSError
    """
    fmt = _resolve_format(path, format, _LOAD_FORMATS)
    if fmt == "obj":
        verts, faces = _parse_obj(path)
    else:
        verts, faces = _parse_off(path)
    mesh = TriMesh(verts, faces)
    validate_mesh(mesh)
    return mesh


def _as_3d(vertices: np.ndarray) -> np.ndarray:
    if vertices.shape[1] == 3:
        return vertices
    return np.column_stack([vertices, np.zeros(vertices.shape[0])])


def _fmt(x: float) -> str:
    # 17 significant digits round-trip doubles exactly through text
    return f"{x:.17g}"


def _write_ply(path, vertices: np.ndarray, faces: np.ndarray,
               face_colors: np.ndarray | None = None) -> None:
    verts = _as_3d(vertices)
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("ply\nformat ascii 1.0\n")
        fh.write(f"element vertex {len(verts)}\n")
        fh.write("property double x\nproperty double y\nproperty double z\n")
        fh.write(f"element face {len(faces)}\n")
        fh.write("property list uchar int vertex_indices\n")
        if face_colors is not None:
            fh.write("property uchar red\nproperty uchar green\nproperty uchar blue\n")
        fh.write("end_header\n")
        for v in verts:
            fh.write(f"{_fmt(v[0])} {_fmt(v[1])} {_fmt(v[2])}\n")
        if face_colors is None:
            for f in faces:
                fh.write(f"3 {f[0]} {f[1]} {f[2]}\n")
        else:
            for f, c in zip(faces, face_colors):
                fh.write(f"3 {f[0]} {f[1]} {f[2]} {c[0]} {c[1]} {c[2]}\n")


def save_mesh(mesh: TriMesh, path: str | os.PathLike, format: str | None = None) -> None:
    """Write a mesh as OBJ, OFF, or PLY (ASCII).

    Coordinates are written with 17 significant digits, so OBJ/OFF output
    round-trips through :func:`load_mesh` exactly.  Planar meshes stored
    with 2 coordinates are written with z = 0.

    Raises
    ------
    OSError
    """
    fmt = _resolve_format(path, format, _SAVE_FORMATS)
    if fmt == "ply":
        _write_ply(path, mesh.vertices, mesh.faces)
        return
    verts = _as_3d(mesh.vertices)
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        if fmt == "obj":
            for v in verts:
                fh.write(f"v {_fmt(v[0])} {_fmt(v[1])} {_fmt(v[2])}\n")
            for f in mesh.faces:
                fh.write(f"f {f[0] + 1} {f[1] + 1} {f[2] + 1}\n")
        else:  # off
            fh.write("OFF\n")
            fh.write(f"{mesh.n_vertices} {mesh.n_faces} 0\n")
            for v in verts:
                fh.write(f"{_fmt(v[0])} {_fmt(v[1])} {_fmt(v[2])}\n")
            for f in mesh.faces:
                fh.write(f"3 {f[0]} {f[1]} {f[2]}\n")
