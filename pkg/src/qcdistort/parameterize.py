"""Disk parameterization by convex-combination (Tutte) embedding.

Maps a disk-topology mesh onto the unit disk: the boundary loop goes to the
unit circle with arc-length-proportional spacing, and each interior vertex
solves a sparse linear system placing it at a weighted average of its
neighbors.  Uniform weights guarantee a fold-free embedding; cotangent
weights give the discrete harmonic (near-conformal) map but may fold, which
is reported by the distortion analysis rather than treated as an error.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import spsolve

from .beltrami import MeshMap
from .errors import SolverError, TopologyError
from .mesh import TriMesh, _cross_magnitude, boundary_loops, validate_mesh

logger = logging.getLogger(__name__)

WEIGHT_CHOICES = ("uniform", "cotangent")


@dataclass(frozen=True)
class ParamConfig:
    """Options for :func:`tutte_disk`.

    weights           "uniform" (fold-free by construction) or "cotangent"
                      (discrete harmonic; folds possible and reported)
    boundary_shape    only "unit_circle" is implemented
    solver_tolerance  max allowed infinity-norm residual of the linear system
    max_iterations    iteration cap for the conjugate-gradient fallback used
                      when the direct factorization fails
    """

    weights: str = "uniform"
    boundary_shape: str = "unit_circle"
    solver_tolerance: float = 1e-10
    max_iterations: int = 20_000

    def __post_init__(self):
        if self.weights not in WEIGHT_CHOICES:
            raise ValueError(f"weights must be one of {WEIGHT_CHOICES}")
        if self.boundary_shape != "unit_circle":
            raise ValueError("only the unit_circle boundary shape is implemented")
        if self.solver_tolerance <= 0:
            raise ValueError("solver_tolerance must be positive")


def _edge_weights(mesh: TriMesh, kind: str):
    """Symmetric (rows, cols, values) triplets for the weight matrix."""
    faces = mesh.faces
    if kind == "uniform":
        n = max(mesh.n_vertices, 1)
        directed = np.concatenate(
            [faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]], axis=0
        )
        und = np.sort(directed, axis=1)
        und = np.unique(und[:, 0] * n + und[:, 1])
        i, j = und // n, und % n
        rows = np.concatenate([i, j])
        cols = np.concatenate([j, i])
        vals = np.ones(rows.size, dtype=np.float64)
        return rows, cols, vals
    # cotangent: the corner at vertex k weights the opposite edge; the raw
    # value is kept even when negative so the analyzed map is the honest
    # harmonic one
    tri = mesh.face_corners()
    rows_list, cols_list, vals_list = [], [], []
    for k in range(3):
        u = tri[:, (k + 1) % 3] - tri[:, k]
        w = tri[:, (k + 2) % 3] - tri[:, k]
        cot = (u * w).sum(axis=1) / _cross_magnitude(u, w)
        i = faces[:, (k + 1) % 3]
        j = faces[:, (k + 2) % 3]
        rows_list += [i, j]
        cols_list += [j, i]
        vals_list += [0.5 * cot, 0.5 * cot]
    return (
        np.concatenate(rows_list),
        np.concatenate(cols_list),
        np.concatenate(vals_list),
    )


def _boundary_circle_positions(mesh: TriMesh, loop: list[int]) -> np.ndarray:
    """Unit-circle positions with arc-length-proportional spacing."""
    pts = mesh.vertices[np.asarray(loop, dtype=np.int64)]
    seg = np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1)
    total = seg.sum()
    if total <= 0:
        raise TopologyError("boundary loop has zero length")
    t = 2.0 * np.pi * np.concatenate([[0.0], np.cumsum(seg[:-1])]) / total
    return np.column_stack([np.cos(t), np.sin(t)])


def tutte_disk(mesh: TriMesh, config: ParamConfig = ParamConfig()) -> MeshMap:
    """Embed a disk-topology mesh in the unit disk.

    Parameters
    ----------
    mesh : TriMesh
        Simply-connected mesh with exactly one boundary loop (checked via
        the boundary extraction and the Euler characteristic V - E + F = 1).
    config : ParamConfig

    Returns
    -------
    MeshMap
        ``source`` is the input, ``target`` the planar embedding.  The
        embedding's global orientation is normalized (total signed area
        positive) so a reversed boundary loop cannot reflect the result.

    Raises
    ------
    TopologyError
        Wrong boundary-loop count or Euler characteristic.
    SolverError
        Linear-system residual above ``config.solver_tolerance``.
    """
    validate_mesh(mesh)
    loops = boundary_loops(mesh)
    if len(loops) != 1:
        raise TopologyError(f"expected exactly one boundary loop, found {len(loops)}")
    n = mesh.n_vertices
    n_edges = _count_edges(mesh)
    euler = n - n_edges + mesh.n_faces
    if euler != 1:
        raise TopologyError(f"Euler characteristic is {euler}, expected 1 for a disk")

    loop = loops[0]
    boundary_uv = _boundary_circle_positions(mesh, loop)
    uv = np.zeros((n, 2), dtype=np.float64)
    b_idx = np.asarray(loop, dtype=np.int64)
    uv[b_idx] = boundary_uv

    interior = np.setdiff1d(np.arange(n, dtype=np.int64), b_idx)
    if interior.size:
        rows, cols, vals = _edge_weights(mesh, config.weights)
        weight = sparse.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
        lap = sparse.diags(np.asarray(weight.sum(axis=1)).ravel()) - weight
        lap = lap.tocsr()
        a_ii = lap[interior][:, interior].tocsc()
        rhs = -lap[interior][:, b_idx] @ boundary_uv
        solution = _solve(a_ii, rhs, config)
        residual = float(np.abs(a_ii @ solution - rhs).max())
        if residual > config.solver_tolerance:
            raise SolverError(
                f"linear-system residual {residual:.3e} exceeds tolerance "
                f"{config.solver_tolerance:.3e}"
            )
        uv[interior] = solution

    # normalize global orientation: a boundary loop walked the "wrong" way
    # would reflect the whole embedding
    tri = uv[mesh.faces]
    signed = 0.5 * (
        (tri[:, 1, 0] - tri[:, 0, 0]) * (tri[:, 2, 1] - tri[:, 0, 1])
        - (tri[:, 2, 0] - tri[:, 0, 0]) * (tri[:, 1, 1] - tri[:, 0, 1])
    )
    if signed.sum() < 0:
        uv[:, 1] = -uv[:, 1]

    return MeshMap(source=mesh, target=TriMesh(uv, mesh.faces))


def _count_edges(mesh: TriMesh) -> int:
    n = max(mesh.n_vertices, 1)
    faces = mesh.faces
    directed = np.concatenate(
        [faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]], axis=0
    )
    und = np.sort(directed, axis=1)
    return int(np.unique(und[:, 0] * n + und[:, 1]).size)


def _solve(matrix, rhs: np.ndarray, config: ParamConfig) -> np.ndarray:
    try:
        out = spsolve(matrix, rhs)
        return out.reshape(rhs.shape)
    except Exception as exc:  # singular factorization -> iterative fallback
        logger.warning("direct sparse solve failed (%s); falling back to CG", exc)
    out = np.empty_like(rhs)
    for col in range(rhs.shape[1]):
        x, info = sparse.linalg.cg(
            matrix,
            rhs[:, col],
            rtol=config.solver_tolerance,
            atol=config.solver_tolerance,
            maxiter=config.max_iterations,
        )
        if info != 0:
            raise SolverError(f"conjugate gradient did not converge (info={info})")
        logger.info("CG column %d converged", col)
        out[:, col] = x
    return out
