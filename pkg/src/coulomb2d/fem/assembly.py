"""Linear-triangle stiffness and load assembly for plane strain."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from ..elasticity import SQRT2, ElasticModulus, check_elliptic
from .mesh import DomainMesh


class SingularElement(ValueError):
    pass


def assembly_threads() -> int:
    """Thread cap from ``COULOMB2D_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("COULOMB2D_THREADS", "1")))
    except ValueError:
        return 1


def modulus_field(mesh: DomainMesh, moduli) -> np.ndarray:
    """``(T, 3, 3)`` Mandel matrices from one modulus or a per-element list."""
    if isinstance(moduli, ElasticModulus):
        check_elliptic(moduli)
        return np.broadcast_to(moduli.matrix, (len(mesh.triangles), 3, 3)).copy()
    mats = [check_elliptic(m).matrix for m in moduli]
    if len(mats) != len(mesh.triangles):
        raise ValueError("need one modulus per element")
    return np.array(mats)


def strain_matrices(mesh: DomainMesh):
    """Per-element ``B`` (T, 3, 6) mapping nodal ``(ux, uy)`` to Mandel strain, and areas."""
    p = mesh.nodes[mesh.triangles]
    area = mesh.areas
    if np.any(area <= 1e-14 * max(1.0, np.abs(p).max()) ** 2):
        bad = int(np.argmin(area))
        raise SingularElement(f"element {bad} has zero area")
    x, y = p[:, :, 0], p[:, :, 1]
    # gradients of the barycentric shape functions
    b = np.stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]], axis=1) / (2 * area[:, None])
    c = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]], axis=1) / (2 * area[:, None])
    B = np.zeros((len(area), 3, 6))
    B[:, 0, 0::2] = b
    B[:, 1, 1::2] = c
    B[:, 2, 0::2] = c / SQRT2
    B[:, 2, 1::2] = b / SQRT2
    return B, area


def _element_blocks(B, area, L, lo, hi):
    return area[lo:hi, None, None] * np.einsum("eki,ekl,elj->eij", B[lo:hi], L[lo:hi], B[lo:hi])


def assemble_full_stiffness(mesh: DomainMesh, moduli, threads: int | None = None) -> sp.csr_matrix:
    """Global stiffness before Dirichlet elimination; dof ``2 i + k`` is component ``k`` of node ``i``."""
    B, area = strain_matrices(mesh)
    L = modulus_field(mesh, moduli)
    ne = len(area)
    threads = assembly_threads() if threads is None else max(1, threads)
    if threads == 1 or ne < 2000:
        Ke = _element_blocks(B, area, L, 0, ne)
    else:
        bounds = np.linspace(0, ne, threads + 1).astype(int)
        with ThreadPoolExecutor(threads) as pool:
            parts = pool.map(lambda ab: _element_blocks(B, area, L, *ab), zip(bounds[:-1], bounds[1:]))
            Ke = np.concatenate(list(parts))
    dofs = np.empty((ne, 6), dtype=np.int64)
    dofs[:, 0::2] = 2 * mesh.triangles
    dofs[:, 1::2] = 2 * mesh.triangles + 1
    rows = np.repeat(dofs, 6, axis=1).ravel()
    cols = np.tile(dofs, (1, 6)).ravel()
    n = 2 * mesh.n_nodes
    K = sp.coo_matrix((Ke.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    K.sum_duplicates()
    return K


def load_vector(mesh: DomainMesh, body_force=(0.0, 0.0), traction=None) -> np.ndarray:
    """Consistent P1 loads from a body force and tractions on ``T`` edges.

    ``body_force`` is a 2-vector or an ``(N, 2)`` nodal field (interpolated
    linearly).  ``traction`` is ``None``, a 2-vector applied on every ``T``
    edge, an ``(k, 2)`` array per ``T`` edge, or a callable ``(x, y) ->
    (tx, ty)`` evaluated at edge midpoints.
    """
    n = mesh.n_nodes
    f = np.zeros((n, 2))
    area = mesh.areas
    bf = np.asarray(body_force, dtype=float)
    if bf.shape == (2,):
        np.add.at(f, mesh.triangles.ravel(), np.repeat(area / 3.0, 3)[:, None] * bf)
    elif bf.shape == (n, 2):
        # exact integral of the product of two P1 functions: (1 + delta_ij) A / 12
        for e, tri in enumerate(mesh.triangles):
            vals = bf[tri]
            f[tri] += area[e] / 12.0 * (vals.sum(axis=0)[None, :] + vals)
    else:
        raise ValueError("body force must be a 2-vector or an (N, 2) nodal field")
    if traction is not None:
        edges = mesh.edges_with("T")
        x = mesh.nodes
        mid = 0.5 * (x[edges[:, 0]] + x[edges[:, 1]])
        if callable(traction):
            tv = np.array([traction(px, py) for px, py in mid], dtype=float).reshape(-1, 2)
        else:
            tv = np.asarray(traction, dtype=float)
            tv = np.broadcast_to(tv, (len(edges), 2)) if tv.shape == (2,) else tv
        if tv.shape != (len(edges), 2):
            raise ValueError("traction must provide one 2-vector per T edge")
        length = np.linalg.norm(x[edges[:, 1]] - x[edges[:, 0]], axis=1)
        for k in range(2):
            np.add.at(f, edges[:, k], 0.5 * length[:, None] * tv)
    return f.ravel()


@dataclass
class Stiffness:
    """Stiffness with the clamped dofs removed, plus its sparse factorisation."""

    K_full: sp.csr_matrix
    K: sp.csc_matrix
    free: np.ndarray  # free global dofs
    n_dofs: int

    def __post_init__(self):
        self._lu = splu(self.K)

    def solve(self, rhs):
        """Solve with a right-hand side on the free dofs (vector or columns)."""
        return self._lu.solve(np.asarray(rhs, dtype=float))

    def restrict(self, full):
        return np.asarray(full)[self.free]

    def extend(self, reduced):
        out = np.zeros(self.n_dofs) if np.ndim(reduced) == 1 else np.zeros((self.n_dofs,) + reduced.shape[1:])
        out[self.free] = reduced
        return out

    def solve_full(self, f_full):
        """Displacement on all dofs (zero on the clamped ones) for a full load vector."""
        return self.extend(self.solve(self.restrict(f_full)))


def assemble_stiffness(mesh: DomainMesh, moduli, threads: int | None = None) -> Stiffness:
    K_full = assemble_full_stiffness(mesh, moduli, threads)
    fixed = mesh.nodes_with("U")
    mask = np.ones(2 * mesh.n_nodes, dtype=bool)
    mask[2 * fixed] = False
    mask[2 * fixed + 1] = False
    free = np.flatnonzero(mask)
    K = K_full[free][:, free].tocsc()
    return Stiffness(K_full, K, free, 2 * mesh.n_nodes)
