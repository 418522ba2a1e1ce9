"""Triangle meshes with tagged boundary edges.

Tags: ``U`` (clamped), ``T`` (prescribed traction) and ``C`` (contact).
Boundary edges are stored counter-clockwise, i.e. with the body on the left,
so the outward normal of the edge ``(a, b)`` is ``(dy, -dx) / |ab|``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

TAGS = ("U", "T", "C")


class MeshError(ValueError):
    pass


@dataclass
class ContactChain:
    """Ordered contact nodes with their frame and lumped boundary weights."""

    nodes: np.ndarray  # global node ids
    s: np.ndarray  # arc length along the chain
    normals: np.ndarray  # (m, 2) outward unit normals
    tangents: np.ndarray  # (m, 2), tangent = (n_y, -n_x)
    weights: np.ndarray  # lumped edge-length weights
    edges: np.ndarray  # (k, 2) local indices of contact edges

    @property
    def size(self) -> int:
        return self.nodes.size

    @property
    def tangent_angles(self) -> np.ndarray:
        return np.arctan2(self.tangents[:, 1], self.tangents[:, 0])


@dataclass
class DomainMesh:
    nodes: np.ndarray
    triangles: np.ndarray
    boundary_edges: np.ndarray  # (k, 2) node ids
    edge_tags: np.ndarray  # (k,) strings
    contact: ContactChain = field(init=False, repr=False)

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=float)
        self.triangles = np.asarray(self.triangles, dtype=np.int64)
        if self.nodes.ndim != 2 or self.nodes.shape[1] != 2:
            raise MeshError("nodes must be an (N, 2) array")
        if self.triangles.ndim != 2 or self.triangles.shape[1] != 3:
            raise MeshError("triangles must be a (T, 3) array")
        if self.triangles.min() < 0 or self.triangles.max() >= len(self.nodes):
            raise MeshError("triangle references a missing node")
        self._orient_triangles()
        edges = np.asarray(self.boundary_edges, dtype=np.int64).reshape(-1, 2)
        tags = np.asarray(self.edge_tags, dtype=object)
        self.boundary_edges, self.edge_tags = self._complete_boundary(edges, tags)
        self._validate()
        self.contact = self._build_contact()

    # -- construction helpers -------------------------------------------------

    def _orient_triangles(self):
        p = self.nodes[self.triangles]
        area2 = (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1]) - (
            p[:, 2, 0] - p[:, 0, 0]
        ) * (p[:, 1, 1] - p[:, 0, 1])
        flip = area2 < 0
        self.triangles[flip] = self.triangles[flip][:, [0, 2, 1]]

    def _directed_boundary(self):
        """Map undirected boundary edge -> counter-clockwise directed edge."""
        t = self.triangles
        directed = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        key = np.sort(directed, axis=1)
        uniq, inv, counts = np.unique(key, axis=0, return_inverse=True, return_counts=True)
        inv = inv.ravel()
        if counts.max() > 2:
            raise MeshError("non-manifold mesh: an edge is shared by more than two triangles")
        out = {}
        for d, k in zip(directed, inv):
            if counts[k] == 1:
                out[(int(uniq[k, 0]), int(uniq[k, 1]))] = (int(d[0]), int(d[1]))
        return out

    def _complete_boundary(self, edges, tags):
        boundary = self._directed_boundary()
        tagged = {}
        for (a, b), tag in zip(edges, tags):
            tag = str(tag)
            if tag not in TAGS:
                raise MeshError(f"unknown boundary tag {tag!r}")
            key = (min(a, b), max(a, b))
            if key not in boundary:
                raise MeshError(f"edge ({a}, {b}) is not on the boundary")
            if key in tagged and tagged[key] != tag:
                raise MeshError(f"edge ({a}, {b}) carries two tags")
            tagged[key] = tag
        keys = sorted(boundary)
        out_edges = np.array([boundary[k] for k in keys], dtype=np.int64).reshape(-1, 2)
        out_tags = np.array([tagged.get(k, "T") for k in keys], dtype=object)
        return out_edges, out_tags

    def _validate(self):
        u_nodes = set(self.edges_with("U").ravel().tolist())
        c_nodes = set(self.edges_with("C").ravel().tolist())
        if not u_nodes:
            raise MeshError("the clamped boundary must contain at least one edge")
        if not c_nodes:
            raise MeshError("the contact boundary must contain at least one edge")
        shared = u_nodes & c_nodes
        if shared:
            raise MeshError(f"clamped and contact boundaries share nodes {sorted(shared)[:5]}")

    def _build_contact(self) -> ContactChain:
        edges = self.edges_with("C")
        succ = {int(a): int(b) for a, b in edges}
        pred = {int(b): int(a) for a, b in edges}
        if len(succ) != len(edges) or len(pred) != len(edges):
            raise MeshError("contact edges do not form simple chains")
        starts = sorted(a for a in succ if a not in pred)
        order = []
        seen = set()
        for s0 in starts:
            node = s0
            order.append(node)
            seen.add(node)
            while node in succ:
                node = succ[node]
                order.append(node)
                seen.add(node)
        if len(seen) != len(set(succ) | set(pred)):
            raise MeshError("closed contact loops are not supported")
        # traverse chains against the counter-clockwise direction so that the
        # arc length grows along the tangent (n_y, -n_x)
        order = order[::-1]
        nodes = np.array(order, dtype=np.int64)
        local = {int(g): i for i, g in enumerate(nodes)}
        loc_edges = np.array([[local[int(a)], local[int(b)]] for a, b in edges], dtype=np.int64)
        x = self.nodes
        m = nodes.size
        normals = np.zeros((m, 2))
        weights = np.zeros(m)
        for a, b in edges:
            d = x[b] - x[a]
            L = np.hypot(*d)
            nrm = np.array([d[1], -d[0]])  # length-weighted outward normal
            for v in (a, b):
                normals[local[int(v)]] += nrm
                weights[local[int(v)]] += 0.5 * L
        normals /= np.linalg.norm(normals, axis=1)[:, None]
        tangents = np.column_stack([normals[:, 1], -normals[:, 0]])
        s = np.zeros(m)
        backward = {(int(b), int(a)) for a, b in edges}
        for i in range(1, m):
            if (int(nodes[i - 1]), int(nodes[i])) in backward:
                s[i] = s[i - 1] + np.hypot(*(x[nodes[i]] - x[nodes[i - 1]]))
            else:
                s[i] = s[i - 1]
        return ContactChain(nodes, s, normals, tangents, weights, loc_edges)

    # -- queries ------------------------------------------------------------

    def edges_with(self, tag: str) -> np.ndarray:
        return self.boundary_edges[self.edge_tags == tag]

    def nodes_with(self, tag: str) -> np.ndarray:
        return np.unique(self.edges_with(tag).ravel())

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def areas(self) -> np.ndarray:
        p = self.nodes[self.triangles]
        return 0.5 * (
            (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
            - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1])
        )

    def node_elements(self, node_ids) -> list:
        """Element indices adjacent to each node in ``node_ids``."""
        lookup = {int(n): [] for n in node_ids}
        for e, tri in enumerate(self.triangles):
            for v in tri:
                if int(v) in lookup:
                    lookup[int(v)].append(e)
        return [lookup[int(n)] for n in node_ids]

    def to_json(self) -> dict:
        return {
            "nodes": self.nodes.tolist(),
            "triangles": self.triangles.tolist(),
            "boundary_edges": [
                {"n1": int(a), "n2": int(b), "tag": str(t)}
                for (a, b), t in zip(self.boundary_edges, self.edge_tags)
            ],
        }


def mesh_from_json(obj: dict) -> DomainMesh:
    """``{"nodes": [[x, y], ...], "triangles": [[i, j, k], ...], "boundary_edges": [{"n1", "n2", "tag"}]}``."""
    try:
        nodes = obj["nodes"]
        tris = obj["triangles"]
        be = obj.get("boundary_edges", [])
        edges = [(int(e["n1"]), int(e["n2"])) for e in be]
        tags = [str(e["tag"]) for e in be]
    except (KeyError, TypeError) as exc:
        raise MeshError(f"malformed mesh JSON: {exc}") from exc
    return DomainMesh(np.asarray(nodes, dtype=float)[:, :2], tris, edges, tags)


def read_gmsh22(path, tag_map: dict | None = None) -> DomainMesh:
    """Read a Gmsh 2.2 ASCII file: triangles (type 2) and tagged lines (type 1).

    Line physical groups are mapped to boundary tags either by ``tag_map``
    (physical id or name -> tag) or by a physical name equal to ``U``, ``T``
    or ``C``.
    """
    text = Path(path).read_text().split("\n")
    sections = {}
    i = 0
    while i < len(text):
        line = text[i].strip()
        if line.startswith("$") and not line.startswith("$End"):
            name = line[1:]
            j = i + 1
            while j < len(text) and text[j].strip() != f"$End{name}":
                j += 1
            if j >= len(text):
                raise MeshError(f"unterminated section ${name}")
            sections[name] = [t.strip() for t in text[i + 1:j] if t.strip()]
            i = j
        i += 1
    fmt = sections.get("MeshFormat")
    if not fmt or not fmt[0].split()[0].startswith("2"):
        raise MeshError("only the Gmsh 2.x ASCII format is supported")
    if fmt[0].split()[1] != "0":
        raise MeshError("binary Gmsh files are not supported")
    names = {}
    for row in sections.get("PhysicalNames", [])[1:]:
        dim, num, name = row.split(maxsplit=2)
        names[int(num)] = name.strip('"')
    tag_map = dict(tag_map or {})

    node_rows = sections["Nodes"][1:]
    ids = {}
    coords = []
    for k, row in enumerate(node_rows):
        parts = row.split()
        ids[int(parts[0])] = k
        coords.append([float(parts[1]), float(parts[2])])
    tris, edges, tags = [], [], []
    for row in sections["Elements"][1:]:
        parts = [int(v) for v in row.split()]
        etype, ntags = parts[1], parts[2]
        phys = parts[3] if ntags > 0 else 0
        verts = [ids[v] for v in parts[3 + ntags:]]
        if etype == 2:
            tris.append(verts)
        elif etype == 1:
            tag = tag_map.get(phys, tag_map.get(names.get(phys, ""), names.get(phys)))
            if tag is None:
                raise MeshError(f"line element with unmapped physical group {phys}")
            edges.append(verts)
            tags.append(tag)
    return DomainMesh(np.array(coords), np.array(tris), edges, tags)


def load_mesh(path, tag_map=None) -> DomainMesh:
    path = Path(path)
    if path.suffix == ".msh":
        return read_gmsh22(path, tag_map)
    with open(path) as fh:
        return mesh_from_json(json.load(fh))


def rectangle_mesh(width: float, height: float, nx: int, ny: int, tagger=None,
                   origin=(0.0, 0.0)) -> DomainMesh:
    """Structured triangulation of ``[x0, x0 + width] x [y0, y0 + height]``.

    ``tagger(xm, ym, side)`` returns the tag of the boundary edge with midpoint
    ``(xm, ym)`` on ``side`` in ``{"bottom", "right", "top", "left"}``.  The
    default clamps the top, makes the bottom the contact boundary and leaves
    both sides traction-free.
    """
    if tagger is None:
        tagger = lambda xm, ym, side: {"top": "U", "bottom": "C"}.get(side, "T")  # noqa: E731
    x0, y0 = origin
    xs = x0 + np.linspace(0.0, width, nx + 1)
    ys = y0 + np.linspace(0.0, height, ny + 1)
    X, Y = np.meshgrid(xs, ys)
    nodes = np.column_stack([X.ravel(), Y.ravel()])
    idx = lambda i, j: j * (nx + 1) + i  # noqa: E731
    tris = []
    for j in range(ny):
        for i in range(nx):
            a, b, c, d = idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)
            # alternate the diagonal to avoid a directional bias
            if (i + j) % 2 == 0:
                tris += [[a, b, c], [a, c, d]]
            else:
                tris += [[a, b, d], [b, c, d]]
    edges, tags = [], []
    for i in range(nx):
        a, b = idx(i, 0), idx(i + 1, 0)
        edges.append((a, b))
        tags.append(tagger(0.5 * (xs[i] + xs[i + 1]), ys[0], "bottom"))
        a, b = idx(i + 1, ny), idx(i, ny)
        edges.append((a, b))
        tags.append(tagger(0.5 * (xs[i] + xs[i + 1]), ys[-1], "top"))
    for j in range(ny):
        a, b = idx(nx, j), idx(nx, j + 1)
        edges.append((a, b))
        tags.append(tagger(xs[-1], 0.5 * (ys[j] + ys[j + 1]), "right"))
        a, b = idx(0, j + 1), idx(0, j)
        edges.append((a, b))
        tags.append(tagger(xs[0], 0.5 * (ys[j] + ys[j + 1]), "left"))
    return DomainMesh(nodes, np.array(tris), edges, tags)
