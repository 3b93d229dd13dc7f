"""Closed oriented triangulated surfaces and flat-panel quadrature rules.

Meshes are stored with the conventional outward normal (pointing out of the
bounded region).  The transmission condition of the shell operator is written
with the opposite normal; `shell_normals` is the single signed adapter used
by the solver modules.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SurfaceMesh",
    "MeshError",
    "MeshReport",
    "QuadratureRule",
    "generate_sphere",
    "generate_ellipsoid",
    "load_mesh",
    "save_mesh",
    "validate_mesh",
    "shell_normals",
    "triangle_rule",
    "mesh_to_json",
    "mesh_from_json",
]


class MeshError(ValueError):
    """Structured mesh ingestion/validation failure naming the offending simplex."""


def _mesh_fingerprint(vertices: np.ndarray, panels: np.ndarray) -> str:
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(np.round(vertices, 12)).tobytes())
    h.update(np.ascontiguousarray(panels.astype(np.int64)).tobytes())
    return h.hexdigest()[:16]


@dataclass(frozen=True)
class SurfaceMesh:
    """Closed oriented triangulation with per-panel geometry.

    vertices : (V, 3) float array
    panels   : (F, 3) int array, CCW as seen from outside
    meta     : free-form provenance (shape name, radius, ...) used e.g. to
               recognize sphere meshes for partial-wave projections
    """

    vertices: np.ndarray
    panels: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.vertices, dtype=np.float64))
        p = np.ascontiguousarray(np.asarray(self.panels, dtype=np.int64))
        if p.ndim != 2 or p.shape[1] != 3:
            raise MeshError("panels must be an (F, 3) index array")
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "panels", p)
        a, b, c = v[p[:, 0]], v[p[:, 1]], v[p[:, 2]]
        cr = np.cross(b - a, c - a)
        areas2 = np.linalg.norm(cr, axis=1)
        if np.any(areas2 <= 0.0):
            bad = int(np.argmin(areas2))
            raise MeshError(f"degenerate panel {bad}: zero area")
        object.__setattr__(self, "centroids", (a + b + c) / 3.0)
        object.__setattr__(self, "normals", cr / areas2[:, None])
        object.__setattr__(self, "areas", 0.5 * areas2)
        edge = np.stack(
            [
                np.linalg.norm(b - a, axis=1),
                np.linalg.norm(c - b, axis=1),
                np.linalg.norm(a - c, axis=1),
            ],
            axis=0,
        )
        object.__setattr__(self, "diameters", edge.max(axis=0))
        object.__setattr__(self, "fingerprint", _mesh_fingerprint(v, p))
        for arr in (self.vertices, self.panels, self.centroids, self.normals,
                    self.areas, self.diameters):
            arr.setflags(write=False)

    @property
    def n_panels(self) -> int:
        return self.panels.shape[0]

    @property
    def h(self) -> float:
        """Largest panel diameter."""
        return float(self.diameters.max())

    @property
    def total_area(self) -> float:
        return float(self.areas.sum())

    @property
    def enclosed_volume(self) -> float:
        """Signed volume by the divergence theorem; positive for outward normals."""
        return float(np.sum(np.einsum("ij,ij->i", self.centroids, self.normals) * self.areas) / 3.0)

    def corners(self):
        """Vertex coordinate triples (a, b, c) per panel."""
        v, p = self.vertices, self.panels
        return v[p[:, 0]], v[p[:, 1]], v[p[:, 2]]


def shell_normals(mesh: SurfaceMesh) -> np.ndarray:
    """Normals as used in the transmission condition (pointing into the bounded region)."""
    return -mesh.normals


# ---------------------------------------------------------------------------
# builtin shapes

_ICO_R = (1.0 + np.sqrt(5.0)) / 2.0
_ICO_VERTS = np.array(
    [
        [-1, _ICO_R, 0], [1, _ICO_R, 0], [-1, -_ICO_R, 0], [1, -_ICO_R, 0],
        [0, -1, _ICO_R], [0, 1, _ICO_R], [0, -1, -_ICO_R], [0, 1, -_ICO_R],
        [_ICO_R, 0, -1], [_ICO_R, 0, 1], [-_ICO_R, 0, -1], [-_ICO_R, 0, 1],
    ],
    dtype=float,
)
_ICO_FACES = np.array(
    [
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ],
    dtype=np.int64,
)


def _subdivide(verts, faces):
    """One 4-to-1 loop of midpoint subdivision with shared-edge vertex reuse."""
    verts = list(map(np.asarray, verts))
    cache = {}

    def midpoint(i, j):
        key = (min(i, j), max(i, j))
        if key not in cache:
            cache[key] = len(verts)
            verts.append(0.5 * (verts[i] + verts[j]))
        return cache[key]

    out = []
    for a, b, c in faces:
        ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
        out.extend([(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)])
    return np.array(verts), np.array(out, dtype=np.int64)


def generate_sphere(radius: float = 1.0, subdiv: int = 2) -> SurfaceMesh:
    """Icosahedral sphere triangulation with 20 * 4^subdiv panels."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    if not (0 <= subdiv <= 6):
        raise ValueError("subdiv must be in 0..6")
    v, f = _ICO_VERTS.copy(), _ICO_FACES.copy()
    for _ in range(subdiv):
        v, f = _subdivide(v, f)
    v = v / np.linalg.norm(v, axis=1)[:, None] * radius
    return SurfaceMesh(v, f, meta={"shape": "sphere", "radius": float(radius), "subdiv": subdiv})


def generate_ellipsoid(a: float, b: float, c: float, subdiv: int = 2) -> SurfaceMesh:
    """Anisotropically scaled icosphere; normals follow from the scaled geometry."""
    for s in (a, b, c):
        if s <= 0:
            raise ValueError("semi-axes must be positive")
    base = generate_sphere(1.0, subdiv)
    v = base.vertices * np.array([a, b, c])
    return SurfaceMesh(v, base.panels,
                       meta={"shape": "ellipsoid", "semi_axes": [float(a), float(b), float(c)],
                             "subdiv": subdiv})


# ---------------------------------------------------------------------------
# file formats: OFF and OBJ (triangles only)

def _edge_incidence(panels: np.ndarray):
    counts = {}
    for fi, (a, b, c) in enumerate(panels):
        for i, j in ((a, b), (b, c), (c, a)):
            counts.setdefault((min(i, j), max(i, j)), []).append(fi)
    return counts


def _check_closed_manifold(panels: np.ndarray):
    for (i, j), faces in _edge_incidence(panels).items():
        if len(faces) > 2:
            raise MeshError(f"non-manifold edge ({i}, {j}) shared by panels {sorted(faces)}")
        if len(faces) < 2:
            raise MeshError(f"open boundary: edge ({i}, {j}) belongs only to panel {faces[0]}")


def load_mesh(path) -> SurfaceMesh:
    """Read an OFF or OBJ triangle mesh, validate it, and repair orientation.

    Raises MeshError for non-triangle faces, non-manifold edges, or an open
    boundary.  If the winding encloses negative volume all panels are flipped.
    """
    path = str(path)
    if path.lower().endswith(".off"):
        verts, faces = _read_off(path)
    elif path.lower().endswith(".obj"):
        verts, faces = _read_obj(path)
    else:
        raise MeshError(f"unsupported mesh format: {path}")
    _check_closed_manifold(faces)
    meta = {"source": path}
    radii = np.linalg.norm(verts - verts.mean(axis=0), axis=1)
    if radii.std() < 1e-9 * radii.mean():
        # recognize sphere meshes so channel projections stay available
        meta.update({"shape": "sphere", "radius": float(radii.mean())})
    mesh = SurfaceMesh(verts, faces, meta=meta)
    if mesh.enclosed_volume < 0.0:
        mesh = SurfaceMesh(verts, faces[:, ::-1], meta={**meta, "reoriented": True})
    return mesh


def _read_off(path):
    with open(path) as f:
        tokens = []
        for line in f:
            line = line.split("#", 1)[0].strip()
            if line:
                tokens.extend(line.split())
    if not tokens or tokens[0] != "OFF":
        raise MeshError(f"{path}: missing OFF header")
    nv, nf = int(tokens[1]), int(tokens[2])
    pos = 4
    verts = np.array(tokens[pos:pos + 3 * nv], dtype=float).reshape(nv, 3)
    pos += 3 * nv
    faces = []
    for fi in range(nf):
        cnt = int(tokens[pos])
        if cnt != 3:
            raise MeshError(f"non-triangle face {fi}: {cnt} vertices")
        faces.append([int(t) for t in tokens[pos + 1:pos + 4]])
        pos += 1 + cnt
    return verts, np.array(faces, dtype=np.int64)


def _read_obj(path):
    verts, faces = [], []
    with open(path) as f:
        for ln, line in enumerate(f, 1):
            parts = line.split("#", 1)[0].split()
            if not parts:
                continue
            if parts[0] == "v":
                verts.append([float(x) for x in parts[1:4]])
            elif parts[0] == "f":
                idx = [int(p.split("/")[0]) - 1 for p in parts[1:]]
                if len(idx) != 3:
                    raise MeshError(f"non-triangle face at line {ln}: {len(idx)} vertices")
                faces.append(idx)
    return np.array(verts, dtype=float), np.array(faces, dtype=np.int64)


def save_mesh(mesh: SurfaceMesh, path) -> None:
    path = str(path)
    if path.lower().endswith(".off"):
        with open(path, "w") as f:
            f.write("OFF\n")
            f.write(f"{len(mesh.vertices)} {mesh.n_panels} 0\n")
            for v in mesh.vertices:
                f.write(f"{float(v[0])!r} {float(v[1])!r} {float(v[2])!r}\n")
            for p in mesh.panels:
                f.write(f"3 {p[0]} {p[1]} {p[2]}\n")
    elif path.lower().endswith(".obj"):
        with open(path, "w") as f:
            for v in mesh.vertices:
                f.write(f"v {float(v[0])!r} {float(v[1])!r} {float(v[2])!r}\n")
            for p in mesh.panels:
                f.write(f"f {p[0] + 1} {p[1] + 1} {p[2] + 1}\n")
    else:
        raise MeshError(f"unsupported mesh format: {path}")


def mesh_to_json(mesh: SurfaceMesh) -> str:
    """Reproducibility dump: vertices, panels, normals, fingerprint."""
    return json.dumps(
        {
            "fingerprint": mesh.fingerprint,
            "meta": mesh.meta,
            "vertices": mesh.vertices.tolist(),
            "panels": mesh.panels.tolist(),
            "normals": mesh.normals.tolist(),
        }
    )


def mesh_from_json(text: str) -> SurfaceMesh:
    d = json.loads(text)
    return SurfaceMesh(np.array(d["vertices"]), np.array(d["panels"]), meta=d.get("meta", {}))


# ---------------------------------------------------------------------------
# validation report

@dataclass(frozen=True)
class MeshReport:
    n_vertices: int
    n_panels: int
    euler_characteristic: int
    closed: bool
    orientation_residual: float
    enclosed_volume: float
    total_area: float
    min_area: float
    max_area: float
    max_aspect_ratio: float
    h: float
    ok: bool

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def validate_mesh(mesh: SurfaceMesh) -> MeshReport:
    """Closedness, orientation, and panel-quality report (never raises)."""
    closed = True
    try:
        _check_closed_manifold(mesh.panels)
    except MeshError:
        closed = False
    n_edges = len(_edge_incidence(mesh.panels))
    euler = len(mesh.vertices) - n_edges + mesh.n_panels
    resid = float(np.linalg.norm((mesh.areas[:, None] * mesh.normals).sum(axis=0)))
    resid /= mesh.total_area
    a, b, c = mesh.corners()
    edges = np.stack([np.linalg.norm(b - a, axis=1),
                      np.linalg.norm(c - b, axis=1),
                      np.linalg.norm(a - c, axis=1)])
    # inradius r = 2A / perimeter; aspect = circumscribing edge / (2 sqrt(3) r)
    inr = 2.0 * mesh.areas / edges.sum(axis=0)
    aspect = float((edges.max(axis=0) / (2.0 * np.sqrt(3.0) * inr)).max())
    vol = mesh.enclosed_volume
    ok = closed and resid < 1e-10 and vol > 0.0
    return MeshReport(
        n_vertices=len(mesh.vertices),
        n_panels=mesh.n_panels,
        euler_characteristic=euler,
        closed=closed,
        orientation_residual=resid,
        enclosed_volume=vol,
        total_area=mesh.total_area,
        min_area=float(mesh.areas.min()),
        max_area=float(mesh.areas.max()),
        max_aspect_ratio=aspect,
        h=mesh.h,
        ok=ok,
    )


# ---------------------------------------------------------------------------
# flat-triangle quadrature (barycentric nodes, weights summing to 1)

_DUNAVANT = {
    1: (np.array([[1 / 3, 1 / 3, 1 / 3]]), np.array([1.0])),
    2: (
        np.array([[2 / 3, 1 / 6, 1 / 6], [1 / 6, 2 / 3, 1 / 6], [1 / 6, 1 / 6, 2 / 3]]),
        np.array([1 / 3, 1 / 3, 1 / 3]),
    ),
    3: (
        np.array(
            [
                [1 / 3, 1 / 3, 1 / 3],
                [0.6, 0.2, 0.2],
                [0.2, 0.6, 0.2],
                [0.2, 0.2, 0.6],
            ]
        ),
        np.array([-27 / 48, 25 / 48, 25 / 48, 25 / 48]),
    ),
}


def _dunavant6():
    g1 = (0.873821971016996, 0.063089014491502, 0.050844906370207)
    g2 = (0.501426509658179, 0.249286745170910, 0.116786275726379)
    g3a, g3b, w3 = 0.636502499121399, 0.310352451033785, 0.082851075618374
    pts, wts = [], []
    for a, b, w in (g1, g2):
        for perm in ((a, b, b), (b, a, b), (b, b, a)):
            pts.append(perm)
            wts.append(w)
    c3 = 1.0 - g3a - g3b
    for perm in (
        (g3a, g3b, c3), (g3a, c3, g3b), (g3b, g3a, c3),
        (g3b, c3, g3a), (c3, g3a, g3b), (c3, g3b, g3a),
    ):
        pts.append(perm)
        wts.append(w3)
    return np.array(pts), np.array(wts)


_DUNAVANT[6] = _dunavant6()


@dataclass(frozen=True)
class QuadratureRule:
    """Barycentric nodes/weights on the reference triangle; weights sum to 1."""

    order: int
    points: np.ndarray
    weights: np.ndarray


def triangle_rule(order: int) -> QuadratureRule:
    if order not in _DUNAVANT:
        raise ValueError(f"no triangle rule of order {order}; have {sorted(_DUNAVANT)}")
    pts, wts = _DUNAVANT[order]
    return QuadratureRule(order=order, points=pts.copy(), weights=wts.copy())
