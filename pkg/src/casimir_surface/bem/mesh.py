"""Closed triangulated surfaces and panel records."""

from dataclasses import dataclass, field, replace

import numpy as np


class MeshError(ValueError):
    """Raised for malformed or non-closed surface meshes."""


def _tangent_frame(normals):
    # t1 is the normal crossed with the coordinate axis least aligned with it
    axis = np.eye(3)[np.argmin(np.abs(normals), axis=1)]
    t1 = np.cross(normals, axis)
    t1 /= np.linalg.norm(t1, axis=1)[:, None]
    t2 = np.cross(normals, t1)
    return t1, t2


@dataclass
class BodyMesh:
    """Closed surface of one body.

    Attributes
    ----------
    centroids, normals : ndarray, shape (n, 3)
        Panel centroids and outward unit normals.
    areas : ndarray, shape (n,)
    t1, t2 : ndarray, shape (n, 3)
        Tangent vectors; ``(t1, t2, normal)`` is right-handed orthonormal.
    center : ndarray, shape (3,)
        Reference point moved along with the body in rigid motions.
    material_index : int or None
        Index into the list of body media; ``None`` means the position of
        the body in the list passed to the solvers.
    vertices : ndarray or None, shape (nv, 3)
    faces : ndarray or None, shape (n, 3)
        Triangle connectivity, counter-clockwise seen from outside.
        Meshes read from panel records carry no connectivity.
    """

    centroids: np.ndarray
    normals: np.ndarray
    areas: np.ndarray
    t1: np.ndarray
    t2: np.ndarray
    center: np.ndarray = field(default_factory=lambda: np.zeros(3))
    material_index: int = None
    vertices: np.ndarray = None
    faces: np.ndarray = None

    @property
    def n_panels(self):
        return len(self.areas)

    @property
    def total_area(self):
        return float(self.areas.sum())

    @property
    def has_connectivity(self):
        return self.faces is not None

    def closure_residual(self):
        """``|sum_k n_k A_k| / sum_k A_k``; zero for a closed surface."""
        return float(np.linalg.norm(self.normals.T @ self.areas) / self.total_area)

    def volume(self):
        """Enclosed volume from the divergence theorem."""
        return float(np.sum(self.areas * np.einsum("ij,ij->i", self.centroids, self.normals)) / 3.0)

    def translated(self, shift):
        """Copy rigidly moved by ``shift``."""
        shift = np.asarray(shift, dtype=float)
        return replace(
            self,
            centroids=self.centroids + shift,
            center=self.center + shift,
            vertices=None if self.vertices is None else self.vertices + shift,
        )

    def rotated(self, rotation, origin=(0.0, 0.0, 0.0)):
        """Copy rotated by the orthogonal matrix ``rotation`` about ``origin``."""
        R = np.asarray(rotation, dtype=float)
        o = np.asarray(origin, dtype=float)
        return replace(
            self,
            centroids=(self.centroids - o) @ R.T + o,
            normals=self.normals @ R.T,
            t1=self.t1 @ R.T,
            t2=self.t2 @ R.T,
            center=R @ (self.center - o) + o,
            vertices=None if self.vertices is None else (self.vertices - o) @ R.T + o,
        )

    def with_material(self, material_index):
        return replace(self, material_index=material_index)

    def check(self, tol=1e-6):
        """Validate the closed-surface and frame invariants."""
        if np.any(self.areas <= 0):
            raise MeshError("panel areas must be positive")
        if self.closure_residual() > tol:
            raise MeshError(f"surface is not closed: residual {self.closure_residual():.3e}")
        frame = np.stack([self.t1, self.t2, self.normals], axis=1)
        if np.abs(frame @ frame.transpose(0, 2, 1) - np.eye(3)).max() > 1e-12:
            raise MeshError("panel frames are not orthonormal")
        _, counts = np.unique(np.round(self.centroids, 12), axis=0, return_counts=True)
        if np.any(counts > 1):
            raise MeshError("duplicate panel centroids")
        return self


def from_triangles(vertices, faces, center=None, material_index=None):
    """Build a :class:`BodyMesh` from a triangle soup with shared vertices."""
    vertices = np.asarray(vertices, dtype=float)
    faces = np.asarray(faces, dtype=np.int64)
    p0, p1, p2 = (vertices[faces[:, k]] for k in range(3))
    cross = np.cross(p1 - p0, p2 - p0)
    twice_area = np.linalg.norm(cross, axis=1)
    normals = cross / twice_area[:, None]
    t1, t2 = _tangent_frame(normals)
    if center is None:
        center = vertices.mean(axis=0)
    return BodyMesh(
        centroids=(p0 + p1 + p2) / 3.0,
        normals=normals,
        areas=0.5 * twice_area,
        t1=t1,
        t2=t2,
        center=np.asarray(center, dtype=float),
        material_index=material_index,
        vertices=vertices,
        faces=faces,
    )


def from_panels(centroids, normals, areas, center=None, material_index=None):
    """Build a connectivity-free :class:`BodyMesh` from panel records."""
    centroids = np.asarray(centroids, dtype=float)
    normals = np.asarray(normals, dtype=float)
    normals = normals / np.linalg.norm(normals, axis=1)[:, None]
    t1, t2 = _tangent_frame(normals)
    if center is None:
        center = centroids.mean(axis=0)
    return BodyMesh(
        centroids=centroids,
        normals=normals,
        areas=np.asarray(areas, dtype=float),
        t1=t1,
        t2=t2,
        center=np.asarray(center, dtype=float),
        material_index=material_index,
    )


def _icosahedron():
    t = (1.0 + np.sqrt(5.0)) / 2.0
    v = np.array(
        [
            [-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
            [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
            [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1],
        ],
        dtype=float,
    )
    f = np.array(
        [
            [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
            [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
            [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
            [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
        ]
    )
    return v / np.linalg.norm(v, axis=1)[:, None], f


def _subdivide(vertices, faces):
    verts = [tuple(v) for v in vertices]
    cache = {}

    def midpoint(a, b):
        key = (min(a, b), max(a, b))
        if key not in cache:
            m = vertices[a] + vertices[b]
            verts.append(tuple(m / np.linalg.norm(m)))
            cache[key] = len(verts) - 1
        return cache[key]

    new_faces = []
    for a, b, c in faces:
        ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
        new_faces += [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
    return np.asarray(verts), np.asarray(new_faces)


def make_sphere_mesh(radius=1.0, refinement=2, center=(0.0, 0.0, 0.0), match_volume=True, material_index=None):
    """Icosphere with ``20 * 4**refinement`` triangles.

    Parameters
    ----------
    radius : float
    refinement : int
        Number of midpoint subdivisions of the icosahedron.
    center : 3-vector
    match_volume : bool
        Scale the vertices so that the polyhedron encloses the volume of the
        exact sphere.  Flat facets otherwise lose volume and area at
        second order in the facet size.

    Returns
    -------
    BodyMesh
    """
    if refinement < 0:
        raise ValueError("refinement must be >= 0")
    v, f = _icosahedron()
    for _ in range(refinement):
        v, f = _subdivide(v, f)
    if match_volume:
        unit = from_triangles(v, f, center=np.zeros(3))
        v = v * ((4.0 * np.pi / 3.0) / unit.volume()) ** (1.0 / 3.0)
    center = np.asarray(center, dtype=float)
    return from_triangles(radius * v + center, f, center=center, material_index=material_index)


def _grid_face(origin, u, v, nu, nv):
    # regular nu x nv grid on the parallelogram origin + s u + t v
    s = np.linspace(0.0, 1.0, nu + 1)
    t = np.linspace(0.0, 1.0, nv + 1)
    S, T = np.meshgrid(s, t, indexing="ij")
    pts = origin + S[..., None] * u + T[..., None] * v
    idx = np.arange((nu + 1) * (nv + 1)).reshape(nu + 1, nv + 1)
    a, b = idx[:-1, :-1].ravel(), idx[1:, :-1].ravel()
    c, d = idx[1:, 1:].ravel(), idx[:-1, 1:].ravel()
    # alternate the diagonal to avoid a preferred direction
    flip = ((np.add.outer(np.arange(nu), np.arange(nv))) % 2).ravel().astype(bool)
    tri1 = np.where(flip[:, None], np.stack([a, b, d], 1), np.stack([a, b, c], 1))
    tri2 = np.where(flip[:, None], np.stack([b, c, d], 1), np.stack([a, c, d], 1))
    return pts.reshape(-1, 3), np.concatenate([tri1, tri2])


def make_box_mesh(size, divisions, center=(0.0, 0.0, 0.0), material_index=None):
    """Triangulated rectangular box.

    Parameters
    ----------
    size : 3-vector
        Edge lengths ``(Lx, Ly, Lz)``.
    divisions : 3 ints
        Number of grid cells along each edge.
    """
    L = np.asarray(size, dtype=float)
    n = [int(k) for k in divisions]
    lo = -0.5 * L
    ex, ey, ez = np.eye(3) * L[:, None]
    # each face: origin, u, v with u x v pointing outward
    faces_spec = [
        (lo, ey, ex, n[1], n[0]),  # z = lo
        (lo + ez, ex, ey, n[0], n[1]),  # z = hi
        (lo, ex, ez, n[0], n[2]),  # y = lo
        (lo + ey, ez, ex, n[2], n[0]),  # y = hi
        (lo, ez, ey, n[2], n[1]),  # x = lo
        (lo + ex, ey, ez, n[1], n[2]),  # x = hi
    ]
    pts, tris, offset = [], [], 0
    for origin, u, v, nu, nv in faces_spec:
        p, t = _grid_face(origin, u, v, nu, nv)
        pts.append(p)
        tris.append(t + offset)
        offset += len(p)
    pts = np.concatenate(pts)
    tris = np.concatenate(tris)
    # merge duplicate vertices along box edges
    keys = np.round(pts / L.max(), 10)
    uniq, inverse = np.unique(keys, axis=0, return_inverse=True)
    merged = np.zeros((len(uniq), 3))
    merged[inverse.ravel()] = pts
    center = np.asarray(center, dtype=float)
    return from_triangles(merged + center, inverse.ravel()[tris], center=center, material_index=material_index)


def plate_divisions(side, thickness, refinement, base=2):
    """Grid divisions of a square plate for a given refinement level.

    The in-plane cell count grows linearly with the refinement level,
    ``base * (refinement + 2)`` cells across the side; the thickness gets
    cells of comparable size, at least one.
    """
    n = base * (refinement + 2)
    nz = max(1, int(round(thickness / (side / n))))
    return (n, n, nz)


def make_plate_mesh(side, thickness, refinement=1, center=(0.0, 0.0, 0.0), base=2, material_index=None):
    """Square plate ``side x side x thickness`` with faces normal to z."""
    return make_box_mesh(
        (side, side, thickness),
        plate_divisions(side, thickness, refinement, base),
        center=center,
        material_index=material_index,
    )


def read_panel_file(path, center=None, material_index=None):
    """Read a mesh from a flat text file (``#`` starts a comment).

    Two record types are accepted:

    * panel records ``cx cy cz nx ny nz area``, giving a panel-only mesh;
    * ``v x y z`` vertex and ``f i j k`` triangle records (1-based vertex
      indices, counter-clockwise seen from outside), giving a triangle mesh
      with the connectivity the surface operators need.

    A file must use one type only.
    """
    panels, verts, faces = [], [], []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            try:
                if parts[0] == "v" and len(parts) == 4:
                    verts.append([float(p) for p in parts[1:]])
                elif parts[0] == "f" and len(parts) == 4:
                    faces.append([int(p.split("/")[0]) - 1 for p in parts[1:]])
                elif len(parts) == 7:
                    panels.append([float(p) for p in parts])
                else:
                    raise ValueError
            except ValueError:
                raise MeshError(f"{path}:{lineno}: expected 'v x y z', 'f i j k' or 7 panel columns") from None
    if panels and (verts or faces):
        raise MeshError(f"{path}: panel records cannot be mixed with v/f records")
    if faces:
        faces = np.asarray(faces)
        if faces.min() < 0 or faces.max() >= len(verts):
            raise MeshError(f"{path}: face refers to a missing vertex")
        return from_triangles(np.asarray(verts), faces, center=center, material_index=material_index)
    if not panels:
        raise MeshError(f"{path}: no panel records")
    data = np.asarray(panels)
    return from_panels(data[:, :3], data[:, 3:6], data[:, 6], center=center, material_index=material_index)


def write_panel_file(mesh, path, triangles=None):
    """Write a mesh readable by :func:`read_panel_file`.

    Triangle meshes are written as ``v``/``f`` records unless
    ``triangles=False``; panel-only meshes as panel records.
    """
    if triangles is None:
        triangles = mesh.has_connectivity
    if triangles:
        with open(path, "w") as fh:
            fh.write("# vertices and triangles\n")
            for v in mesh.vertices:
                fh.write("v %.17g %.17g %.17g\n" % tuple(v))
            for f in mesh.faces:
                fh.write("f %d %d %d\n" % tuple(f + 1))
        return
    data = np.column_stack([mesh.centroids, mesh.normals, mesh.areas])
    np.savetxt(path, data, fmt="%.17g", header="cx cy cz nx ny nz area")
