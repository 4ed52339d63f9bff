"""Discretized surface operators on RWG bases.

Unknowns of one body are the electric and magnetic surface currents, each
expanded in the RWG functions of the body mesh.  For a homogeneous medium
with response ``(eps, mu)`` and the Galerkin integrals ``D, F, C`` of its
screened kernel, the tangential blocks of the dyadic Green function are

    EE = -D/eps - mu kappa^2 F        EH = +kappa C
    HE = -kappa C                      HH = -D/mu - eps kappa^2 F

The body operator sums the inside and outside media; the coupling between
two bodies uses the outer medium alone.  The Hamiltonian representation
doubles the unknowns to the pair (K, K') and uses the blocks ``L_r`` and
``M_rr'`` built from the same integrals.
"""

from dataclasses import dataclass, field

import numpy as np

from ..materials import MediumAssignment
from .mesh import MeshError
from .rwg import QuadratureOptions, RWGBasis, galerkin_integrals, _near_pairs


class AssemblyError(RuntimeError):
    """Raised when an assembled kernel contains non-finite entries."""


@dataclass
class IndexMap:
    """Row or column layout of a kernel matrix.

    Each body contributes ``n_fields`` consecutive blocks of ``sizes[r]``
    rows (one block per current type).
    """

    sizes: list
    n_fields: int = 2

    @property
    def body_offsets(self):
        return np.concatenate([[0], np.cumsum([self.n_fields * s for s in self.sizes])]).astype(int)

    @property
    def size(self):
        return int(self.body_offsets[-1])

    def body(self, r):
        o = self.body_offsets
        return slice(int(o[r]), int(o[r + 1]))

    def block(self, r, f):
        start = int(self.body_offsets[r]) + f * self.sizes[r]
        return slice(start, start + self.sizes[r])

    def locate(self, index):
        """``(body, field, basis function)`` of a global index."""
        r = int(np.searchsorted(self.body_offsets, index, side="right") - 1)
        local = index - self.body_offsets[r]
        return r, int(local // self.sizes[r]), int(local % self.sizes[r])


@dataclass
class KernelMatrix:
    """Dense real matrix with its row and column index maps."""

    data: np.ndarray
    rows: IndexMap
    cols: IndexMap = None

    def __post_init__(self):
        if self.cols is None:
            self.cols = self.rows
        if self.data.shape != (self.rows.size, self.cols.size):
            raise ValueError("matrix shape does not match index maps")
        if not np.all(np.isfinite(self.data)):
            i, j = np.argwhere(~np.isfinite(self.data))[0]
            raise AssemblyError(
                f"non-finite entry at row {self.rows.locate(i)} column {self.cols.locate(j)} (body, field, edge)"
            )

    def block(self, r, s):
        return self.data[self.rows.body(r), self.cols.body(s)]


def field_blocks(I, eps, mu, kappa):
    """Electric/magnetic 2x2 block matrix of one medium from its integrals."""
    k2 = kappa * kappa
    EE = -I.D / eps - mu * k2 * I.F
    HH = -I.D / mu - eps * k2 * I.F
    return np.block([[EE, kappa * I.C], [-kappa * I.C, HH]])


def hamiltonian_inner_blocks(I, eps, mu, kappa):
    """``L_r`` of one body on the unknowns ``(K, K')`` from inner integrals."""
    k2 = eps * mu * kappa * kappa
    return np.block([[-I.D - k2 * I.F, -I.C], [-I.C, I.D / k2 + I.F]]) / mu


def hamiltonian_outer_blocks(I, eps0, mu0, mu_r, mu_s, kappa):
    """``M_rs`` between bodies ``r`` and ``s`` from outer-medium integrals."""
    k2 = eps0 * mu0 * kappa * kappa
    return np.block(
        [
            [-I.D - k2 * I.F, -(mu0 / mu_s) * I.C],
            [-(mu0 / mu_r) * I.C, mu0 * I.D / (eps0 * mu_r * mu_s * kappa * kappa) + mu0 * mu0 * I.F / (mu_r * mu_s)],
        ]
    ) / mu0


def _shape_key(mesh):
    return (mesh.faces.tobytes(), np.round(mesh.vertices - mesh.center, 14).tobytes())


def winding_number(points, basis):
    """Solid angle of a closed mesh seen from each point, over ``4 pi``.

    About 1 for points enclosed by the surface and 0 outside.
    """
    V = basis.tri_vertices
    out = np.zeros(len(points))
    for start in range(0, len(points), 256):
        a, b, c = (V[None, :, k, :] - points[start : start + 256, None, :] for k in range(3))
        la, lb, lc = (np.linalg.norm(x, axis=-1) for x in (a, b, c))
        det = np.einsum("ptx,ptx->pt", a, np.cross(b, c))
        den = (
            la * lb * lc
            + np.einsum("ptx,ptx->pt", a, b) * lc
            + np.einsum("ptx,ptx->pt", b, c) * la
            + np.einsum("ptx,ptx->pt", c, a) * lb
        )
        out[start : start + 256] = 2.0 * np.arctan2(det, den).sum(axis=1) / (4.0 * np.pi)
    return out


def _check_disjoint(a, b, rel=1e-6):
    # surfaces touch when sample points of the two meshes (nearly) coincide
    pa = a.points(4)[0].reshape(-1, 3)
    pb = b.points(4)[0].reshape(-1, 3)
    scale = max(np.ptp(a.mesh.vertices, axis=0).max(), np.ptp(b.mesh.vertices, axis=0).max())
    best = np.inf
    for start in range(0, len(pa), 1024):
        d = np.linalg.norm(pa[start : start + 1024, None, :] - pb[None, :, :], axis=2)
        best = min(best, d.min())
    if best <= rel * scale:
        raise MeshError(f"bodies touch or intersect (closest sample points {best:.3e} apart)")
    # surfaces cross when one body has vertices both inside and outside the other;
    # a body entirely enclosed by another is accepted
    for x, y in ((a, b), (b, a)):
        inside = winding_number(x.mesh.vertices, y) > 0.5
        if inside.any() and not inside.all():
            raise MeshError("body surfaces intersect")


@dataclass
class SurfaceSystem:
    """Bodies, media and quadrature settings, with cached Galerkin integrals.

    Self integrals are cached by body shape, so congruent bodies related by
    a translation share them.  Cross integrals are cached per body pair and
    ``kappa``.

    Parameters
    ----------
    bodies : list of BodyMesh
    media : MediumAssignment
    options : QuadratureOptions, optional
    near : dict, optional
        Frozen near-pair masks keyed by ``(r, s)``.
    """

    bodies: list
    media: MediumAssignment
    options: QuadratureOptions = None
    near: dict = None
    _bases: list = field(default=None, repr=False)
    _self: dict = field(default_factory=dict, repr=False)
    _cross: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self.bodies:
            raise ValueError("at least one body is required")
        self.options = self.options or QuadratureOptions()
        self.near = dict(self.near or {})
        self._bases = [RWGBasis(b) for b in self.bodies]
        for r in range(len(self.bodies)):
            self.material_of(r)
            for s in range(r):
                _check_disjoint(self._bases[r], self._bases[s])

    @property
    def bases(self):
        return self._bases

    @property
    def n_bodies(self):
        return len(self.bodies)

    def material_of(self, r):
        idx = self.bodies[r].material_index
        idx = r if idx is None else idx
        if not 0 <= idx < len(self.media.bodies):
            raise ValueError(f"body {r} refers to missing medium {idx}")
        return self.media.bodies[idx]

    def response(self, r, xi):
        """``(eps, mu)`` inside body ``r`` (``r = None`` for the outer medium)."""
        from ..materials import permeability, permittivity

        model = self.media.outer if r is None else self.material_of(r)
        return permittivity(model, xi), permeability(model, xi)

    def near_mask(self, r, s):
        key = (r, s)
        if key not in self.near:
            self.near[key] = _near_pairs(self._bases[r], self._bases[s], self.options.near_factor)
        return self.near[key]

    def self_integrals(self, r, k):
        key = (_shape_key(self.bodies[r]), float(k))
        if key not in self._self:
            b = self._bases[r]
            self._self[key] = galerkin_integrals(b, b, k, self.options, self.near_mask(r, r), symmetric=True)
        return self._self[key]

    def cross_integrals(self, r, s, k):
        if (s, r, float(k)) in self._cross:
            return self._cross[(s, r, float(k))].transpose()
        key = (r, s, float(k))
        if key not in self._cross:
            self._cross[key] = galerkin_integrals(
                self._bases[r], self._bases[s], k, self.options, self.near_mask(r, s)
            )
        return self._cross[key]

    def clear_cache(self):
        """Drop cached integrals (they are specific to one frequency)."""
        self._self.clear()
        self._cross.clear()

    def index_map(self, n_fields=2):
        return IndexMap([b.n for b in self._bases], n_fields)

    # -- surface (Lagrange) representation --------------------------------

    def body_operator(self, r, kappa):
        """``M_r``: inside plus outside field blocks on body ``r``."""
        _require_positive(kappa)
        eps0, mu0 = self.response(None, kappa)
        eps, mu = self.response(r, kappa)
        out = field_blocks(self.self_integrals(r, kappa * np.sqrt(eps0 * mu0)), eps0, mu0, kappa)
        inn = field_blocks(self.self_integrals(r, kappa * np.sqrt(eps * mu)), eps, mu, kappa)
        return out + inn

    def outer_self_operator(self, r, kappa):
        """Outer-medium part of ``M_r`` alone."""
        eps0, mu0 = self.response(None, kappa)
        return field_blocks(self.self_integrals(r, kappa * np.sqrt(eps0 * mu0)), eps0, mu0, kappa)

    def coupling(self, r, s, kappa):
        """``G_rs``: outer-medium field blocks between bodies ``r`` and ``s``."""
        _require_positive(kappa)
        eps0, mu0 = self.response(None, kappa)
        return field_blocks(self.cross_integrals(r, s, kappa * np.sqrt(eps0 * mu0)), eps0, mu0, kappa)

    def full_operator(self, kappa):
        """The complete block matrix ``M`` as a KernelMatrix."""
        imap = self.index_map()
        M = np.zeros((imap.size, imap.size))
        for r in range(self.n_bodies):
            M[imap.body(r), imap.body(r)] = self.body_operator(r, kappa)
            for s in range(self.n_bodies):
                if s != r:
                    M[imap.body(r), imap.body(s)] = self.coupling(r, s, kappa)
        return KernelMatrix(M, imap)

    # -- Hamiltonian representation ---------------------------------------

    def hamiltonian_diagonal(self, r, kappa):
        """``N_rr = L_r + M_rr`` on the unknowns ``(K, K')`` of body ``r``."""
        _require_positive(kappa)
        eps0, mu0 = self.response(None, kappa)
        eps, mu = self.response(r, kappa)
        L = hamiltonian_inner_blocks(self.self_integrals(r, kappa * np.sqrt(eps * mu)), eps, mu, kappa)
        I0 = self.self_integrals(r, kappa * np.sqrt(eps0 * mu0))
        return L + hamiltonian_outer_blocks(I0, eps0, mu0, mu, mu, kappa)

    def hamiltonian_coupling(self, r, s, kappa):
        """``N_rs = M_rs`` for ``r != s``."""
        _require_positive(kappa)
        eps0, mu0 = self.response(None, kappa)
        mu_r = self.response(r, kappa)[1]
        mu_s = self.response(s, kappa)[1]
        I0 = self.cross_integrals(r, s, kappa * np.sqrt(eps0 * mu0))
        return hamiltonian_outer_blocks(I0, eps0, mu0, mu_r, mu_s, kappa)

    def full_hamiltonian(self, kappa):
        imap = self.index_map()
        N = np.zeros((imap.size, imap.size))
        for r in range(self.n_bodies):
            N[imap.body(r), imap.body(r)] = self.hamiltonian_diagonal(r, kappa)
            for s in range(self.n_bodies):
                if s != r:
                    N[imap.body(r), imap.body(s)] = self.hamiltonian_coupling(r, s, kappa)
        return KernelMatrix(N, imap)


def _require_positive(kappa):
    if not kappa > 0:
        raise ValueError("surface operators require kappa > 0")


def reciprocity_sign(n):
    """Diagonal of ``S = diag(1, -1)`` over the electric/magnetic blocks of size ``n``."""
    return np.concatenate([np.ones(n), -np.ones(n)])


def assemble_Mr(body, media, kappa, options=None):
    """Body operator ``M_r`` of a single body.

    Parameters
    ----------
    body : BodyMesh
    media : MediumAssignment
        Its ``bodies`` entry selected by ``body.material_index`` (default 0)
        gives the inside medium.
    kappa : float
        Imaginary frequency, ``kappa > 0``.

    Returns
    -------
    KernelMatrix
    """
    if body.material_index is None:
        body = body.with_material(0)
    system = SurfaceSystem([body], media, options)
    return KernelMatrix(system.body_operator(0, kappa), system.index_map())


def assemble_Grs(body_a, body_b, media, kappa, options=None):
    """Coupling ``G_rs`` from ``body_a`` (rows) to ``body_b`` (columns)."""
    a = body_a.with_material(0)
    b = body_b.with_material(0)
    system = SurfaceSystem([a, b], MediumAssignment(media.outer, [media.outer]), options)
    imap = system.index_map()
    return KernelMatrix(system.coupling(0, 1, kappa), IndexMap([imap.sizes[0]]), IndexMap([imap.sizes[1]]))
