"""Rao-Wilton-Glisson basis and Galerkin integrals of the scalar kernel.

Every surface operator in this package is a combination of three Galerkin
integrals of ``g(R) = exp(-k R)/R`` between RWG functions ``f_m`` (test) and
``f_n`` (basis):

    D_mn = int int (div f_m)(div' f_n) g
    F_mn = int int f_m . f_n g
    C_mn = int int f_m . (f_n x grad g)

where ``grad`` acts on the test point.  Well-separated triangle pairs use a
fixed product rule; pairs closer than ``near_factor`` panel diameters use
analytic ``1/R`` panel potentials plus a product rule for the bounded
remainder ``g - 1/R``.
"""

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .mesh import MeshError
from .quadrature import panel_potentials, triangle_rule

LEVI_CIVITA_TERMS = [(0, 1, 2, 1.0), (1, 2, 0, 1.0), (2, 0, 1, 1.0), (0, 2, 1, -1.0), (2, 1, 0, -1.0), (1, 0, 2, -1.0)]


@dataclass
class QuadratureOptions:
    """Accuracy knobs of the Galerkin integrals.

    Attributes
    ----------
    far_degree : int
        Degree of the triangle rule for well-separated pairs.
    near_outer_degree, near_inner_degree : int
        Rules for the test triangle and for the smooth remainder on the
        source triangle of near pairs.
    near_factor : float
        Pairs with centroid distance below ``near_factor`` times the larger
        triangle diameter are treated as near.
    chunk : int
        Rows of the point-pair kernel evaluated at once (memory control).
    """

    far_degree: int = 4
    near_outer_degree: int = 7
    near_inner_degree: int = 5
    near_factor: float = 2.0
    chunk: int = 512


class RWGBasis:
    """Edge-based divergence-conforming basis on a closed triangle mesh.

    Local edge ``k`` of triangle ``t`` is the edge opposite vertex ``k``.  On
    that triangle the basis function is
    ``sign * length / (2 area) * (x - vertex_k)``.
    """

    def __init__(self, mesh):
        if not mesh.has_connectivity:
            raise MeshError("RWG basis requires triangle connectivity")
        self.mesh = mesh
        faces = mesh.faces
        a = faces[:, [1, 2, 0]]
        b = faces[:, [2, 0, 1]]
        key = np.sort(np.stack([a, b], axis=-1), axis=-1).reshape(-1, 2)
        edges, inverse, counts = np.unique(key, axis=0, return_inverse=True, return_counts=True)
        if np.any(counts != 2):
            raise MeshError("mesh is not a closed 2-manifold (edge shared by != 2 triangles)")
        self.edges = edges
        self.tri_edge = inverse.reshape(-1, 3)
        self.tri_sign = np.where(a < b, 1.0, -1.0)
        verts = mesh.vertices
        self.length = np.linalg.norm(verts[edges[:, 0]] - verts[edges[:, 1]], axis=1)
        self.tri_vertices = verts[faces]  # (nt, 3, 3)
        d = self.tri_vertices[:, [1, 2, 0]] - self.tri_vertices
        self.diameter = np.linalg.norm(d, axis=2).max(axis=1)
        self._samplers = {}

    @property
    def n(self):
        return len(self.edges)

    @property
    def n_triangles(self):
        return len(self.tri_edge)

    def edge_midpoints(self):
        v = self.mesh.vertices
        return 0.5 * (v[self.edges[:, 0]] + v[self.edges[:, 1]])

    def local_coefficients(self):
        """``sign * length / area`` for every (triangle, local edge)."""
        return self.tri_sign * self.length[self.tri_edge] / self.mesh.areas[:, None]

    def points(self, degree):
        """Quadrature points ``(nt, q, 3)`` and absolute weights ``(nt, q)``."""
        bary, w = triangle_rule(degree)
        pts = np.einsum("qk,tkx->tqx", bary, self.tri_vertices)
        return pts, self.mesh.areas[:, None] * w[None, :]

    def local_values(self, pts):
        """RWG values ``(nt, q, 3 local edges, 3)`` at points on each triangle."""
        coef = 0.5 * self.local_coefficients()
        return coef[:, None, :, None] * (pts[:, :, None, :] - self.tri_vertices[:, None, :, :])

    def samplers(self, degree):
        """Sparse maps from point values to tested edge integrals.

        Returns ``(points, Bdiv, (Bx, By, Bz))`` with ``B[n, i]`` equal to the
        quadrature weight times ``div f_n`` or ``f_n`` components at point
        ``i``.
        """
        if degree in self._samplers:
            return self._samplers[degree]
        pts, w = self.points(degree)
        nt, q = w.shape
        vals = self.local_values(pts)  # nt, q, 3, 3
        rows = np.broadcast_to(self.tri_edge[:, None, :], (nt, q, 3)).ravel()
        cols = np.broadcast_to(np.arange(nt * q).reshape(nt, q, 1), (nt, q, 3)).ravel()
        shape = (self.n, nt * q)
        div = np.broadcast_to((w[:, :, None] * self.local_coefficients()[:, None, :]), (nt, q, 3)).ravel()
        Bdiv = sparse.csr_matrix((div, (rows, cols)), shape=shape)
        Bc = tuple(
            sparse.csr_matrix(((w[:, :, None] * vals[..., c]).ravel(), (rows, cols)), shape=shape)
            for c in range(3)
        )
        out = (pts.reshape(-1, 3), Bdiv, Bc)
        self._samplers[degree] = out
        return out

    def test_field(self, field_values_fn, degree=7):
        """Tested projections ``int f_n . E dA`` of a vector field.

        Parameters
        ----------
        field_values_fn : callable
            Maps points of shape ``(P, 3)`` to field values ``(P, 3)``
            (real or complex).
        """
        pts, Bdiv, Bc = self.samplers(degree)
        E = field_values_fn(pts)
        return sum(Bc[c] @ E[:, c] for c in range(3))


def _near_pairs(ta, tb, factor):
    ca = ta.mesh.centroids
    cb = tb.mesh.centroids
    dist = np.linalg.norm(ca[:, None, :] - cb[None, :, :], axis=2)
    limit = factor * np.maximum(ta.diameter[:, None], tb.diameter[None, :])
    return dist < limit


def _smooth_remainder(R, k):
    # s(R) = (exp(-kR) - 1)/R and s'(R)/R; s is bounded, s'(R) -> k^2/2
    kR = k * R
    small = kR < 1e-3
    Rs = np.where(R > 0, R, 1.0)
    s = np.where(small, -k + 0.5 * k * kR - k * kR * kR / 6.0, np.expm1(-kR) / Rs)
    ds = np.where(
        small,
        0.5 * k * k - k * k * kR / 3.0 + k * k * kR * kR / 8.0,
        (1.0 - np.exp(-kR) * (1.0 + kR)) / (Rs * Rs),
    )
    return s, np.where(R > 0, ds / Rs, 0.0)


class GalerkinIntegrals:
    """The ``D``, ``F`` and ``C`` matrices of one kernel between two bases."""

    def __init__(self, D, F, C):
        self.D = D
        self.F = F
        self.C = C

    def transpose(self):
        # reciprocity: D and F are symmetric kernels, C_mn(x, x') = C_nm(x', x)
        return GalerkinIntegrals(self.D.T.copy(), self.F.T.copy(), self.C.T.copy())


def galerkin_integrals(test, basis, k, options=None, near=None, symmetric=False):
    """Galerkin integrals of ``exp(-k R)/R`` between two RWG bases.

    Parameters
    ----------
    test, basis : RWGBasis
    k : float
        Screening constant ``kappa sqrt(eps mu)``; ``k = 0`` is the static
        kernel ``1/R``.
    options : QuadratureOptions, optional
    near : ndarray of bool, shape (nt_test, nt_basis), optional
        Near-pair mask; computed from the geometry when omitted.  Passing
        a fixed mask keeps the quadrature identical across small rigid
        displacements.
    symmetric : bool
        ``test`` and ``basis`` are the same surface; the result is
        symmetrized under reciprocity.

    Returns
    -------
    GalerkinIntegrals
    """
    opt = options or QuadratureOptions()
    if near is None:
        near = _near_pairs(test, basis, opt.near_factor)
    D, F, C = _far_part(test, basis, k, opt, near)
    if test is basis or not near.any():
        _add_near_part(D, F, C, test, basis, k, opt, near)
    else:
        # the near rule treats the two triangles differently; averaging both
        # orders makes the result independent of which surface is listed first
        Dn, Fn, Cn = (np.zeros_like(D) for _ in range(3))
        _add_near_part(Dn, Fn, Cn, test, basis, k, opt, near)
        Dr, Fr, Cr = (np.zeros((basis.n, test.n)) for _ in range(3))
        _add_near_part(Dr, Fr, Cr, basis, test, k, opt, near.T)
        D += 0.5 * (Dn + Dr.T)
        F += 0.5 * (Fn + Fr.T)
        C += 0.5 * (Cn + Cr.T)
    if symmetric:
        D = 0.5 * (D + D.T)
        F = 0.5 * (F + F.T)
        C = 0.5 * (C + C.T)
    return GalerkinIntegrals(D, F, C)


def _far_part(test, basis, k, opt, near):
    def kernel(dx, R):
        e = np.exp(-k * R)
        gp = -e * (1.0 + k * R) / R**3
        return e / R, [gp * dx[:, :, c] for c in range(3)]

    return _point_pair_sum(test, basis, opt.far_degree, opt.chunk, near, kernel)


def _point_pair_sum(test, basis, degree, chunk, excluded, kernel):
    """Product-rule Galerkin sums of a kernel over all non-excluded pairs.

    ``kernel(dx, R)`` returns the scalar kernel used by ``D`` and ``F`` and
    the three Cartesian components of the vector kernel used by ``C``.
    """
    Xa, Da, Ba = test.samplers(degree)
    Xb, Db, Bb = basis.samplers(degree)
    qa = len(Xa) // test.n_triangles
    qb = len(Xb) // basis.n_triangles
    tri_a = np.arange(len(Xa)) // qa
    tri_b = np.arange(len(Xb)) // qb
    D = np.zeros((test.n, basis.n))
    F = np.zeros_like(D)
    C = np.zeros_like(D)
    DbT = Db.T.tocsr()
    BbT = [b.T.tocsr() for b in Bb]

    def apply_basis(B, values):
        return np.asarray((B.T @ values.T).T)

    for start in range(0, len(Xa), chunk):
        sl = slice(start, min(start + chunk, len(Xa)))
        mask = excluded[tri_a[sl]][:, tri_b]
        dx = Xa[sl, None, :] - Xb[None, :, :]
        R = np.sqrt(np.einsum("ijk,ijk->ij", dx, dx))
        R = np.where(mask, 1.0, R)
        g, vec = kernel(dx, R)
        g = np.where(mask, 0.0, g)
        D += Da[:, sl] @ apply_basis(DbT, g)
        Bs = [b[:, sl] for b in Ba]
        for c in range(3):
            F += Bs[c] @ apply_basis(BbT[c], g)
        for e_ in range(3):
            Ve = np.where(mask, 0.0, vec[e_])
            VeB = {}
            for c, d, ee, sgn in LEVI_CIVITA_TERMS:
                if ee != e_:
                    continue
                if d not in VeB:
                    VeB[d] = apply_basis(BbT[d], Ve)
                C += sgn * (Bs[c] @ VeB[d])
    return D, F, C


def _gradient_kernel(k, e):
    # derivative along the test-point coordinate e of g and of grad g
    def kernel(dx, R):
        ex = np.exp(-k * R)
        kR = k * R
        A = -ex * (1.0 + kR) / R**3
        B = ex * (kR * kR + 3.0 * kR + 3.0) / R**5
        vec = [B * dx[:, :, e] * dx[:, :, c] + (A if c == e else 0.0) for c in range(3)]
        return A * dx[:, :, e], vec

    return kernel


def gradient_integrals(test, basis, k, options=None, near=None, include_near=True):
    """Derivatives of the Galerkin integrals under a rigid shift of ``test``.

    Returns three :class:`GalerkinIntegrals`, one per Cartesian direction,
    holding ``D``, ``F`` and ``C`` of the kernel differentiated along the
    test-point coordinate.

    Parameters
    ----------
    test, basis : RWGBasis
        Must be disjoint surfaces when ``include_near`` is true.
    near : ndarray of bool, optional
        Pairs treated by the high-order rule (or skipped).
    include_near : bool
        Evaluate the near pairs with a product rule of degree
        ``options.near_outer_degree`` on both triangles; when false they
        are left out, which keeps the sums symmetric for a body paired with
        itself.
    """
    opt = options or QuadratureOptions()
    if near is None:
        near = _near_pairs(test, basis, opt.near_factor)
    out = []
    for e in range(3):
        kernel = _gradient_kernel(k, e)
        D, F, C = _point_pair_sum(test, basis, opt.far_degree, opt.chunk, near, kernel)
        if include_near and near.any():
            _product_pairs(D, F, C, test, basis, np.nonzero(near), opt.near_outer_degree, kernel)
        out.append(GalerkinIntegrals(D, F, C))
    return out


def _product_pairs(D, F, C, test, basis, pairs, degree, kernel):
    bary, w = triangle_rule(degree)
    P, Q = pairs
    block = max(1, 200000 // (len(w) * len(w)))
    for start in range(0, len(P), block):
        p = P[start : start + block]
        q = Q[start : start + block]
        x = np.einsum("ok,nkx->nox", bary, test.tri_vertices[p])
        y = np.einsum("ik,nkx->nix", bary, basis.tri_vertices[q])
        wo = test.mesh.areas[p][:, None] * w
        wi = basis.mesh.areas[q][:, None] * w
        ca = test.local_coefficients()[p]
        cb = basis.local_coefficients()[q]
        fa = 0.5 * ca[:, None, :, None] * (x[:, :, None, :] - test.tri_vertices[p][:, None, :, :])
        fb = 0.5 * cb[:, None, :, None] * (y[:, :, None, :] - basis.tri_vertices[q][:, None, :, :])
        n, no, ni = len(p), len(w), len(w)
        dx = (x[:, :, None, :] - y[:, None, :, :]).reshape(n, no * ni, 3)
        R = np.linalg.norm(dx, axis=-1)
        g, vec = kernel(dx, R)
        g = g.reshape(n, no, ni) * wo[:, :, None] * wi[:, None, :]
        V = np.stack([np.broadcast_to(v, R.shape) for v in vec], axis=-1).reshape(n, no, ni, 3)
        V = V * (wo[:, :, None] * wi[:, None, :])[..., None]
        Dloc = np.einsum("noi,na,nb->nab", g, ca, cb)
        Floc = np.einsum("noi,noax,nibx->nab", g, fa, fb)
        # f_a . (f_b x V) = V . (f_a x f_b)
        cross = np.cross(fa[:, :, None, :, None, :], fb[:, None, :, None, :, :])  # n,o,i,a,b,3
        Cloc = np.einsum("noiabx,noix->nab", cross, V)
        ea = test.tri_edge[p]
        eb = basis.tri_edge[q]
        rows = np.broadcast_to(ea[:, :, None], Dloc.shape).ravel()
        cols = np.broadcast_to(eb[:, None, :], Dloc.shape).ravel()
        np.add.at(D, (rows, cols), Dloc.ravel())
        np.add.at(F, (rows, cols), Floc.ravel())
        np.add.at(C, (rows, cols), Cloc.ravel())


def _add_near_part(D, F, C, test, basis, k, opt, near):
    P, Q = np.nonzero(near)
    if len(P) == 0:
        return
    bary_o, w_o = triangle_rule(opt.near_outer_degree)
    bary_i, w_i = triangle_rule(opt.near_inner_degree)
    ntri_block = max(1, 200000 // (len(w_o) * len(w_i)))
    for start in range(0, len(P), ntri_block):
        p = P[start : start + ntri_block]
        q = Q[start : start + ntri_block]
        _near_block(D, F, C, test, basis, k, p, q, bary_o, w_o, bary_i, w_i)


def _near_block(D, F, C, test, basis, k, p, q, bary_o, w_o, bary_i, w_i):
    Vp = test.tri_vertices[p]  # n, 3, 3
    Vq = basis.tri_vertices[q]
    Ap = test.mesh.areas[p]
    Aq = basis.mesh.areas[q]
    nq = basis.mesh.normals[q]
    x = np.einsum("ok,nkx->nox", bary_o, Vp)  # n, o, 3
    y = np.einsum("ik,nkx->nix", bary_i, Vq)  # n, i, 3
    wo = Ap[:, None] * w_o[None, :]
    wi = Aq[:, None] * w_i[None, :]

    no = len(w_o)
    I0, Iv, gI0 = panel_potentials(
        x, np.broadcast_to(Vq[:, None], (len(p), no, 3, 3)), np.broadcast_to(nq[:, None], (len(p), no, 3))
    )
    dxy = x[:, :, None, :] - y[:, None, :, :]  # n, o, i, 3
    R = np.linalg.norm(dxy, axis=-1)
    s, ds_over_R = _smooth_remainder(R, k)
    ws = s * wi[:, None, :]  # n, o, i
    S0 = ws.sum(axis=2)  # n, o
    Sy = np.einsum("noi,nix->nox", ws, y)  # n, o, 3
    gs = (ds_over_R * wi[:, None, :])[..., None] * dxy  # grad_x s weighted, n, o, i, 3

    # test functions on p
    ca = test.local_coefficients()[p]  # n, 3 (sign * l / A)
    fa = 0.5 * ca[:, None, :, None] * (x[:, :, None, :] - Vp[:, None, :, :])  # n, o, a, 3
    cb = basis.local_coefficients()[q]  # n, 3
    vb = Vq  # free vertices, n, b, 3

    # scalar potential terms
    pot = I0 + S0  # n, o
    Dloc = np.einsum("no,na,nb->nab", wo * pot, ca, cb)

    # int (x' - v_b) g dA'  = Iv + (x - v_b) I0 + Sy - v_b S0
    xm = x[:, :, None, :] - vb[:, None, :, :]  # n, o, b, 3
    vecpot = Iv[:, :, None, :] + xm * I0[:, :, None, None] + (Sy[:, :, None, :] - vb[:, None, :, :] * S0[:, :, None, None])
    Floc = 0.5 * np.einsum("no,noax,nobx,nb->nab", wo, fa, vecpot, cb)

    # int (x' - v_b) x grad g dA' = (x - v_b) x grad I0 + sum_j (y_j - v_b) x grad s
    curl1 = np.cross(xm, gI0[:, :, None, :])
    ym = y[:, None, :, None, :] - vb[:, None, None, :, :]  # n, 1, i, b, 3
    curl2 = np.cross(ym, gs[:, :, :, None, :]).sum(axis=2)  # n, o, b, 3
    Cloc = 0.5 * np.einsum("no,noax,nobx,nb->nab", wo, fa, curl1 + curl2, cb)

    ea = test.tri_edge[p]
    eb = basis.tri_edge[q]
    rows = np.broadcast_to(ea[:, :, None], Dloc.shape).ravel()
    cols = np.broadcast_to(eb[:, None, :], Dloc.shape).ravel()
    np.add.at(D, (rows, cols), Dloc.ravel())
    np.add.at(F, (rows, cols), Floc.ravel())
    np.add.at(C, (rows, cols), Cloc.ravel())
