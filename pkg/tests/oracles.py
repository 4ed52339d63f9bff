"""Independent reference solutions used only by the test-suite."""

import numpy as np
from scipy import special


def mie_coefficient(p, l, kappa, radius, eps, mu=1.0):
    """Scattering amplitude of a homogeneous sphere in vacuum.

    For an incident regular wave ``Phi_reg`` the scattered field outside the
    sphere is ``t * Phi_out`` (same polarization and multipole).  Obtained by
    matching tangential electric and magnetic fields at ``r = radius`` with
    radial functions ``i_l`` and ``k_l = sqrt(pi / 2z) K_{l+1/2}``.
    """
    z0 = kappa * radius
    z1 = kappa * np.sqrt(eps * mu) * radius
    i0, di0 = special.spherical_in(l, z0), special.spherical_in(l, z0, True)
    k0, dk0 = special.spherical_kn(l, z0), special.spherical_kn(l, z0, True)
    i1, di1 = special.spherical_in(l, z1), special.spherical_in(l, z1, True)
    # logarithmic derivative of r * z(k r), multiplied by the radius
    ri0 = i0 + z0 * di0
    rk0 = k0 + z0 * dk0
    contrast = mu if p == "M" else eps
    D = (i1 + z1 * di1) / i1 / contrast
    return -(ri0 - D * i0) / (rk0 - D * k0)


def lifshitz_slab_integrand(kappa, H, eps, thickness=None, mu=1.0):
    """``int d^2k/(2 pi)^2 log det`` for two identical plates in vacuum.

    With ``thickness=None`` the plates are half-spaces; otherwise the
    reflection amplitudes of a finite slab are used.
    """
    from scipy.integrate import quad

    def f(k):
        p0 = np.sqrt(kappa**2 + k**2)
        p1 = np.sqrt(eps * mu * kappa**2 + k**2)
        rs = []
        for c in (eps, mu):
            r = (p1 - c * p0) / (p1 + c * p0)
            if thickness is not None:
                e = np.exp(-2 * p1 * thickness)
                r = r * (1 - e) / (1 - r * r * e)
            rs.append(r)
        x = np.exp(-2 * p0 * H)
        return k / (2 * np.pi) * sum(np.log1p(-r * r * x) for r in rs)

    return quad(f, 0, np.inf, epsabs=0, epsrel=1e-12, limit=200)[0]
