"""Independent reference calculations used by the tests.

Nothing here imports the package under test; every value is computed from
closed-form expressions or plain bisection.
"""

import math

C = 299_792_458.0


def k0(f):
    return 2 * math.pi * f / C


def bisect(fn, lo, hi, tol=1e-13, max_iter=400):
    flo = fn(lo)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = fn(mid)
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo <= tol * max(abs(hi), 1.0):
            break
    return 0.5 * (lo + hi)


def transverse_root(w, k0_, eps1, eps2, p, eta):
    """Root of ``k w - p pi + 2 atan(eta k / gamma)`` on ((p-1) pi / w, min(p pi / w, V))."""
    v = k0_ * math.sqrt(eps1 - eps2)

    def g(k):
        gamma = math.sqrt(max(v * v - k * k, 0.0))
        return k * w - p * math.pi + 2 * math.atan2(eta * k, gamma)

    lo = (p - 1) * math.pi / w + 1e-12
    hi = min(p * math.pi / w, v) * (1 - 1e-15)
    return bisect(g, lo, hi)


def marcatili_neff(a, b, eps1, eps2, f, family="Ex", p=1, q=1):
    """Separable closed-form estimate; ``Ex`` puts the TM-like walls at x = +-a/2."""
    kk = k0(f)
    eta = eps2 / eps1
    eta_x, eta_y = (eta, 1.0) if family == "Ex" else (1.0, eta)
    kx = transverse_root(a, kk, eps1, eps2, p, eta_x)
    ky = transverse_root(b, kk, eps1, eps2, q, eta_y)
    return math.sqrt(kk * kk * eps1 - kx * kx - ky * ky) / kk


def slab_te_neff(d, eps1, eps2, f):
    """Fundamental TE mode of a symmetric slab of thickness ``d``: ``tan(k d / 2) = gamma / k``."""
    kk = k0(f)
    v = kk * math.sqrt(eps1 - eps2)

    def g(k):
        return math.tan(k * d / 2) - math.sqrt(v * v - k * k) / k

    k = bisect(g, 1e-9, min(math.pi / d, v) * (1 - 1e-12))
    return math.sqrt(kk * kk * eps1 - k * k) / kk


def plane_wave_alpha(eps, tan_delta, f):
    """Attenuation of a plane wave in a low-loss dielectric (Np/m)."""
    return math.pi * f * math.sqrt(eps) * tan_delta / C


def richardson(coarse, fine, ratio=2.0, order=2.0):
    return fine + (fine - coarse) / (ratio ** order - 1.0)
