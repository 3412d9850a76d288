"""Oscillation-based seminorms, moduli of continuity, and the dyadic
oscillation potential.

A Modulus is a concrete modulus-of-continuity family carrying an
almost-decreasing certificate (beta, c_omega): omega(r) <= c_omega *
rho^(-beta) * omega(r * rho) on a sampled (r, rho) grid.  Its logarithmic
integrals (the Dini transform, the inverse-tail weight zeta) are closed
form per family; no quadrature is used in the transform paths.

The oscillation potential of a field at a point is the dyadic-in-radius sum
of q-mean oscillations weighted by log(1/theta), a Riemann sum of the
radial dr/r integral of per-ball oscillations.
"""

import math
from dataclasses import dataclass

import numpy as np

from .grid import ball_oscillation, EmptyBallError

__all__ = [
    "Modulus",
    "PotentialParams",
    "DiniDivergence",
    "VarpiTransform",
    "ZetaTransform",
    "power_modulus",
    "log_inverse_modulus",
    "constant_modulus",
    "dini_log_modulus",
    "modulus_from_spec",
    "campanato_seminorm",
    "default_ball_family",
    "vmo_modulus",
    "holder_seminorm",
    "dini_transform",
    "zeta_transform",
    "zeta_p",
    "oscillation_potential",
    "ball_family_oscillations",
]


class DiniDivergence(ArithmeticError):
    """The logarithmic integral of the modulus diverges at zero."""


@dataclass(frozen=True)
class Modulus:
    """Modulus of continuity with an almost-decreasing certificate.

    family: 'power' (r^beta), 'log_inverse' (log^(-sigma)(scale/r)),
    'constant', or 'dini_log' (1/log(scale/r), the sigma = 1 borderline).
    The certificate (beta_cert, c_omega) is validated on a 100 x 100
    sample grid of (r, rho) at construction.
    """

    family: str
    params: tuple
    beta_cert: float
    c_omega: float
    cert_r_max: float = 1.0

    def __post_init__(self):
        if self.beta_cert <= 0.0 or self.c_omega < 1.0:
            raise ValueError("need beta_cert > 0 and c_omega >= 1")
        if self.family not in ("power", "log_inverse", "constant", "dini_log"):
            raise ValueError(f"unknown modulus family {self.family!r}")
        self._validate_certificate()

    # -- evaluation ---------------------------------------------------------

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r <= 0.0):
            raise ValueError("modulus arguments must be positive")
        if self.family == "power":
            (beta,) = self.params
            out = r ** beta
        elif self.family == "constant":
            out = np.ones_like(r)
        else:
            sigma, scale = self._sigma_scale()
            if np.any(r >= scale):
                raise ValueError("argument beyond the modulus scale")
            out = np.log(scale / r) ** (-sigma)
        return float(out) if out.ndim == 0 else out

    def _sigma_scale(self):
        if self.family == "log_inverse":
            return self.params
        if self.family == "dini_log":
            return 1.0, self.params[0]
        raise ValueError("no log parameters for this family")

    def _validate_certificate(self):
        rs = np.geomspace(1e-6 * self.cert_r_max, self.cert_r_max, 100)
        rhos = np.geomspace(1e-3, 1.0 - 1e-6, 100)
        R, P = np.meshgrid(rs, rhos, indexing="ij")
        lhs = self.__call__(R.ravel())
        rhs = self.c_omega * P.ravel() ** (-self.beta_cert) * self.__call__((R * P).ravel())
        if np.any(lhs > rhs * (1.0 + 1e-9)):
            bad = np.argmax(lhs / rhs)
            raise ValueError(
                "almost-decreasing certificate fails at "
                f"r={R.ravel()[bad]:.3g}, rho={P.ravel()[bad]:.3g}")

    # -- closed-form logarithmic integrals -----------------------------------

    @property
    def dini_finite(self):
        if self.family == "power":
            return True
        if self.family == "constant" or self.family == "dini_log":
            return False
        sigma, _ = self._sigma_scale()
        return sigma > 1.0

    def integral_dr_over_r(self, a, b):
        """Closed form of integral_a^b omega(rho)/rho d rho, 0 <= a < b."""
        if not (0.0 <= a < b):
            raise ValueError("need 0 <= a < b")
        if self.family == "power":
            (beta,) = self.params
            return (b ** beta - a ** beta) / beta
        if a == 0.0 and not self.dini_finite:
            raise DiniDivergence("logarithmic integral diverges at zero")
        if self.family == "constant":
            return math.log(b / a)
        sigma, scale = self._sigma_scale()
        if b >= scale:
            raise ValueError("integration range beyond the modulus scale")
        tb = math.log(scale / b)
        if sigma == 1.0:
            if a == 0.0:
                raise DiniDivergence("logarithmic integral diverges at zero")
            ta = math.log(scale / a)
            return math.log(ta / tb)
        if a == 0.0:
            if sigma <= 1.0:
                raise DiniDivergence("logarithmic integral diverges at zero")
            return tb ** (1.0 - sigma) / (sigma - 1.0)
        ta = math.log(scale / a)
        return (tb ** (1.0 - sigma) - ta ** (1.0 - sigma)) / (sigma - 1.0)


def power_modulus(beta):
    return Modulus("power", (float(beta),), beta_cert=float(beta), c_omega=1.0)


def log_inverse_modulus(sigma, scale=math.e ** 2, beta_cert=0.5, c_omega=None,
                        cert_r_max=None):
    cert_r_max = cert_r_max if cert_r_max is not None else scale / math.e
    if c_omega is None:
        # the log ratio grows slowest in rho; a generous constant certifies it
        c_omega = max(4.0, (math.log(scale / (1e-9 * cert_r_max))
                            / math.log(scale / cert_r_max)) ** sigma)
    return Modulus("log_inverse", (float(sigma), float(scale)),
                   beta_cert=beta_cert, c_omega=float(c_omega),
                   cert_r_max=cert_r_max)


def constant_modulus():
    return Modulus("constant", (), beta_cert=1.0, c_omega=1.0)


def dini_log_modulus(scale=math.e ** 2, beta_cert=0.5, c_omega=None,
                     cert_r_max=None):
    cert_r_max = cert_r_max if cert_r_max is not None else scale / math.e
    if c_omega is None:
        c_omega = max(4.0, math.log(scale / (1e-9 * cert_r_max))
                      / math.log(scale / cert_r_max))
    return Modulus("dini_log", (float(scale),), beta_cert=beta_cert,
                   c_omega=float(c_omega), cert_r_max=cert_r_max)


def modulus_from_spec(name, params=()):
    params = [float(x) for x in params]
    if name == "power":
        return power_modulus(*params)
    if name == "log_inverse":
        return log_inverse_modulus(*params)
    if name == "constant":
        return constant_modulus()
    if name == "dini_log":
        return dini_log_modulus(*params)
    raise ValueError(f"unknown modulus family {name!r}")


@dataclass(frozen=True)
class PotentialParams:
    """Radial range and dyadic ratio for the oscillation potential."""

    R: float
    theta: float
    p: object     # Exponent

    def __post_init__(self):
        if self.R <= 0.0:
            raise ValueError("R must be positive")
        if not (0.0 < self.theta < 1.0):
            raise ValueError("theta must lie in (0, 1)")


# --- batched ball statistics -------------------------------------------------


def ball_family_oscillations(mesh, f, centers, radii, q, chunk=256):
    """Mean-oscillation of f over many balls at once.

    centers: (C, 2) array; radii: list of radii shared by all centers.
    Returns (oscs, counts) arrays of shape (len(radii), C); empty balls get
    osc = nan.  Memory use is bounded by chunking the centers.
    """
    centers = np.asarray(centers, dtype=float)
    flat = f.tensors.reshape(mesh.num_elements, -1)
    fsq = np.sum(flat * flat, axis=1)
    b = mesh.barycenters
    qexp = float(q)
    n_r = len(radii)
    oscs = np.full((n_r, len(centers)), np.nan)
    counts = np.zeros((n_r, len(centers)), dtype=np.int64)
    for start in range(0, len(centers), chunk):
        cs = centers[start:start + chunk]
        dx = cs[:, 0][:, None] - b[:, 0][None, :]
        dy = cs[:, 1][:, None] - b[:, 1][None, :]
        dist_sq = dx * dx + dy * dy
        for k, r in enumerate(radii):
            mask = dist_sq < r * r
            cnt = mask.sum(axis=1)
            ok = cnt > 0
            if not np.any(ok):
                continue
            W = mask.astype(float)
            means = (W @ flat) / np.maximum(cnt, 1)[:, None]
            cross = means @ flat.T                       # (C, E)
            dev_sq = np.maximum(fsq[None, :] - 2.0 * cross
                                + np.sum(means * means, axis=1)[:, None], 0.0)
            osc_q = np.sum(W * dev_sq ** (qexp / 2.0), axis=1) / np.maximum(cnt, 1)
            vals = osc_q ** (1.0 / qexp)
            block = oscs[k, start:start + chunk]
            block[ok] = vals[ok]
            counts[k, start:start + chunk] = cnt
    return oscs, counts


def default_ball_family(mesh, stride=2, r_min_cells=2.0):
    """Centers on a coarsened barycenter lattice with dyadic inscribed radii.

    Returns (centers, radii_list): shared dyadic radii from r_min up to the
    largest radius inscribed anywhere, with per-center admissibility decided
    by the boundary distance at query time.
    """
    centers = mesh.barycenters[::stride]
    r_min = r_min_cells * mesh.h
    x0, x1, y0, y1 = mesh.bounds
    r_cap = 0.5 * min(x1 - x0, y1 - y0)
    radii = []
    r = r_min
    while r < r_cap:
        radii.append(r)
        r *= 2.0
    if not radii:
        raise ValueError("mesh too coarse for any inscribed ball")
    return centers, radii


def _inscribed_mask(mesh, centers, r):
    x0, x1, y0, y1 = mesh.bounds
    d = np.minimum(np.minimum(centers[:, 0] - x0, x1 - centers[:, 0]),
                   np.minimum(centers[:, 1] - y0, y1 - centers[:, 1]))
    return d > r


def campanato_seminorm(mesh, f, omega, q=1.0, family=None):
    """Sup over a ball family of the q-mean oscillation divided by omega(r).

    The default family puts centers on every 2nd barycenter with dyadic
    radii, keeping only balls fully inside the mesh.
    """
    if family is None:
        centers, radii = default_ball_family(mesh)
    else:
        centers, radii = family
    centers = np.asarray(centers, dtype=float)
    if len(centers) == 0 or len(radii) == 0:
        raise ValueError("empty ball family")
    oscs, _ = ball_family_oscillations(mesh, f, centers, radii, q)
    best = 0.0
    used = 0
    for k, r in enumerate(radii):
        mask = _inscribed_mask(mesh, centers, r) & np.isfinite(oscs[k])
        if not np.any(mask):
            continue
        used += int(mask.sum())
        best = max(best, float(np.max(oscs[k][mask]) / omega(r)))
    if used == 0:
        raise ValueError("no admissible ball in the family")
    return best


def vmo_modulus(mesh, f, q=1.0):
    """Radius-indexed oscillation profile rho -> sup over balls of radius <= rho.

    Returns a nondecreasing callable; its .radii and .values expose the
    underlying dyadic table.
    """
    centers, radii = default_ball_family(mesh)
    oscs, _ = ball_family_oscillations(mesh, f, centers, radii, q)
    sups = []
    for k, r in enumerate(radii):
        mask = _inscribed_mask(mesh, centers, r) & np.isfinite(oscs[k])
        sups.append(float(np.max(oscs[k][mask])) if np.any(mask) else 0.0)
    sups = np.maximum.accumulate(np.asarray(sups))
    radii = np.asarray(radii)

    def profile(rho):
        rho = float(rho)
        idx = np.searchsorted(radii, rho, side="right") - 1
        if idx < 0:
            return 0.0
        return float(sups[min(idx, len(sups) - 1)])

    profile.radii = radii
    profile.values = sups
    return profile


def holder_seminorm(mesh, f, omega, max_pairs=10 ** 6):
    """Sup over barycenter pairs of |f(x) - f(y)| / omega(|x - y|).

    Pairs are subsampled deterministically (a fixed stride on the element
    list) so at most max_pairs are examined.
    """
    norms_all = f.tensors.reshape(mesh.num_elements, -1)
    n = mesh.num_elements
    stride = 1
    while (n // stride) * (n // stride - 1) // 2 > max_pairs:
        stride += 1
    idx = np.arange(0, n, stride)
    pts = mesh.barycenters[idx]
    vals = norms_all[idx]
    best = 0.0
    for i in range(1, len(idx)):
        d = pts[i] - pts[:i]
        dist = np.hypot(d[:, 0], d[:, 1])
        diff = np.sqrt(np.sum((vals[i] - vals[:i]) ** 2, axis=1))
        best = max(best, float(np.max(diff / omega(dist))))
    return best


class VarpiTransform:
    """Integrated modulus r -> integral_0^r omega(rho)/rho d rho.

    finite is False exactly in the divergent (non-Dini) regime; calling a
    divergent transform raises DiniDivergence.
    """

    def __init__(self, omega: Modulus):
        self.omega = omega
        self.finite = omega.dini_finite

    def __call__(self, r):
        if not self.finite:
            raise DiniDivergence("the modulus fails the Dini condition")
        r = np.asarray(r, dtype=float)
        if r.ndim == 0:
            return self.omega.integral_dr_over_r(0.0, float(r))
        return np.array([self.omega.integral_dr_over_r(0.0, float(x)) for x in r])


def dini_transform(omega: Modulus):
    return VarpiTransform(omega)


class ZetaTransform:
    """Inverse tail weight zeta(r) = 1 / integral_{r^(1/n)}^{R0^(1/n)} omega/rho."""

    def __init__(self, omega: Modulus, n, R0):
        if n < 1 or R0 <= 0.0:
            raise ValueError("need n >= 1 and R0 > 0")
        self.omega = omega
        self.n = int(n)
        self.R0 = float(R0)

    def _one(self, r):
        if not (0.0 < r < self.R0):
            raise ValueError("zeta is defined on (0, R0)")
        a = r ** (1.0 / self.n)
        b = self.R0 ** (1.0 / self.n)
        return 1.0 / self.omega.integral_dr_over_r(a, b)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if r.ndim == 0:
            return self._one(float(r))
        return np.array([self._one(float(x)) for x in r])


def zeta_transform(omega: Modulus, n, R0):
    return ZetaTransform(omega, n, R0)


def zeta_p(zeta: ZetaTransform, p):
    """The p-adjusted weight zeta^(1/(p-1)) as a callable."""
    expo = 1.0 / (p.p - 1.0)

    def weighted(r):
        return np.asarray(zeta(r)) ** expo

    return weighted


def oscillation_potential(mesh, F, x, params: PotentialParams):
    """Dyadic radial sum of mean oscillations of F around x.

    Sums osc_{p'}(F; B_{theta^i R}(x)) * log(1/theta) while theta^i R stays
    at or above twice the mesh width, a Riemann sum of the dr/r integral of
    per-ball oscillations.  The ball B_R(x) must be inside the mesh.
    """
    R, theta = params.R, params.theta
    if mesh.boundary_distance(x) <= R:
        raise ValueError("the outer ball must stay inside the mesh")
    if R < 2.0 * mesh.h:
        raise ValueError("R below mesh resolution")
    q = params.p.pprime
    weight = math.log(1.0 / theta)
    total = 0.0
    r = R
    while r >= 2.0 * mesh.h:
        try:
            _, osc = ball_oscillation(mesh, F, x, r, q)
        except EmptyBallError:
            break
        total += osc * weight
        r *= theta
    return total
