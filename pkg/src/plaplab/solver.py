"""Discrete p-Laplace systems in divergence form on P1 meshes.

The Dirichlet problem -div(|grad u|^(p-2) grad u) = -div F with u = g on the
boundary is solved by a damped Kacanov (frozen-coefficient) iteration: each
step freezes the diffusion coefficient at (eps^2 + |grad u|^2)^((p-2)/2),
solves the resulting SPD linear system by diagonally preconditioned
conjugate gradients, and accepts the step only if the regularized energy
does not increase (halving towards the previous iterate otherwise).  The
iteration starts from the p = 2 solution and stops on the weak-form
residual, not on energy stagnation.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, cg

from .fluxmaps import Exponent, a_map
from .grid import ElemField, Mesh, NodalField, gradient, integrate

__all__ = [
    "DirichletProblem",
    "SolverConfig",
    "Solution",
    "NonConvergenceError",
    "energy",
    "regularized_energy",
    "defect_vector",
    "residual",
    "solve",
    "solve_pharmonic",
    "load_problem",
]


class NonConvergenceError(RuntimeError):
    def __init__(self, message, energy_trace, last_residual):
        super().__init__(message)
        self.energy_trace = energy_trace
        self.last_residual = last_residual


@dataclass
class SolverConfig:
    eps_reg: Optional[float] = None     # None: 1e-8 * data scale
    tol_energy: float = 1e-12
    tol_residual: float = 1e-9
    max_iter: int = 200
    coeff_clamp: tuple = (1e-10, 1e10)  # relative to data_scale^(p-2)
    cg_tol: float = 1e-10
    cg_max_iter: Optional[int] = None

    def __post_init__(self):
        if self.coeff_clamp[0] > self.coeff_clamp[1]:
            raise ValueError("coefficient clamp interval is empty")
        for name in ("tol_energy", "tol_residual", "cg_tol"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")


@dataclass
class DirichletProblem:
    p: Exponent
    mesh: Mesh
    F: ElemField
    g: np.ndarray               # boundary values, (num boundary nodes, N)

    def __post_init__(self):
        self.g = np.atleast_2d(np.asarray(self.g, dtype=float))
        if self.F.tensors.shape[0] != self.mesh.num_elements:
            raise ValueError("F does not match the mesh")
        if self.g.shape != (len(self.mesh.boundary_nodes), self.F.rows):
            raise ValueError("boundary data must be (num boundary nodes, N)")
        if not np.all(np.isfinite(self.g)):
            raise ValueError("boundary data must be finite")

    @property
    def components(self):
        return self.F.rows

    def data_scale(self):
        """max(max|F|^(1/(p-1)), osc(g)/diam); 0 only for trivial problems."""
        fmax = float(self.F.norms().max(initial=0.0))
        scale_f = fmax ** (1.0 / (self.p.p - 1.0)) if fmax > 0 else 0.0
        spread = self.g.max(axis=0) - self.g.min(axis=0)
        osc_g = float(np.sqrt(np.sum(spread ** 2)))
        x0, x1, y0, y1 = self.mesh.bounds
        diam = float(np.hypot(x1 - x0, y1 - y0))
        return max(scale_f, osc_g / diam)


@dataclass
class Solution:
    u: NodalField
    iterations: int
    energy_trace: list
    residual: float


def energy(prob: DirichletProblem, u: NodalField):
    """Energy integral (1/p)|grad u|^p - F . grad u, exact per element."""
    g = gradient(prob.mesh, u).tensors
    gn = np.sqrt(np.sum(g ** 2, axis=(1, 2)))
    dens = gn ** prob.p.p / prob.p.p - np.sum(prob.F.tensors * g, axis=(1, 2))
    return integrate(prob.mesh, dens)


def regularized_energy(prob: DirichletProblem, u: NodalField, eps):
    g = gradient(prob.mesh, u).tensors
    gsq = np.sum(g ** 2, axis=(1, 2))
    dens = (eps * eps + gsq) ** (prob.p.p / 2.0) / prob.p.p \
        - np.sum(prob.F.tensors * g, axis=(1, 2))
    return integrate(prob.mesh, dens)


def defect_vector(prob: DirichletProblem, u: NodalField):
    """Weak-form defect of A(grad u) - F against every nodal hat direction."""
    mesh = prob.mesh
    grad = gradient(mesh, u).tensors
    dens = a_map(prob.p, grad) - prob.F.tensors
    contrib = np.einsum("e,enk,eik->ein", mesh.areas, dens, mesh.basis_gradients)
    out = np.zeros((mesh.num_nodes, prob.components))
    for loc in range(3):
        np.add.at(out, mesh.elements[:, loc], contrib[:, loc, :])
    return out


def residual(prob: DirichletProblem, u: NodalField):
    """Normalized sup of the weak-form defect over interior hat directions."""
    mesh = prob.mesh
    fnorm1 = integrate(mesh, prob.F.norms())
    defect = np.abs(defect_vector(prob, u)[mesh.interior_nodes])
    if defect.size == 0:
        return 0.0
    return float(defect.max() / (1.0 + fnorm1))


def _assemble_stiffness(mesh, kappa):
    """Stiffness matrix of -div(kappa grad .) for per-element kappa."""
    gl = mesh.basis_gradients                       # (E, 3, 2)
    local = np.einsum("e,eik,ejk->eij", mesh.areas * kappa, gl, gl)
    rows = np.repeat(mesh.elements, 3, axis=1).ravel()
    cols = np.tile(mesh.elements, (1, 3)).ravel()
    K = sp.coo_matrix((local.ravel(), (rows, cols)),
                      shape=(mesh.num_nodes, mesh.num_nodes))
    return K.tocsr()


def _rhs_from_F(prob):
    mesh = prob.mesh
    contrib = np.einsum("e,enk,eik->ein", mesh.areas, prob.F.tensors,
                        mesh.basis_gradients)
    out = np.zeros((mesh.num_nodes, prob.components))
    for loc in range(3):
        np.add.at(out, mesh.elements[:, loc], contrib[:, loc, :])
    return out


def _linear_step(prob, kappa, cfg):
    """Solve the frozen-coefficient problem; the N components share a matrix."""
    mesh = prob.mesh
    K = _assemble_stiffness(mesh, kappa)
    b = _rhs_from_F(prob)
    ii = mesh.interior_nodes
    bb = mesh.boundary_nodes
    K_ii = K[ii][:, ii]
    K_ib = K[ii][:, bb]
    rhs = b[ii] - K_ib @ prob.g

    diag = K_ii.diagonal()
    diag[diag <= 0.0] = 1.0
    precond = LinearOperator(K_ii.shape, matvec=lambda x: x / diag)
    maxiter = cfg.cg_max_iter or max(1000, 10 * len(ii))

    values = np.zeros((mesh.num_nodes, prob.components))
    values[bb] = prob.g
    for comp in range(prob.components):
        x, info = cg(K_ii, rhs[:, comp], rtol=cfg.cg_tol, atol=0.0,
                     maxiter=maxiter, M=precond)
        if info > 0:
            # keep the best iterate; the outer damping judges its quality
            pass
        values[ii, comp] = x
    return NodalField(values)


def solve(prob: DirichletProblem, cfg: Optional[SolverConfig] = None,
          u0: Optional[NodalField] = None):
    """Damped Kacanov solve of the discrete Dirichlet problem.

    Parameters
    ----------
    prob : DirichletProblem
    cfg : SolverConfig, optional
    u0 : NodalField, optional
        Custom initial iterate (boundary rows are overwritten by g).
        Default is the p = 2 solution of the same problem.

    Returns
    -------
    Solution with the accepted iterate, the regularized-energy trace
    (nonincreasing by construction) and the final residual.
    """
    cfg = cfg or SolverConfig()
    mesh = prob.mesh
    p = prob.p.p
    scale = prob.data_scale()

    if scale == 0.0:
        # F = 0 and constant boundary data: the constant extension solves it
        values = np.zeros((mesh.num_nodes, prob.components))
        const = prob.g[0] if len(prob.g) else 0.0
        values[:] = const
        u = NodalField(values)
        return Solution(u, 0, [0.0], residual(prob, u))

    eps = cfg.eps_reg if cfg.eps_reg is not None else 1e-8 * scale
    eps_min = 1e-14 * scale
    kmin = cfg.coeff_clamp[0] * scale ** (p - 2.0)
    kmax = cfg.coeff_clamp[1] * scale ** (p - 2.0)

    def kappa_of(u, eps):
        g = gradient(mesh, u).tensors
        gsq = np.sum(g ** 2, axis=(1, 2))
        return np.clip((eps * eps + gsq) ** ((p - 2.0) / 2.0), kmin, kmax)

    if u0 is None:
        u = _linear_step(prob, np.ones(mesh.num_elements), cfg)
    else:
        values = u0.values.copy()
        values[mesh.boundary_nodes] = prob.g
        u = NodalField(values)

    trace = [regularized_energy(prob, u, eps)]
    res = residual(prob, u)
    if res <= cfg.tol_residual:
        return Solution(u, 0, trace, res)

    prev_res = res
    for it in range(1, cfg.max_iter + 1):
        candidate = _linear_step(prob, kappa_of(u, eps), cfg)
        direction = candidate.values - u.values     # zero on boundary rows
        e_prev = trace[-1]
        slack = cfg.tol_energy * (1.0 + abs(e_prev))
        # dyadic damping: halve toward the previous iterate and keep the
        # step length with the lowest regularized energy (full steps
        # overshoot for p > 2, where the scan settles near 1/(p-1))
        best_t, best_e = 0.0, e_prev
        near_t, near_e = 0.0, np.inf
        t = 1.0
        for _ in range(31):
            e_t = regularized_energy(prob, NodalField(u.values + t * direction), eps)
            if e_t < best_e:
                best_t, best_e = t, e_t
            if e_t < near_e:
                near_t, near_e = t, e_t
            if best_t > 0.0 and t < 0.25 * best_t:
                break                              # minimum bracketed
            t *= 0.5
        if best_t == 0.0:
            # near convergence the decrease drowns in roundoff; accept any
            # step inside the energy slack, fail only on a true increase
            if near_e <= e_prev + slack:
                best_t, best_e = near_t, e_prev
            else:
                raise NonConvergenceError(
                    "Kacanov step kept increasing the regularized energy",
                    trace, residual(prob, u))
        u = NodalField(u.values + best_t * direction)
        trace.append(min(best_e, e_prev))
        res = residual(prob, u)
        if res <= cfg.tol_residual:
            return Solution(u, it, trace, res)
        if res > 0.93 * prev_res and eps > eps_min:
            # the unregularized weak form has hit the regularization floor
            # (the fixed point of the eps-smoothed system deviates from the
            # exact one by O(eps^(p-1))); tightening eps lowers the
            # regularized energy pointwise, so the trace stays monotone
            eps = max(1e-2 * eps, eps_min)
            trace.append(regularized_energy(prob, u, eps))
        prev_res = res

    raise NonConvergenceError(
        f"no convergence within {cfg.max_iter} iterations "
        f"(residual {res:.3e} > {cfg.tol_residual:.3e})", trace, res)


def solve_pharmonic(mesh: Mesh, p: Exponent, g, cfg: Optional[SolverConfig] = None):
    """Dirichlet problem with F = 0: the discrete p-harmonic extension of g."""
    g = np.atleast_2d(np.asarray(g, dtype=float))
    F = ElemField.zeros(mesh, rows=g.shape[1])
    return solve(DirichletProblem(p, mesh, F, g), cfg)


# --- problem files ------------------------------------------------------------
#
# A problem file is a flat key = value text file with keys
#   p          exponent, > 1
#   grid       cells per side M
#   bounds     x0, x1, y0, y1
#   comps      number of solution components N (default 1)
#   F          zero | file <path> | trig <seed> | amap <seed>
#   g          zero | affine <a> <b> <c> | file <path> | trace <seed>
# 'trig' builds a seeded truncated trigonometric series, 'amap' builds
# F = A(grad w) for a seeded smooth w (its trace is then used for g),
# 'trace' builds a seeded rough piecewise-linear boundary trace.


def _parse_kv(path):
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, val = line.split("=", 1)
            out[key.strip()] = val.strip()
    return out


def load_problem(path):
    """Build a DirichletProblem from a flat key-value problem file."""
    from .lab import cases  # local import; lab depends on solver

    kv = _parse_kv(path)
    p = Exponent(float(kv.get("p", "2.0")))
    M = int(kv.get("grid", "32"))
    bounds = tuple(float(t) for t in kv.get("bounds", "0,1,0,1").split(","))
    comps = int(kv.get("comps", "1"))
    mesh = Mesh(bounds, M)

    fspec = kv.get("F", "zero").split()
    gspec = kv.get("g", "zero").split()

    g = np.zeros((len(mesh.boundary_nodes), comps))
    if fspec[0] == "zero":
        F = ElemField.zeros(mesh, rows=comps)
    elif fspec[0] == "file":
        from .grid import read_elem_field
        F = read_elem_field(fspec[1])
    elif fspec[0] == "trig":
        rng = np.random.default_rng(int(fspec[1]))
        F = cases.random_smooth_field(mesh, comps, rng)
    elif fspec[0] == "amap":
        rng = np.random.default_rng(int(fspec[1]))
        w = cases.random_smooth_potential(mesh, comps, rng)
        F = ElemField(a_map(p, gradient(mesh, w).tensors))
        g = w.values[mesh.boundary_nodes]
    else:
        raise ValueError(f"unknown F source {fspec[0]!r}")

    if gspec[0] == "zero":
        pass
    elif gspec[0] == "affine":
        a, b, c = (float(t) for t in gspec[1:4])
        pts = mesh.nodes[mesh.boundary_nodes]
        g = np.repeat((a * pts[:, 0] + b * pts[:, 1] + c)[:, None], comps, axis=1)
    elif gspec[0] == "file":
        from .grid import read_nodal_field
        full = read_nodal_field(gspec[1])
        g = full.values[mesh.boundary_nodes]
    elif gspec[0] == "trace":
        rng = np.random.default_rng(int(gspec[1]))
        g = cases.rough_boundary_trace(mesh, comps, rng)
    elif gspec[0] != "keep":
        raise ValueError(f"unknown g source {gspec[0]!r}")

    return DirichletProblem(p, mesh, F, g)
