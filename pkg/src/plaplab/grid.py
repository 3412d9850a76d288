"""Uniform P1 triangulations of axis-aligned squares with element fields.

A mesh splits an M x M grid of square cells into 2*M^2 right triangles,
every cell cut along its lower-left to upper-right diagonal so that meshes
are reproducible across runs.  Nodal fields carry vector data at vertices,
element fields carry one N x 2 tensor per triangle (gradients, right-hand
sides, flux fields).  Ball queries go by element barycenter against an open
ball, which gives exact per-ball measures and deterministic ties.
"""

import numpy as np

__all__ = [
    "Mesh",
    "NodalField",
    "ElemField",
    "EmptyBallError",
    "gradient",
    "integrate",
    "ball_elements",
    "ball_oscillation",
    "boundary_values",
    "write_nodal_field",
    "read_nodal_field",
    "write_elem_field",
    "read_elem_field",
]


class EmptyBallError(ValueError):
    """A ball query hit no element barycenter (radius below resolution)."""


class Mesh:
    """Uniform triangulation of [x0, x1] x [y0, y1] with square cells.

    The two side lengths must agree (the cell width h is then unambiguous
    and every triangle has area h^2 / 2).
    """

    def __init__(self, bounds, cells_per_side):
        x0, x1, y0, y1 = (float(b) for b in bounds)
        M = int(cells_per_side)
        if M < 2:
            raise ValueError("need at least 2 cells per side")
        if x1 <= x0 or y1 <= y0:
            raise ValueError("degenerate bounds")
        if abs((x1 - x0) - (y1 - y0)) > 1e-12 * max(x1 - x0, y1 - y0):
            raise ValueError("only square domains are supported")
        self.bounds = (x0, x1, y0, y1)
        self.cells_per_side = M
        self.h = (x1 - x0) / M

        xs = np.linspace(x0, x1, M + 1)
        ys = np.linspace(y0, y1, M + 1)
        X, Y = np.meshgrid(xs, ys, indexing="xy")
        # node index = iy * (M+1) + ix
        self.nodes = np.column_stack([X.ravel(), Y.ravel()])

        ix, iy = np.meshgrid(np.arange(M), np.arange(M), indexing="xy")
        ix = ix.ravel()
        iy = iy.ravel()
        n00 = iy * (M + 1) + ix
        n10 = n00 + 1
        n01 = n00 + (M + 1)
        n11 = n01 + 1
        lower = np.column_stack([n00, n10, n11])   # below the diagonal
        upper = np.column_stack([n00, n11, n01])   # above the diagonal
        self.elements = np.vstack([lower, upper]).astype(np.int64)

        self.element_area = 0.5 * self.h * self.h
        self.areas = np.full(len(self.elements), self.element_area)
        verts = self.nodes[self.elements]            # (E, 3, 2)
        self.barycenters = verts.mean(axis=1)

        on_edge = (
            np.isclose(self.nodes[:, 0], x0) | np.isclose(self.nodes[:, 0], x1)
            | np.isclose(self.nodes[:, 1], y0) | np.isclose(self.nodes[:, 1], y1)
        )
        self.boundary_nodes = np.flatnonzero(on_edge)
        self.interior_nodes = np.flatnonzero(~on_edge)

        # gradients of the three barycentric basis functions per element
        d1 = verts[:, 1] - verts[:, 0]
        d2 = verts[:, 2] - verts[:, 0]
        det = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
        inv_t = np.empty((len(det), 2, 2))
        inv_t[:, 0, 0] = d2[:, 1]
        inv_t[:, 0, 1] = -d2[:, 0]
        inv_t[:, 1, 0] = -d1[:, 1]
        inv_t[:, 1, 1] = d1[:, 0]
        inv_t /= det[:, None, None]
        grad = np.empty((len(det), 3, 2))
        grad[:, 1] = inv_t[:, 0]
        grad[:, 2] = inv_t[:, 1]
        grad[:, 0] = -grad[:, 1] - grad[:, 2]
        self.basis_gradients = grad

    @property
    def num_nodes(self):
        return len(self.nodes)

    @property
    def num_elements(self):
        return len(self.elements)

    @property
    def total_area(self):
        x0, x1, y0, y1 = self.bounds
        return (x1 - x0) * (y1 - y0)

    def boundary_distance(self, point):
        """Distance from a point to the boundary of the rectangle."""
        x0, x1, y0, y1 = self.bounds
        x, y = float(point[0]), float(point[1])
        return min(x - x0, x1 - x, y - y0, y1 - y)

    def locate_element(self, point):
        """Index of the triangle containing a point (ties go to the lower one)."""
        x0, x1, y0, y1 = self.bounds
        M = self.cells_per_side
        x, y = float(point[0]), float(point[1])
        if not (x0 <= x <= x1 and y0 <= y <= y1):
            raise ValueError("point outside the mesh")
        ix = min(int((x - x0) / self.h), M - 1)
        iy = min(int((y - y0) / self.h), M - 1)
        # local coordinates in the cell decide the diagonal side
        lx = (x - x0) / self.h - ix
        ly = (y - y0) / self.h - iy
        cell = iy * M + ix
        return cell if ly <= lx else cell + M * M

    def interior_points(self, margin, stride=1):
        """Barycenters at distance > margin from the boundary, subsampled."""
        x0, x1, y0, y1 = self.bounds
        b = self.barycenters
        d = np.minimum(np.minimum(b[:, 0] - x0, x1 - b[:, 0]),
                       np.minimum(b[:, 1] - y0, y1 - b[:, 1]))
        idx = np.flatnonzero(d > margin)
        return b[idx[::stride]]


class NodalField:
    """N real values per mesh node, stored as an (num_nodes, N) array."""

    def __init__(self, values):
        values = np.atleast_2d(np.asarray(values, dtype=float))
        if values.ndim != 2:
            raise ValueError("nodal values must be a (nodes, components) array")
        if not np.all(np.isfinite(values)):
            raise ValueError("nodal values must be finite")
        self.values = values

    @property
    def components(self):
        return self.values.shape[1]

    @classmethod
    def from_callable(cls, mesh, fn, components=1):
        vals = np.asarray(fn(mesh.nodes[:, 0], mesh.nodes[:, 1]), dtype=float)
        if vals.ndim == 1:
            vals = vals[:, None]
        else:
            vals = vals.reshape(mesh.num_nodes, components)
        return cls(vals)

    @classmethod
    def zeros(cls, mesh, components=1):
        return cls(np.zeros((mesh.num_nodes, components)))


class ElemField:
    """One N x 2 tensor per element, stored as an (num_elements, N, 2) array."""

    def __init__(self, tensors):
        tensors = np.asarray(tensors, dtype=float)
        if tensors.ndim != 3 or tensors.shape[2] != 2:
            raise ValueError("element tensors must have shape (elements, N, 2)")
        if not np.all(np.isfinite(tensors)):
            raise ValueError("element tensors must be finite")
        self.tensors = tensors

    @property
    def rows(self):
        return self.tensors.shape[1]

    def norms(self):
        """Per-element Frobenius norms as a flat array."""
        return np.sqrt(np.sum(self.tensors ** 2, axis=(1, 2)))

    @classmethod
    def from_callable(cls, mesh, fn, rows=1):
        """Sample a tensor-valued function at element barycenters."""
        b = mesh.barycenters
        vals = np.asarray(fn(b[:, 0], b[:, 1]), dtype=float)
        vals = vals.reshape(mesh.num_elements, rows, 2)
        return cls(vals)

    @classmethod
    def zeros(cls, mesh, rows=1):
        return cls(np.zeros((mesh.num_elements, rows, 2)))


def gradient(mesh, u: NodalField):
    """Per-triangle constant gradient of the P1 interpolant of u."""
    if u.values.shape[0] != mesh.num_nodes:
        raise ValueError("nodal field does not match the mesh")
    vert_vals = u.values[mesh.elements]            # (E, 3, N)
    grads = np.einsum("ein,eik->enk", vert_vals, mesh.basis_gradients)
    return ElemField(grads)


def integrate(mesh, f):
    """Integral of a per-element scalar, exact for element-wise constants."""
    f = np.asarray(f, dtype=float)
    if f.shape != (mesh.num_elements,):
        raise ValueError("need one scalar per element")
    return float(np.sum(mesh.areas * f))


def ball_elements(mesh, center, r):
    """Elements whose barycenter lies in the open ball B_r(center)."""
    if r <= 0.0:
        raise ValueError("radius must be positive")
    d = mesh.barycenters - np.asarray(center, dtype=float)
    idx = np.flatnonzero(d[:, 0] ** 2 + d[:, 1] ** 2 < r * r)
    if idx.size == 0:
        raise EmptyBallError(
            f"ball of radius {r} at {tuple(center)} is below mesh resolution")
    return idx


def ball_oscillation(mesh, f: ElemField, center, r, q=1.0):
    """Area-weighted mean tensor and q-mean oscillation over a ball.

    Returns (mean, osc_q) with osc_q = (mean of |f - mean|^q)^(1/q).
    """
    if q < 1.0:
        raise ValueError("q must be at least 1")
    idx = ball_elements(mesh, center, r)
    w = mesh.areas[idx]
    w = w / w.sum()
    block = f.tensors[idx]
    mean = np.einsum("e,enk->nk", w, block)
    dev = np.sqrt(np.sum((block - mean) ** 2, axis=(1, 2)))
    osc = float(np.sum(w * dev ** q) ** (1.0 / q))
    return mean, osc


def boundary_values(mesh, fn, components=1):
    """Sample a callable g(x, y) on the boundary nodes, as a (B, N) array."""
    pts = mesh.nodes[mesh.boundary_nodes]
    vals = np.asarray(fn(pts[:, 0], pts[:, 1]), dtype=float)
    if vals.ndim == 1:
        vals = vals[:, None]
    return vals.reshape(len(pts), components)


# --- plain-text field tables ------------------------------------------------
#
# NodalField rows: node,comp,value     ElemField rows: elem,row,col,value
# Meshes are rebuilt from (bounds, M) and never serialized geometrically.


def write_nodal_field(path, u: NodalField):
    with open(path, "w") as fh:
        fh.write("node,comp,value\n")
        for node in range(u.values.shape[0]):
            for comp in range(u.values.shape[1]):
                fh.write(f"{node},{comp},{float(u.values[node, comp])!r}\n")


def read_nodal_field(path):
    values = {}
    max_node = max_comp = -1
    with open(path) as fh:
        header = fh.readline()
        if header.strip() != "node,comp,value":
            raise ValueError(f"{path}:1: expected header 'node,comp,value'")
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            try:
                node, comp, val = int(parts[0]), int(parts[1]), float(parts[2])
            except (ValueError, IndexError) as exc:
                raise ValueError(f"{path}:{lineno}: malformed row {line!r}") from exc
            values[(node, comp)] = val
            max_node = max(max_node, node)
            max_comp = max(max_comp, comp)
    out = np.zeros((max_node + 1, max_comp + 1))
    for (node, comp), val in values.items():
        out[node, comp] = val
    return NodalField(out)


def write_elem_field(path, f: ElemField):
    with open(path, "w") as fh:
        fh.write("elem,row,col,value\n")
        E, N, _ = f.tensors.shape
        for e in range(E):
            for r in range(N):
                for c in range(2):
                    fh.write(f"{e},{r},{c},{float(f.tensors[e, r, c])!r}\n")


def read_elem_field(path):
    entries = {}
    max_e = max_r = -1
    with open(path) as fh:
        header = fh.readline()
        if header.strip() != "elem,row,col,value":
            raise ValueError(f"{path}:1: expected header 'elem,row,col,value'")
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            try:
                e, r, c, val = int(parts[0]), int(parts[1]), int(parts[2]), float(parts[3])
            except (ValueError, IndexError) as exc:
                raise ValueError(f"{path}:{lineno}: malformed row {line!r}") from exc
            if c not in (0, 1):
                raise ValueError(f"{path}:{lineno}: column index must be 0 or 1")
            entries[(e, r, c)] = val
            max_e = max(max_e, e)
            max_r = max(max_r, r)
    out = np.zeros((max_e + 1, max_r + 1, 2))
    for (e, r, c), val in entries.items():
        out[e, r, c] = val
    return ElemField(out)
