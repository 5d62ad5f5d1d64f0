"""P1 finite elements: assembly, Dirichlet elimination, CG, gradients, norms.

Quadrature everywhere is the 3-point edge-midpoint rule (exact for quadratic
integrands), with the coefficient evaluated at the quadrature points.  The
solver is plain conjugate gradients with a Jacobi preconditioner; systems are
reduced to the free nodes by symmetric elimination so they stay SPD.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .errors import AssemblyError, EmptyRegionError, NonConvergenceError, NotSPDError


class FEFunction:
    """Piecewise-linear nodal field on a TriMesh (one scalar per vertex)."""

    def __init__(self, mesh, values):
        values = np.asarray(values, dtype=float)
        if values.shape != (mesh.num_vertices,):
            raise ValueError("nodal value count does not match the mesh")
        if not np.all(np.isfinite(values)):
            raise ValueError("non-finite nodal value")
        self.mesh = mesh
        self.values = values

    @classmethod
    def zeros(cls, mesh):
        return cls(mesh, np.zeros(mesh.num_vertices))

    @classmethod
    def from_callable(cls, mesh, f):
        return cls(mesh, np.asarray(f(mesh.vertices), dtype=float))

    def copy(self):
        return FEFunction(self.mesh, self.values.copy())

    def __add__(self, other):
        return FEFunction(self.mesh, self.values + other.values)

    def __sub__(self, other):
        return FEFunction(self.mesh, self.values - other.values)

    def __mul__(self, scalar):
        return FEFunction(self.mesh, self.values * scalar)

    __rmul__ = __mul__

    def at_midpoints(self) -> np.ndarray:
        """(nt, 3) values at the edge-midpoint quadrature nodes."""
        v = self.values[self.mesh.triangles]  # (nt, 3)
        out = np.empty_like(v)
        for q in range(3):
            out[:, q] = 0.5 * (v[:, (q + 1) % 3] + v[:, (q + 2) % 3])
        return out

    def dump_csv(self) -> str:
        lines = ["node_id,x,y,value"]
        for i, ((x, y), v) in enumerate(zip(self.mesh.vertices, self.values)):
            lines.append(f"{i},{float(x)!r},{float(y)!r},{float(v)!r}")
        return "\n".join(lines) + "\n"


_COEFF_SHRINK = 1e-9


def coeff_sample_points(mesh) -> np.ndarray:
    """Edge midpoints pulled infinitesimally toward the element centroid.

    Piecewise-constant coefficients aligned with mesh lines would otherwise be
    sampled exactly on their jump set (a measure-zero tie), biasing the
    element toward the wrong phase; for smooth coefficients the shift is far
    below every tolerance in use.
    """
    mids = mesh.edge_midpoints
    c = mesh.centroids[:, None, :]
    return mids + _COEFF_SHRINK * (c - mids)


def _coeff_at_quadrature(mesh, field) -> np.ndarray:
    """(nt, 3, 2, 2) coefficient at the (tie-safe) edge midpoints."""
    pts = coeff_sample_points(mesh).reshape(-1, 2)
    return field.eval(pts).reshape(mesh.num_triangles, 3, 2, 2)


def assemble_stiffness(mesh, field) -> sp.csr_matrix:
    """Global stiffness sum_T int grad(l_i) . a(x_q) grad(l_j), no BCs."""
    if np.any(mesh.areas <= 0.0):
        bad = int(np.argmin(mesh.areas))
        raise AssemblyError(f"degenerate element {bad}")
    g = mesh.shape_gradients  # (nt, 3, 2)
    a_q = _coeff_at_quadrature(mesh, field)
    w = mesh.areas / 3.0
    flux = np.einsum("tqab,tjb->tqja", a_q, g)
    local = np.einsum("tia,tqja->tij", g, flux) * w[:, None, None]
    t = mesh.triangles
    rows = np.repeat(t, 3, axis=1).ravel()
    cols = np.tile(t, (1, 3)).ravel()
    n = mesh.num_vertices
    mat = sp.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n))
    return mat.tocsr()


def assemble_load_scalar(mesh, f) -> np.ndarray:
    """b_i = sum_T int f l_i via the midpoint rule; f maps (n,2) -> (n,)."""
    vals = np.asarray(f(mesh.edge_midpoints.reshape(-1, 2)), dtype=float)
    vals = vals.reshape(mesh.num_triangles, 3)
    w = mesh.areas / 3.0
    b = np.zeros(mesh.num_vertices)
    t = mesh.triangles
    # shape function l_i is 0 at the opposite midpoint, 1/2 at the others
    for i in range(3):
        contrib = 0.5 * w * (vals[:, (i + 1) % 3] + vals[:, (i + 2) % 3])
        np.add.at(b, t[:, i], contrib)
    return b


def assemble_load_div(mesh, gvec) -> np.ndarray:
    """b_i = - sum_T int g . grad(l_i); g maps (n,2) -> (n,2)."""
    vals = np.asarray(gvec(mesh.edge_midpoints.reshape(-1, 2)), dtype=float)
    vals = vals.reshape(mesh.num_triangles, 3, 2)
    w = mesh.areas / 3.0
    gsum = vals.sum(axis=1)  # sum over quadrature points
    grads = mesh.shape_gradients
    contrib = -np.einsum("ta,tia->ti", gsum, grads) * w[:, None]
    b = np.zeros(mesh.num_vertices)
    np.add.at(b, mesh.triangles.ravel(), contrib.ravel())
    return b


class SparseSystem:
    """Symmetric system with per-node Dirichlet data, eliminated lazily."""

    def __init__(self, mesh, matrix, rhs=None, dirichlet_mask=None, dirichlet_values=None):
        self.mesh = mesh
        self.matrix = matrix.tocsr()
        n = mesh.num_vertices
        self.rhs = np.zeros(n) if rhs is None else np.asarray(rhs, dtype=float)
        self.dirichlet_mask = (np.zeros(n, dtype=bool) if dirichlet_mask is None
                               else np.asarray(dirichlet_mask, dtype=bool))
        self.dirichlet_values = (np.zeros(n) if dirichlet_values is None
                                 else np.asarray(dirichlet_values, dtype=float))

    def reduced(self):
        """(A_ff, b_f - A_fd x_d, free_index) after symmetric elimination."""
        free = np.nonzero(~self.dirichlet_mask)[0]
        A = self.matrix
        b = self.rhs.copy()
        if np.any(self.dirichlet_mask):
            xd = np.where(self.dirichlet_mask, self.dirichlet_values, 0.0)
            b -= A @ xd
        return A[free][:, free].tocsr(), b[free], free


def dirichlet_everywhere(mesh, values=None) -> tuple[np.ndarray, np.ndarray]:
    """Mask/value arrays pinning every tagged boundary node."""
    mask = np.zeros(mesh.num_vertices, dtype=bool)
    mask[mesh.boundary_edges.ravel()] = True
    vals = np.zeros(mesh.num_vertices)
    if values is not None:
        vals[mask] = np.asarray(values(mesh.vertices[mask]), dtype=float)
    return mask, vals


def _make_preconditioner(A, kind: str):
    if kind == "jacobi":
        diag = A.diagonal()
        if np.any(diag <= 0.0):
            raise NotSPDError("nonpositive diagonal entry in the reduced system")
        inv_diag = 1.0 / diag
        return lambda r: inv_diag * r
    if kind == "amg":
        import pyamg

        ml = pyamg.smoothed_aggregation_solver(A.tocsr(), max_coarse=64)
        M = ml.aspreconditioner(cycle="V")
        return lambda r: M @ r
    raise ValueError(f"unknown preconditioner {kind!r}")


def solve_cg(system: SparseSystem, rel_tol: float = 1e-10, max_iter: int | None = None,
             project_constant: bool = False, collect_history: bool = True,
             preconditioner: str = "jacobi") -> FEFunction:
    """Preconditioned CG on the free nodes.

    The convergence criterion is the preconditioned residual norm relative to
    the preconditioned right-hand side.  A zero right-hand side returns the
    Dirichlet extension immediately.  ``project_constant`` keeps iterates in
    the mean-zero subspace (pure-Neumann / periodic systems).  The default
    Jacobi preconditioner is dependency-free; ``"amg"`` switches to a
    smoothed-aggregation V-cycle for the million-node production runs.
    """
    def _immediate(values):
        fe = FEFunction(system.mesh, values)
        fe.residual_history = [0.0]
        fe.iterations = 0
        return fe

    A, b, free = system.reduced()
    n = b.size
    x_full = np.where(system.dirichlet_mask, system.dirichlet_values, 0.0)
    if n == 0:
        return _immediate(x_full)
    if max_iter is None:
        max_iter = 40 * int(np.sqrt(n) + 10) + 2000

    apply_m = _make_preconditioner(A, preconditioner)

    def project(v):
        if project_constant:
            v = v - v.mean()
        return v

    b = project(b)
    bnorm = float(np.sqrt(max(np.dot(b, apply_m(b)), 0.0)))
    if bnorm == 0.0:
        return _immediate(x_full)

    x = np.zeros(n)
    r = b.copy()
    z = project(apply_m(r))
    p = z.copy()
    rz = float(np.dot(r, z))
    history = [np.sqrt(abs(rz)) / bnorm]
    converged = history[-1] <= rel_tol
    it = 0
    while not converged:
        if it >= max_iter:
            raise NonConvergenceError(
                f"CG did not reach {rel_tol} in {max_iter} iterations "
                f"(last residual {history[-1]:.3e})", residual_history=history)
        Ap = A @ p
        pAp = float(np.dot(p, Ap))
        if pAp <= 0.0:
            raise NotSPDError("negative curvature direction encountered",
                              residual_history=history)
        alpha = rz / pAp
        x += alpha * p
        r -= alpha * Ap
        z = project(apply_m(r))
        rz_new = float(np.dot(r, z))
        res = np.sqrt(abs(rz_new)) / bnorm
        if collect_history:
            history.append(res)
        else:
            history[-1] = res
        converged = res <= rel_tol
        beta = rz_new / rz
        rz = rz_new
        p = z + beta * p
        it += 1

    x_full[free] = project(x) if project_constant else x
    fe = FEFunction(system.mesh, x_full)
    fe.residual_history = history
    fe.iterations = it
    return fe


def gradient_p0(u: FEFunction) -> np.ndarray:
    """(nt, 2) exact gradient of the P1 interpolant, constant per element."""
    v = u.values[u.mesh.triangles]
    return np.einsum("ti,tia->ta", v, u.mesh.shape_gradients)


def recover_gradient_nodal(u: FEFunction) -> tuple[FEFunction, FEFunction]:
    """Area-weighted average of incident element gradients at each node.

    Returns the two gradient components as FEFunctions.  Boundary nodes (the
    sector tip in particular) receive a one-sided average.
    """
    mesh = u.mesh
    g = gradient_p0(u)
    w = mesh.areas
    acc = np.zeros((mesh.num_vertices, 2))
    wsum = np.zeros(mesh.num_vertices)
    tri = mesh.triangles.ravel()
    np.add.at(acc, tri, np.repeat(g * w[:, None], 3, axis=0))
    np.add.at(wsum, tri, np.repeat(w, 3))
    acc /= wsum[:, None]
    return FEFunction(mesh, acc[:, 0]), FEFunction(mesh, acc[:, 1])


def energy_seminorm_on(mesh, element_ids, grad, area_normalized: bool = True) -> float:
    """(sum_T area |g_T|^2 [/ sum_T area])^(1/2) over an element set."""
    element_ids = np.asarray(element_ids, dtype=np.int64)
    if element_ids.size == 0:
        raise EmptyRegionError("empty element set in energy seminorm")
    a = mesh.areas[element_ids]
    g = np.asarray(grad)[element_ids]
    total = float(np.sum(a * np.einsum("ta,ta->t", g, g)))
    if area_normalized:
        total /= float(np.sum(a))
    return float(np.sqrt(total))


def l2_norm_on(mesh, element_ids, u: FEFunction, area_normalized: bool = True) -> float:
    """(sum_T int u^2 [/ sum_T area])^(1/2); midpoint rule, exact for P1^2."""
    element_ids = np.asarray(element_ids, dtype=np.int64)
    if element_ids.size == 0:
        raise EmptyRegionError("empty element set in L2 norm")
    mids = u.at_midpoints()[element_ids]
    a = mesh.areas[element_ids]
    total = float(np.sum(a / 3.0 * np.einsum("tq,tq->t", mids, mids)))
    if area_normalized:
        total /= float(np.sum(a))
    return float(np.sqrt(total))


def residual_history_csv(fe: FEFunction) -> str:
    hist = getattr(fe, "residual_history", [])
    lines = ["iteration,relative_residual"]
    lines += [f"{i},{float(r)!r}" for i, r in enumerate(hist)]
    return "\n".join(lines) + "\n"
