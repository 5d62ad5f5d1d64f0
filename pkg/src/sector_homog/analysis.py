"""Shell error curves, gain reports, slope fits, and the excess functional."""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy import stats

from .errors import EmptyRegionError, FitError, RankError
from .fem import FEFunction, SparseSystem, assemble_stiffness, dirichlet_everywhere, \
    energy_seminorm_on, gradient_p0, solve_cg
from .geometry import ARC, disk_elements, shell_elements
from .singular import SingularFunction


def shell_error_curve(mesh, err_grad, radii) -> list[tuple[float, float]]:
    """Normalized shell energy norm of a per-element gradient field."""
    return [(float(R), energy_seminorm_on(mesh, shell_elements(mesh, R), err_grad))
            for R in radii]


def loglog_slope(xs, ys) -> tuple[float, float, float]:
    """(slope, intercept, 95% half-width) of a log-log least-squares fit."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size < 2 or xs.size != ys.size:
        raise FitError("need at least two (x, y) pairs")
    if np.any(xs <= 0.0) or np.any(ys <= 0.0):
        raise FitError("log-log fit needs positive data")
    lx, ly = np.log(xs), np.log(ys)
    n = lx.size
    vx = lx - lx.mean()
    denom = float(np.dot(vx, vx))
    if denom == 0.0:
        raise FitError("degenerate abscissae")
    slope = float(np.dot(vx, ly - ly.mean()) / denom)
    intercept = float(ly.mean() - slope * lx.mean())
    resid = ly - (intercept + slope * lx)
    if n > 2:
        se = math.sqrt(float(np.dot(resid, resid)) / (n - 2) / denom)
        half = float(stats.t.ppf(0.975, n - 2) * se)
    else:
        half = 0.0
    return slope, intercept, half


def dyadic_radii(r_max: float, r_min: float, per_octave: int = 4) -> list[float]:
    """Radii descending from r_max by factor 2^(1/per_octave), down to r_min."""
    out = []
    r = float(r_max)
    q = 2.0 ** (1.0 / per_octave)
    while r >= r_min * (1.0 - 1e-12):
        out.append(r)
        r /= q
    return out


def excess(mesh, u_grad, r: float, basis_grads) -> tuple[float, np.ndarray]:
    """Least-squares distance of grad u to the span of basis gradients on D_r.

    Returns (area-averaged squared residual, minimizing coefficients); an
    empty basis gives the plain averaged energy.
    """
    ids = disk_elements(mesh, r)
    a = mesh.areas[ids]
    total_area = float(a.sum())
    gu = np.asarray(u_grad)[ids]
    N = len(basis_grads)
    if N == 0:
        val = float(np.sum(a * np.einsum("ta,ta->t", gu, gu)) / total_area)
        return val, np.zeros(0)
    B = np.stack([np.asarray(bg)[ids] for bg in basis_grads])  # (N, m, 2)
    gram = np.einsum("nta,mta,t->nm", B, B, a)
    rhs = np.einsum("nta,ta,t->n", B, gu, a)
    cond = np.linalg.cond(gram)
    if not np.isfinite(cond) or cond > 1e12:
        raise RankError(f"degenerate excess basis on D_{r}: cond={cond:.2e}")
    coef = np.linalg.solve(gram, rhs)
    resid = gu - np.einsum("n,nta->ta", coef, B)
    val = float(np.sum(a * np.einsum("ta,ta->t", resid, resid)) / total_area)
    return val, coef


def random_arc_data(omega: float, seed: int, n_modes: int = 6):
    """Smooth random Dirichlet data on the arc, vanishing at both edges.

    Mode-1 anchored so the leading sector mode is always present; higher
    modes decay quadratically.
    """
    rng = np.random.default_rng(seed)
    xi = rng.standard_normal(n_modes)
    coef = np.array([0.3 * x / (m + 1) ** 2 for m, x in enumerate(xi)])
    coef[0] = 1.0 + 0.3 * xi[0]

    def g(pts):
        pts = np.asarray(pts, dtype=float)
        th = np.arctan2(pts[..., 1], pts[..., 0])
        th = np.where(th < 0.0, th + 2.0 * np.pi, th)
        out = np.zeros(pts.shape[:-1])
        for m, c in enumerate(coef, start=1):
            out += c * np.sin(m * np.pi * th / omega)
        return out

    g.coefficients = coef
    return g


def solve_a_harmonic(mesh, field, seed: int, rel_tol: float = 1e-10,
                     stiffness=None, precond: str = "jacobi") -> FEFunction:
    """a-harmonic function: zero forcing, random smooth data on the arc."""
    A = assemble_stiffness(mesh, field) if stiffness is None else stiffness
    g = random_arc_data(mesh.domain.omega, seed)
    mask, vals = dirichlet_everywhere(mesh)
    arc_nodes = mesh.boundary_vertex_ids(ARC)
    vals[arc_nodes] = g(mesh.vertices[arc_nodes])
    return solve_cg(SparseSystem(mesh, A, np.zeros(mesh.num_vertices), mask, vals),
                    rel_tol=rel_tol, preconditioner=precond)


def corrected_mode_gradients(mesh, field, N: int, rel_tol: float = 1e-10,
                             phi_corner: dict | None = None, stiffness=None):
    """Per-element gradients of interp(t_n) + phi^C_n for n = 1..N."""
    from .correctors import solve_corner_corrector

    grads = []
    for n in range(1, N + 1):
        sf = SingularFunction(n, mesh.domain.omega)
        base = FEFunction(mesh, sf.value(mesh.vertices))
        if phi_corner is not None and n in phi_corner:
            pc = phi_corner[n]
        else:
            pc = solve_corner_corrector(mesh, field, n, rel_tol, stiffness=stiffness)
        grads.append(gradient_p0(base + pc))
    return grads


def excess_decay_experiment(mesh, field, N: int, seed: int, radii=None,
                            rel_tol: float = 1e-10, fit_rmin_factor: float = 8.0,
                            phi_corner=None, stiffness=None):
    """Excess table over shrinking disks plus a fitted decay exponent.

    The slope window keeps radii >= fit_rmin_factor * eps (relaxed to
    4 * eps when fewer than four radii survive) and <= half the domain.
    """
    dom = mesh.domain
    u = solve_a_harmonic(mesh, field, seed, rel_tol, stiffness=stiffness)
    gu = gradient_p0(u)
    basis = corrected_mode_gradients(mesh, field, N, rel_tol, phi_corner, stiffness)
    eps = getattr(field, "oscillation_scale", 0.0)
    if radii is None:
        r_floor = 4.0 * eps if np.isfinite(eps) and eps > 0 else dom.outer_radius / 64.0
        r_floor = min(max(r_floor, 1e-6), dom.outer_radius / 4.0)
        radii = dyadic_radii(dom.outer_radius / 2.0, r_floor)
    rows = []
    for r in radii:
        val, coef = excess(mesh, gu, r, basis)
        rows.append((float(r), val, coef))
    fitted = fit_excess_exponent(rows, eps, dom.outer_radius, fit_rmin_factor)
    return rows, fitted


def fit_excess_exponent(rows, eps, outer_radius, fit_rmin_factor=8.0):
    rrs = np.array([r for r, _, _ in rows])
    vals = np.array([v for _, v, _ in rows])
    keep = vals > 0
    window = keep & (rrs <= outer_radius / 2.0 * (1 + 1e-12))
    if np.isfinite(eps) and eps > 0:
        strict = window & (rrs >= fit_rmin_factor * eps)
        if strict.sum() < 4:
            strict = window & (rrs >= 0.5 * fit_rmin_factor * eps)
        if strict.sum() >= 2:
            window = strict
        # else: coarse-epsilon run, fit over whatever interior radii exist
    if window.sum() < 2:
        raise EmptyRegionError("too few radii in the excess fit window")
    slope, _, half = loglog_slope(rrs[window], vals[window])
    return {"exponent": slope, "half_width": half, "n_points": int(window.sum())}


@dataclass
class ExperimentReport:
    """Shell-wise errors of both expansions plus gain and fitted slopes."""

    shell_radii: list
    E0: list
    E1: list
    config: dict = dc_field(default_factory=dict)
    slope_gain: tuple = None
    slope_E0: tuple = None
    slope_E1: tuple = None

    @property
    def gain(self) -> list:
        return [a / b if b > 0 else math.inf for a, b in zip(self.E0, self.E1)]

    def fit_slopes(self, r_min: float = 0.0, r_max: float = math.inf):
        sel = [i for i, r in enumerate(self.shell_radii)
               if r_min <= r <= r_max and self.E0[i] > 0 and self.E1[i] > 0]
        if len(sel) < 4:
            raise FitError("slope fit needs at least 4 usable shells")
        rr = [self.shell_radii[i] for i in sel]
        self.slope_E0 = loglog_slope(rr, [self.E0[i] for i in sel])
        self.slope_E1 = loglog_slope(rr, [self.E1[i] for i in sel])
        self.slope_gain = loglog_slope(rr, [self.gain[i] for i in sel])
        return self

    def csv(self) -> str:
        lines = ["R,E0,E1,gain"]
        for r, e0, e1, gn in zip(self.shell_radii, self.E0, self.E1, self.gain):
            lines.append(f"{float(r)!r},{float(e0)!r},{float(e1)!r},{float(gn)!r}")
        return "\n".join(lines) + "\n"


def gain_report(mesh, err_classical, err_hybrid, radii, config=None) -> ExperimentReport:
    E0 = [v for _, v in shell_error_curve(mesh, err_classical, radii)]
    E1 = [v for _, v in shell_error_curve(mesh, err_hybrid, radii)]
    return ExperimentReport(shell_radii=[float(r) for r in radii], E0=E0, E1=E1,
                            config=dict(config or {}))


def excess_csv(rows) -> str:
    n = len(rows[0][2]) if rows else 0
    head = "r,excess" + "".join(f",gamma_{k}" for k in range(1, n + 1))
    lines = [head]
    for r, v, coef in rows:
        lines.append(",".join([repr(float(r)), repr(float(v))] + [repr(float(c)) for c in coef]))
    return "\n".join(lines) + "\n"
