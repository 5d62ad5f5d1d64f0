import math

import numpy as np
import pytest

from sector_homog.cell import solve_corrector_suite
from sector_homog.expansion import assemble_bundle
from sector_homog.fem import assemble_stiffness
from sector_homog.fields import (RotatedPeriodicField, default_periodic_cell,
                                 normalize_to_identity)
from sector_homog.geometry import SectorDomain, TriMesh, build_sector_mesh

OMEGA = 1.95 * math.pi
RHO1 = math.pi / OMEGA
RHO2 = 2.0 * math.pi / OMEGA
RHO3 = 3.0 * math.pi / OMEGA


@pytest.fixture(scope="session")
def sector_dom():
    return SectorDomain(OMEGA, 1.0)


@pytest.fixture(scope="session")
def mesh_small(sector_dom):
    """Coarse graded mesh of the 1.95*pi sector for cheap checks."""
    return build_sector_mesh(sector_dom, 0.05, 2.0)


@pytest.fixture(scope="session")
def mesh_half_disk():
    return build_sector_mesh(SectorDomain(math.pi, 1.0), 0.05, 1.0)


@pytest.fixture(scope="session")
def cell_suites():
    """Cache of unit-cell solves keyed by (epsilon, with_flux)."""
    cache = {}

    def get(eps, with_flux=False, grid=256):
        key = (eps, with_flux, grid)
        if key not in cache:
            field = RotatedPeriodicField(default_periodic_cell(), 0.35, eps)
            cache[key] = solve_corrector_suite(field, grid, with_flux=with_flux)
        return cache[key]

    return get


@pytest.fixture(scope="session")
def normalized_fields(cell_suites):
    """Normalized rotated-periodic field per epsilon (shared cell solve)."""
    cache = {}

    def get(eps):
        if eps not in cache:
            field = RotatedPeriodicField(default_periodic_cell(), 0.35, eps)
            cache[eps] = normalize_to_identity(field, cell_suites(eps).abar)
        return cache[eps]

    return get


@pytest.fixture(scope="session")
def normalized_cell_suites(normalized_fields):
    """Cell solves on the normalized field (abar = Id), with flux correctors."""
    cache = {}

    def get(eps):
        if eps not in cache:
            cache[eps] = solve_corrector_suite(normalized_fields(eps), 256, with_flux=True)
        return cache[eps]

    return get


@pytest.fixture(scope="session")
def gain_run(sector_dom, normalized_fields):
    """The production gain configuration: eps = 0.05, h = eps/8, g = 2."""
    eps = 0.05
    mesh = build_sector_mesh(sector_dom, eps / 8.0, 2.0)
    field = normalized_fields(eps)
    stiffness = assemble_stiffness(mesh, field)
    bundle = assemble_bundle(mesh, field, rel_tol=1e-10, stiffness=stiffness,
                             precond="amg")
    return {"epsilon": eps, "mesh": mesh, "field": field,
            "stiffness": stiffness, "bundle": bundle}


def structured_square_mesh(n, alternate=True):
    """Uniform triangulation of [0,1]^2 for patch tests (not a sector)."""
    xs = np.linspace(0.0, 1.0, n + 1)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    verts = np.stack([X.ravel(), Y.ravel()], axis=1)

    def nid(i, j):
        return i * (n + 1) + j

    tris, edges = [], []
    for i in range(n):
        for j in range(n):
            a, b = nid(i, j), nid(i + 1, j)
            c, d = nid(i + 1, j + 1), nid(i, j + 1)
            if (not alternate) or (i + j) % 2 == 0:
                tris += [(a, b, c), (a, c, d)]
            else:
                tris += [(a, b, d), (b, c, d)]
    for i in range(n):
        edges.append((nid(i, 0), nid(i + 1, 0)))
        edges.append((nid(i, n), nid(i + 1, n)))
        edges.append((nid(0, i), nid(0, i + 1)))
        edges.append((nid(n, i), nid(n, i + 1)))
    tags = np.array(["ARC"] * len(edges), dtype=object)
    return TriMesh(verts, np.array(tris), np.array(edges), tags, validate=False)
