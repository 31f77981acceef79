"""Finite-difference ground truth for the variation formulas.

Deformations are coordinate-additive: the deformed map has target
coordinates phi^a + t v^a + s w^a, so its variation vector field at
t = 0 is exactly v.  First derivatives use the 4-point central stencil
(design order 4), mixed second derivatives the 2x2 cross stencil
(design order 2).  Everything reduces with deterministic pairwise
summation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import expr as ex
from . import geometry as geo
from . import maps as mp
from .mesh import Mesh, pairwise_sum

DEFAULT_FIRST_STEP = 1e-3
DEFAULT_SECOND_STEP = 1e-2

ENERGY_SYM = "sym"
ENERGY_BISYM = "bisym"


class StepTooLargeError(RuntimeError):
    """A deformed image left the target chart at the requested step."""


@dataclass
class Deformation:
    """Coordinate-additive deformation of a map along one or two
    tangent fields."""

    spec: mp.MapSpec
    v: mp.TangentField
    w: mp.TangentField = None

    def energy_fn(self, mesh: Mesh, energy: str = ENERGY_SYM):
        """E(s, t) over the mesh, with per-point data precomputed.

        The returned callable evaluates the chosen energy of the
        deformed map; pass s=0 for one-parameter families.
        """
        if energy not in (ENERGY_SYM, ENERGY_BISYM):
            raise ValueError(f"unknown energy {energy!r}")
        spec = self.spec
        coords = spec.source.coords
        order = 1 if energy == ENERGY_SYM else 2
        points = []
        for p in mesh.points:
            cj = spec.component_jets(p, order)
            vj = self.v.jets(coords, p, order)
            wj = (self.w.jets(coords, p, order)
                  if self.w is not None else None)
            src = mp.source_point_data(spec.source, p) if order == 2 else \
                (None, None, geo.frame_at(spec.source, p).vectors)
            points.append((p, cj, vj, wj, src))

        def energy_at(s: float, t: float) -> float:
            dens = np.empty(len(points))
            for k, (p, cj, vj, wj, src) in enumerate(points):
                jets = [c + t * v for c, v in zip(cj, vj)]
                if wj is not None and s != 0.0:
                    jets = [c + s * w for c, w in zip(jets, wj)]
                try:
                    if energy == ENERGY_SYM:
                        dens[k] = _sym_density(spec, jets, src[2])
                    else:
                        t2 = mp.tables_from_jets(spec, p, jets,
                                                 source_data=src)
                        tau = mp.tau_s_from_tables(t2)
                        dens[k] = float(tau @ t2.h @ tau)
                except geo.DomainError as err:
                    raise StepTooLargeError(
                        f"deformation step left the target domain at "
                        f"source point {list(map(float, p))}: {err}") from err
            return pairwise_sum(mesh.weights * mesh.sqrtg * dens)

        return energy_at


def _sym_density(spec, jets, frame) -> float:
    n = spec.target.dim
    y = [j.value for j in jets]
    spec.target.require_inside(y)
    d1 = np.array([j.gradient() for j in jets]).T  # (m, n)
    h = np.empty((n, n))
    for a in range(n):
        for b in range(a, n):
            h[a, b] = h[b, a] = ex.eval_value(
                spec.target.metric[a][b], spec.target.coords, y)
    df = frame @ d1
    gram = df @ h @ df.T
    return float(np.sum(gram * gram))


def fd_first_variation(spec: mp.MapSpec, v: mp.TangentField, mesh: Mesh,
                       step: float = DEFAULT_FIRST_STEP,
                       energy: str = ENERGY_SYM) -> float:
    """d/dt E(phi + t v) at t = 0 by the 4-point central stencil."""
    fn = Deformation(spec, v).energy_fn(mesh, energy)
    h = float(step)
    return (-fn(0.0, 2 * h) + 8 * fn(0.0, h)
            - 8 * fn(0.0, -h) + fn(0.0, -2 * h)) / (12 * h)


def fd_second_variation(spec: mp.MapSpec, v: mp.TangentField,
                        w: mp.TangentField, mesh: Mesh,
                        step: float = DEFAULT_SECOND_STEP,
                        energy: str = ENERGY_SYM) -> float:
    """Mixed d^2/(ds dt) E(phi + t v + s w) at 0 by the cross stencil."""
    fn = Deformation(spec, v, w).energy_fn(mesh, energy)
    h = float(step)
    return (fn(h, h) - fn(h, -h) - fn(-h, h) + fn(-h, -h)) / (4 * h * h)


def richardson_order(value_h, value_h2, value_h4):
    """Observed convergence order from values at steps h, h/2, h/4.

    Returns None when successive differences are too small to resolve
    an order (converged or degenerate stencil).
    """
    d1 = value_h - value_h2
    d2 = value_h2 - value_h4
    scale = max(abs(value_h), abs(value_h2), abs(value_h4), 1.0)
    if abs(d2) < 1e-14 * scale or abs(d1) < 1e-14 * scale:
        return None
    ratio = d1 / d2
    if ratio <= 0:
        return None
    return math.log2(ratio)


def observed_first_variation_order(spec, v, mesh, step,
                                   energy: str = ENERGY_SYM):
    """Richardson order of the first-variation stencil at steps
    step, step/2, step/4."""
    vals = [fd_first_variation(spec, v, mesh, step / 2 ** k, energy)
            for k in range(3)]
    return richardson_order(*vals)
