"""Energy functionals, variation pairings, Jacobi-type operators.

The symphonic-Jacobi operator is assembled from six term groups:

    A = 2 h(nab_i v, dphi_j) S_ij
    B = [ h(tr nab^2 v, dphi_j) + h(nab_j v, tr S) ] dphi_j
    C = [ h(S_ij, dphi_j) + h(dphi_i, tr S) ] nab_i v
    D = h(dphi_i, dphi_j) [ nab^2 v (e_j, e_i) + R^N(v, dphi_j) dphi_i ]
    E = h(nab_i v, S_ij) dphi_j
    F = h(nab^2 v (e_j, e_i), dphi_j) dphi_i

(frame indices i, j summed, S the second fundamental form, nab the
pullback connection).  Two variants are exposed:

  * "reduced": A + B + C + D, the classical four-group form whose
    closed-form catalog values (power curves, sphere inclusion) hold;
  * "full": all six groups.  The two extra coupling terms are required
    for the pairing -4 int h(J v, w) to reproduce finite-difference
    second variations of the energy; the reduced form fails that check
    by exactly the E and F contributions.

The bi-tension is this operator applied to the symphonic tension of
the map itself, evaluated through jet-valued fields.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import expr as ex
from . import geometry as geo
from . import maps as mp
from .jet import Jet, compose
from .mesh import Mesh

REDUCED = "reduced"
FULL = "full"
_VARIANTS = (REDUCED, FULL)


def _check_variant(variant):
    if variant not in _VARIANTS:
        raise ValueError(f"variant must be one of {_VARIANTS}, got {variant!r}")


# target data composed along the map ---------------------------------------


def _target_constant(target) -> bool:
    return all(ex.is_constant(target.metric[a][b])
               for a in range(target.dim) for b in range(target.dim))


def _composed_target_jets(target, comp_jets, gamma_order):
    """h  and Gamma^N along the map, as jets in the source variables.

    gamma_order is the requested order of the composed Christoffel
    jets; the metric jets come out one order higher.
    """
    n = target.dim
    if _target_constant(target):
        h_phi = [[float(ex.eval_value(target.metric[a][b], target.coords,
                                      [0.0] * n))
                  for b in range(n)] for a in range(n)]
        gam_phi = [[[0.0] * n for _ in range(n)] for _ in range(n)]
        return h_phi, gam_phi
    y0 = [j.value for j in comp_jets]
    target.require_inside(y0)
    g_yjets = geo.metric_jets(target, y0, gamma_order + 1)
    gam_yjets = geo.christoffel_jets(g_yjets)
    h_phi = [[compose(g_yjets[a][b], comp_jets) for b in range(n)]
             for a in range(n)]
    gam_phi = [[[compose(_as_jet(gam_yjets[a][b][c], n, gamma_order, y0),
                         comp_jets)
                 for c in range(n)] for b in range(n)] for a in range(n)]
    return h_phi, gam_phi


def _as_jet(v, nvars, order, point):
    if isinstance(v, Jet):
        return v
    return Jet.constant(float(v), nvars, order, tuple(point))


def _hdot(h, u, w):
    """h-inner product for lists of scalars (floats or jets)."""
    n = len(u)
    acc = 0.0
    for a in range(n):
        for b in range(n):
            hab = h[a][b]
            if geo._is_zero_scalar(hab):
                continue
            if isinstance(hab, float) and hab == 1.0:
                acc = acc + u[a] * w[b]
            else:
                acc = acc + hab * u[a] * w[b]
    return acc


# jet-valued symphonic tension ----------------------------------------------


def tau_s_jets(spec: mp.MapSpec, x, comp_jets=None, order: int = 4):
    """Symphonic tension components as source-variable jets.

    With component jets of order p the result has order p - 2, which
    feeds the bi-tension assembly (p = 4 gives the required order 2).
    """
    if comp_jets is None:
        comp_jets = spec.component_jets(x, order)
    p = comp_jets[0].order
    if p < 3:
        raise ValueError("tau_s_jets needs component jets of order >= 3")
    m, n = spec.source.dim, spec.target.dim
    d1 = [[comp_jets[a].partial(i) for a in range(n)] for i in range(m)]
    d2 = [[[d1[i][a].partial(j) for a in range(n)] for j in range(m)]
          for i in range(m)]
    g_jets = geo.metric_jets(spec.source, x, p - 1)
    gammaM = geo.christoffel_jets(g_jets)
    ginv = geo.mat_inv(g_jets)
    h_phi, gam_phi = _composed_target_jets(spec.target, comp_jets, p - 2)
    # covariant second fundamental form, jet entries of order p - 2
    zero = geo._is_zero_scalar
    sff = [[[None] * n for _ in range(m)] for _ in range(m)]
    for i in range(m):
        for j in range(i, m):
            for a in range(n):
                acc = d2[i][j][a]
                for k in range(m):
                    if not zero(gammaM[k][i][j]):
                        acc = acc - gammaM[k][i][j] * d1[k][a]
                for b in range(n):
                    for c in range(n):
                        gj = gam_phi[a][b][c]
                        if zero(gj):
                            continue
                        acc = acc + gj * d1[i][b] * d1[j][c]
                sff[i][j][a] = acc
            sff[j][i] = sff[i][j]
    # raised objects (skip vanishing inverse-metric entries)
    draise = [[None] * n for _ in range(m)]
    for q in range(m):
        for a in range(n):
            acc = 0.0
            for pp in range(m):
                if not zero(ginv[pp][q]):
                    acc = acc + ginv[pp][q] * d1[pp][a]
            draise[q][a] = acc
    tension = [None] * n
    for a in range(n):
        acc = 0.0
        for pp in range(m):
            for q in range(m):
                if not zero(ginv[pp][q]):
                    acc = acc + ginv[pp][q] * sff[pp][q][a]
        tension[a] = acc
    # term 1: sum_s h(tension, draise_s) d1_s
    t_r = [_hdot(h_phi, tension, d1[r]) for r in range(m)]
    # term 2 coefficients: c_r = sum_q h(draise_q, sff_qr)
    c_r = []
    for r in range(m):
        acc = 0.0
        for q in range(m):
            acc = acc + _hdot(h_phi, draise[q], sff[q][r])
        c_r.append(acc)
    out = []
    for a in range(n):
        acc = 0.0
        for r in range(m):
            tc = t_r[r] + c_r[r]
            for s in range(m):
                if not zero(ginv[r][s]):
                    acc = acc + ginv[r][s] * tc * d1[s][a]
        # term 3: sum_{q,s} h(draise_q, draise_s) sff_qs
        for q in range(m):
            for s in range(m):
                acc = acc + _hdot(h_phi, draise[q], draise[s]) * sff[q][s][a]
        out.append(acc if isinstance(acc, Jet)
                   else Jet.constant(float(acc), comp_jets[0].nvars, p - 2,
                                     comp_jets[0].point))
    return out


# covariant derivatives of a field along the map -----------------------------


def field_covariant_data(spec: mp.MapSpec, x, v_jets, comp_jets=None,
                         tables: mp.MapTables = None):
    """Values of v, nabla v, nabla^2 v at x for a field given by jets.

    v_jets must have order >= 2.  Returns (v (n,), Dv (m,n),
    DDv (m,m,n)) where DDv[i,j] is the second covariant derivative with
    outer direction i, using the source connection on the form index
    and the pullback connection on the bundle index.
    """
    m, n = spec.source.dim, spec.target.dim
    if comp_jets is None:
        comp_jets = spec.component_jets(x, 2)
    if tables is None:
        tables = mp.tables_from_jets(spec, x, comp_jets, curvature=True)
    _, gam_phi = _composed_target_jets(spec.target, comp_jets, 1)
    d1_jets = [[comp_jets[a].partial(i) for a in range(n)] for i in range(m)]
    v = np.array([j.value for j in v_jets])
    # first covariant derivative as jets (order >= 1)
    dv_jets = [[None] * n for _ in range(m)]
    for i in range(m):
        for a in range(n):
            acc = v_jets[a].partial(i)
            for b in range(n):
                for c in range(n):
                    gj = gam_phi[a][b][c]
                    if geo._is_zero_scalar(gj):
                        continue
                    acc = acc + gj * d1_jets[i][b] * v_jets[c]
            dv_jets[i][a] = acc
    dv = np.array([[dv_jets[i][a].value for a in range(n)] for i in range(m)])
    ddv = np.empty((m, m, n))
    gamN = tables.gammaN
    gammaM = tables.gammaM
    d1 = tables.d1
    for i in range(m):
        for j in range(m):
            for a in range(n):
                acc = dv_jets[j][a].gradient()[i]
                for b in range(n):
                    for c in range(n):
                        acc += gamN[a, b, c] * d1[i, b] * dv[j, c]
                for k in range(m):
                    acc -= gammaM[k, i, j] * dv[k, a]
                ddv[i, j, a] = acc
    return v, dv, ddv


# the operator assembly ------------------------------------------------------


def jacobi_groups(tables: mp.MapTables, v, dv, ddv, frame=None) -> dict:
    """The six term groups of the Jacobi-type operator, as vectors.

    v, dv, ddv are coordinate-index arrays from field_covariant_data;
    the groups are frame traces over the given orthonormal frame.
    """
    E = tables.frame if frame is None else frame
    h = tables.h
    df = E @ tables.d1                                     # (m, n)
    sf = np.einsum("ip,jq,pqa->ija", E, E, tables.sff)     # (m, m, n)
    dvF = E @ dv
    ddvF = np.einsum("jp,iq,pqa->jia", E, E, ddv)          # (j, i) outer j
    tphi = np.einsum("iia->a", sf)
    lap = np.einsum("iia->a", ddvF)
    hd = lambda u, w: float(u @ h @ w)
    m = df.shape[0]
    gA = sum(2.0 * hd(dvF[i], df[j]) * sf[i, j]
             for i in range(m) for j in range(m))
    gB = sum((hd(lap, df[j]) + hd(dvF[j], tphi)) * df[j] for j in range(m))
    gC = sum((sum(hd(sf[i, j], df[j]) for j in range(m)) + hd(df[i], tphi))
             * dvF[i] for i in range(m))
    if tables.riemN is not None:
        curv = np.einsum("akcd,c,jd,ib->jia", tables.riemN, v, df, df)
    else:
        curv = np.zeros((m, m, len(v)))
    gD = sum(hd(df[i], df[j]) * (ddvF[j, i] + curv[j, i])
             for i in range(m) for j in range(m))
    gE = sum(hd(dvF[i], sf[i, j]) * df[j] for i in range(m) for j in range(m))
    gF = sum(hd(ddvF[j, i], df[j]) * df[i] for i in range(m) for j in range(m))
    return {"A": gA, "B": gB, "C": gC, "D": gD, "E": gE, "F": gF}


def _assemble(groups: dict, variant: str) -> np.ndarray:
    out = groups["A"] + groups["B"] + groups["C"] + groups["D"]
    if variant == FULL:
        out = out + groups["E"] + groups["F"]
    return out


def jacobi_operator(spec: mp.MapSpec, x, field, variant: str = REDUCED,
                    frame=None) -> np.ndarray:
    """Apply the Jacobi-type operator to a tangent field at a point.

    field is a TangentField or an already-evaluated list of component
    jets of order >= 2.
    """
    _check_variant(variant)
    spec.source.require_inside(x)
    comp_jets = spec.component_jets(x, 2)
    tables = mp.tables_from_jets(spec, x, comp_jets, curvature=True,
                                 frame=frame)
    v_jets = (field.jets(spec.source.coords, x, 2)
              if isinstance(field, mp.TangentField) else field)
    v, dv, ddv = field_covariant_data(spec, x, v_jets, comp_jets, tables)
    groups = jacobi_groups(tables, v, dv, ddv, frame=frame)
    return _assemble(groups, variant)


def _bi_tension_groups_with_tables(spec, x, frame=None):
    spec.source.require_inside(x)
    comp_jets = spec.component_jets(x, 4)
    tau_jets = tau_s_jets(spec, x, comp_jets)
    tables = mp.tables_from_jets(spec, x, comp_jets, curvature=True,
                                 frame=frame)
    v, dv, ddv = field_covariant_data(spec, x, tau_jets, comp_jets, tables)
    return jacobi_groups(tables, v, dv, ddv, frame=frame), tables


def bi_tension(spec: mp.MapSpec, x, variant: str = REDUCED,
               frame=None) -> np.ndarray:
    """The Jacobi-type operator applied to the symphonic tension."""
    _check_variant(variant)
    groups, _ = _bi_tension_groups_with_tables(spec, x, frame=frame)
    return _assemble(groups, variant)


def bi_tension_groups(spec: mp.MapSpec, x, frame=None) -> dict:
    """Term-by-term breakdown of the bi-tension at a point."""
    groups, _ = _bi_tension_groups_with_tables(spec, x, frame=frame)
    return groups


def sphere_term_breakdown(m: int, x=None):
    """The four primary bi-tension term groups for the inclusion of S^m,
    as (coefficient along the position vector, group vector) pairs.

    Expected coefficients: (2 m^2, 0, 0, m^2).
    """
    from . import charts
    if m < 2:
        raise ValueError("sphere breakdown needs m >= 2")
    inc = charts.sphere_inclusion(m)
    if x is None:
        x = [0.5 * (lo + hi) for lo, hi in inc.source.intervals]
        x[-1] = 1.0
    pos = inc.value(x)
    groups = bi_tension_groups(inc, x)
    return [(float(groups[k] @ pos), groups[k]) for k in "ABCD"]


# integrals and pairings -----------------------------------------------------


def symphonic_energy(spec: mp.MapSpec, mesh: Mesh) -> float:
    """Integral of |phi^* h|^2 against dv_g."""
    dens = [mp.symphonic_energy_density(spec, p) for p in mesh.points]
    return mesh.integrate(dens)


def bi_energy(spec: mp.MapSpec, mesh: Mesh) -> float:
    """Integral of |tau^s|^2 against dv_g."""
    dens = []
    for p in mesh.points:
        t = mp.map_tables(spec, p)
        tau = mp.tau_s_from_tables(t)
        dens.append(float(tau @ t.h @ tau))
    return mesh.integrate(dens)


def first_variation_pairing(spec: mp.MapSpec, field: mp.TangentField,
                            mesh: Mesh) -> float:
    """-4 int h(tau^s, v) dv_g, the closed-form first variation."""
    vals = []
    for p in mesh.points:
        t = mp.map_tables(spec, p)
        tau = mp.tau_s_from_tables(t)
        v = field.values(spec.source.coords, p)
        vals.append(float(tau @ t.h @ v))
    return -4.0 * mesh.integrate(vals)


def bi_variation_pairing(spec: mp.MapSpec, field: mp.TangentField,
                         mesh: Mesh, variant: str = FULL) -> float:
    """-1 int h(v, tau^s_2) dv_g, the classically normalized
    bi-energy pairing."""
    _check_variant(variant)
    vals = []
    for p in mesh.points:
        tau2 = bi_tension(spec, p, variant=variant)
        t = mp.map_tables(spec, p)
        v = field.values(spec.source.coords, p)
        vals.append(float(v @ t.h @ tau2))
    return -1.0 * mesh.integrate(vals)


def index_form_pairing(spec: mp.MapSpec, vfield: mp.TangentField,
                       wfield: mp.TangentField, mesh: Mesh,
                       variant: str = FULL) -> float:
    """-4 int h(J v, w) dv_g, the closed-form second variation."""
    _check_variant(variant)
    vals = []
    for p in mesh.points:
        jv = jacobi_operator(spec, p, vfield, variant=variant)
        t = mp.map_tables(spec, p)
        w = wfield.values(spec.source.coords, p)
        vals.append(float(jv @ t.h @ w))
    return -4.0 * mesh.integrate(vals)


@dataclass
class VariationReport:
    """Side-by-side record of a closed-form pairing and its
    finite-difference oracle value."""

    analytic: float
    oracle: float
    mesh_description: str
    fd_step: float

    @property
    def abs_discrepancy(self) -> float:
        return abs(self.analytic - self.oracle)

    @property
    def rel_discrepancy(self) -> float:
        scale = max(abs(self.analytic), abs(self.oracle), 1e-300)
        return self.abs_discrepancy / scale
