"""Gradient flow of sampled maps on fully periodic flat sources.

The map is carried as grid samples over a flat torus chart; all
derivatives use order-4 central differences, so the grid tension agrees
with the jet-computed tension to O(dx^4).  Steps follow explicit Euler
on d phi/dt = tau^s with energy-monotone acceptance: a candidate step
is kept only if the energy does not increase, otherwise the step size
is halved (20 rejections in a row end the run as stalled).

The bi-energy descent (d phi/dt = -tau^s_2, full variant) is wired
behind the same interface but is experimental; its operator is degree
seven in derivative data and needs looser tolerances.

Restrictions in this version: the source chart must be fully periodic
with a constant metric, and the target metric must be constant.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import expr as ex
from . import geometry as geo
from . import maps as mp
from .mesh import pairwise_sum

MIN_RESOLUTION = 8
MAX_HALVINGS = 20

ENERGY_SYM = "sym"
ENERGY_BISYM = "bisym"

STATUS_RUNNING = "running"
STATUS_CONVERGED = "converged-symphonic"
STATUS_CONVERGED_BISYM = "converged-bisymphonic"
STATUS_STALLED = "stalled"
STATUS_BUDGET = "budget-exhausted"
STATUS_ABORTED = "aborted-domain"


class FlowSetupError(ValueError):
    pass


def _constant_metric_values(model):
    n = model.dim
    for a in range(n):
        for b in range(n):
            if not ex.is_constant(model.metric[a][b]):
                return None
    return np.array([[ex.eval_value(model.metric[a][b], model.coords,
                                    [0.0] * n) for b in range(n)]
                     for a in range(n)])


@dataclass
class FlowState:
    """Grid data of the evolving map plus step-control state.

    The map is split as phi = linear . x + remainder with a periodic
    remainder, so derivative stencils never cross a winding seam; the
    descent direction is itself periodic, hence only the remainder
    evolves.
    """

    source: geo.ManifoldModel
    target: geo.ManifoldModel
    linear: np.ndarray           # (n, m) winding part, constant in time
    rem: np.ndarray              # (n, N1, ..., Nm) periodic remainder
    coord_grids: np.ndarray      # (m, N1, ..., Nm) node coordinates
    spacings: list
    g: np.ndarray                # constant source metric
    ginv: np.ndarray
    sqrtg: float
    frame: np.ndarray            # constant orthonormal frame, rows e_i
    h: np.ndarray                # constant target metric
    epsilon: float
    epsilon0: float
    energy: str = ENERGY_SYM
    iteration: int = 0
    status: str = STATUS_RUNNING
    energy_history: list = field(default_factory=list)

    @property
    def grid_shape(self):
        return self.rem.shape[1:]

    @property
    def phi(self):
        """Map values on the grid, linear part included."""
        return self.rem + np.einsum("ak,k...->a...", self.linear,
                                    self.coord_grids)


def _winding_matrix(spec: mp.MapSpec) -> np.ndarray:
    """Linear part of a torus map from winding increments.

    A[a, i] = (phi^a(x0 + L_i e_i) - phi^a(x0)) / L_i, exact whenever
    the map is linear plus periodic.
    """
    source = spec.source
    m, n = source.dim, spec.target.dim
    x0 = [0.5 * (lo + hi) for lo, hi in source.intervals]
    base = spec.value(x0)
    a = np.empty((n, m))
    for i in range(m):
        lo, hi = source.intervals[i]
        shifted = list(x0)
        shifted[i] += hi - lo
        a[:, i] = (np.array([ex.eval_value(c, source.coords, shifted)
                             for c in spec.components]) - base) / (hi - lo)
    return a


def flow_init(spec: mp.MapSpec, resolution: int, epsilon: float = 1e-2,
              energy: str = ENERGY_SYM) -> FlowState:
    """Sample a map spec onto a periodic grid and seed the history."""
    source, target = spec.source, spec.target
    m = source.dim
    if not all(source.periodic):
        raise FlowSetupError("flow requires a fully periodic source chart")
    if isinstance(resolution, int):
        resolution = [resolution] * m
    if any(r < MIN_RESOLUTION for r in resolution):
        raise FlowSetupError(
            f"grid resolution below {MIN_RESOLUTION} per axis is too coarse")
    g = _constant_metric_values(source)
    if g is None:
        raise FlowSetupError("flow requires a constant source metric")
    h = _constant_metric_values(target)
    if h is None:
        raise FlowSetupError("flow requires a constant target metric")
    if energy not in (ENERGY_SYM, ENERGY_BISYM):
        raise FlowSetupError(f"unknown flow energy {energy!r}")
    axes, spacings = [], []
    for k in range(m):
        lo, hi = source.intervals[k]
        axes.append(lo + (hi - lo) / resolution[k] * np.arange(resolution[k]))
        spacings.append((hi - lo) / resolution[k])
    grids = np.meshgrid(*axes, indexing="ij")
    coord_grids = np.stack(grids)
    n = target.dim
    phi = np.empty((n,) + grids[0].shape)
    flat_pts = np.stack([gr.ravel() for gr in grids], axis=-1)
    for a in range(n):
        vals = [ex.eval_value(spec.components[a], source.coords, p)
                for p in flat_pts]
        phi[a] = np.asarray(vals).reshape(grids[0].shape)
    linear = _winding_matrix(spec)
    rem = phi - np.einsum("ak,k...->a...", linear, coord_grids)
    ginv = np.linalg.inv(g)
    sqrtg = float(np.sqrt(np.linalg.det(g)))
    frame = _constant_frame(g)
    state = FlowState(source, target, linear, rem, coord_grids, spacings,
                      g, ginv, sqrtg, frame, h, float(epsilon),
                      float(epsilon), energy)
    state.energy_history.append(flow_energy(state))
    return state


def _constant_frame(g):
    m = g.shape[0]
    vectors = np.zeros((m, m))
    for i in range(m):
        v = np.zeros(m)
        v[i] = 1.0
        for p in range(i):
            v = v - (vectors[p] @ g @ v) * vectors[p]
        vectors[i] = v / np.sqrt(v @ g @ v)
    return vectors


# order-4 periodic stencils --------------------------------------------------


def _d1(f, axis, h):
    return (-np.roll(f, -2, axis) + 8 * np.roll(f, -1, axis)
            - 8 * np.roll(f, 1, axis) + np.roll(f, 2, axis)) / (12 * h)


def _d2(f, axis, h):
    return (-np.roll(f, -2, axis) + 16 * np.roll(f, -1, axis) - 30 * f
            + 16 * np.roll(f, 1, axis) - np.roll(f, 2, axis)) / (12 * h * h)


def _grid_derivatives(state: FlowState, rem):
    """First and second partials of the sampled map, order 4.

    Stencils act on the periodic remainder; the winding part enters the
    first derivatives as a constant."""
    m = len(state.spacings)
    d1 = np.stack([_d1(rem, 1 + k, state.spacings[k]) for k in range(m)])
    d1 += state.linear.T[(...,) + (np.newaxis,) * (rem.ndim - 1)]
    d2 = np.empty((m, m) + rem.shape)
    for i in range(m):
        d2[i, i] = _d2(rem, 1 + i, state.spacings[i])
        for j in range(i + 1, m):
            mixed = _d1(_d1(rem, 1 + i, state.spacings[i]), 1 + j,
                        state.spacings[j])
            d2[i, j] = mixed
            d2[j, i] = mixed
    return d1, d2


def flow_energy(state: FlowState, rem=None) -> float:
    """Grid quadrature of the flow's own energy density."""
    if rem is None:
        rem = state.rem
    if state.energy == ENERGY_BISYM:
        tau = grid_tau_s(state, rem)
        dens = np.einsum("a...,ab,b...->...", tau, state.h, tau)
    else:
        d1, _ = _grid_derivatives(state, rem)
        df = np.einsum("ip,pa...->ia...", state.frame, d1)
        gram = np.einsum("ia...,ab,jb...->ij...", df, state.h, df)
        dens = np.einsum("ij...,ij...->...", gram, gram)
    cell = np.prod(state.spacings) * state.sqrtg
    return pairwise_sum(dens.ravel()) * cell


def grid_tau_s(state: FlowState, rem=None) -> np.ndarray:
    """Symphonic tension field of the sampled map (flat source and
    constant target metric, so the second fundamental form is the bare
    second derivative)."""
    if rem is None:
        rem = state.rem
    d1, d2 = _grid_derivatives(state, rem)
    gi, h = state.ginv, state.h
    hs_d = np.einsum("pqa...,ab,rb...->pqr...", d2, h, d1)
    hd_d = np.einsum("pa...,ab,rb...->pr...", d1, h, d1)
    term1 = np.einsum("pq,rs,pqr...,sa...->a...", gi, gi, hs_d, d1)
    term2 = np.einsum("pq,rs,qrp...,sa...->a...", gi, gi, hs_d, d1)
    term3 = np.einsum("pq,rs,pr...,qsa...->a...", gi, gi, hd_d, d2)
    return term1 + term2 + term3


def grid_bi_tension(state: FlowState, rem=None) -> np.ndarray:
    """Full-variant bi-tension field on the grid (flat source and
    target, curvature term absent)."""
    if rem is None:
        rem = state.rem
    d1, d2 = _grid_derivatives(state, rem)
    v = grid_tau_s(state, rem)
    m = len(state.spacings)
    dv = np.stack([_d1(v, 1 + k, state.spacings[k]) for k in range(m)])
    ddv = np.empty((m, m) + v.shape)
    for i in range(m):
        ddv[i, i] = _d2(v, 1 + i, state.spacings[i])
        for j in range(i + 1, m):
            mixed = _d1(_d1(v, 1 + i, state.spacings[i]), 1 + j,
                        state.spacings[j])
            ddv[i, j] = mixed
            ddv[j, i] = mixed
    gi, h = state.ginv, state.h
    tr_ddv = np.einsum("pq,pqa...->a...", gi, ddv)
    tr_s = np.einsum("pq,pqa...->a...", gi, d2)
    dv_d = np.einsum("pa...,ab,rb...->pr...", dv, h, d1)       # h(Dv_p, D_r)
    d_d = np.einsum("pa...,ab,rb...->pr...", d1, h, d1)
    dv_s = np.einsum("pa...,ab,qrb...->pqr...", dv, h, d2)     # h(Dv_p, S_qr)
    s_d = np.einsum("pqa...,ab,rb...->pqr...", d2, h, d1)      # h(S_pq, D_r)
    ddv_d = np.einsum("pqa...,ab,rb...->pqr...", ddv, h, d1)   # h(DDv_pq, D_r)
    gA = 2.0 * np.einsum("pq,rs,pr...,qsa...->a...", gi, gi, dv_d, d2)
    hb1 = np.einsum("ra...,ab,b...->r...", d1, h, tr_ddv)       # h(trDDv, D_r)
    hb2 = np.einsum("ra...,ab,b...->r...", dv, h, tr_s)         # h(Dv_r, trS)
    gB = np.einsum("rs,r...,sa...->a...", gi, hb1 + hb2, d1)
    hc1 = np.einsum("rs,prs...->p...", gi, s_d)                 # sum_j h(S_pj, D_j)
    hc2 = np.einsum("pa...,ab,b...->p...", d1, h, tr_s)         # h(D_p, trS)
    gC = np.einsum("pq,p...,qa...->a...", gi, hc1 + hc2, dv)
    gD = np.einsum("pq,rs,pr...,sqa...->a...", gi, gi, d_d, ddv)
    gE = np.einsum("pq,rs,pqr...,sa...->a...", gi, gi, dv_s, d1)
    gF = np.einsum("pq,rs,rps...,qa...->a...", gi, gi, ddv_d, d1)
    return gA + gB + gC + gD + gE + gF


def gradient_field(state: FlowState, rem=None) -> np.ndarray:
    """Steepest-descent direction for the flow's energy."""
    if state.energy == ENERGY_BISYM:
        return -grid_bi_tension(state, rem)
    return grid_tau_s(state, rem)


def max_gradient_norm(state: FlowState, rem=None) -> float:
    grad = gradient_field(state, rem)
    norms = np.einsum("a...,ab,b...->...", grad, state.h, grad)
    return float(np.sqrt(norms.max()))


def _image_in_domain(state: FlowState, rem) -> bool:
    target = state.target
    phi = rem + np.einsum("ak,k...->a...", state.linear, state.coord_grids)
    for a, (bounds, per) in enumerate(zip(target.intervals, target.periodic)):
        if per:
            continue
        lo, hi = bounds
        if lo is not None and phi[a].min() < lo:
            return False
        if hi is not None and phi[a].max() > hi:
            return False
    return True


def flow_step(state: FlowState) -> FlowState:
    """One energy-monotone explicit Euler step (in place)."""
    if state.status not in (STATUS_RUNNING,):
        return state
    e_old = state.energy_history[-1]
    direction = gradient_field(state)
    for _ in range(MAX_HALVINGS + 1):
        candidate = state.rem + state.epsilon * direction
        if not _image_in_domain(state, candidate):
            state.status = STATUS_ABORTED
            return state
        e_new = flow_energy(state, candidate)
        if e_new <= e_old:
            state.rem = candidate
            state.energy_history.append(e_new)
            state.iteration += 1
            state.epsilon = min(state.epsilon * 1.2, state.epsilon0)
            return state
        state.epsilon *= 0.5
    state.status = STATUS_STALLED
    return state


def flow_run(state: FlowState, max_steps: int, grad_tol: float,
             on_step=None) -> FlowState:
    """Iterate flow_step until convergence, stall, or budget.

    on_step(state, grad_norm) is called after every accepted step (and
    once at entry) for trace emission.
    """
    converged = (STATUS_CONVERGED_BISYM if state.energy == ENERGY_BISYM
                 else STATUS_CONVERGED)
    gnorm = max_gradient_norm(state)
    if on_step is not None:
        on_step(state, gnorm)
    if gnorm <= grad_tol:
        state.status = converged
        return state
    for _ in range(max_steps):
        flow_step(state)
        if state.status != STATUS_RUNNING:
            return state
        gnorm = max_gradient_norm(state)
        if on_step is not None:
            on_step(state, gnorm)
        if gnorm <= grad_tol:
            state.status = converged
            return state
    state.status = STATUS_BUDGET
    return state
