"""Effective coupling read off the detuned S-matrix at a floating scale.

Scale variables: k = t*detuning/2 acts as the flow scale and e = g*t is
the dimensionless coupling carried along it.  The effective transition
matrix is what remains of the one-shot evolution after the free phases
and the instantaneous-interaction part are subtracted; matching its
lowest matrix element to the measured coupling gives an implicit flow
e(k) with branch births on the way down in k.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .flow import arcsin_branch
from .operators import ModelParams, OperatorMatrix, build_operators, evolution_detuned

__all__ = [
    "FlowParams",
    "ContinuationBranch",
    "s_matrix_detuned",
    "large_k_asymptote",
    "effective_t_matrix",
    "renorm_condition_rhs",
    "renorm_condition_slope",
    "renorm_condition_residual",
    "solve_flow",
    "bifurcation_scan",
]


@dataclass(frozen=True)
class FlowParams:
    """Point (scale, coupling) of the effective flow plus the photon cutoff."""

    scale: float
    coupling: float
    cutoff: int = 8

    def __post_init__(self):
        if self.scale < 0.0:
            raise ValueError("scale must be >= 0")
        if self.coupling < 0.0:
            raise ValueError("coupling must be >= 0")
        if int(self.cutoff) != self.cutoff or self.cutoff < 2:
            raise ValueError("cutoff must be an integer >= 2")


@dataclass
class ContinuationBranch:
    """One threaded solution branch e(k), sampled on descending scales.

    birth_scale is the grid scale where the branch appeared as half of a
    newborn pair (None if it was already present at the top of the grid,
    or entered through the coupling window boundary).  ir_branch is the
    arcsine branch number its endpoint has reached, when identifiable.
    """

    scales: np.ndarray
    couplings: np.ndarray
    birth_scale: float | None = None
    ir_branch: int | None = None

    def __post_init__(self):
        self.scales = np.asarray(self.scales, dtype=float)
        self.couplings = np.asarray(self.couplings, dtype=float)
        if self.scales.shape != self.couplings.shape:
            raise ValueError("scales and couplings must have matching shapes")
        if np.any(np.diff(self.scales) >= 0.0):
            raise ValueError("scales must be strictly decreasing")

    @property
    def samples(self):
        return list(zip(self.scales.tolist(), self.couplings.tolist()))


def s_matrix_detuned(params: FlowParams) -> OperatorMatrix:
    """One-shot detuned evolution in flow variables (unit time, detuning 2k)."""
    mp = ModelParams(coupling=params.coupling, detuning=2.0 * params.scale,
                     cutoff=params.cutoff)
    return evolution_detuned(mp, 1.0)


def _free_part(params: FlowParams) -> np.ndarray:
    ops = build_operators(ModelParams(coupling=0.0, cutoff=params.cutoff))
    k = params.scale
    dim = 2 * (params.cutoff + 1)
    return math.cos(k) * np.eye(dim) - 2j * math.sin(k) * ops["tau_3"].matrix


def large_k_asymptote(params: FlowParams) -> OperatorMatrix:
    """Leading large-scale form: free phases plus a 1/k-suppressed interaction.

    The full S-matrix approaches this with corrections falling off like
    one more power of the scale.  Undefined at k = 0.
    """
    if params.scale <= 0.0:
        raise ValueError("large_k_asymptote needs scale > 0")
    ops = build_operators(ModelParams(coupling=0.0, cutoff=params.cutoff))
    k, e = params.scale, params.coupling
    m = _free_part(params) - 1j * e * np.sinc(k / np.pi) * ops["V"].matrix
    return OperatorMatrix(m, params.cutoff, truncation_tainted=True)


def effective_t_matrix(params: FlowParams) -> OperatorMatrix:
    """Transition matrix with free phases and the contact term removed.

    Interpolates between exp(-i*e*V) - 1 at k = 0 and -i*e*V at large k,
    which fixes how the subtracted pieces are grouped.
    """
    k, e = params.scale, params.coupling
    u = s_matrix_detuned(params).matrix
    v = build_operators(ModelParams(coupling=0.0, cutoff=params.cutoff))["V"].matrix
    m = u - _free_part(params) - 1j * e * (1.0 - np.sinc(k / np.pi)) * v
    return OperatorMatrix(m, params.cutoff, truncation_tainted=True)


def renorm_condition_rhs(coupling, scale):
    """Measured coupling assigned to the point (scale, coupling).

    Equals i<1,down|T|0,up> of the effective transition matrix, but in
    closed form; vectorised over either argument.
    """
    e = np.asarray(coupling, dtype=float)
    k = np.asarray(scale, dtype=float)
    r = np.hypot(e, k)
    out = (1.0 - np.sinc(k / np.pi)) * e + e * np.sinc(r / np.pi)
    return float(out) if out.ndim == 0 else out


def renorm_condition_slope(coupling, scale):
    """Partial derivative of renorm_condition_rhs in the coupling.

    Vanishing slope at a root is the double-root criterion for a branch
    birth.
    """
    e = np.asarray(coupling, dtype=float)
    k = np.asarray(scale, dtype=float)
    r = np.hypot(e, k)
    s = np.sinc(r / np.pi)
    with np.errstate(invalid="ignore", divide="ignore"):
        frac = np.where(r > 0.0, e * e / (r * r), 0.0)
    out = (1.0 - np.sinc(k / np.pi)) + s + frac * (np.cos(r) - s)
    return float(out) if out.ndim == 0 else out


def renorm_condition_residual(g_r: float, params: FlowParams) -> float:
    """Defect of the matching condition at one flow point."""
    return float(renorm_condition_rhs(params.coupling, params.scale) - g_r)


def _roots_at_scale(g_r, scale, e_max, mesh):
    """All couplings in [0, e_max] matching g_r at this scale.

    Sign changes are bracketed on a uniform mesh whose nodes are
    augmented with the critical points of the condition, so a nascent
    root pair hiding inside one cell is still resolved.
    """
    if scale == 0.0:
        # condition degenerates to sin(e) = g_r
        if g_r > 1.0:
            return []
        out = []
        n = 0
        while True:
            e = arcsin_branch(n, g_r)
            if e > e_max:
                break
            if e >= 0.0:
                out.append(float(e))
            n += 1
        return out
    nodes = np.linspace(0.0, e_max, mesh + 1)
    slope = renorm_condition_slope(nodes, scale)
    crit = []
    for i in np.nonzero(np.sign(slope[:-1]) * np.sign(slope[1:]) < 0)[0]:
        crit.append(
            brentq(lambda x: renorm_condition_slope(x, scale),
                   nodes[i], nodes[i + 1], xtol=1e-14)
        )
    if crit:
        nodes = np.sort(np.concatenate([nodes, crit]))
    vals = renorm_condition_rhs(nodes, scale) - g_r
    roots = []
    for i in np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]:
        roots.append(
            brentq(lambda x: renorm_condition_rhs(x, scale) - g_r,
                   nodes[i], nodes[i + 1], xtol=1e-12, rtol=8.9e-16)
        )
    # exact hits on a node (rare); count them once
    for i in np.nonzero(vals == 0.0)[0]:
        roots.append(float(nodes[i]))
    return sorted(roots)


def _match_order_preserving(prev, new, max_jump):
    """Min-cost order-preserving assignment between two sorted lists.

    Maximises the number of pairings first, then minimises total
    movement; pairings further apart than max_jump are forbidden.
    Returns a list of (i_prev, j_new) pairs.
    """
    m, n = len(prev), len(new)
    # dp[i][j]: best (matches, -cost) using prev[:i], new[:j]
    dp = [[(0, 0.0, None)] * (n + 1) for _ in range(m + 1)]
    for i in range(m + 1):
        for j in range(n + 1):
            if i == 0 and j == 0:
                continue
            best = (-1, -math.inf, None)
            if i > 0:
                c = dp[i - 1][j]
                cand = (c[0], c[1], "skip_prev")
                if (cand[0], cand[1]) > (best[0], best[1]):
                    best = cand
            if j > 0:
                c = dp[i][j - 1]
                cand = (c[0], c[1], "skip_new")
                if (cand[0], cand[1]) > (best[0], best[1]):
                    best = cand
            if i > 0 and j > 0:
                dist = abs(prev[i - 1] - new[j - 1])
                if dist <= max_jump:
                    c = dp[i - 1][j - 1]
                    cand = (c[0] + 1, c[1] - dist, "pair")
                    if (cand[0], cand[1]) > (best[0], best[1]):
                        best = cand
            dp[i][j] = best
    pairs = []
    i, j = m, n
    while i > 0 or j > 0:
        move = dp[i][j][2]
        if move == "pair":
            pairs.append((i - 1, j - 1))
            i, j = i - 1, j - 1
        elif move == "skip_prev":
            i -= 1
        else:
            j -= 1
    pairs.reverse()
    return pairs


def solve_flow(g_r: float, k_grid, e_max: float = 5.0 * math.pi, *,
               mesh: int = 4000, max_jump: float = 0.5,
               ir_label_tol: float = 0.05, residual_tol: float = 1e-10):
    """Thread all solution branches of the matching condition down in scale.

    k_grid must be strictly decreasing.  At each scale the roots in
    [0, e_max] are found and matched to the live branches by an
    order-preserving nearest assignment capped at max_jump; unmatched
    roots open new branches (an even group of newcomers is a born pair
    and gets birth_scale set, a leftover single entered through the
    window boundary), unmatched branches are closed.  Branches that
    survive to the last grid point are labelled with the arcsine branch
    number of their endpoint when it is within ir_label_tol.
    """
    k_grid = np.asarray(k_grid, dtype=float)
    if k_grid.ndim != 1 or len(k_grid) < 2:
        raise ValueError("k_grid must be a 1-d grid with at least two points")
    if np.any(np.diff(k_grid) >= 0.0):
        raise ValueError("k_grid must be strictly decreasing")
    if k_grid[-1] < 0.0:
        raise ValueError("scales must be >= 0")
    if g_r < 0.0:
        raise ValueError("g_r must be >= 0 (gauge choice)")
    if e_max <= 0.0:
        raise ValueError("e_max must be > 0")

    live = []  # dicts: ks, es, birth
    done = []
    for step, k in enumerate(k_grid):
        roots = _roots_at_scale(g_r, float(k), e_max, mesh)
        prev = [b["es"][-1] for b in live]  # live stays e-sorted
        pairs = _match_order_preserving(prev, roots, max_jump)
        matched_prev = {i for i, _ in pairs}
        matched_new = {j for _, j in pairs}
        for i, j in pairs:
            live[i]["ks"].append(float(k))
            live[i]["es"].append(roots[j])
        survivors = []
        for i, b in enumerate(live):
            if i in matched_prev:
                survivors.append(b)
            else:
                done.append(b)
        newborns = [j for j in range(len(roots)) if j not in matched_new]
        if newborns:
            # roots at the top of the grid are not births, and an odd
            # newcomer closest to the window edge is a boundary entry
            boundary = None
            if step > 0 and len(newborns) % 2 == 1:
                boundary = max(newborns, key=lambda j: roots[j])
            for j in newborns:
                survivors.append({
                    "ks": [float(k)],
                    "es": [roots[j]],
                    "birth": float(k) if step > 0 and j != boundary else None,
                })
        survivors.sort(key=lambda b: b["es"][-1])
        live = survivors
    done.extend(live)

    k_end = float(k_grid[-1])
    out = []
    for b in done:
        ir = None
        if b["ks"][-1] == k_end and g_r <= 1.0:
            e_end = b["es"][-1]
            n_cap = int(e_max / math.pi) + 2
            dists = [abs(e_end - arcsin_branch(n, g_r)) for n in range(n_cap)]
            n_best = int(np.argmin(dists))
            if dists[n_best] <= ir_label_tol:
                ir = n_best
        br = ContinuationBranch(
            scales=np.array(b["ks"]),
            couplings=np.array(b["es"]),
            birth_scale=b.get("birth"),
            ir_branch=ir,
        )
        res = np.abs(renorm_condition_rhs(br.couplings, br.scales) - g_r)
        if np.any(res > residual_tol):
            raise RuntimeError(
                f"branch sample violates the matching condition by {res.max():.2e}"
            )
        out.append(br)
    out.sort(key=lambda b: (-b.scales[0], b.couplings[0]))
    return out


def _count_and_edge(g_r, scale, e_max, mesh):
    roots = _roots_at_scale(g_r, scale, e_max, mesh)
    edge = renorm_condition_rhs(e_max, scale) - g_r
    return len(roots), math.copysign(1.0, edge), roots


def bifurcation_scan(g_r: float, k_range, e_max: float = 5.0 * math.pi, *,
                     mesh: int = 4000, scan_points: int = 200,
                     k_resolution: float = 1e-9, slope_tol: float = 1e-6):
    """Locate scales where a new solution pair is born, by count bisection.

    The root count over [0, e_max] is tracked on a descending scan of
    the scale window; every count change is bisected.  Changes of one
    come from a root crossing the window edge and are discarded, changes
    of two with a stable edge sign are genuine pair births, anything
    else is subdivided.  Each birth is refined to k_resolution and
    checked against the double-root criterion (vanishing coupling
    slope).  Returns (birth_scale, coupling_at_birth) pairs, largest
    scale first.
    """
    k_lo, k_hi = float(k_range[0]), float(k_range[1])
    if not 0.0 < k_lo < k_hi:
        raise ValueError("k_range must satisfy 0 < k_lo < k_hi")
    ks = np.geomspace(k_hi, k_lo, scan_points)
    counts = []
    edges = []
    for k in ks:
        c, s, _ = _count_and_edge(g_r, float(k), e_max, mesh)
        counts.append(c)
        edges.append(s)

    births = []
    stack = [
        (float(ks[i]), float(ks[i + 1]), counts[i], counts[i + 1], edges[i], edges[i + 1])
        for i in range(len(ks) - 1)
        if counts[i] != counts[i + 1]
    ]
    while stack:
        ka, kb, ca, cb, sa, sb = stack.pop()  # ka > kb
        if ka - kb < k_resolution:
            raise RuntimeError(
                f"root-count change near k = {kb:.9g} not resolvable above "
                f"k_resolution = {k_resolution:g}"
            )
        dc = cb - ca
        if abs(dc) == 1:
            continue  # window-boundary crossing
        if abs(dc) > 2 or (abs(dc) == 2 and sa != sb):
            km = 0.5 * (ka + kb)
            cm, sm, _ = _count_and_edge(g_r, km, e_max, mesh)
            if cm != ca:
                stack.append((ka, km, ca, cm, sa, sm))
            if cm != cb:
                stack.append((km, kb, cm, cb, sm, sb))
            continue
        if dc == -2:
            continue  # pair annihilation on the way down; not a birth
        # dc == +2 with stable edge sign: bisect the birth
        while ka - kb > k_resolution:
            km = 0.5 * (ka + kb)
            cm, sm, _ = _count_and_edge(g_r, km, e_max, mesh)
            if cm == ca and sm == sa:
                ka = km
            elif cm == cb and sm == sb:
                kb = km
            else:
                # nested events inside the cell; subdivide and restart
                stack.append((ka, km, ca, cm, sa, sm))
                stack.append((km, kb, cm, cb, sm, sb))
                ka = None
                break
        if ka is None:
            continue
        _, _, above = _count_and_edge(g_r, ka, e_max, mesh)
        _, _, below = _count_and_edge(g_r, kb, e_max, mesh)
        new = [r for r in below if not above or min(abs(r - x) for x in above) > 1e-4]
        if len(new) != 2:
            raise RuntimeError(
                f"could not isolate the newborn pair at k ~ {kb:.9g}"
            )
        k_birth = 0.5 * (ka + kb)
        e_birth = 0.5 * (new[0] + new[1])
        if abs(renorm_condition_slope(e_birth, k_birth)) > slope_tol:
            raise RuntimeError(
                f"double-root criterion violated at k = {k_birth:.9g}: "
                f"slope {renorm_condition_slope(e_birth, k_birth):.2e}"
            )
        births.append((k_birth, e_birth))
    births.sort(key=lambda p: -p[0])
    return births
