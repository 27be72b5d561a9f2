"""Running of the measured coupling with the interaction time.

A decay probability pins the bare coupling only up to an arcsine branch,
so every quantity here carries an explicit branch index.  Flow time is
the log of the interaction time; moving along it rescales the bare
coupling exponentially, and the measured coupling g_r = sin(g0*exp(t))
repeatedly touches |g_r| = 1 where the flow turns around and hops to the
next branch.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

__all__ = [
    "BranchIndex",
    "FlowState",
    "SpectrumTable",
    "arcsin_branch",
    "renormalised_coupling_branches",
    "perturbative_bare_coupling",
    "spectrum",
    "beta_one_loop",
    "beta_exact",
    "flow_integrate",
    "flow_integrate_one_loop",
    "c_function",
    "logistic_interpolation_check",
]


@dataclass(frozen=True)
class BranchIndex:
    """Arcsine branch label: branch number n >= 0 and amplitude sign."""

    n: int
    sign: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("branch number must be >= 0")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    @property
    def label(self) -> str:
        return f"({self.n},{'+' if self.sign > 0 else '-'})"


@dataclass(frozen=True)
class FlowState:
    """One point of a flow trajectory.

    branch_count is the number of turning points passed before this
    state; it selects the beta-function branch.
    """

    t: float
    g_r: float
    branch_count: int

    def __post_init__(self):
        if self.branch_count < 0:
            raise ValueError("branch_count must be >= 0")


@dataclass(frozen=True)
class SpectrumTable:
    """Decay probabilities P_j predicted by one branch."""

    branch: BranchIndex
    bare_coupling: float
    probabilities: np.ndarray


def arcsin_branch(n: int, x: float):
    """n-th branch of the inverse sine: n*pi + (-1)^n * asin(x).

    Branch n covers arguments in ((n-1/2)*pi, (n+1/2)*pi).  Accepts
    arrays in x.
    """
    if n < 0:
        raise ValueError("branch number must be >= 0")
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1.0):
        raise ValueError("arcsin argument must satisfy |x| <= 1")
    out = n * np.pi + (-1) ** n * np.arcsin(x)
    return float(out) if out.ndim == 0 else out


def renormalised_coupling_branches(p_obs: float, n_max: int):
    """All bare couplings consistent with an observed decay probability.

    Enumerates both amplitude signs on branches 0..n_max, keeps the
    gauge g0 >= 0 and drops exact duplicates (the branches collapse
    pairwise at p_obs = 0 and 1).  Returns (BranchIndex, g0) pairs
    sorted by g0.
    """
    if not 0.0 <= p_obs <= 1.0:
        raise ValueError("p_obs must lie in [0, 1]")
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    root = math.asin(math.sqrt(p_obs))
    out = []
    for n in range(n_max + 1):
        for sign in (1, -1):
            g0 = n * math.pi + (-1) ** n * sign * root
            if g0 < 0.0:
                continue
            if any(abs(g0 - g) <= 1e-12 for _, g in out):
                continue
            out.append((BranchIndex(n, sign), g0))
    out.sort(key=lambda item: item[1])
    return out


def perturbative_bare_coupling(g_r: float, order: int = 3) -> float:
    """Series inversion of the branch-0 condition g_r = sin(g0)."""
    if order not in (1, 3):
        raise ValueError("order must be 1 or 3")
    if abs(g_r) >= 1.0:
        raise ValueError("series inversion needs |g_r| < 1")
    if order == 1:
        return float(g_r)
    return float(g_r + g_r**3 / 6.0)


def spectrum(branch: BranchIndex, p_obs: float, j_max: int) -> SpectrumTable:
    """Full decay spectrum P_j fixed by one branch choice.

    P_0 reproduces p_obs by construction; the rest of the table is what
    distinguishes branches experimentally.
    """
    if j_max < 0:
        raise ValueError("j_max must be >= 0")
    if not 0.0 <= p_obs <= 1.0:
        raise ValueError("p_obs must lie in [0, 1]")
    root = math.asin(math.sqrt(p_obs))
    g0 = branch.n * math.pi + (-1) ** branch.n * branch.sign * root
    if g0 < 0.0:
        raise ValueError(f"branch {branch.label} has negative bare coupling at this p_obs")
    j = np.arange(j_max + 1)
    probs = np.sin(g0 * np.sqrt(j + 1.0)) ** 2
    return SpectrumTable(branch, float(g0), probs)


def beta_one_loop(g_r):
    """Cubic-order beta function g - g^3/3.  Accepts arrays."""
    g = np.asarray(g_r, dtype=float)
    out = g - g**3 / 3.0
    return float(out) if out.ndim == 0 else out


def beta_exact(g_r, branch_count: int = 0):
    """Exact beta function on the given branch.

    (-1)^n * sqrt(1-g^2) * arcsin_n(g); vanishes at the turning points
    |g| = 1 and alternates sign between branches.  Raises for |g| > 1.
    """
    g = np.asarray(g_r, dtype=float)
    if np.any(np.abs(g) > 1.0):
        raise ValueError("beta_exact needs |g_r| <= 1")
    out = (-1) ** branch_count * np.sqrt(1.0 - g**2) * arcsin_branch(branch_count, g)
    return float(out) if out.ndim == 0 else out


def _beta_clipped(g: float, n: int) -> float:
    # ODE right-hand side; trial steps may poke past |g| = 1 by rounding
    gc = min(1.0, max(-1.0, g))
    return (-1) ** n * math.sqrt(1.0 - gc * gc) * (
        n * math.pi + (-1) ** n * math.asin(gc)
    )


def _branch_of(theta: float) -> int:
    # branch n covers theta in ((n-1/2)pi, (n+1/2)pi)
    return max(0, int(math.floor(theta / math.pi + 0.5)))


def flow_integrate(bare_coupling: float, t_span, *, rtol: float = 1e-12,
                   atol: float = 1e-14, n_samples: int = 2001,
                   switch_band: float = 1e-4, method: str = "RK45"):
    """Integrate the exact flow dg/dt = beta_n(g) across turning points.

    The branch-n ODE is singular at |g| = 1 although the trajectory
    itself is regular there, so inside a band |g| > 1 - switch_band the
    integration hands over to the local closed form: the band entry
    state is inverted through the arcsine on the current branch, carried
    over the turning point analytically, and the ODE resumes on the next
    branch just outside the band.  The inversion magnifies solver error
    by ~1/sqrt(2*switch_band), which is why the defaults pair a narrow
    band with tight tolerances.

    Returns FlowState samples on a uniform grid of n_samples points over
    t_span, plus one injected state at each turning point.
    """
    t0, t1 = float(t_span[0]), float(t_span[1])
    if not t1 > t0:
        raise ValueError("t_span must satisfy t0 < t1")
    if bare_coupling < 0.0:
        raise ValueError("bare_coupling must be >= 0 (gauge choice)")
    if not 0.0 < switch_band < 0.4:
        raise ValueError("switch_band must lie in (0, 0.4)")
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")

    ts = np.linspace(t0, t1, n_samples)
    if bare_coupling == 0.0:
        return [FlowState(float(t), 0.0, 0) for t in ts]

    out_t, out_g, out_n = [], [], []
    idx = 0  # next grid sample to emit

    theta0 = bare_coupling * math.exp(t0)
    n = _branch_of(theta0)
    t_cur = t0
    g_cur = math.sin(theta0)

    def band_event(t, y):
        return (1.0 - switch_band) - abs(y[0])

    band_event.terminal = True
    band_event.direction = -1.0

    def emit_patch(t_from, theta_from, n_at, crossing):
        """Advance analytically from (t_from, theta_from) past the nearest
        turning point (crossing=True) or away from the last one, emitting
        grid samples from the local solution theta(t) = theta_from*e^(t-t_from)."""
        nonlocal idx, t_cur, g_cur, n
        x_exit = math.acos(max(-1.0, 1.0 - 2.0 * switch_band))
        if crossing:
            theta_star = (n_at + 0.5) * math.pi
            gap = theta_star - theta_from
            theta_to = theta_star + max(2.0 * gap, x_exit)
        else:
            theta_star = (n_at - 0.5) * math.pi  # the turning point just passed
            gap = theta_from - theta_star
            theta_to = theta_star + max(2.0 * gap, x_exit)
        t_to = t_from + math.log(theta_to / theta_from)
        t_star = t_from + math.log(theta_star / theta_from) if crossing else None
        while idx < n_samples and ts[idx] <= min(t_to, t1) + 1e-15:
            th = theta_from * math.exp(ts[idx] - t_from)
            nb = n_at + 1 if (crossing and th > theta_star) else n_at
            if crossing and t_star is not None and ts[idx] > t_star:
                # inject the exact turning state once, in time order
                if not (out_t and abs(out_t[-1] - t_star) <= 1e-12):
                    out_t.append(t_star)
                    out_g.append(float((-1) ** n_at))
                    out_n.append(n_at + 1)
                t_star = None
            out_t.append(float(ts[idx]))
            out_g.append(math.sin(th))
            out_n.append(nb)
            idx += 1
        if crossing and t_star is not None and t_star <= t1:
            out_t.append(t_star)
            out_g.append(float((-1) ** n_at))
            out_n.append(n_at + 1)
        t_cur = t_to
        g_cur = math.sin(theta_to)
        n = n_at + 1 if crossing else n_at

    # initial state may already sit inside the band
    if abs(g_cur) >= 1.0 - switch_band:
        up_gap = (n + 0.5) * math.pi - theta0
        dn_gap = theta0 - (n - 0.5) * math.pi
        emit_patch(t_cur, theta0, n, crossing=(up_gap <= dn_gap))

    max_patches = _branch_of(bare_coupling * math.exp(t1)) - _branch_of(theta0) + 5
    patches = 0
    while idx < n_samples:
        sol = solve_ivp(
            lambda t, y: [_beta_clipped(y[0], n)],
            (t_cur, t1),
            [g_cur],
            method=method,
            rtol=rtol,
            atol=atol,
            events=band_event,
            dense_output=True,
        )
        if not sol.success:
            raise RuntimeError(f"flow integration failed: {sol.message}")
        seg_end = float(sol.t[-1])
        while idx < n_samples and ts[idx] <= seg_end + 1e-15:
            g = float(sol.sol(min(ts[idx], seg_end))[0])
            out_t.append(float(ts[idx]))
            out_g.append(g)
            out_n.append(n)
            idx += 1
        if sol.status != 1:
            break  # reached t1 without touching the band
        patches += 1
        if patches > max_patches:
            raise RuntimeError("flow failed to leave the turning-point band")
        t_e = float(sol.t_events[0][0])
        g_e = float(sol.y_events[0][0][0])
        theta_e = float(arcsin_branch(n, max(-1.0, min(1.0, g_e))))
        emit_patch(t_e, theta_e, n, crossing=True)

    return [FlowState(t, g, m) for t, g, m in zip(out_t, out_g, out_n)]


def flow_integrate_one_loop(g_start: float, t_span, *, rtol: float = 1e-10,
                            atol: float = 1e-12, n_samples: int = 2001):
    """Integrate the cubic-order flow dg/dt = g - g^3/3.

    No turning points here: the one-loop flow saturates at the spurious
    fixed point sqrt(3) instead of turning.  branch_count stays 0.
    """
    t0, t1 = float(t_span[0]), float(t_span[1])
    if not t1 > t0:
        raise ValueError("t_span must satisfy t0 < t1")
    ts = np.linspace(t0, t1, n_samples)
    sol = solve_ivp(
        lambda t, y: [y[0] - y[0] ** 3 / 3.0],
        (t0, t1),
        [float(g_start)],
        method="RK45",
        rtol=rtol,
        atol=atol,
        dense_output=True,
    )
    if not sol.success:
        raise RuntimeError(f"one-loop integration failed: {sol.message}")
    gs = sol.sol(ts)[0]
    return [FlowState(float(t), float(g), 0) for t, g in zip(ts, gs)]


def c_function(trajectory) -> np.ndarray:
    """Cumulative integral of beta^2 along a trajectory.

    Monotone along the flow by construction, zero at the first state.
    Uses the trapezoid rule on the trajectory samples.
    """
    if len(trajectory) < 2:
        raise ValueError("trajectory needs at least two states")
    t = np.array([s.t for s in trajectory])
    if np.any(np.diff(t) < 0.0):
        raise ValueError("trajectory states must be ordered in t")
    b2 = np.array(
        [beta_exact(s.g_r, s.branch_count) ** 2 for s in trajectory]
    )
    inc = 0.5 * (b2[1:] + b2[:-1]) * np.diff(t)
    return np.concatenate([[0.0], np.cumsum(inc)])


def logistic_interpolation_check(bare_coupling: float, t):
    """Squared trajectory now, one doubling later, and its logistic image.

    x = sin^2(g0*e^t) satisfies x(t + log 2) = 4x(1-x); the returned
    triple makes the identity directly checkable.  Accepts arrays in t.
    """
    t = np.asarray(t, dtype=float)
    x_now = np.sin(bare_coupling * np.exp(t)) ** 2
    x_doubled = np.sin(bare_coupling * np.exp(t + math.log(2.0))) ** 2
    logistic_image = 4.0 * x_now * (1.0 - x_now)
    if t.ndim == 0:
        return float(x_now), float(x_doubled), float(logistic_image)
    return x_now, x_doubled, logistic_image
