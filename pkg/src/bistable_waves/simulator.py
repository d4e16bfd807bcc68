"""Finite-difference evolution of u_t = u_xx + f(u) and stability diagnostics.

Time stepping is IMEX: trapezoidal (semi-implicit) diffusion solved by
tridiagonal elimination, explicit reaction.  On top of the stepper sit the
front tracker, the best-shift sup-norm distance to a reference wave, the
exponential decay fit, and the super/sub-solution envelope machinery with
its explicit constants.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Literal, Sequence

import numpy as np
from numpy.polynomial import polynomial as npp
from scipy.integrate import solve_ivp
from scipy.interpolate import PchipInterpolator
from scipy.linalg import solve_banded

from .errors import (
    DegenerateProfile,
    Divergence,
    InsufficientData,
    NoFront,
    NonPositiveDistance,
)
from .reaction import ReactionTerm
from .shooting import WaveSolution

BoundaryKind = Literal["dirichlet01", "neumann"]

_STATE_LO = -0.5
_STATE_HI = 1.5


@dataclass(frozen=True)
class Grid1D:
    x_min: float
    x_max: float
    dx: float
    dt: float
    bc: BoundaryKind = "dirichlet01"

    def __post_init__(self) -> None:
        if self.dx <= 0.0 or self.dt <= 0.0:
            raise ValueError("dx and dt must be positive")
        if self.x_min >= self.x_max:
            raise ValueError(f"empty domain [{self.x_min}, {self.x_max}]")
        if self.bc not in ("dirichlet01", "neumann"):
            raise ValueError(f"unknown boundary condition {self.bc!r}")
        cells = (self.x_max - self.x_min) / self.dx
        if abs(cells - round(cells)) > 1e-6 * max(1.0, cells) or round(cells) < 16:
            raise ValueError(
                f"(x_max-x_min)/dx = {cells} must be an integer >= 16"
            )

    @property
    def n_nodes(self) -> int:
        return int(round((self.x_max - self.x_min) / self.dx)) + 1

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n_nodes)

    def dt_stability(self, reaction_lipschitz: float) -> float:
        """Largest dt the explicit reaction treatment tolerates."""
        if reaction_lipschitz <= 0.0:
            return math.inf
        return 1.9 / reaction_lipschitz


@dataclass
class SimState:
    t: float
    u: np.ndarray
    grid: Grid1D


@dataclass
class Trajectory:
    times: np.ndarray
    front_positions: np.ndarray
    shift_distances: np.ndarray | None
    best_shifts: np.ndarray | None
    snapshots: list[SimState] = field(default_factory=list)
    diagnostics: list[str] = field(default_factory=list)


def step(f: ReactionTerm | None, s: SimState, g: Grid1D) -> SimState:
    """One IMEX step; f=None evolves pure diffusion.

    Constant states 0 and 1 are exact fixed points under dirichlet01.
    Raises Divergence when any node leaves [-0.5, 1.5].
    """
    u = s.u
    n = g.n_nodes
    if u.shape != (n,):
        raise ValueError(f"state has {u.shape[0]} nodes, grid has {n}")
    mu = g.dt / (2.0 * g.dx * g.dx)

    reaction = f.eval_extended_array(u) if f is not None else np.zeros_like(u)

    rhs = np.empty_like(u)
    rhs[1:-1] = (
        u[1:-1]
        + mu * (u[:-2] - 2.0 * u[1:-1] + u[2:])
        + g.dt * reaction[1:-1]
    )

    ab = np.zeros((3, n))
    ab[0, 2:] = -mu          # super-diagonal
    ab[1, :] = 1.0 + 2.0 * mu
    ab[2, :-2] = -mu         # sub-diagonal

    if g.bc == "dirichlet01":
        # Boundary nodes are held at their current values (0 on the left and
        # 1 on the right for canonical front data), so both constant states
        # are exact fixed points.
        ab[1, 0] = 1.0
        ab[0, 1] = 0.0
        ab[1, -1] = 1.0
        ab[2, -2] = 0.0
        rhs[0] = u[0]
        rhs[-1] = u[-1]
    else:  # neumann: reflected ghost nodes, reaction acts at the ends too
        ab[0, 1] = -2.0 * mu
        ab[2, -2] = -2.0 * mu
        rhs[0] = u[0] + 2.0 * mu * (u[1] - u[0]) + g.dt * reaction[0]
        rhs[-1] = u[-1] + 2.0 * mu * (u[-2] - u[-1]) + g.dt * reaction[-1]

    u_new = solve_banded((1, 1), ab, rhs)
    t_new = s.t + g.dt
    if not np.all(np.isfinite(u_new)) or np.any(u_new < _STATE_LO) or np.any(u_new > _STATE_HI):
        raise Divergence(f"state left [{_STATE_LO}, {_STATE_HI}] at t={t_new:.6g}", t=t_new)
    return SimState(t=t_new, u=u_new, grid=g)


def front_crossings(s: SimState, a: float) -> np.ndarray:
    """All x where u crosses the level a, linearly interpolated."""
    d = s.u - a
    x = s.grid.x
    crossings: list[float] = []
    exact = np.flatnonzero(d == 0.0)
    crossings.extend(x[exact].tolist())
    sign_change = np.flatnonzero(d[:-1] * d[1:] < 0.0)
    for i in sign_change:
        frac = d[i] / (d[i] - d[i + 1])
        crossings.append(float(x[i] + frac * s.grid.dx))
    return np.sort(np.asarray(crossings))


def front_position(s: SimState, a: float) -> float:
    """Level-a crossing of the state; the median one if there are several.

    Raises NoFront when u - a never changes sign.
    """
    crossings = front_crossings(s, a)
    if crossings.size == 0:
        raise NoFront(f"u - {a} has constant sign at t={s.t:.6g}")
    return float(np.median(crossings))


class WaveProfile:
    """Monotone-cubic interpolant of a sampled wave with exponential tails.

    Tail rates are read off the sampled endpoint slopes: w = rate*u near 0
    and w = -rate*(1-u) near 1, so the profile is self-contained.
    """

    def __init__(self, ws: WaveSolution):
        z, u, w = ws.z_grid, ws.u_values, ws.w_values
        self.z_lo = float(z[0])
        self.z_hi = float(z[-1])
        self.u_lo = float(u[0])
        self.u_hi = float(u[-1])
        self.rate_left = float(w[0] / u[0])
        self.rate_right = float(-w[-1] / (1.0 - u[-1]))
        self._pchip = PchipInterpolator(z, u, extrapolate=False)
        self.a = float(self._pchip(0.0))
        self.c = float(ws.c_star)

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        scalar = z.ndim == 0
        z = np.atleast_1d(z)
        out = np.empty_like(z)
        low = z < self.z_lo
        high = z > self.z_hi
        mid = ~(low | high)
        out[low] = self.u_lo * np.exp(self.rate_left * (z[low] - self.z_lo))
        out[high] = 1.0 - (1.0 - self.u_hi) * np.exp(self.rate_right * (z[high] - self.z_hi))
        out[mid] = self._pchip(z[mid])
        return float(out[0]) if scalar else out


def shift_distance(
    s: SimState,
    ws: WaveSolution,
    c: float,
    *,
    scan_radius: float = 20.0,
    profile: WaveProfile | None = None,
) -> tuple[float, float]:
    """Best-shift sup-norm distance between the state and the reference wave.

    Minimizes sup_x |u(x) - u*(x + zeta)| over shifts zeta near the front
    (coarse scan at step dx, then golden-section refinement to 1e-3*dx),
    excluding a 5% boundary margin from the norm.  The scan is centered at
    -front_position(s) when a front exists, else at the co-moving shift
    c*t.  Returns (distance, zeta_best - c*t), the co-moving residual shift.
    """
    if profile is None:
        profile = WaveProfile(ws)
    g = s.grid
    n = g.n_nodes
    margin = max(1, int(round(0.05 * n)))
    x_int = g.x[margin : n - margin]
    u_int = s.u[margin : n - margin]
    n_int = x_int.size

    try:
        center = -front_position(s, profile.a)
    except NoFront:
        center = c * s.t
    center = round(center / g.dx) * g.dx

    k_max = max(1, int(round(scan_radius / g.dx)))
    table_x = (x_int[0] + center - k_max * g.dx) + g.dx * np.arange(n_int + 2 * k_max)
    table = profile(table_x)
    best_k = 0
    best_val = math.inf
    for k in range(2 * k_max + 1):
        val = float(np.max(np.abs(u_int - table[k : k + n_int])))
        if val < best_val:
            best_val, best_k = val, k
    zeta0 = center + (best_k - k_max) * g.dx

    def objective(zeta: float) -> float:
        return float(np.max(np.abs(u_int - profile(x_int + zeta))))

    # Golden-section refinement around the coarse winner, keeping the best
    # evaluated point (the objective is only piecewise smooth).
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    lo, hi = zeta0 - g.dx, zeta0 + g.dx
    best_zeta, best = zeta0, best_val
    p = hi - invphi * (hi - lo)
    q = lo + invphi * (hi - lo)
    fp, fq = objective(p), objective(q)
    while (hi - lo) > 1e-3 * g.dx:
        if fp < fq:
            hi, q, fq = q, p, fp
            p = hi - invphi * (hi - lo)
            fp = objective(p)
        else:
            lo, p, fp = p, q, fq
            q = lo + invphi * (hi - lo)
            fq = objective(q)
        for zeta, val in ((p, fp), (q, fq)):
            if val < best:
                best, best_zeta = val, zeta
    return best, best_zeta - c * s.t


def run(
    f: ReactionTerm,
    u0: Callable[[np.ndarray], np.ndarray] | np.ndarray,
    g: Grid1D,
    t_end: float,
    observe_every: float,
    *,
    reference: WaveSolution | None = None,
    ref_speed: float | None = None,
    snapshot_times: Sequence[float] = (),
    scan_radius: float = 20.0,
) -> Trajectory:
    """Evolve u0 to t_end, observing front position (and, with a reference
    wave attached, the best-shift distance) every observe_every time units."""
    if t_end <= 0.0:
        raise ValueError("t_end must be positive")
    if observe_every <= 0.0:
        raise ValueError("observe_every must be positive")
    x = g.x
    u_init = np.asarray(u0(x) if callable(u0) else u0, dtype=float).copy()
    if u_init.shape != x.shape:
        raise ValueError(f"initial data has shape {u_init.shape}, grid needs {x.shape}")
    state = SimState(t=0.0, u=u_init, grid=g)

    lipschitz = _reaction_lipschitz(f)
    if g.dt > g.dt_stability(lipschitz):
        warnings.warn(
            f"dt={g.dt} exceeds the explicit-reaction stability bound "
            f"{g.dt_stability(lipschitz):.6g}",
            RuntimeWarning,
        )

    profile = WaveProfile(reference) if reference is not None else None
    c_ref = ref_speed if ref_speed is not None else (reference.c_star if reference else 0.0)

    times: list[float] = []
    fronts: list[float] = []
    dists: list[float] = []
    shifts: list[float] = []
    snapshots: list[SimState] = []
    diagnostics: list[str] = []
    pending_snaps = sorted(float(t) for t in snapshot_times)

    def observe(st: SimState) -> None:
        times.append(st.t)
        crossings = front_crossings(st, f.a)
        if crossings.size == 0:
            fronts.append(math.nan)
            diagnostics.append(f"NoFront at t={st.t:.6g}")
        else:
            if crossings.size > 1:
                diagnostics.append(
                    f"MultipleFronts at t={st.t:.6g} ({crossings.size} crossings)"
                )
            fronts.append(float(np.median(crossings)))
        if profile is not None:
            d, zb = shift_distance(
                st, reference, c_ref, scan_radius=scan_radius, profile=profile
            )
            dists.append(d)
            shifts.append(zb)

    observe(state)
    n_steps = int(math.ceil(t_end / g.dt - 1e-12))
    next_obs = observe_every
    for _ in range(n_steps):
        state = step(f, state, g)
        while pending_snaps and state.t >= pending_snaps[0] - g.dt / 2.0:
            snapshots.append(SimState(t=state.t, u=state.u.copy(), grid=g))
            pending_snaps.pop(0)
        if state.t >= next_obs - g.dt / 2.0:
            observe(state)
            next_obs += observe_every

    return Trajectory(
        times=np.asarray(times),
        front_positions=np.asarray(fronts),
        shift_distances=np.asarray(dists) if profile is not None else None,
        best_shifts=np.asarray(shifts) if profile is not None else None,
        snapshots=snapshots,
        diagnostics=diagnostics,
    )


def _linear_fit(t: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Least-squares line y = intercept + slope*t; returns (slope, intercept, r2)."""
    t_mean = t.mean()
    y_mean = y.mean()
    var_t = float(np.sum((t - t_mean) ** 2))
    if var_t == 0.0:
        raise InsufficientData("degenerate time window: no spread in t")
    slope = float(np.sum((t - t_mean) * (y - y_mean)) / var_t)
    intercept = y_mean - slope * t_mean
    residuals = y - (intercept + slope * t)
    ss_res = float(np.sum(residuals**2))
    ss_tot = float(np.sum((y - y_mean) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return slope, intercept, r2


def estimate_speed(tr: Trajectory, t_window: tuple[float, float]) -> tuple[float, float]:
    """Slope and r^2 of the least-squares line through (t, front_position)
    inside the window.  Needs at least 8 finite observations."""
    lo, hi = t_window
    mask = (tr.times >= lo) & (tr.times <= hi) & np.isfinite(tr.front_positions)
    if int(mask.sum()) < 8:
        raise InsufficientData(
            f"{int(mask.sum())} usable front observations in [{lo}, {hi}]; need >= 8"
        )
    slope, _intercept, r2 = _linear_fit(tr.times[mask], tr.front_positions[mask])
    return slope, r2


def fit_decay(tr: Trajectory, t_window: tuple[float, float]) -> tuple[float, float, float]:
    """Fit distance(t) ~ K * exp(-kappa * t) on the window by linear least
    squares in log space; returns (K, kappa, r2)."""
    if tr.shift_distances is None:
        raise InsufficientData("trajectory carries no shift distances")
    lo, hi = t_window
    mask = (tr.times >= lo) & (tr.times <= hi)
    d = tr.shift_distances[mask]
    if d.size < 8:
        raise InsufficientData(f"{d.size} distance observations in [{lo}, {hi}]; need >= 8")
    if np.any(d <= 0.0):
        raise NonPositiveDistance("non-positive distance in the fit window")
    slope, intercept, r2 = _linear_fit(tr.times[mask], np.log(d))
    return math.exp(intercept), -slope, r2


def heat_kernel_eps(t: float, L: float, k_inf: float = 0.0) -> float:
    """Heat-kernel lower-bound factor exp(-k_inf*t - L^2/t) / (2*sqrt(pi*t))."""
    if t <= 0.0:
        raise ValueError(f"t={t} must be positive")
    if L <= 0.0:
        raise ValueError(f"L={L} must be positive")
    if k_inf < 0.0:
        raise ValueError(f"k_inf={k_inf} must be >= 0")
    return math.exp(-k_inf * t - L * L / t) / (2.0 * math.sqrt(math.pi * t))


def reaction_ode(
    f: ReactionTerm,
    branch: Literal["q0", "q1"],
    t_end: float,
    n_samples: int = 513,
) -> tuple[np.ndarray, np.ndarray]:
    """Integrate the scalar comparison ODE q' = f_branch(q) from q(0) = a.

    q0 uses the left branch and decays toward 0; q1 uses the right branch
    and grows toward 1.
    """
    if t_end <= 0.0:
        raise ValueError("t_end must be positive")
    if branch == "q0":
        poly = f.f0
    elif branch == "q1":
        poly = f.f1
    else:
        raise ValueError(f"unknown branch {branch!r}")
    t_eval = np.linspace(0.0, t_end, n_samples)
    sol = solve_ivp(
        lambda t, q: poly(q[0]),
        (0.0, t_end),
        [f.a],
        method="RK45",
        rtol=1e-10,
        atol=1e-13,
        t_eval=t_eval,
    )
    if not sol.success:
        raise RuntimeError(f"reaction ODE integration failed: {sol.message}")
    return sol.t, sol.y[0]


def _reaction_lipschitz(f: ReactionTerm) -> float:
    """max(K0, K1): the largest |f'| over both closed branch domains."""
    k0 = _max_abs_poly(f.f0.derivative().coefficients, 0.0, f.a)
    k1 = _max_abs_poly(f.f1.derivative().coefficients, f.a, 1.0)
    return max(k0, k1)


def _max_abs_poly(coeffs: Sequence[float], lo: float, hi: float) -> float:
    """Exact max of |p| on [lo, hi]: endpoints plus real critical points."""
    candidates = [lo, hi]
    der = npp.polyder(coeffs)
    if len(der) >= 2:
        roots = npp.polyroots(der)
        for r in roots:
            if abs(r.imag) < 1e-10 and lo <= r.real <= hi:
                candidates.append(float(r.real))
    vals = npp.polyval(np.asarray(candidates), coeffs)
    return float(np.max(np.abs(vals)))


@dataclass(frozen=True)
class SuperSubParams:
    """Explicit constants of the perturbation envelopes around the wave."""

    gamma: float
    sigma: float
    delta0: float
    K0: float
    K1: float
    K2_sep: float
    eps_star: float
    M: float
    rho: float


def _k2_separated(f: ReactionTerm, rho: float, n_grid: int = 400) -> float:
    """max of (f1(y) - f0(x)) / (y - x) over x in [0, a], y in [a, 1] with
    y - x >= rho, by grid search with two zoom rounds."""
    a = f.a

    def scan(x_lo, x_hi, y_lo, y_hi, n):
        xs = np.linspace(x_lo, x_hi, n)
        ys = np.linspace(y_lo, y_hi, n)
        fx = npp.polyval(xs, f.f0.coefficients)
        fy = npp.polyval(ys, f.f1.coefficients)
        sep = ys[None, :] - xs[:, None]
        ratio = np.where(sep >= rho, (fy[None, :] - fx[:, None]) / np.maximum(sep, rho), -np.inf)
        idx = np.unravel_index(np.argmax(ratio), ratio.shape)
        return float(ratio[idx]), float(xs[idx[0]]), float(ys[idx[1]])

    best, x_at, y_at = scan(0.0, a, a, 1.0, n_grid)
    if not math.isfinite(best):
        raise ValueError(f"separation rho={rho} leaves no admissible (x, y) pairs")
    hx = a / (n_grid - 1)
    hy = (1.0 - a) / (n_grid - 1)
    for _ in range(2):
        val, x_at, y_at = scan(
            max(0.0, x_at - 2 * hx),
            min(a, x_at + 2 * hx),
            max(a, y_at - 2 * hy),
            min(1.0, y_at + 2 * hy),
            n_grid,
        )
        best = max(best, val)
        hx *= 4.0 / (n_grid - 1)
        hy *= 4.0 / (n_grid - 1)
    return best


def supersub_params(
    ws: WaveSolution,
    f: ReactionTerm,
    M: float | None = None,
    rho: float | None = None,
) -> SuperSubParams:
    """Constants for the envelope pair around the computed wave.

    gamma = min(-f0'(0), -f1'(1)) / 2, K0/K1 are the branch derivative
    maxima, K2_sep the jump-regularized two-sided secant maximum with
    separation rho, eps_star the smallest profile derivative on |z| <= M,
    delta0 = gamma / (K0+K1+K2), sigma = (gamma+K0+K1+K2) / (gamma*eps_star).

    M defaults to the smallest value with u*(-M) <= a/2 and
    u*(M) >= (1+a)/2; rho defaults to 0.05*min(a, 1-a).
    """
    a = f.a
    profile = WaveProfile(ws)
    if M is None:
        m_left = -float(np.interp(a / 2.0, ws.u_values, ws.z_grid))
        m_right = float(np.interp((1.0 + a) / 2.0, ws.u_values, ws.z_grid))
        M = max(m_left, m_right, ws.z_grid[1] - ws.z_grid[0])
    if not (profile(-M) <= a / 2.0 + 1e-9 and profile(M) >= (1.0 + a) / 2.0 - 1e-9):
        raise ValueError(
            f"M={M} too small: need u*(-M) <= a/2 and u*(M) >= (1+a)/2"
        )
    if rho is None:
        rho = 0.05 * min(a, 1.0 - a)
    if rho <= 0.0:
        raise ValueError("rho must be positive")

    k0 = _max_abs_poly(f.f0.derivative().coefficients, 0.0, a)
    k1 = _max_abs_poly(f.f1.derivative().coefficients, a, 1.0)
    k2 = _k2_separated(f, rho)
    gamma = 0.5 * min(-f.slope_at_zero, -f.slope_at_one)

    mask = np.abs(ws.z_grid) <= M
    if not np.any(mask):
        raise DegenerateProfile(f"no profile samples with |z| <= {M}")
    eps_star = float(np.min(ws.w_values[mask]))
    if eps_star <= 0.0:
        raise DegenerateProfile(f"profile derivative min {eps_star} is not positive")

    total = k0 + k1 + k2
    return SuperSubParams(
        gamma=gamma,
        sigma=(gamma + total) / (gamma * eps_star),
        delta0=gamma / total,
        K0=k0,
        K1=k1,
        K2_sep=k2,
        eps_star=eps_star,
        M=float(M),
        rho=float(rho),
    )


def envelope_value(
    ws: WaveSolution,
    p: SuperSubParams,
    sign: Literal["plus", "minus"],
    x,
    t: float,
    z0: float = 0.0,
    delta: float | None = None,
    *,
    profile: WaveProfile | None = None,
):
    """Perturbation envelope u*(x + c t + z0 +/- sigma*delta*(1 - e^{-gamma t}))
    +/- delta*e^{-gamma t}."""
    if profile is None:
        profile = WaveProfile(ws)
    a = profile.a
    if delta is None:
        delta = min(p.delta0, a / 4.0, (1.0 - a) / 4.0)
    if not (0.0 < delta <= min(p.delta0, a / 4.0, (1.0 - a) / 4.0) + 1e-12):
        raise ValueError(
            f"delta={delta} outside (0, min(delta0, a/4, (1-a)/4)]"
        )
    if sign == "plus":
        s = 1.0
    elif sign == "minus":
        s = -1.0
    else:
        raise ValueError(f"unknown sign {sign!r}")
    drift = math.exp(-p.gamma * t)
    shift = ws.c_star * t + z0 + s * p.sigma * delta * (1.0 - drift)
    return profile(np.asarray(x, dtype=float) + shift) + s * delta * drift


@dataclass
class ComparisonReport:
    """Worst ordering violation seen while evolving an ordered pair."""

    max_violation: float
    t_at: float | None
    x_at: float | None
    t_end: float


def comparison_check(
    f: ReactionTerm,
    lower0: np.ndarray,
    upper0: np.ndarray,
    g: Grid1D,
    t_end: float,
) -> ComparisonReport:
    """Evolve an ordered pair of states and record how far the ordering is
    ever violated (max over time of max(0, lower - upper))."""
    lower0 = np.asarray(lower0, dtype=float)
    upper0 = np.asarray(upper0, dtype=float)
    if np.any(lower0 > upper0):
        raise ValueError("initial data not ordered: lower0 > upper0 somewhere")
    lo_state = SimState(t=0.0, u=lower0.copy(), grid=g)
    hi_state = SimState(t=0.0, u=upper0.copy(), grid=g)
    worst = 0.0
    t_at: float | None = None
    x_at: float | None = None
    x = g.x
    n_steps = int(math.ceil(t_end / g.dt - 1e-12))
    for _ in range(n_steps):
        lo_state = step(f, lo_state, g)
        hi_state = step(f, hi_state, g)
        gap = lo_state.u - hi_state.u
        i = int(np.argmax(gap))
        if gap[i] > worst:
            worst = float(gap[i])
            t_at = lo_state.t
            x_at = float(x[i])
    return ComparisonReport(max_violation=worst, t_at=t_at, x_at=x_at, t_end=t_end)
