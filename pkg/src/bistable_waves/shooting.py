"""Phase-plane shooting for the true wave speed and C^1 profile.

In the phase plane (u, w) with w = u_z > 0 the wave ODE becomes
dw/du = c - f(u)/w.  The left half path starts on the unstable manifold of
(0, 0), the right half path is integrated backward from the stable
manifold of (1, 0); both equilibria are singular points of the ODE, so the
integrations are seeded a distance eps away with the linearized slope.
The mismatch S(c) = w_left(a; c) - w_right(a; c) is strictly increasing in
c, which makes bisection on S the whole speed solver.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np
from scipy.integrate import solve_ivp

from .errors import BracketFailure, NoPositiveRoot, PathCollapse
from .linear_theory import SpeedBracket, lambda0_plus, lambda1_minus
from .reaction import ReactionTerm

PathSide = Literal["left", "right"]

_W_FLOOR = 1e-12
_EXPANSION_CAP = 1024.0


@dataclass
class PhasePath:
    """One half of the heteroclinic connection, as w over u."""

    side: PathSide
    c: float
    u: np.ndarray
    w: np.ndarray
    w_of_u: Callable[[np.ndarray], np.ndarray] = field(repr=False, compare=False)

    @property
    def samples(self) -> list[tuple[float, float]]:
        return list(zip(self.u.tolist(), self.w.tolist()))

    @property
    def w_at_a(self) -> float:
        # Samples are ascending in u; the branch point is the right end of
        # the left path and the left end of the right path.
        return float(self.w[-1] if self.side == "left" else self.w[0])


def default_eps(f: ReactionTerm) -> float:
    """Seed distance from the singular equilibria."""
    return max(1e-6 * min(f.a, 1.0 - f.a), 1e-8)


def shoot_half(
    f: ReactionTerm,
    side: PathSide,
    c: float,
    eps: float | None = None,
    rtol: float = 1e-10,
) -> PhasePath:
    """Integrate one phase-plane half path up to u = a.

    left:  dw/du = c - f0(u)/w from u = eps, seeded on the unstable
           manifold w(eps) = lambda0_plus(c; f0'(0)) * eps.
    right: dw/du = c - f1(u)/w backward from u = 1 - eps, seeded on the
           stable manifold w(1-eps) = -lambda1_minus(c; f1'(1)) * eps.

    Raises PathCollapse if w falls below the floor 1e-12 before reaching a
    (possible on the right side only; callers treat it as w(a) = 0).
    """
    if c < 0.0:
        raise ValueError(f"speed c={c} must be >= 0")
    if eps is None:
        eps = default_eps(f)
    if not (0.0 < eps <= min(f.a, 1.0 - f.a) / 100.0):
        raise ValueError(f"eps={eps} outside (0, min(a, 1-a)/100]")

    if side == "left":
        poly = f.f0
        u0, u1 = eps, f.a
        w0 = lambda0_plus(c, f.slope_at_zero) * eps
    elif side == "right":
        poly = f.f1
        u0, u1 = 1.0 - eps, f.a
        w0 = -lambda1_minus(c, f.slope_at_one) * eps
    else:
        raise ValueError(f"unknown side {side!r}")

    def rhs(u, w):
        return c - poly(u) / w[0]

    def collapse(u, w):
        return w[0] - _W_FLOOR

    collapse.terminal = True
    collapse.direction = -1.0

    sol = solve_ivp(
        rhs,
        (u0, u1),
        [w0],
        method="RK45",
        rtol=rtol,
        atol=1e-16,
        dense_output=True,
        events=collapse,
    )
    if sol.status == 1:  # collapse event fired
        u_at = float(sol.t_events[0][0])
        raise PathCollapse(
            f"{side} path at c={c} collapsed to w<={_W_FLOOR} at u={u_at:.6g}", u_at=u_at
        )
    if not sol.success:
        # A vanishing w makes dw/du ~ 1/w stiff enough that the step size
        # can underflow before the floor event interpolates; that is still
        # a collapse, not an integrator defect.
        if side == "right" and sol.y[0][-1] <= 1e-6:
            u_at = float(sol.t[-1])
            raise PathCollapse(
                f"right path at c={c} collapsed to w={sol.y[0][-1]:.3g} at u={u_at:.6g}",
                u_at=u_at,
            )
        raise RuntimeError(f"phase-path integration failed at c={c}: {sol.message}")

    dense = sol.sol
    lam_seed = w0 / eps  # signed slope magnitude of the seeded manifold

    if side == "left":

        def w_of_u(u):
            u = np.asarray(u, dtype=float)
            inside = np.clip(u, u0, u1)
            out = np.where(u < u0, lam_seed * u, dense(inside)[0])
            return float(out) if out.ndim == 0 else out

        u_samples, w_samples = sol.t, sol.y[0]
    else:

        def w_of_u(u):
            u = np.asarray(u, dtype=float)
            inside = np.clip(u, u1, u0)
            out = np.where(u > u0, lam_seed * (1.0 - u), dense(inside)[0])
            return float(out) if out.ndim == 0 else out

        u_samples, w_samples = sol.t[::-1], sol.y[0][::-1]

    return PhasePath(side=side, c=float(c), u=u_samples, w=w_samples, w_of_u=w_of_u)


def speed_mismatch(
    f: ReactionTerm, c: float, eps: float | None = None, rtol: float = 1e-10
) -> float:
    """S(c) = w_left(a; c) - w_right(a; c); a right-side collapse counts as
    w_right(a; c) = 0."""
    left = shoot_half(f, "left", c, eps=eps, rtol=rtol)
    try:
        w_right = shoot_half(f, "right", c, eps=eps, rtol=rtol).w_at_a
    except PathCollapse:
        w_right = 0.0
    return left.w_at_a - w_right


def find_speed(
    f: ReactionTerm,
    bracket: SpeedBracket | None,
    tol_c: float = 1e-10,
    *,
    eps: float | None = None,
    rtol: float = 1e-10,
    check_monotone: bool = True,
    details: dict | None = None,
) -> float:
    """Bisect the mismatch S to the unique speed with |S(c*)| <= tol_c.

    The working bracket is [c_check, c_hat] when the envelope bracket is
    ordered, else [0, expanding].  Raises NoPositiveRoot when S(0) >= 0
    (the root sits at or left of zero) and BracketFailure when no sign
    change appears up to c = 2**10.
    """
    mismatch = lambda c: speed_mismatch(f, c, eps=eps, rtol=rtol)
    n_evals = 0

    def S(c: float) -> float:
        nonlocal n_evals
        n_evals += 1
        return mismatch(c)

    if bracket is not None and bracket.ordering_ok:
        lo, hi = bracket.c_check, bracket.c_hat
    else:
        lo, hi = 0.0, 1.0

    s_lo = S(lo)
    if lo > 0.0 and abs(s_lo) <= tol_c:
        c_star = lo
        s_star = s_lo
        iterations = 0
    else:
        if lo > 0.0 and s_lo > tol_c:
            # Mismatch already positive at the lower end: fall back to 0.
            lo, s_lo = 0.0, S(0.0)
        if lo == 0.0 and s_lo >= -tol_c:
            # The root sits at or left of c = 0: no positive wave speed.
            raise NoPositiveRoot(
                f"mismatch S(0)={s_lo:.3g} is not negative: no positive wave speed"
            )
        if hi <= lo:
            hi = max(2.0 * lo, 1.0)
        s_hi = S(hi)
        while s_hi < -tol_c:
            if hi >= _EXPANSION_CAP:
                raise BracketFailure(
                    f"no sign change of the mismatch up to c={hi} (S={s_hi:.3g})"
                )
            lo, s_lo = hi, s_hi
            hi *= 2.0
            s_hi = S(hi)

        c_star, s_star = lo, s_lo
        iterations = 0
        for iterations in range(1, 201):
            mid = 0.5 * (lo + hi)
            s_mid = S(mid)
            if abs(s_mid) < abs(s_star):
                c_star, s_star = mid, s_mid
            if abs(s_mid) <= tol_c or (hi - lo) <= 1e-14 * max(1.0, hi):
                break
            if s_mid > 0.0:
                hi = mid
            else:
                lo = mid

    monotone_ok = True
    if check_monotone and bracket is not None and bracket.c_hat > bracket.c_check + 1e-9:
        probes = np.linspace(bracket.c_check, bracket.c_hat, 7)[1:-1]
        values = [S(float(p)) for p in probes]
        diffs = np.diff(values)
        if np.any(diffs < -1e-8):
            monotone_ok = False
            warnings.warn(
                "shooting mismatch not monotone at spot-check speeds; "
                "integration tolerance may be too loose",
                RuntimeWarning,
            )

    if details is not None:
        details["iterations"] = iterations
        details["evaluations"] = n_evals
        details["residual"] = s_star
        details["monotone_ok"] = monotone_ok
    return c_star


@dataclass
class WaveSolution:
    """Sampled C^1 traveling-wave profile at the matched speed."""

    c_star: float
    z_grid: np.ndarray
    u_values: np.ndarray
    w_values: np.ndarray
    derivative_jump_at_0: float
    bracket: SpeedBracket | None = None


def _march(
    w_of_u: Callable, u_start: float, target: float, dz: float, forward: bool
) -> tuple[list[float], list[float]]:
    """Fixed-step RK4 on du/dz = w(u) until u passes the target level."""
    us: list[float] = []
    ws: list[float] = []
    u = u_start
    h = dz if forward else -dz
    cap = int(round(400.0 / dz))
    for _ in range(cap):
        k1 = w_of_u(u)
        k2 = w_of_u(u + 0.5 * h * k1)
        k3 = w_of_u(u + 0.5 * h * k2)
        k4 = w_of_u(u + h * k3)
        u = u + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        us.append(u)
        ws.append(float(w_of_u(u)))
        if (forward and u >= target) or (not forward and u <= target):
            return us, ws
    raise RuntimeError(
        f"profile march did not reach u={target} within z range 400 (dz={dz})"
    )


def reconstruct_profile(
    f: ReactionTerm,
    c_star: float,
    u_eps: float = 1e-4,
    dz: float = 1e-2,
    *,
    bracket: SpeedBracket | None = None,
    eps: float | None = None,
    rtol: float = 1e-10,
) -> WaveSolution:
    """Rebuild u(z) from the phase paths at c_star by integrating du/dz = w(u).

    Marches forward from u(0) = a until u >= 1 - u_eps on the right path
    and backward until u <= u_eps on the left path, on a uniform z grid.
    """
    if not (0.0 < u_eps <= 1e-3):
        raise ValueError(f"u_eps={u_eps} outside (0, 1e-3]")
    if dz <= 0.0:
        raise ValueError("dz must be positive")
    left = shoot_half(f, "left", c_star, eps=eps, rtol=rtol)
    right = shoot_half(f, "right", c_star, eps=eps, rtol=rtol)
    jump = abs(left.w_at_a - right.w_at_a)

    u_fwd, w_fwd = _march(right.w_of_u, f.a, 1.0 - u_eps, dz, forward=True)
    u_bwd, w_bwd = _march(left.w_of_u, f.a, u_eps, dz, forward=False)

    n_b, n_f = len(u_bwd), len(u_fwd)
    z = np.arange(-n_b, n_f + 1, dtype=float) * dz
    u = np.concatenate([u_bwd[::-1], [f.a], u_fwd])
    w_mid = 0.5 * (left.w_at_a + right.w_at_a)
    w = np.concatenate([w_bwd[::-1], [w_mid], w_fwd])
    return WaveSolution(
        c_star=float(c_star),
        z_grid=z,
        u_values=u,
        w_values=w,
        derivative_jump_at_0=jump,
        bracket=bracket,
    )


def verify_c1(ws: WaveSolution, tol: float = 1e-6) -> bool:
    """True iff the derivative jump at z = 0 is within tol and w > 0 throughout."""
    return bool(ws.derivative_jump_at_0 <= tol and np.all(ws.w_values > 0.0))


def solve_wave(
    f: ReactionTerm,
    *,
    tol_c: float = 1e-10,
    u_eps: float = 1e-4,
    dz: float = 1e-2,
    eps: float | None = None,
    rtol: float = 1e-10,
    details: dict | None = None,
) -> WaveSolution:
    """Full pipeline: slope bounds, envelope bracket, bisected speed, profile."""
    from .linear_theory import speed_bracket
    from .reaction import slope_bounds

    bracket = speed_bracket(slope_bounds(f), f.a)
    c_star = find_speed(f, bracket, tol_c, eps=eps, rtol=rtol, details=details)
    return reconstruct_profile(
        f, c_star, u_eps=u_eps, dz=dz, bracket=bracket, eps=eps, rtol=rtol
    )
