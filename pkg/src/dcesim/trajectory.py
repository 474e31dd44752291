"""Closed-form boundary trajectories for a 1+1 cavity with moving mirrors.

Three families of log-cosh ramp motions are supported: a single moving
right mirror, a symmetrically expanding mirror pair, and a rigidly
translating cavity.  Each boundary interpolates smoothly between two
static positions, accelerating close to the speed of light (c = 1) over a
time interval of length ``epsilon`` controlled by the rate ``kappa``.
Trajectories can be time reversed (collapsing cavities) and concatenated
into multi-segment motions with static dwells in between.
"""

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
from scipy.optimize import brentq

from .errors import ContinuityError, DegenerateWindowError, InvalidParameterError

__all__ = [
    "Family",
    "TrajectoryParams",
    "BoundaryState",
    "CompositeTrajectory",
    "log_cosh_stable",
    "time_reverse",
    "concat",
    "static_window",
]

#: Junction position tolerance for concatenation.  Below the integrator
#: tolerance, above double-rounding noise.
JUNCTION_TOL = 1e-9

#: Default velocity threshold defining the effectively-static window.
DEFAULT_V_TOL = 1e-8


class Family(str, Enum):
    ONE_MIRROR = "one-mirror"
    SYMMETRIC = "symmetric"
    RIGID = "rigid"


def log_cosh_stable(x):
    """Evaluate log(cosh(x)) without overflow for large ``|x|``.

    Uses ``|x| + log1p(exp(-2|x|)) - log(2)``, which agrees with the naive
    form wherever that is representable and remains exact in the tails.
    """
    ax = np.abs(x)
    return ax + np.log1p(np.exp(-2.0 * ax)) - math.log(2.0)


@dataclass(frozen=True)
class BoundaryState:
    """Boundary positions and velocities at one instant (or array of them)."""

    f: np.ndarray
    g: np.ndarray
    fdot: np.ndarray
    gdot: np.ndarray
    L: np.ndarray
    Ldot: np.ndarray


@dataclass(frozen=True)
class TrajectoryParams:
    """One log-cosh boundary motion.

    Parameters
    ----------
    family : Family
        Which boundaries move and in what relative sense.
    epsilon : float
        Change in cavity size (one-mirror / symmetric) or translation
        distance (rigid).  Must be >= 0; zero means a static cavity.
    kappa : float
        Acceleration rate; the peak boundary speed is tanh(epsilon*kappa/2).
    t0 : float
        Start of the acceleration interval [t0, t0 + epsilon].
    l0 : float
        Cavity length while static in the past.
    reversed : bool
        Run the motion backwards in time (mirrored about its center).
    """

    family: Family
    epsilon: float
    kappa: float
    t0: float = 0.0
    l0: float = 1.0
    reversed: bool = False

    def __post_init__(self):
        vals = (self.epsilon, self.kappa, self.t0, self.l0)
        if not all(math.isfinite(v) for v in vals):
            raise InvalidParameterError(f"non-finite trajectory parameter: {vals}")
        if self.epsilon < 0:
            raise InvalidParameterError(f"epsilon must be >= 0, got {self.epsilon}")
        if self.kappa <= 0:
            raise InvalidParameterError(f"kappa must be > 0, got {self.kappa}")
        if self.l0 <= 0:
            raise InvalidParameterError(f"l0 must be > 0, got {self.l0}")
        object.__setattr__(self, "family", Family(self.family))

    @property
    def s(self):
        """Dimensionless ramp parameter epsilon * kappa."""
        return self.epsilon * self.kappa

    @property
    def motion_center(self):
        """Temporal midpoint of the acceleration interval."""
        return self.t0 + 0.5 * self.epsilon

    def max_speed(self):
        """Peak boundary speed, tanh(s/2) < 1 for every family."""
        return math.tanh(0.5 * self.s)

    def _displacement(self, t):
        # 0 -> epsilon ramp (reversed: epsilon -> 0) and its time derivative
        tau = self.kappa * (np.asarray(t, dtype=float) - self.t0)
        s = self.s
        m = (s + log_cosh_stable(tau) - log_cosh_stable(s - tau)) / (2.0 * self.kappa)
        rate = 0.5 * (np.tanh(tau) + np.tanh(s - tau))
        if self.reversed:
            return self.epsilon - m, -rate
        return m, rate

    def eval(self, t):
        """Boundary positions and velocities from the closed forms.

        ``t`` may be a scalar or an ndarray; fields of the returned
        BoundaryState match its shape.
        """
        m, rate = self._displacement(t)
        zero = np.zeros_like(m)
        if self.family is Family.ONE_MIRROR:
            f, fdot = zero, zero
        elif self.family is Family.SYMMETRIC:
            f, fdot = -m, -rate
        else:  # RIGID
            f, fdot = m, rate
        g = self.l0 + m
        gdot = rate
        return BoundaryState(f=f, g=g, fdot=fdot, gdot=gdot, L=g - f, Ldot=gdot - fdot)


def time_reverse(traj):
    """Mirror a trajectory in time about its motion center.

    Velocities are negated pointwise; applying twice returns the original
    parameters exactly.  A reversed one-mirror motion starts at cavity
    length l0 + epsilon and collapses back to l0.
    """
    return replace(traj, reversed=not traj.reversed)


@dataclass(frozen=True)
class CompositeTrajectory:
    """Segment-wise boundary motion with static dwells at the junctions.

    ``switch_times[k]`` is the handover instant from segment k to k+1; both
    segments are effectively static there, so either evaluation agrees to
    within the junction tolerance.
    """

    segments: tuple
    switch_times: tuple

    def eval(self, t):
        t_arr = np.asarray(t, dtype=float)
        idx = np.searchsorted(np.asarray(self.switch_times), t_arr, side="right")
        if t_arr.ndim == 0:
            return self.segments[int(idx)].eval(t)
        fields = {}
        parts = [seg.eval(t_arr) for seg in self.segments]
        for name in ("f", "g", "fdot", "gdot", "L", "Ldot"):
            out = np.empty_like(t_arr)
            for k, part in enumerate(parts):
                mask = idx == k
                out[mask] = np.asarray(getattr(part, name))[mask]
            fields[name] = out
        return BoundaryState(**fields)

    def max_speed(self):
        return max(seg.max_speed() for seg in self.segments)


def _single_window(traj, v_tol):
    """Static window of one TrajectoryParams via root-finding on the speed."""
    peak = traj.max_speed()
    if v_tol >= peak:
        raise DegenerateWindowError(
            f"v_tol={v_tol} is not below the peak boundary speed {peak}"
        )
    kappa = traj.kappa
    t_c = traj.motion_center

    def speed(t):
        st = traj.eval(t)
        return max(abs(float(st.fdot)), abs(float(st.gdot)))

    # speed is monotone on each side of the center; bracket the early tail
    t_left = traj.t0 + (0.5 * math.log(v_tol) - 10.0) / kappa
    t_in = brentq(lambda t: speed(t) - v_tol, t_left, t_c, xtol=1e-14 / kappa)
    t_out = 2.0 * t_c - t_in
    return min(t_in, traj.t0), max(t_out, traj.t0 + traj.epsilon)


def static_window(traj, v_tol=DEFAULT_V_TOL):
    """Earliest and latest times where both boundary speeds stay below v_tol.

    The window always brackets the acceleration interval.  Raises
    DegenerateWindowError when v_tol is at or above the peak speed (in
    particular for epsilon = 0, where nothing moves).
    """
    if v_tol <= 0:
        raise InvalidParameterError(f"v_tol must be > 0, got {v_tol}")
    if isinstance(traj, CompositeTrajectory):
        t_in, _ = _single_window(traj.segments[0], v_tol)
        _, t_out = _single_window(traj.segments[-1], v_tol)
        return t_in, t_out
    return _single_window(traj, v_tol)


def concat(a, b, rest=0.0, v_tol=DEFAULT_V_TOL):
    """Chain trajectory ``b`` after ``a`` with a static dwell of ``rest``.

    ``b`` is shifted in time so that its static-in window begins where the
    static-out window of ``a`` ends plus the dwell.  Boundary positions
    must be continuous across the junction to within JUNCTION_TOL.
    """
    if rest < 0:
        raise InvalidParameterError(f"rest must be >= 0, got {rest}")
    if isinstance(a, CompositeTrajectory):
        segments, switches = a.segments, a.switch_times
        _, a_out = _single_window(segments[-1], v_tol)
    else:
        segments, switches = (a,), ()
        _, a_out = _single_window(a, v_tol)

    b_in, _ = _single_window(b, v_tol)
    b_shifted = replace(b, t0=b.t0 + (a_out + rest - b_in))

    end_a = segments[-1].eval(a_out)
    start_b = b_shifted.eval(a_out + rest)
    gap = max(abs(float(end_a.f) - float(start_b.f)),
              abs(float(end_a.g) - float(start_b.g)))
    if gap > JUNCTION_TOL:
        raise ContinuityError(
            f"boundary positions jump by {gap:.3e} at the junction", gap=gap
        )
    return CompositeTrajectory(
        segments=segments + (b_shifted,),
        switch_times=switches + (a_out + 0.5 * rest,),
    )
