"""End-to-end evolution of a full in basis through one boundary motion.

The in basis is prepared at the start of the effectively-static window,
all columns are advanced together as one stacked linear system, and the
Bogoliubov pair is read off against the static out basis at the window
end.  Norm and orthogonality drifts of the Klein-Gordon products are
recorded at evenly spaced checkpoints along the way.
"""

from dataclasses import dataclass

import numpy as np

from .bogoliubov import BasisSpec, EvolvedBasis, extract, kg_gram, static_basis_arrays
from .dynamics import rhs_arrays
from .errors import DegenerateWindowError
from .integrator import StepStats, Tolerances, integrate
from .trajectory import DEFAULT_V_TOL, TrajectoryParams, static_window

__all__ = ["RunDiagnostics", "simulation_window", "evolve_basis", "run_simulation"]


@dataclass
class RunDiagnostics:
    """Conservation checks and stepper counters for one run."""

    window: tuple
    checkpoint_times: np.ndarray
    norm_err: np.ndarray   # (checkpoints, N): |<u_i, u_i> - 1|
    ortho_err: np.ndarray  # (checkpoints,): worst off-diagonal / conjugate product
    stats: StepStats

    @property
    def max_norm_err(self):
        return float(np.max(self.norm_err))

    @property
    def max_ortho_err(self):
        return float(np.max(self.ortho_err))


def simulation_window(traj, v_tol=DEFAULT_V_TOL):
    """Integration window for a trajectory; unit span for a static cavity."""
    if isinstance(traj, TrajectoryParams) and traj.epsilon == 0:
        return traj.t0, traj.t0 + 1.0
    try:
        return static_window(traj, v_tol)
    except DegenerateWindowError:
        if traj.max_speed() == 0.0:
            t0 = traj.t0 if isinstance(traj, TrajectoryParams) else 0.0
            return t0, t0 + 1.0
        raise


def _rhs(traj, n_modes, n_cols):
    def f(t, y):
        z = y.view(np.complex128).reshape(2, n_modes, n_cols)
        dphi, dpi = rhs_arrays(traj.eval(t), z[0], z[1])
        out = np.empty_like(z)
        out[0] = dphi
        out[1] = dpi
        return out.reshape(-1).view(float)

    return f


def evolve_basis(traj, n_modes, tol=None, v_tol=DEFAULT_V_TOL, checkpoints=20):
    """Advance all static in-basis columns across the motion window.

    Returns the evolved basis at the window end together with
    RunDiagnostics holding per-checkpoint Klein-Gordon norm errors,
    worst-case orthogonality violations, and aggregated stepper counters.
    """
    tol = tol or Tolerances()
    t_in, t_out = simulation_window(traj, v_tol)
    length_in = float(traj.eval(t_in).L)
    in_spec = BasisSpec(length=length_in, t_ref=t_in, n_modes=n_modes)
    phi, pi = static_basis_arrays(in_spec, t_in)

    z = np.empty((2, n_modes, n_modes), dtype=complex)
    z[0], z[1] = phi, pi
    y = z.reshape(-1).view(float).copy()
    f = _rhs(traj, n_modes, n_modes)

    times = np.linspace(t_in, t_out, checkpoints + 1)
    norm_err = np.empty((checkpoints, n_modes))
    ortho_err = np.empty(checkpoints)
    stats = StepStats()
    for k in range(checkpoints):
        y, leg = integrate(f, (times[k], times[k + 1]), y, tol)
        stats.merge(leg)
        zk = y.view(np.complex128).reshape(2, n_modes, n_modes)
        gram = kg_gram(zk[0], zk[1], zk[0], zk[1])
        norm_err[k] = np.abs(np.diag(gram) - 1.0)
        off = np.abs(gram - np.diag(np.diag(gram)))
        conj_gram = kg_gram(zk[0], zk[1], zk[0].conj(), zk[1].conj())
        ortho_err[k] = max(float(np.max(off)), float(np.max(np.abs(conj_gram))))

    zk = y.view(np.complex128).reshape(2, n_modes, n_modes)
    evolved = EvolvedBasis(t=t_out, phi=zk[0].copy(), pi=zk[1].copy(), in_spec=in_spec)
    diag = RunDiagnostics(
        window=(t_in, t_out),
        checkpoint_times=times[1:],
        norm_err=norm_err,
        ortho_err=ortho_err,
        stats=stats,
    )
    return evolved, diag


def run_simulation(traj, n_modes, tol=None, v_tol=DEFAULT_V_TOL, checkpoints=20):
    """Full pipeline: evolve the in basis and extract the Bogoliubov pair."""
    evolved, diag = evolve_basis(traj, n_modes, tol, v_tol, checkpoints)
    length_out = float(traj.eval(evolved.t).L)
    out_spec = BasisSpec(length=length_out, t_ref=evolved.t, n_modes=n_modes)
    pair = extract(evolved, out_spec, traj=traj, v_tol=v_tol)
    return pair, diag
