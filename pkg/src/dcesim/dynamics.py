"""Coupled equations of motion for the cavity field modes.

The field inside the cavity is expanded on sine modes of the instantaneous
boundary positions.  Boundary motion couples the mode amplitudes ``phi_n``
and momenta ``pi_n`` through an antisymmetric index matrix with parity
selection rules: a rigid translation mixes only opposite-parity modes,
a symmetric expansion only equal-parity modes.  Everything here is linear
in the state, so columns can be evolved independently or stacked.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateCavityError

__all__ = [
    "StateColumn",
    "CouplingMatrix",
    "coupling_matrix",
    "rhs",
    "rhs_arrays",
    "momentum_from_velocity",
    "mode_energy",
]


@dataclass
class StateColumn:
    """Mode amplitudes and conjugate momenta of one solution at time t."""

    t: float
    phi: np.ndarray
    pi: np.ndarray

    def __post_init__(self):
        self.phi = np.asarray(self.phi, dtype=complex)
        self.pi = np.asarray(self.pi, dtype=complex)
        if self.phi.shape != self.pi.shape:
            raise ValueError("phi and pi must have equal shapes")


@dataclass(frozen=True)
class CouplingMatrix:
    """Inter-mode coupling entries at one evaluation time (zero diagonal)."""

    entries: np.ndarray
    t: float


# Constant index/parity factors, cached per cutoff.  The time-dependent
# coupling is a linear combination of these two matrices.
_CONST_CACHE = {}


def _consts(n_modes):
    cached = _CONST_CACHE.get(n_modes)
    if cached is None:
        n = np.arange(1, n_modes + 1, dtype=float)
        prod = np.outer(n, n)
        diff = n[None, :] ** 2 - n[:, None] ** 2
        np.fill_diagonal(diff, 1.0)  # avoid 0/0; diagonal zeroed below
        base = 2.0 * prod / diff
        np.fill_diagonal(base, 0.0)
        parity = np.where((n[:, None] + n[None, :]) % 2 == 0, 1.0, -1.0)
        k_vel = base * (parity - 1.0)  # multiplies fdot
        k_len = base * parity          # multiplies Ldot
        omega_sq = (n * np.pi) ** 2
        cached = (k_vel, k_len, omega_sq)
        _CONST_CACHE[n_modes] = cached
    return cached


def _check_cavity(length):
    if not length > 0:
        raise DegenerateCavityError(f"cavity length {length} is not positive")


def coupling_entries(boundary, n_modes):
    """Time-dependent coupling matrix from one BoundaryState."""
    length = float(boundary.L)
    _check_cavity(length)
    k_vel, k_len, _ = _consts(n_modes)
    return (float(boundary.fdot) / length) * k_vel + (
        float(boundary.Ldot) / length
    ) * k_len


def coupling_matrix(traj, t, n_modes):
    """Coupling entries c_nm for trajectory ``traj`` evaluated at time t.

    c_nm = 2 [n m / (m^2 - n^2)] [(fdot/L)((-1)^{n+m} - 1) + (Ldot/L)(-1)^{n+m}]
    off the diagonal and 0 on it.
    """
    if n_modes < 1:
        raise ValueError(f"n_modes must be >= 1, got {n_modes}")
    return CouplingMatrix(entries=coupling_entries(traj.eval(t), n_modes), t=t)


def rhs_arrays(boundary, phi, pi):
    """Time derivatives of stacked (phi, pi) arrays of shape (N, ...).

    Both the amplitude and the momentum equations carry the same coupling
    matrix; the index antisymmetry cancels against the bracket sign.
    """
    n_modes = phi.shape[0]
    length = float(boundary.L)
    _check_cavity(length)
    _, _, omega_sq = _consts(n_modes)
    c = coupling_entries(boundary, n_modes)
    half_rate = 0.5 * float(boundary.Ldot) / length
    dphi = pi / length - half_rate * phi + c @ phi
    dpi = (
        -(omega_sq[:, None] if phi.ndim > 1 else omega_sq) / length * phi
        + half_rate * pi
        + c @ pi
    )
    return dphi, dpi


def rhs(traj, col):
    """Equations of motion applied to one StateColumn."""
    dphi, dpi = rhs_arrays(traj.eval(col.t), col.phi, col.pi)
    return StateColumn(t=col.t, phi=dphi, pi=dpi)


def momentum_from_velocity(traj, t, phi, phidot):
    """Conjugate momenta from amplitudes and their velocities.

    pi_n = L phidot_n + (Ldot/2) phi_n - L * (c @ phi)_n, the inverse of the
    amplitude equation of motion solved for pi.
    """
    phi = np.asarray(phi, dtype=complex)
    phidot = np.asarray(phidot, dtype=complex)
    boundary = traj.eval(t)
    length = float(boundary.L)
    _check_cavity(length)
    c = coupling_entries(boundary, phi.shape[0])
    return length * phidot + 0.5 * float(boundary.Ldot) * phi - length * (c @ phi)


def mode_energy(traj, t, col):
    """Static-cavity quadratic energy (1/2L) sum(|pi|^2 + (n pi)^2 |phi|^2).

    For a static cavity a unit-norm basis column of index I carries energy
    equal to its frequency pi I / L.
    """
    boundary = traj.eval(t)
    length = float(boundary.L)
    _check_cavity(length)
    _, _, omega_sq = _consts(col.phi.shape[0])
    return float(
        (np.sum(np.abs(col.pi) ** 2) + np.sum(omega_sq * np.abs(col.phi) ** 2))
        / (2.0 * length)
    )
