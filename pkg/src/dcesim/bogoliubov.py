"""Static bases, Klein-Gordon products, and Bogoliubov transformations.

A static cavity of length L carries the orthonormal positive-frequency
columns used as in/out bases.  Evolving the in basis through a boundary
motion and projecting onto the out basis yields the (alpha, beta) matrix
pair; beta mixes positive and negative frequencies and measures particle
production.  The pair algebra implemented here covers time reversal
(collapsing trajectories), composition of consecutive motions, closed
expand-collapse cycles, and their n-fold iteration.

Phase convention: each basis has unit phase at its reference time, so
moduli are reproducible bit-for-bit while raw phases depend on the chosen
t_ref.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .dynamics import StateColumn
from .errors import InstabilityError, InvalidParameterError

__all__ = [
    "BasisSpec",
    "BogoliubovPair",
    "EvolvedBasis",
    "static_basis_column",
    "static_basis_arrays",
    "kg_product",
    "kg_gram",
    "extract",
    "identity_residuals",
    "time_reverse_pair",
    "compose",
    "cycle",
    "iterate_cycles",
]


@dataclass(frozen=True)
class BasisSpec:
    """Static-cavity basis: length, phase reference time, and cutoff."""

    length: float
    t_ref: float
    n_modes: int

    def __post_init__(self):
        if not self.length > 0:
            raise InvalidParameterError(f"length must be > 0, got {self.length}")
        if self.n_modes < 1:
            raise InvalidParameterError(f"n_modes must be >= 1, got {self.n_modes}")

    def omega(self, index):
        """Mode frequency pi * index / length (index may be an array)."""
        return np.pi * np.asarray(index) / self.length

    @property
    def d_omega(self):
        return np.pi / self.length

    def close_to(self, other, tol=1e-9):
        return (
            self.n_modes == other.n_modes
            and abs(self.length - other.length) <= tol * max(self.length, other.length)
        )


@dataclass
class EvolvedBasis:
    """All basis columns at one instant; column I sits in phi[:, I-1]."""

    t: float
    phi: np.ndarray
    pi: np.ndarray
    in_spec: BasisSpec


@dataclass
class BogoliubovPair:
    """Matrices relating an evolved in basis to a static out basis."""

    alpha: np.ndarray
    beta: np.ndarray
    in_spec: BasisSpec
    out_spec: BasisSpec

    def __post_init__(self):
        self.alpha = np.asarray(self.alpha, dtype=complex)
        self.beta = np.asarray(self.beta, dtype=complex)
        if self.alpha.shape != self.beta.shape or self.alpha.ndim != 2:
            raise ValueError("alpha and beta must be equal-shape square matrices")

    @property
    def n_modes(self):
        return self.alpha.shape[0]


def static_basis_column(spec, index, t):
    """Positive-frequency column of mode ``index`` for a static cavity.

    phi_n = delta_{n,index} (L w)^(-1/2) e^{-i w (t - t_ref)} and
    pi_n = -i delta_{n,index} (L w)^(+1/2) e^{-i w (t - t_ref)}, which has
    unit Klein-Gordon norm.
    """
    if not 1 <= index <= spec.n_modes:
        raise IndexError(f"mode index {index} outside 1..{spec.n_modes}")
    omega = float(spec.omega(index))
    phase = np.exp(-1j * omega * (t - spec.t_ref))
    phi = np.zeros(spec.n_modes, dtype=complex)
    pi = np.zeros(spec.n_modes, dtype=complex)
    root = np.sqrt(spec.length * omega)
    phi[index - 1] = phase / root
    pi[index - 1] = -1j * root * phase
    return StateColumn(t=t, phi=phi, pi=pi)


def static_basis_arrays(spec, t):
    """All static basis columns stacked as (phi, pi) arrays of shape (N, N)."""
    omega = spec.omega(np.arange(1, spec.n_modes + 1))
    phase = np.exp(-1j * omega * (t - spec.t_ref))
    root = np.sqrt(spec.length * omega)
    phi = np.diag(phase / root).astype(complex)
    pi = np.diag(-1j * root * phase)
    return phi, pi


def kg_product(a, b):
    """Klein-Gordon product (i/2) sum_n conj(a.phi) b.pi - conj(a.pi) b.phi.

    Conserved along solutions; sesquilinear with <a, b> = conj(<b, a>).
    """
    if a.phi.shape != b.phi.shape:
        raise ValueError("columns have mismatched cutoffs")
    if a.t != b.t:
        raise ValueError(f"columns at different times: {a.t} vs {b.t}")
    return complex(
        0.5j * (np.vdot(a.phi, b.pi) - np.vdot(a.pi, b.phi))
    )


def kg_gram(phi_a, pi_a, phi_b, pi_b):
    """Matrix of products G[i, j] = <a_i, b_j> between two column stacks."""
    return 0.5j * (phi_a.conj().T @ pi_b - pi_a.conj().T @ phi_b)


def extract(evolved, out_spec, in_spec=None, traj=None, v_tol=None):
    """Project evolved in-basis columns onto a static out basis.

    alpha_IJ = <w_J, u_I> and beta_IJ = -<conj(w_J), u_I>, both evaluated at
    the single instant carried by ``evolved`` (the product is conserved on
    solutions, so no time averaging is needed).

    ``evolved`` is an EvolvedBasis or a sequence of StateColumn at equal
    times (then ``in_spec`` must be given).  When ``traj`` and ``v_tol``
    are provided, a residual boundary speed above v_tol at the extraction
    time triggers a warning.
    """
    if isinstance(evolved, EvolvedBasis):
        t, phi, pi, in_spec = evolved.t, evolved.phi, evolved.pi, evolved.in_spec
    else:
        cols = list(evolved)
        if in_spec is None:
            raise ValueError("in_spec is required for a plain column sequence")
        t = cols[0].t
        if any(c.t != t for c in cols):
            raise ValueError("columns are not all at the same time")
        phi = np.stack([c.phi for c in cols], axis=1)
        pi = np.stack([c.pi for c in cols], axis=1)
    if phi.shape[0] != out_spec.n_modes:
        raise ValueError(
            f"cutoff mismatch: columns have {phi.shape[0]} modes, "
            f"out basis {out_spec.n_modes}"
        )
    if traj is not None and v_tol is not None:
        st = traj.eval(t)
        speed = max(abs(float(st.fdot)), abs(float(st.gdot)))
        if speed > v_tol:
            warnings.warn(
                f"extraction at t={t} outside the static window: residual "
                f"boundary speed {speed:.3e} exceeds v_tol={v_tol:.3e}",
                stacklevel=2,
            )
    w_phi, w_pi = static_basis_arrays(out_spec, t)
    alpha = kg_gram(w_phi, w_pi, phi, pi).T
    beta = -kg_gram(w_phi.conj(), w_pi.conj(), phi, pi).T
    return BogoliubovPair(alpha=alpha, beta=beta, in_spec=in_spec, out_spec=out_spec)


def identity_residuals(pair):
    """Residual matrices of the two Bogoliubov identities.

    R1 = |alpha alpha^H - beta beta^H - 1| and R2 = |alpha beta^T -
    beta alpha^T|; both vanish for an untruncated transformation.
    """
    a, b = pair.alpha, pair.beta
    r1 = a @ a.conj().T - b @ b.conj().T - np.eye(pair.n_modes)
    r2 = a @ b.T - b @ a.T
    return np.abs(r1), np.abs(r2)


def time_reverse_pair(pair):
    """Coefficients of the time-reversed (collapsing) scenario.

    The out basis evolved backwards is expanded in the in basis with
    sigma_IJ = conj(alpha_JI) and lambda_IJ = -beta_JI; in/out specs swap.
    Applying twice returns the original pair exactly.
    """
    return BogoliubovPair(
        alpha=pair.alpha.conj().T,
        beta=-pair.beta.T,
        in_spec=pair.out_spec,
        out_spec=pair.in_spec,
    )


def compose(first, second):
    """Chain two transformations: in --first--> junction --second--> out.

    alpha_tot = first.alpha @ second.alpha + first.beta @ conj(second.beta)
    beta_tot  = first.alpha @ second.beta  + first.beta @ conj(second.alpha)

    The junction bases must agree in length and cutoff; a phase-reference
    mismatch between them cancels in the products.
    """
    if not first.out_spec.close_to(second.in_spec):
        raise InvalidParameterError(
            f"junction mismatch: {first.out_spec} vs {second.in_spec}"
        )
    return BogoliubovPair(
        alpha=first.alpha @ second.alpha + first.beta @ second.beta.conj(),
        beta=first.alpha @ second.beta + first.beta @ second.alpha.conj(),
        in_spec=first.in_spec,
        out_spec=second.out_spec,
    )


def cycle(pair):
    """One closed expand-collapse cycle from the expansion-leg pair.

    The collapse leg is the exact time reverse of the expansion, whose
    coefficients follow from the expansion pair as gamma_IJ = alpha_JI and
    rho_IJ = -conj(beta_JI); the result maps the original cavity onto
    itself.
    """
    t_end = 2.0 * pair.out_spec.t_ref - pair.in_spec.t_ref
    back = BogoliubovPair(
        alpha=pair.alpha.T,
        beta=-pair.beta.conj().T,
        in_spec=pair.out_spec,
        out_spec=BasisSpec(pair.in_spec.length, t_end, pair.in_spec.n_modes),
    )
    return compose(pair, back)


def iterate_cycles(cycle_pair, n, cap=1e12):
    """n-fold self-composition of a closed-cycle transformation.

    Magnitudes typically grow with n; when max(|alpha|, |beta|) exceeds
    ``cap`` an InstabilityError reporting the cycle index is raised.
    """
    if n < 1:
        raise InvalidParameterError(f"cycle count must be >= 1, got {n}")
    if not cycle_pair.in_spec.close_to(cycle_pair.out_spec):
        raise InvalidParameterError(
            "iterate_cycles requires equal in/out cavity lengths"
        )
    result = cycle_pair
    for index in range(2, n + 1):
        result = compose(cycle_pair, result)
        peak = max(
            float(np.max(np.abs(result.alpha))), float(np.max(np.abs(result.beta)))
        )
        if peak > cap:
            raise InstabilityError(
                f"matrix magnitude {peak:.3e} exceeded cap {cap:.3e} "
                f"at cycle {index}",
                cycle_index=index,
            )
    return result
