"""Gray-body spectral models, fitting, and thermality diagnostics.

The squared beta coefficients of a thermal run follow a Planck factor in
the out frequency multiplied by an oscillatory gray-body correction; the
squared alpha coefficients add a resonance at an out frequency
proportional to the in frequency, with separate pole strengths below and
above it and an effective temperature parameter on the high-frequency
branch.  Fits run in log space (the spectra span many decades) with a
damped least-squares core and multi-starts over the oscillation detuning
and the resonance position.
"""

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import least_squares

from .errors import InsufficientDataError, InvalidParameterError

__all__ = [
    "FrequencyGrid",
    "Band",
    "BetaFitParams",
    "AlphaFitParams",
    "FitResult",
    "gamma_factor",
    "beta_model",
    "alpha_model",
    "fit_beta",
    "fit_alpha",
    "thermality",
    "detailed_balance_slope",
    "tail_exponent",
    "default_band",
]


@dataclass(frozen=True)
class FrequencyGrid:
    """In/out mode frequencies for given static cavity lengths."""

    l_in: float
    l_out: float

    def __post_init__(self):
        if not (self.l_in > 0 and self.l_out > 0):
            raise InvalidParameterError("grid lengths must be positive")

    def omega_in(self, index):
        return np.pi * np.asarray(index, dtype=float) / self.l_in

    def omega_out(self, index):
        return np.pi * np.asarray(index, dtype=float) / self.l_out

    @property
    def d_omega_in(self):
        return np.pi / self.l_in

    @property
    def d_omega_out(self):
        return np.pi / self.l_out

    @classmethod
    def for_pair(cls, pair):
        return cls(l_in=pair.in_spec.length, l_out=pair.out_spec.length)


@dataclass(frozen=True)
class Band:
    """Inclusive index ranges selecting a block of (I, J) entries."""

    i_min: int
    i_max: int
    j_min: int
    j_max: int

    def __post_init__(self):
        if not (1 <= self.i_min <= self.i_max and 1 <= self.j_min <= self.j_max):
            raise InvalidParameterError(f"malformed band {self}")

    def indices(self):
        """Flattened (I, J) index arrays covering the band."""
        ii = np.arange(self.i_min, self.i_max + 1)
        jj = np.arange(self.j_min, self.j_max + 1)
        i_grid, j_grid = np.meshgrid(ii, jj, indexing="ij")
        return i_grid.ravel(), j_grid.ravel()


def default_band(n_modes, kappa, sharp_threshold=300.0):
    """Fit band mirroring the plotted ranges, scaled to the cutoff.

    Small accelerations use in-mode range (20, 100) at a cutoff of 256 and
    sharp ones (70, 150); both scale proportionally for other cutoffs.
    Out modes start at 1.
    """
    scale = n_modes / 256.0
    lo, hi = (70, 150) if kappa >= sharp_threshold else (20, 100)
    i_min = max(1, round(lo * scale))
    i_max = max(i_min, round(hi * scale))
    return Band(i_min=i_min, i_max=i_max, j_min=1, j_max=max(2, round(100 * scale)))


def gamma_factor(base, osc_amp, detune, epsilon, omega):
    """Gray-body factor base + osc_amp * sin^2((1 + detune) * epsilon * omega)."""
    return base + osc_amp * np.sin((1.0 + detune) * epsilon * np.asarray(omega)) ** 2


@dataclass(frozen=True)
class BetaFitParams:
    """Planck-with-gray-body model parameters for |beta|^2.

    ``norm`` is fixed by the boundary configuration (2 for one moving
    mirror, 4 for a symmetric pair whose parity decoupling halves the
    available modes).
    """

    norm: float
    base: float
    osc_amp: float
    detune: float
    kappa: float
    epsilon: float

    def __post_init__(self):
        if self.base < 0 or self.osc_amp < 0:
            raise InvalidParameterError("gray-body amplitudes must be >= 0")


@dataclass(frozen=True)
class AlphaFitParams:
    """Two-branch resonance model parameters for |alpha|^2.

    ``pole_lo``/``pole_hi`` set the resonance strength below/above the
    resonance at out frequency ``res_pos`` times the in frequency;
    ``kappa_eff`` is the effective temperature parameter of the
    high-frequency branch.
    """

    norm: float
    base: float
    osc_amp: float
    detune: float
    pole_lo: float
    pole_hi: float
    res_pos: float
    kappa_eff: float
    kappa: float
    epsilon: float

    def __post_init__(self):
        if self.pole_lo < 0 or self.pole_hi < 0:
            raise InvalidParameterError("pole strengths must be >= 0")
        if self.res_pos <= 0:
            raise InvalidParameterError("res_pos must be > 0")


def _log_expm1(x):
    """log(e^x - 1), stable for all x > 0."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        return x + np.log(-np.expm1(-x))


def _log_beta(norm, base, osc_amp, detune, kappa, epsilon, grid, i_idx, j_idx):
    w_in = grid.omega_in(i_idx)
    w_out = grid.omega_out(j_idx)
    pref = norm * grid.d_omega_in * grid.d_omega_out / (np.pi * kappa * w_in)
    gray = gamma_factor(base, osc_amp, detune, epsilon, w_out)
    with np.errstate(divide="ignore"):
        return np.log(pref) + np.log(gray) - _log_expm1(2.0 * np.pi * w_out / kappa)


def beta_model(params, grid, i_idx, j_idx):
    """Model |beta_IJ|^2 for in modes ``i_idx`` and out modes ``j_idx``."""
    return np.exp(
        _log_beta(
            params.norm, params.base, params.osc_amp, params.detune,
            params.kappa, params.epsilon, grid, i_idx, j_idx,
        )
    )


def _log_alpha(norm, base, osc_amp, detune, pole_lo, pole_hi, res_pos,
               kappa_eff, kappa, epsilon, grid, i_idx, j_idx):
    w_in = grid.omega_in(i_idx)
    w_out = grid.omega_out(j_idx)
    res = res_pos * w_in
    pref = norm * grid.d_omega_in * grid.d_omega_out / (np.pi * kappa * w_in)
    gray = gamma_factor(base, osc_amp, detune, epsilon, w_out)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        pole = res**2 / (res - w_out) ** 2
        x = 2.0 * np.pi * w_out / kappa
        lower = (
            np.log1p(pole_lo * pole)
            - math.log1p(pole_lo)
            - np.log(-np.expm1(-x))
        )
        upper = np.log1p(pole_hi * pole) - _log_expm1(
            2.0 * np.pi * (w_out - res) / kappa_eff
        )
        out = np.log(pref) + np.log(gray) + np.where(w_out < res, lower, upper)
    return out, res, w_out


def alpha_model(params, grid, i_idx, j_idx, pole_window=0.0):
    """Model |alpha_IJ|^2; NaN marks points inside the pole-exclusion window.

    The model is singular at w_out = res_pos * w_in; points with
    |w_out - res| <= pole_window (and the exact pole itself) evaluate to
    NaN as the excluded-point signal.
    """
    log_val, res, w_out = _log_alpha(
        params.norm, params.base, params.osc_amp, params.detune,
        params.pole_lo, params.pole_hi, params.res_pos, params.kappa_eff,
        params.kappa, params.epsilon, grid, i_idx, j_idx,
    )
    with np.errstate(over="ignore"):
        value = np.exp(log_val)
    return np.where(np.abs(w_out - res) <= pole_window, np.nan, value)


@dataclass
class FitResult:
    """Fitted parameters with the RMS log residual and conditioning info."""

    params: object
    residual: float
    cond: float
    n_points: int
    band: Band


def _band_points(data, band, positive=True):
    i_idx, j_idx = band.indices()
    n = data.shape[0]
    if band.i_max > n or band.j_max > data.shape[1]:
        raise InvalidParameterError(
            f"band {band} exceeds data shape {data.shape}"
        )
    vals = data[i_idx - 1, j_idx - 1]
    if positive and not np.all(vals > 0):
        raise InsufficientDataError(
            f"{np.count_nonzero(vals <= 0)} non-positive entries in the fit band"
        )
    return i_idx, j_idx, vals


def _solve(residual_fn, x0, bounds):
    sol = least_squares(
        residual_fn, x0, bounds=bounds, method="trf",
        xtol=1e-14, ftol=1e-14, gtol=1e-14, max_nfev=2000,
    )
    rms = math.sqrt(2.0 * sol.cost / len(sol.fun))
    sv = np.linalg.svd(sol.jac, compute_uv=False)
    cond = math.inf if sv[-1] == 0 else float((sv[0] / sv[-1]) ** 2)
    return sol, rms, cond


_DETUNE_STARTS = (-0.5, 0.0, 0.5)
_RES_POS_STARTS = (0.25, 0.5, 1.0)


def fit_beta(data, grid, kappa, epsilon, norm, band, fix_base=None, fix_osc=None):
    """Least-squares fit of the |beta|^2 model over a band, in log space.

    ``data`` is the full squared-magnitude matrix (1-based indices mapped
    to rows/columns).  ``norm`` stays fixed at its configuration value.
    ``fix_base``/``fix_osc`` pin the gray-body amplitudes instead of
    fitting them.  Requires at least 20 strictly positive points.
    """
    i_idx, j_idx, vals = _band_points(data, band)
    if len(vals) < 20:
        raise InsufficientDataError(f"only {len(vals)} points in the fit band")
    log_data = np.log(vals)

    # ratio of data to the bare Planck shape seeds the amplitudes
    bare = _log_beta(norm, 1.0, 0.0, 0.0, kappa, epsilon, grid, i_idx, j_idx)
    ratio = np.exp(np.mean(log_data - bare))
    base0 = fix_base if fix_base is not None else max(ratio, 1e-8)
    osc0 = fix_osc if fix_osc is not None else max(0.1 * ratio, 1e-8)

    free = [fix_base is None, fix_osc is None, True]
    lo = np.array([1e-12, 0.0, -0.95])[free]
    hi = np.array([np.inf, np.inf, 3.0])[free]

    def unpack(x):
        vals_full = [base0, osc0, 0.0]
        k = 0
        for pos, is_free in enumerate(free):
            if is_free:
                vals_full[pos] = x[k]
                k += 1
        return vals_full

    best = None
    for detune0 in _DETUNE_STARTS:
        x0 = np.array([base0, osc0, detune0])[free]

        def resid(x):
            base, osc, detune = unpack(x)
            return (
                _log_beta(norm, base, osc, detune, kappa, epsilon, grid,
                          i_idx, j_idx)
                - log_data
            )

        sol, rms, cond = _solve(resid, x0, (lo, hi))
        if best is None or rms < best[1]:
            best = (sol, rms, cond)

    sol, rms, cond = best
    base, osc, detune = unpack(sol.x)
    params = BetaFitParams(
        norm=norm, base=base, osc_amp=osc, detune=detune,
        kappa=kappa, epsilon=epsilon,
    )
    return FitResult(params=params, residual=rms, cond=cond,
                     n_points=len(vals), band=band)


def fit_alpha(data, grid, kappa, epsilon, norm, band, fix_base=None,
              fix_osc=None, pole_window_mult=2.0):
    """Least-squares fit of the two-branch |alpha|^2 model over a band.

    Points within ``pole_window_mult`` out-frequency gaps of the trial
    resonance are excluded (the model is singular there and the divergence
    is not data).  Multi-starts cover the oscillation detuning and the
    resonance position; per-in-mode parameter curves can be obtained by
    fitting bands with i_min == i_max.
    """
    i_all, j_all, vals_all = _band_points(data, band)
    log_all = np.log(vals_all)
    w_in_all = grid.omega_in(i_all)
    w_out_all = grid.omega_out(j_all)

    lo = np.array([1e-12, 0.0, -0.95, 0.0, 0.0, 0.05, kappa / 10.0])
    hi = np.array([np.inf, np.inf, 3.0, 10.0, 10.0, 3.0, kappa * 10.0])

    best = None
    for res0 in _RES_POS_STARTS:
        keep = np.abs(w_out_all - res0 * w_in_all) > pole_window_mult * grid.d_omega_out
        if np.count_nonzero(keep) < 20:
            continue
        i_idx, j_idx, log_data = i_all[keep], j_all[keep], log_all[keep]

        bare = _log_beta(norm, 1.0, 0.0, 0.0, kappa, epsilon, grid, i_idx, j_idx)
        ratio = np.exp(np.mean(log_data - bare))
        base0 = fix_base if fix_base is not None else max(min(ratio, 1e3), 1e-8)
        osc0 = fix_osc if fix_osc is not None else max(0.1 * base0, 1e-8)

        for detune0 in _DETUNE_STARTS:
            x0 = np.array([base0, osc0, detune0, 0.05, 0.05, res0, kappa])

            def resid(x):
                base = fix_base if fix_base is not None else x[0]
                osc = fix_osc if fix_osc is not None else x[1]
                log_model, _, _ = _log_alpha(
                    norm, base, osc, x[2], x[3], x[4], x[5], x[6],
                    kappa, epsilon, grid, i_idx, j_idx,
                )
                return log_model - log_data

            sol, rms, cond = _solve(resid, x0, (lo, hi))
            if best is None or rms < best[2]:
                best = (sol, len(log_data), rms, cond)

    if best is None:
        raise InsufficientDataError(
            "every resonance start left fewer than 20 usable points"
        )
    sol, n_used, rms, cond = best
    params = AlphaFitParams(
        norm=norm,
        base=fix_base if fix_base is not None else sol.x[0],
        osc_amp=fix_osc if fix_osc is not None else sol.x[1],
        detune=sol.x[2], pole_lo=sol.x[3], pole_hi=sol.x[4],
        res_pos=sol.x[5], kappa_eff=sol.x[6],
        kappa=kappa, epsilon=epsilon,
    )
    return FitResult(params=params, residual=rms, cond=cond,
                     n_points=n_used, band=band)


def thermality(pair, pole_lo, res_pos, kappa, floor=1e-12):
    """Thermality ratio T_IJ; unity marks a thermal mode pair.

    T_IJ = |alpha_IJ| / (|beta_IJ| e^{pi w_J / kappa}) corrected by the
    resonance factor with strength ``pole_lo`` at position ``res_pos``.
    Entries with |beta| <= floor are masked as NaN (count of NaNs equals
    the count below the floor).
    """
    n = pair.n_modes
    idx = np.arange(1, n + 1)
    w_in = pair.in_spec.omega(idx)[:, None]
    w_out = pair.out_spec.omega(idx)[None, :]
    abs_a = np.abs(pair.alpha)
    abs_b = np.abs(pair.beta)
    mask = abs_b <= floor
    res = res_pos * w_in
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        correction = math.sqrt(1.0 + pole_lo) / np.sqrt(
            1.0 + pole_lo * res**2 / (res - w_out) ** 2
        )
        t_mat = abs_a / (abs_b * np.exp(np.pi * w_out / kappa)) * correction
        t_mat = np.where(mask, np.nan, t_mat)
    return t_mat


@dataclass
class BalanceResult:
    slope: float
    expected: float
    rel_err: float
    n_points: int


def detailed_balance_slope(pair, kappa, band, floor=1e-12):
    """Regression slope of log(|alpha|^2/|beta|^2) against the out frequency.

    A thermal spectrum at temperature kappa / 2 pi gives slope 2 pi /
    kappa.  The band should sit well below the alpha resonance; entries
    with |beta| <= floor are dropped.  Needs at least 5 usable points.
    """
    i_idx, j_idx = band.indices()
    abs_a = np.abs(pair.alpha[i_idx - 1, j_idx - 1])
    abs_b = np.abs(pair.beta[i_idx - 1, j_idx - 1])
    keep = abs_b > floor
    if np.count_nonzero(keep) < 5:
        raise InsufficientDataError(
            f"only {np.count_nonzero(keep)} usable points for the balance slope"
        )
    w_out = pair.out_spec.omega(j_idx[keep])
    log_ratio = 2.0 * (np.log(abs_a[keep]) - np.log(abs_b[keep]))
    slope = np.polyfit(w_out, log_ratio, 1)[0]
    expected = 2.0 * np.pi / kappa
    return BalanceResult(
        slope=float(slope),
        expected=expected,
        rel_err=abs(slope - expected) / expected,
        n_points=int(np.count_nonzero(keep)),
    )


@dataclass
class TailFit:
    exponent: float
    residual: float
    n_points: int


def tail_exponent(beta_sq_row, grid, j_min, j_max):
    """Power-law exponent n of |beta| ~ w_J^-n over a tail band.

    ``beta_sq_row`` holds |beta_IJ|^2 against J (1-based) for one fixed in
    mode.  The log-log regression runs on |beta| itself, not its square.
    Requires at least 8 strictly positive points.
    """
    row = np.asarray(beta_sq_row, dtype=float)
    j_idx = np.arange(j_min, j_max + 1)
    if j_max > len(row):
        raise InvalidParameterError(f"tail band {j_min, j_max} exceeds row length")
    vals = row[j_idx - 1]
    keep = vals > 0
    if np.count_nonzero(keep) < 8:
        raise InsufficientDataError(
            f"only {np.count_nonzero(keep)} positive points in the tail band"
        )
    x = np.log(grid.omega_out(j_idx[keep]))
    y = 0.5 * np.log(vals[keep])
    coeffs = np.polyfit(x, y, 1)
    fitted = np.polyval(coeffs, x)
    rms = float(np.sqrt(np.mean((y - fitted) ** 2)))
    return TailFit(exponent=float(-coeffs[0]), residual=rms,
                   n_points=int(np.count_nonzero(keep)))
