"""Gaussian states of optical modes and the standard Gaussian operations.

Conventions used throughout the package:

* quadrature ordering is interleaved, ``(x1, p1, x2, p2, ...)``;
* shot-noise units: a vacuum quadrature has variance 1 (0 dB), which is the
  normalization obtained by writing the mode operator as ``a = (x + ip)/2``;
* the symplectic form ``Omega`` is block diagonal with per-mode blocks
  ``[[0, 1], [-1, 0]]``, so a physical covariance matrix satisfies
  ``cov + i*Omega >= 0``.

All operations are pure: they take a state and return a new state, never
mutating their inputs.  Randomness (homodyne sampling) always comes from an
explicit ``numpy.random.Generator`` supplied by the caller.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SYMPLECTIC_TOL = 1e-12
PHYSICALITY_TOL = 1e-9
# smallest admissible variance in a conditional-update denominator
VARIANCE_FLOOR = 1e-12


def omega(n_modes: int) -> np.ndarray:
    """Symplectic form for ``n_modes`` modes in interleaved ordering."""
    block = np.array([[0.0, 1.0], [-1.0, 0.0]])
    full = np.zeros((2 * n_modes, 2 * n_modes))
    for k in range(n_modes):
        full[2 * k : 2 * k + 2, 2 * k : 2 * k + 2] = block
    return full


def variance_to_db(variance: float) -> float:
    """Variance in shot-noise units to dB relative to shot noise."""
    return 10.0 * np.log10(variance)


def db_to_variance(db: float) -> float:
    """dB relative to shot noise to variance in shot-noise units."""
    return 10.0 ** (db / 10.0)


def squeeze_parameter_from_db(db: float) -> float:
    """Squeeze parameter r such that the squeezed variance is ``10**(db/10)``.

    Negative dB means squeezing below shot noise; e.g. -5 dB gives
    ``e**(-2r) = 0.31623``.
    """
    return -db * np.log(10.0) / 20.0


@dataclass
class GaussianState:
    """Mean vector and covariance matrix of ``n_modes`` optical modes.

    ``mean`` has length ``2*n_modes`` and ``cov`` is ``2N x 2N``, both in
    shot-noise units with interleaved ``(x1, p1, ...)`` ordering.
    """

    n_modes: int
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=float).reshape(2 * self.n_modes)
        self.cov = np.asarray(self.cov, dtype=float).reshape(
            (2 * self.n_modes, 2 * self.n_modes)
        )

    def copy(self) -> "GaussianState":
        return GaussianState(self.n_modes, self.mean.copy(), self.cov.copy())

    def quadrature_variance(self, mode: int, angle: float = 0.0) -> float:
        """Variance of ``cos(angle)*x + sin(angle)*p`` of one mode."""
        e = np.zeros(2 * self.n_modes)
        e[2 * mode] = np.cos(angle)
        e[2 * mode + 1] = np.sin(angle)
        return float(e @ self.cov @ e)

    def quadrature_mean(self, mode: int, angle: float = 0.0) -> float:
        return float(
            np.cos(angle) * self.mean[2 * mode] + np.sin(angle) * self.mean[2 * mode + 1]
        )


def vacuum_state(n_modes: int) -> GaussianState:
    """N-mode vacuum: zero mean, identity covariance."""
    if n_modes < 1:
        raise ValueError("need at least one mode")
    return GaussianState(n_modes, np.zeros(2 * n_modes), np.eye(2 * n_modes))


def min_uncertainty_eigenvalue(state: GaussianState) -> float:
    """Smallest eigenvalue of the Hermitian matrix ``cov + i*Omega``.

    Non-negative (up to numerical tolerance) for physical states; exactly
    zero for pure states such as vacuum.
    """
    herm = state.cov + 1j * omega(state.n_modes)
    return float(np.linalg.eigvalsh(herm)[0].real)


def is_physical(state: GaussianState, tol: float = PHYSICALITY_TOL) -> bool:
    asym = np.abs(state.cov - state.cov.T).max()
    scale = max(1.0, np.abs(state.cov).max())
    if asym > 1e-12 * scale:
        return False
    return min_uncertainty_eigenvalue(state) >= -tol


def assert_physical(state: GaussianState, tol: float = PHYSICALITY_TOL) -> None:
    asym = np.abs(state.cov - state.cov.T).max()
    scale = max(1.0, np.abs(state.cov).max())
    if asym > 1e-12 * scale:
        raise ValueError(f"covariance not symmetric (max asymmetry {asym:.3e})")
    ev = min_uncertainty_eigenvalue(state)
    if ev < -tol:
        raise ValueError(f"covariance violates cov + i*Omega >= 0 (min eig {ev:.3e})")


class SymplecticMatrix:
    """A linear canonical transformation on ``n_modes`` modes.

    Validated at construction: ``S @ Omega @ S.T == Omega`` to 1e-12.
    """

    def __init__(self, matrix: np.ndarray):
        matrix = np.asarray(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] % 2:
            raise ValueError("symplectic matrix must be square with even dimension")
        self.n_modes = matrix.shape[0] // 2
        om = omega(self.n_modes)
        defect = np.abs(matrix @ om @ matrix.T - om).max()
        if defect > SYMPLECTIC_TOL * max(1.0, np.abs(matrix).max() ** 2):
            raise ValueError(f"matrix is not symplectic (defect {defect:.3e})")
        self.matrix = matrix

    def apply(self, state: GaussianState) -> GaussianState:
        if self.n_modes != state.n_modes:
            raise ValueError("mode-count mismatch")
        return GaussianState(
            state.n_modes,
            self.matrix @ state.mean,
            self.matrix @ state.cov @ self.matrix.T,
        )

    @staticmethod
    def _embed(n_modes: int, block: np.ndarray, modes: tuple) -> np.ndarray:
        full = np.eye(2 * n_modes)
        idx = []
        for m in modes:
            idx.extend([2 * m, 2 * m + 1])
        full[np.ix_(idx, idx)] = block
        return full

    @classmethod
    def rotation(cls, n_modes: int, mode: int, angle: float) -> "SymplecticMatrix":
        """Phase rotation; ``angle = pi/2`` maps x -> p and p -> -x."""
        c, s = np.cos(angle), np.sin(angle)
        block = np.array([[c, s], [-s, c]])
        return cls(cls._embed(n_modes, block, (mode,)))

    @classmethod
    def squeezer(cls, n_modes: int, mode: int, r: float, angle: float = 0.0) -> "SymplecticMatrix":
        """Single-mode squeezer; ``angle = 0`` squeezes x by ``e**(-r)``."""
        c, s = np.cos(angle), np.sin(angle)
        rot = np.array([[c, s], [-s, c]])
        block = rot.T @ np.diag([np.exp(-r), np.exp(r)]) @ rot
        return cls(cls._embed(n_modes, block, (mode,)))

    @classmethod
    def beam_splitter(
        cls,
        n_modes: int,
        i: int,
        j: int,
        reflectivity: float,
        signs: tuple = (1, 1, -1, 1),
    ) -> "SymplecticMatrix":
        """Mode mixing acting identically on the x and p quadrature pairs.

        The 2x2 mixing matrix on modes ``(i, j)`` is::

            [ s1*sqrt(T)  s2*sqrt(R) ]
            [ s3*sqrt(R)  s4*sqrt(T) ]

        with ``T = 1 - reflectivity`` and ``signs = (s1, s2, s3, s4)``.  The
        default sign convention is ``(sqrt(T), sqrt(R); -sqrt(R), sqrt(T))``;
        any sign choice with ``s1*s2 == -s3*s4`` is an orthogonal mixing and
        therefore symplectic.
        """
        if i == j:
            raise ValueError("beam splitter needs two distinct modes")
        if not 0.0 <= reflectivity <= 1.0:
            raise ValueError(f"reflectivity {reflectivity} outside [0, 1]")
        s1, s2, s3, s4 = signs
        if any(s not in (-1, 1) for s in signs) or s1 * s2 != -s3 * s4:
            raise ValueError(f"signs {signs} do not give an orthogonal mixing")
        t = np.sqrt(1.0 - reflectivity)
        r = np.sqrt(reflectivity)
        mix = np.array([[s1 * t, s2 * r], [s3 * r, s4 * t]])
        block = np.kron(mix, np.eye(2))
        return cls(cls._embed(n_modes, block, (i, j)))

    @classmethod
    def sum_gate(cls, gain: float) -> "SymplecticMatrix":
        """Two-mode QND sum gate: x2 -> x2 + G*x1, p1 -> p1 - G*p2."""
        if gain < 0:
            raise ValueError("gain must be non-negative")
        s = np.eye(4)
        s[2, 0] = gain
        s[1, 3] = -gain
        return cls(s)


def phase_rotate(state: GaussianState, mode: int, angle: float) -> GaussianState:
    """Rotate one mode's quadratures; pi/2 maps x -> p, p -> -x."""
    _check_mode(state, mode)
    return SymplecticMatrix.rotation(state.n_modes, mode, angle).apply(state)


def squeeze(state: GaussianState, mode: int, r: float, angle: float = 0.0) -> GaussianState:
    """Squeeze one mode: at ``angle = 0`` the x variance shrinks by e**(-2r).

    Negative ``r`` anti-squeezes x.  A general angle rotates the squeezing
    axis: the quadrature ``cos(angle)*x + sin(angle)*p`` is the squeezed one.
    """
    _check_mode(state, mode)
    return SymplecticMatrix.squeezer(state.n_modes, mode, r, angle).apply(state)


def displace(state: GaussianState, mode: int, dx: float, dp: float) -> GaussianState:
    """Shift one mode's mean by ``(dx, dp)``; covariance unchanged."""
    _check_mode(state, mode)
    out = state.copy()
    out.mean[2 * mode] += dx
    out.mean[2 * mode + 1] += dp
    return out


def beam_splitter(
    state: GaussianState,
    i: int,
    j: int,
    reflectivity: float,
    signs: tuple = (1, 1, -1, 1),
) -> GaussianState:
    """Mix modes ``i`` and ``j`` on a beam splitter of given reflectivity."""
    _check_mode(state, i)
    _check_mode(state, j)
    return SymplecticMatrix.beam_splitter(state.n_modes, i, j, reflectivity, signs).apply(state)


def loss_channel(state: GaussianState, mode: int, eta: float) -> GaussianState:
    """Pure loss of transmissivity ``eta`` on one mode.

    The mode's mean scales by sqrt(eta), its covariance block becomes
    ``eta*V + (1 - eta)*I`` and cross blocks scale by sqrt(eta).
    """
    _check_mode(state, mode)
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"transmissivity {eta} outside (0, 1]")
    out = state.copy()
    idx = [2 * mode, 2 * mode + 1]
    root = np.sqrt(eta)
    out.mean[idx] *= root
    out.cov[idx, :] *= root
    out.cov[:, idx] *= root
    # the diagonal block got eta*V; add the vacuum admixture
    out.cov[np.ix_(idx, idx)] += (1.0 - eta) * np.eye(2)
    return out


@dataclass
class HomodyneOutcome:
    """Result of a homodyne detection.

    ``value`` is the electronic readout (optical quadrature plus dark noise
    when configured); ``reduced_state`` is the conditional state of the
    remaining modes with the measured mode removed.
    """

    value: float
    mode: int
    angle: float
    reduced_state: GaussianState


def homodyne(
    state: GaussianState,
    mode: int,
    angle: float,
    rng: np.random.Generator,
    efficiency: float = 1.0,
    dark_variance: float = 0.0,
) -> HomodyneOutcome:
    """Measure ``cos(angle)*x + sin(angle)*p`` of one mode.

    ``efficiency`` (detector quantum efficiency times fringe-visibility
    squared) is applied as a loss channel on the measured mode before
    projection.  The returned ``value`` is drawn from the Gaussian marginal of
    the rotated quadrature with ``dark_variance`` of classical readout noise
    added on top.  The remaining modes are conditioned on the optical
    quadrature by the standard Gaussian rule (Schur complement on the
    measured row/column); dark noise rides on the readout only, so the
    conditional covariance never sees it.
    """
    _check_mode(state, mode)
    if state.n_modes < 2:
        raise ValueError("homodyne removes the measured mode; need at least two modes")
    if efficiency < 1.0:
        state = loss_channel(state, mode, efficiency)

    dim = 2 * state.n_modes
    e = np.zeros(dim)
    e[2 * mode] = np.cos(angle)
    e[2 * mode + 1] = np.sin(angle)

    var_q = float(e @ state.cov @ e)
    mean_q = float(e @ state.mean)
    optical = mean_q + np.sqrt(max(var_q, 0.0)) * rng.standard_normal()
    value = optical
    if dark_variance > 0.0:
        value = optical + np.sqrt(dark_variance) * rng.standard_normal()

    # conditional update; the denominator is floored so a perfectly squeezed
    # quadrature never divides by zero
    denom = max(var_q, dark_variance, VARIANCE_FLOOR)
    col = state.cov @ e
    mean_new = state.mean + col * (optical - mean_q) / denom
    cov_new = state.cov - np.outer(col, col) / denom

    keep = [k for k in range(dim) if k not in (2 * mode, 2 * mode + 1)]
    reduced = GaussianState(state.n_modes - 1, mean_new[keep], cov_new[np.ix_(keep, keep)])
    return HomodyneOutcome(float(value), mode, angle, reduced)


def remove_mode(state: GaussianState, mode: int) -> GaussianState:
    """Trace out one mode (delete its mean entries and cov rows/columns)."""
    _check_mode(state, mode)
    keep = [k for k in range(2 * state.n_modes) if k not in (2 * mode, 2 * mode + 1)]
    return GaussianState(state.n_modes - 1, state.mean[keep], state.cov[np.ix_(keep, keep)])


def _check_mode(state: GaussianState, mode: int) -> None:
    if not 0 <= mode < state.n_modes:
        raise ValueError(f"mode {mode} out of range for {state.n_modes}-mode state")
