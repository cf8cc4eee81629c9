"""Bernoulli loss channel on Fock-basis states and its series inversion.

The forward map damps a signal state ``rho_sig`` into the measured
("dressed") state ``rho_meas`` at detector efficiency ``eta``:

    <n|rho_meas|n+d> = sum_j sqrt(C(n+j,j) C(n+d+j,j))
                       * eta^((2n+d)/2) * (1-eta)^j * <n+j|rho_sig|n+d+j>

The inversion reads the same formula at the reciprocal argument: the
inverse series coefficient is the forward coefficient evaluated at
``1/eta``, which makes the duality between the two maps exact in
floating point.  All factorial ratios are evaluated in log space so
coefficients stay finite up to indices of a few hundred.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import log

import numpy as np
from scipy.special import gammaln

from .exceptions import NoConvergenceError, UndefinedRatioError
from .fock_core import DensityMatrix, GaussianQuadratureLaw


@dataclass(frozen=True)
class LossChannel:
    """Efficiency ``eta`` with its derived series and damping parameters."""

    eta: float

    def __post_init__(self):
        if not 0.0 < self.eta <= 1.0:
            raise ValueError("efficiency must lie in (0, 1]")

    @property
    def z(self) -> float:
        """Series expansion parameter ``1 - 1/eta`` (nonpositive)."""
        return 1.0 - 1.0 / self.eta

    @property
    def t(self) -> float:
        """Damping time ``-ln(eta)``; additive under channel composition."""
        return -log(self.eta)

    def apply(self, rho: DensityMatrix) -> DensityMatrix:
        return apply_loss(rho, self.eta)

    def invert(self, rho: DensityMatrix, j_max: int) -> "InversionResult":
        return invert_loss(rho, self.eta, j_max)


@dataclass(frozen=True)
class SeriesCoefficient:
    """One inverse-series weight ``A_j(n, d, eta)``."""

    n: int
    d: int
    j: int
    value: float


def _forward_coefficient(n, d, j, g):
    """Forward-map weight with ``g`` in place of the efficiency.

    ``g`` in (0, 1] gives the damping weights; ``g = 1/eta > 1`` gives the
    inverse-series weights A_j (the sign then alternates with j).
    """
    if j == 0:
        return float(np.exp(0.5 * (2 * n + d) * log(g)))
    if g == 1.0:
        return 0.0
    log_mag = (
        0.5 * (2 * n + d) * log(g)
        + 0.5 * (gammaln(n + j + 1) + gammaln(n + d + j + 1)
                 - gammaln(n + 1) - gammaln(n + d + 1))
        - gammaln(j + 1)
        + j * log(abs(1.0 - g))
    )
    sign = -1.0 if (g > 1.0 and j % 2 == 1) else 1.0
    return float(sign * np.exp(log_mag))


def inverse_coefficient(n: int, d: int, j: int, eta: float) -> float:
    """Inverse-series coefficient ``A_j(n, d, eta)``.

    ``A_j = eta^(-(2n+d)/2) * sqrt((n+j)!(n+d+j)!) / (sqrt(n!(n+d)!) j!)
    * (1 - 1/eta)^j``, evaluated in log space.
    """
    if not 0.0 < eta <= 1.0:
        raise ValueError("efficiency must lie in (0, 1]")
    if n < 0 or d < 0 or j < 0:
        raise ValueError("indices must be nonnegative")
    return _forward_coefficient(n, d, j, 1.0 / eta)


def series_coefficients(n: int, d: int, eta: float, count: int) -> list[SeriesCoefficient]:
    """The first ``count`` inverse coefficients for the ray at (n, d)."""
    return [SeriesCoefficient(n, d, j, inverse_coefficient(n, d, j, eta))
            for j in range(count)]


def _ray_weights(L, d, g, j_cap=None):
    """Weight matrix W[n, k] (k = n + j) for one off-diagonal ray.

    Rows are output indices, columns input indices along the ray of
    length ``L``; entries beyond ``j_cap`` terms are zero.
    """
    lg = gammaln(np.arange(L + d + 1) + 1.0)
    nn = np.arange(L)[:, None]
    kk = np.arange(L)[None, :]
    jj = kk - nn
    valid = jj >= 0
    if j_cap is not None:
        valid &= jj <= j_cap
    with np.errstate(invalid="ignore"):
        log_mag = (
            0.5 * (2 * nn + d) * log(g)
            + 0.5 * (lg[kk] + lg[kk + d] - lg[nn] - lg[nn + d])
            - lg[np.abs(jj)]
        )
        if g == 1.0:
            log_mag = np.where(jj == 0, log_mag, -np.inf)
        else:
            log_mag = log_mag + np.where(jj == 0, 0.0, jj * log(abs(1.0 - g)))
    w = np.exp(np.where(valid, log_mag, -np.inf))
    if g > 1.0:
        w = w * np.where(jj % 2 == 1, -1.0, 1.0)
    return np.where(valid, w, 0.0)


def _transform(rho: DensityMatrix, g: float, j_cap=None):
    """Apply the ray-wise map with parameter ``g`` to every (n, d) ray.

    Returns the transformed matrix and the per-element magnitude of the
    last included term (the truncation diagnostic).
    """
    D = rho.dim
    out = np.zeros((D, D), dtype=complex)
    last = np.zeros((D, D))
    for d in range(D):
        L = D - d
        ray = np.diagonal(rho.elements, offset=d).copy()
        w = _ray_weights(L, d, g, j_cap=j_cap)
        new_ray = w @ ray
        # index of the last term actually summed for each output n
        k_last = np.minimum((L - 1) if j_cap is None else np.arange(L) + j_cap, L - 1)
        last_ray = np.abs(w[np.arange(L), k_last] * ray[k_last])
        idx = np.arange(L)
        out[idx, idx + d] = new_ray
        last[idx, idx + d] = last_ray
        if d > 0:
            out[idx + d, idx] = new_ray.conj()
            last[idx + d, idx] = last_ray
    return out, last


def apply_loss(rho_sig: DensityMatrix, eta: float) -> DensityMatrix:
    """Damp ``rho_sig`` through a beam-splitter-type loss of efficiency ``eta``."""
    if not 0.0 < eta <= 1.0:
        raise ValueError("efficiency must lie in (0, 1]")
    out, _ = _transform(rho_sig, eta)
    law = rho_sig.quadrature_law
    if law is not None:
        # loss maps the Gaussian families onto themselves exactly:
        # thermal nbar -> eta*nbar, coherent alpha -> sqrt(eta)*alpha
        amp = np.sqrt(eta) * law.mean_amplitude
        var = 0.25 + eta * (law.variance - 0.25)
        law = GaussianQuadratureLaw(variance=var, mean_amplitude=amp)
    return DensityMatrix(rho_sig.dim, out, tail_bound=rho_sig.tail_bound,
                         quadrature_law=law)


@dataclass
class InversionResult:
    """Truncated inverse series with its per-element truncation diagnostic.

    ``last_term[n, m]`` is the magnitude of the final summand for that
    element; growth of this diagnostic along a scan signals divergence.
    The inversion never raises on divergence — in the divergent regime
    ``state`` is not a physical state and carries no tail bound.
    """

    state: DensityMatrix
    last_term: np.ndarray


def invert_loss(rho_meas: DensityMatrix, eta: float, j_max: int) -> InversionResult:
    """Evaluate the inverse series with exact elements, truncated at ``j_max``."""
    if not 0.0 < eta <= 1.0:
        raise ValueError("efficiency must lie in (0, 1]")
    if j_max < 0:
        raise ValueError("j_max must be nonnegative")
    out, last = _transform(rho_meas, 1.0 / eta, j_cap=j_max)
    state = DensityMatrix(rho_meas.dim, out, tail_bound=rho_meas.tail_bound)
    return InversionResult(state=state, last_term=last)


def decay_ratio(rho_meas: DensityMatrix, n: int, d: int) -> float:
    """Geometric decay ratio of the ray ``<n+j|rho|n+d+j>`` versus j.

    Estimated by a ratio test over the last quartile of the available
    indices (at least five elements).  For an exact thermal state with
    mean ``mu`` this returns ``mu/(mu+1)`` for every starting index.
    """
    if n < 0 or d < 0 or n + d >= rho_meas.dim:
        raise ValueError("ray start outside the truncation")
    ray = np.abs(np.diagonal(rho_meas.elements, offset=d)[n:])
    window = ray[-max(-(-ray.size // 4), 5):]
    ratios = []
    for a, b in zip(window[:-1], window[1:]):
        if a > 0.0 and b > 0.0:
            ratios.append(log(b) - log(a))
    if len(ratios) < 4:
        raise UndefinedRatioError(
            "too few nonzero elements along the ray for a ratio test")
    return float(np.exp(np.mean(ratios)))


def analytic_threshold(r: float) -> float:
    """Minimal efficiency for which the inverse series converges.

    A ray decaying like ``r^j`` gives a convergent series when
    ``|1 - 1/eta| * r < 1``, i.e. for ``eta > r/(1+r)``.
    """
    if r < 0.0:
        raise ValueError("decay ratio must be nonnegative")
    if r >= 1.0:
        raise NoConvergenceError("decay ratio >= 1 admits no finite threshold")
    return r / (1.0 + r)
