"""Loss compensation from measured data, with error propagation.

The series value is ``sum_j A_j(n, d, eta) c_j`` over the measured ray
``c_j ~ <n+j|rho_meas|n+d+j>``.  Because the weights A_j alternate in
sign and grow combinatorially once 1 - 1/eta leaves the unit disc, the
statistical error of the truncated sum is the observable that decides
whether compensation is meaningful; everything here exists to put a
number on it.

Two error views are provided.  ``compensated_element`` and
``convergence_scan`` propagate the actual weights,
``sqrt(sum_j A_j^2 eps_j^2)``, which is what an experimenter quotes for
a specific target element.  ``error_vs_eta`` instead reports the
normalized profile ``sqrt(sum_j z^{2j} eps_j^2)`` with ``z = 1 - 1/eta``,
which strips the combinatorial prefactors and isolates the transition
at eta = 1/2: below it |z| >= 1 and the sum cannot converge no matter
how precise the individual coefficients are.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .direct_detection import CountHistogram, estimate_probabilities
from .exceptions import NumericalSanityError
from .fock_core import DensityMatrix
from .homodyne import MeasuredElement, QuadratureData, estimate_element
from .loss_channel import inverse_coefficient


@dataclass
class CompensationResult:
    """Outcome of a truncation-index scan for one target element.

    ``trace`` holds ``(j_max, value, propagated_error)`` tuples in
    ascending ``j_max``; the error is non-decreasing along the trace
    since each added term contributes nonnegative variance.
    """

    n: int
    d: int
    eta: float
    trace: list
    verdict: str


def measure_ray(source, n: int, d: int, j_max: int) -> list[MeasuredElement]:
    """Coefficient estimates ``c_j`` for j = 0..j_max from any source.

    Accepts homodyne samples, a photocount histogram (diagonal rays
    only), an exact density matrix (zero errors), or an already-built
    coefficient list, which is passed through unchanged.
    """
    if isinstance(source, QuadratureData):
        return [estimate_element(source, n + j, d) for j in range(j_max + 1)]
    if isinstance(source, CountHistogram):
        if d != 0:
            raise ValueError("photocounting only measures diagonal elements")
        return estimate_probabilities(source)
    if isinstance(source, DensityMatrix):
        return [
            MeasuredElement(n=n + j, d=d, estimate=source.element(n + j, n + d + j),
                            stderr=0.0, n_samples=0)
            for j in range(j_max + 1)
        ]
    if isinstance(source, (list, tuple)):
        return list(source)
    raise TypeError(f"unsupported coefficient source: {type(source).__name__}")


def _coefficient_arrays(coeffs, n, d, j_max):
    by_index = {(c.n, c.d): c for c in coeffs}
    est = np.empty(j_max + 1, dtype=complex)
    err = np.empty(j_max + 1)
    for j in range(j_max + 1):
        c = by_index.get((n + j, d))
        if c is None:
            raise ValueError(f"no measured coefficient for element ({n + j}, {n + d + j})")
        est[j] = c.estimate
        err[j] = c.stderr
    return est, err


def _finalize_value(value, d):
    if d == 0:
        if abs(value.imag) >= 1e-9 * abs(value.real) + 1e-12:
            raise NumericalSanityError(
                f"diagonal estimate has imaginary residue {value.imag:.3g}")
        return complex(value.real, 0.0)
    return value


def compensated_element(coeffs, n: int, d: int, eta: float, j_max: int):
    """Truncated compensation series and its propagated error.

    ``coeffs`` must cover the ray elements (n+j, n+d+j) for j up to
    ``j_max`` (ValueError otherwise).  The error treats coefficients as
    uncorrelated, which overlaps-in-data make approximate; the scan
    machinery reports cross-trial spreads alongside when available.
    """
    est, err = _coefficient_arrays(coeffs, n, d, j_max)
    weights = np.array([inverse_coefficient(n, d, j, eta) for j in range(j_max + 1)])
    value = complex(np.sum(weights * est))
    error = float(np.sqrt(np.sum(weights**2 * err**2)))
    return _finalize_value(value, d), error


def _verdict_from_trace(trace):
    errors = [t[2] for t in trace]
    if len(trace) >= 3:
        values = [t[1] for t in trace[-3:]]
        spread = max(abs(a - b) for a in values for b in values)
        # epsilon floor so exact (zero-error) scans can still settle
        floor = 1e-12 * (1.0 + abs(values[-1]))
        values_settled = spread < 2.0 * errors[-1] + floor
        if errors[-3] > 0:
            error_settled = (errors[-1] / errors[-3] - 1.0) < 0.10
        else:
            error_settled = errors[-1] == 0.0
        if values_settled and error_settled:
            return "converged"
    if errors[0] > 0 and errors[-1] / errors[0] > 3.0:
        return "diverging"
    return "marginal"


def convergence_scan(source, n: int, d: int, eta: float, j_list) -> CompensationResult:
    """Evaluate the series at each truncation index and classify the trend.

    Verdicts: ``converged`` when the last three values agree within
    twice the final error and the error itself has stopped moving
    (relative change below 10% across those points); ``diverging`` when
    the error has grown more than 3x over the scan; ``marginal``
    otherwise.  A scan that satisfies the convergence gate is never
    reported diverging, however much the error grew in the early,
    pre-asymptotic part of the scan.
    """
    j_list = [int(j) for j in j_list]
    if j_list != sorted(j_list) or len(set(j_list)) != len(j_list):
        raise ValueError("truncation indices must be strictly ascending")
    if not j_list or j_list[0] < 0:
        raise ValueError("need at least one nonnegative truncation index")
    coeffs = measure_ray(source, n, d, j_list[-1])
    est, err = _coefficient_arrays(coeffs, n, d, j_list[-1])
    weights = np.array(
        [inverse_coefficient(n, d, j, eta) for j in range(j_list[-1] + 1)])
    value_partial = np.cumsum(weights * est)
    var_partial = np.cumsum(weights**2 * err**2)
    trace = [
        (j, _finalize_value(complex(value_partial[j]), d), float(np.sqrt(var_partial[j])))
        for j in j_list
    ]
    return CompensationResult(n=n, d=d, eta=eta, trace=trace,
                              verdict=_verdict_from_trace(trace))


def error_vs_eta(source, n: int, d: int, eta_list, j_list):
    """Normalized error profile ``sqrt(sum_j z^{2j} eps_j^2)`` on a grid.

    ``source`` may be a single coefficient source (same measured errors
    reused at every efficiency) or a callable ``eta -> source`` when
    each efficiency has its own dataset.  Returns rows
    ``(eta, j_max, error)`` for the full grid in input order.
    """
    j_list = [int(j) for j in j_list]
    j_top = max(j_list)
    fixed = None if callable(source) else measure_ray(source, n, d, j_top)
    rows = []
    for eta in eta_list:
        if not 0.0 < eta <= 1.0:
            raise ValueError("efficiency must lie in (0, 1]")
        coeffs = fixed if fixed is not None else measure_ray(source(eta), n, d, j_top)
        _, err = _coefficient_arrays(coeffs, n, d, j_top)
        z = 1.0 - 1.0 / eta
        var_partial = np.cumsum(z ** (2 * np.arange(j_top + 1)) * err**2)
        for j in j_list:
            rows.append((float(eta), j, float(np.sqrt(var_partial[j]))))
    return rows
