"""Adaptive Gauss-Kronrod quadrature with oscillation-aware panel splitting.

The reservoir-energy integrands are smooth apart from a factor
``cos(eps * tau + phase)``; a plain error estimator can miss that oscillation
on wide panels because the embedded rule samples it at quasi-random phases.
Each panel therefore also integrates an oscillation envelope channel, and
panels wider than a caller-supplied cap whose envelope contribution is not
negligible are force-split regardless of the Kronrod error estimate.

Tails beyond the integration window are handled by the callers
(:mod:`ep_dynamics.heisenberg`): smooth parts via the 1/u substitution with
Gauss-Legendre, oscillatory parts via integration-by-parts corrections.
"""

from __future__ import annotations

import heapq

import numpy as np

from .linalg import NumericalError

__all__ = ["QuadratureError", "adaptive_integrate", "filon_integrate", "gauss_tail"]

# 15-point Kronrod extension of 7-point Gauss on [-1, 1].
_XK = np.array([
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0,
    0.207784955007898, 0.405845151377397, 0.586087235467691,
    0.741531185599394, 0.864864423359769, 0.949107912342759,
    0.991455371120813,
])
_WK = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728,
    0.204432940075298, 0.190350578064785, 0.169004726639267,
    0.140653259715525, 0.104790010322250, 0.063092092629979,
    0.022935322010529,
])
# Embedded 7-point Gauss weights, on the odd-index Kronrod nodes.
_WG = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469,
    0.381830050505119, 0.279705391489277, 0.129484966168870,
])


class QuadratureError(NumericalError):
    """Adaptive refinement exhausted its panel budget.

    ``achieved`` carries the error estimate actually reached, so callers can
    decide whether the partial accuracy is still usable.
    """

    def __init__(self, message, achieved=None, value=None):
        super().__init__(message)
        self.achieved = achieved
        self.value = value


def _panel(eval_fn, a, b):
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    vals, osc = eval_fn(mid + half * _XK)
    integral = half * (vals @ _WK)
    coarse = half * (vals[:, 1::2] @ _WG)
    err = float(np.max(np.abs(integral - coarse)))
    osc_int = float(np.max(half * (osc @ _WK))) if osc is not None else 0.0
    return integral, err, osc_int


def adaptive_integrate(eval_fn, a, b, abs_tol, max_panels=60000,
                       osc_cap=np.inf, n_init=16):
    """Integrate a vector-valued function over ``[a, b]``.

    ``eval_fn(x)`` maps an abscissa array of shape (n,) to a tuple
    ``(values, envelope)`` of shape (channels, n) each; ``envelope`` may be
    ``None`` when no oscillation tracking is needed.  Panels wider than
    ``osc_cap`` keep their envelope integral as a pessimistic error floor
    until they are split below the cap.  Returns ``(integral, error)``.
    Raises :class:`QuadratureError` if ``max_panels`` is exhausted before the
    total estimate drops below ``abs_tol``.
    """
    if not b > a:
        raise NumericalError(f"empty integration interval [{a}, {b}]")
    edges = np.linspace(a, b, n_init + 1)
    heap = []
    count = 0
    for pa, pb in zip(edges[:-1], edges[1:]):
        integral, err, osc_int = _panel(eval_fn, pa, pb)
        eff = err if (pb - pa) <= osc_cap else max(err, 0.25 * osc_int)
        # negate for a max-heap; count breaks ties between equal errors
        heapq.heappush(heap, (-eff, count, pa, pb, integral, err))
        count += 1

    while True:
        total = sum(-item[0] for item in heap)
        if total <= abs_tol:
            break
        if count >= max_panels:
            value = np.sum([item[4] for item in heap], axis=0)
            raise QuadratureError(
                f"panel budget {max_panels} exhausted; error estimate "
                f"{total:.3e} > tolerance {abs_tol:.3e}",
                achieved=total,
                value=value,
            )
        neg_eff, tick, pa, pb, pint, perr = heapq.heappop(heap)
        if -neg_eff <= 0.0:
            # remaining error is all round-off; refinement cannot help
            heapq.heappush(heap, (neg_eff, tick, pa, pb, pint, perr))
            break
        mid = 0.5 * (pa + pb)
        for qa, qb in ((pa, mid), (mid, pb)):
            integral, err, osc_int = _panel(eval_fn, qa, qb)
            eff = err if (qb - qa) <= osc_cap else max(err, 0.25 * osc_int)
            heapq.heappush(heap, (-eff, count, qa, qb, integral, err))
            count += 1

    value = np.sum([item[4] for item in heap], axis=0)
    err = sum(item[5] for item in heap)
    return value, float(err)


# Gauss-Legendre 15 nodes/weights and the Legendre Vandermonde for the
# Filon panels; with 15 nodes the coefficients up to degree 14 are exact for
# polynomial amplitudes.
_XF, _WF = np.polynomial.legendre.leggauss(15)
_PF = np.stack([
    np.polynomial.legendre.Legendre.basis(n)(_XF) for n in range(15)
])
_CF = (2.0 * np.arange(15) + 1.0) / 2.0


def _filon_panel(q_fn, a, b, tau):
    """Integral of q(eps) e^{i eps tau} over one panel.

    Expands q in Legendre polynomials on the panel and uses the exact
    oscillatory moments int_{-1}^{1} P_n(x) e^{i w x} dx = 2 i^n j_n(w), so
    accuracy depends only on the smoothness of q, not on tau.
    """
    from scipy.special import spherical_jn

    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    qv = q_fn(mid + half * _XF)                        # (channels, 15)
    coef = (qv * _WF) @ _PF.T * _CF                    # (channels, 15)
    w = tau * half
    moments = 2.0 * (1j ** np.arange(15)) * spherical_jn(np.arange(15), w)
    value = half * np.exp(1j * tau * mid) * (coef @ moments)
    err = float(half * np.max(np.abs(coef[:, 13]) + np.abs(coef[:, 14])))
    return value, err


def filon_integrate(q_fn, a, b, tau, abs_tol, max_panels=60000, n_init=8):
    """Adaptive oscillatory integral of ``q(eps) e^{i eps tau}`` over [a, b].

    ``q_fn`` maps an abscissa array to a complex array (channels, n).
    Bisection is driven by the Legendre-coefficient truncation estimate, so
    panel count follows the smoothness of the amplitude q alone.  Returns
    ``(complex integral, error)``.
    """
    if not b > a:
        raise NumericalError(f"empty integration interval [{a}, {b}]")
    edges = np.linspace(a, b, n_init + 1)
    heap = []
    count = 0
    for pa, pb in zip(edges[:-1], edges[1:]):
        value, err = _filon_panel(q_fn, pa, pb, tau)
        heapq.heappush(heap, (-err, count, pa, pb, value))
        count += 1
    while True:
        total = sum(-item[0] for item in heap)
        if total <= abs_tol:
            break
        if count >= max_panels:
            value = np.sum([item[4] for item in heap], axis=0)
            raise QuadratureError(
                f"oscillatory panel budget {max_panels} exhausted; error "
                f"estimate {total:.3e} > tolerance {abs_tol:.3e}",
                achieved=total,
                value=value,
            )
        neg_err, _, pa, pb, pval = heapq.heappop(heap)
        if -neg_err <= 0.0:
            heapq.heappush(heap, (neg_err, count, pa, pb, pval))
            break
        mid = 0.5 * (pa + pb)
        for qa, qb in ((pa, mid), (mid, pb)):
            value, err = _filon_panel(q_fn, qa, qb, tau)
            heapq.heappush(heap, (-err, count, qa, qb, value))
            count += 1
    value = np.sum([item[4] for item in heap], axis=0)
    err = sum(-item[0] for item in heap)
    return value, float(err)


def gauss_tail(smooth_fn, edge, center, n=48):
    """Integrate a smooth, ~1/eps^2 decaying tail out to infinity.

    For a right tail ``edge > center`` this computes
    ``int_edge^inf smooth_fn(eps) d eps`` via the substitution
    ``eps = center + 1/u``; for ``edge < center`` the mirrored left tail down
    to -infinity.  ``smooth_fn`` must be vectorized and return shape
    (channels, n).  Returns ``(integral, error_estimate)`` where the estimate
    is the difference against a half-order rule.
    """
    span = abs(edge - center)
    if span <= 0:
        raise NumericalError("tail edge must differ from the expansion center")
    sign = 1.0 if edge > center else -1.0

    def _rule(order):
        x, w = np.polynomial.legendre.leggauss(order)
        u = 0.5 * (x + 1.0) / span          # u in (0, 1/span]
        wu = 0.5 * w / span
        eps = center + sign * (1.0 / u)
        vals = smooth_fn(eps)
        return np.sum(vals * (wu / u ** 2), axis=1)

    fine = _rule(n)
    coarse = _rule(n // 2)
    return fine, float(np.max(np.abs(fine - coarse)))
