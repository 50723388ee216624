"""Closed-form outlier eigenvalue predictions.

The expected kernel has a ladder of real outlier eigenvalues indexed by
k = 1, 2, ...; the k-th one is lambda_k = (+/-) alpha |Gamma(-alpha/2 +
i omega_k)| sqrt(n) where omega_k >= 0 solves the admissibility condition

    f(omega_k) = (omega_k / alpha) ln n - k pi,
    f(omega) = arg Gamma(-alpha/2 + i omega)   (continuous, f(0) = -pi).

k = 1 is solved by omega = 0 exactly. Signs alternate starting positive,
so sign(lambda_k) = (-1)^(k+1); an index-from-zero reading of the same
ladder would print (-1)^k, and the spiral crossings below pin the parity:
the locus crosses the real axis at angle pi + k pi, i.e. cos = (-1)^(k+1).

The same data traces two logarithmic spirals

    sigma_pm(omega) = -alpha Gamma(-alpha/2 -/+ i omega) n^(1/2 +/- i omega/alpha)

whose real-axis crossings are exactly the admissible omega_k.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .special import digamma_line_derivative, gamma_line

__all__ = [
    "EULER_GAMMA",
    "NoRootError",
    "SpectralPrediction",
    "SpiralLocus",
    "StationaryPoint",
    "KStarEstimate",
    "lambda_1",
    "admissibility_residual",
    "solve_omega_k",
    "lambda_k_from_omega",
    "omega_k_approx",
    "stationary_point",
    "spiral",
    "spiral_crossings",
    "k_star_estimate",
]

EULER_GAMMA = 0.5772156649015328606


class NoRootError(RuntimeError):
    """No admissible omega_k in the allowed bracket: k is off the ladder."""


@dataclass(frozen=True)
class SpectralPrediction:
    k: int
    omega_k: float
    lambda_k: float
    method: str  # "exact_root" or "approximate"
    residual: float
    # True when (ln n)/alpha exceeds max f' on the bracket, which makes the
    # admissibility residual strictly decreasing and the root unique.
    monotone_bracket: bool = True


@dataclass(frozen=True)
class SpiralLocus:
    alpha: float
    n: int
    branch: str  # "plus" or "minus"
    samples: np.ndarray  # rows (omega, re, im)


@dataclass(frozen=True)
class StationaryPoint:
    alpha: float
    omega_alpha: float
    phi_alpha: float
    omega_star_numeric: float
    # True when f' actually crosses zero in (0, 5]; otherwise
    # omega_star_numeric is the minimizer of f' (no true stationary point).
    is_true_root: bool


@dataclass(frozen=True)
class KStarEstimate:
    k_star: int
    log_n: float
    ratio: float


def _check_n(n: int) -> None:
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")


def lambda_1(n: int, alpha: float) -> float:
    """Leading eigenvalue -alpha Gamma(-alpha/2) sqrt(n), always positive."""
    _check_n(n)
    ev = gamma_line(alpha, 0.0)
    return alpha * math.exp(ev.log_abs) * math.sqrt(n)


def admissibility_residual(k: int, omega: float, n: int, alpha: float) -> float:
    """f(omega) - ((omega/alpha) ln n - k pi), zero at admissible omega_k."""
    _check_n(n)
    f = gamma_line(alpha, omega).arg_continuous
    return f - (omega / alpha) * math.log(n) + k * math.pi


def lambda_k_from_omega(k: int, omega_k: float, n: int, alpha: float) -> float:
    """Signed eigenvalue prediction at an admissible omega_k."""
    _check_n(n)
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    sign = 1.0 if k % 2 == 1 else -1.0
    return sign * alpha * math.exp(gamma_line(alpha, omega_k).log_abs) * math.sqrt(n)


def solve_omega_k(k: int, n: int, alpha: float) -> SpectralPrediction:
    """Solve the admissibility condition for the k-th root.

    k = 1 is omega = 0 exactly. For k >= 2 the residual starts at
    (k-1) pi > 0 and is strictly decreasing whenever (ln n)/alpha beats
    max f' on the bracket, so the first sign change brackets the unique
    root; Brent refinement polishes it to |residual| < 1e-9. The bracket
    starts at twice the affine estimate alpha (k pi + pi)/ln n and may
    grow geometrically up to alpha (k pi + 4 pi)/ln n; no sign change by
    then means k is beyond the ladder for this n (NoRootError), which is
    also the k = 0 outcome.
    """
    _check_n(n)
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    log_n = math.log(n)
    if k == 1:
        return SpectralPrediction(
            k=1,
            omega_k=0.0,
            lambda_k=lambda_1(n, alpha),
            method="exact_root",
            residual=admissibility_residual(1, 0.0, n, alpha),
        )
    cap = alpha * (k * math.pi + 4.0 * math.pi) / log_n
    hi = min(2.0 * alpha * (k * math.pi + math.pi) / log_n, cap)
    resid = lambda w: admissibility_residual(k, w, n, alpha)
    r0 = resid(0.0)
    while resid(hi) > 0.0:
        if hi >= cap:
            raise NoRootError(
                f"no admissible omega for k={k} at n={n}, alpha={alpha} "
                f"(residual positive up to omega={cap:.6g})"
            )
        hi = min(1.5 * hi, cap)
    if r0 <= 0.0:  # k = 0 lands here: residual already negative at 0
        raise NoRootError(f"residual does not start positive for k={k}")
    omega = brentq(resid, 0.0, hi, xtol=1e-15, rtol=8.9e-16)
    monotone = log_n / alpha > max(
        digamma_line_derivative(alpha, 0.0), digamma_line_derivative(alpha, hi)
    )
    return SpectralPrediction(
        k=k,
        omega_k=omega,
        lambda_k=lambda_k_from_omega(k, omega, n, alpha),
        method="exact_root",
        residual=resid(omega),
        monotone_bracket=monotone,
    )


def omega_k_approx(k: int, n: int, alpha: float) -> float:
    """Affine approximation omega_k ~ alpha (k pi + phi_alpha) / ln n.

    Valid on 1 < k <~ ln n; the k = 1 root is exactly 0 and is not
    approximated.
    """
    _check_n(n)
    if k < 2:
        raise ValueError(f"approximation needs k >= 2, got {k}")
    phi = stationary_point(alpha).phi_alpha
    return alpha * (k * math.pi + phi) / math.log(n)


def stationary_point(alpha: float) -> StationaryPoint:
    """Closed-form plateau frequency omega_alpha and phase phi_alpha.

    omega_alpha = sqrt(alpha/2 (1/euler_gamma - alpha/2)) comes from a
    zeroth-order truncation of the series for f', so f'(omega_alpha) is
    small but not exactly zero. omega_star_numeric reports where f'
    actually vanishes in (0, 5] when it does; for alpha where f' stays
    positive on that interval, the minimizer of f' is reported instead
    and is_true_root is False.
    """
    omega_alpha = math.sqrt(alpha / 2.0 * (1.0 / EULER_GAMMA - alpha / 2.0))
    phi_alpha = gamma_line(alpha, omega_alpha).arg_continuous
    grid = np.linspace(1e-6, 5.0, 400)
    vals = np.array([digamma_line_derivative(alpha, w) for w in grid])
    signs = np.sign(vals)
    flips = np.nonzero(signs[:-1] * signs[1:] < 0)[0]
    if flips.size:
        i = flips[0]
        root = brentq(
            lambda w: digamma_line_derivative(alpha, w),
            grid[i],
            grid[i + 1],
            xtol=1e-12,
        )
        return StationaryPoint(alpha, omega_alpha, phi_alpha, root, True)
    res = minimize_scalar(
        lambda w: digamma_line_derivative(alpha, w),
        bounds=(1e-6, 5.0),
        method="bounded",
        options={"xatol": 1e-10},
    )
    return StationaryPoint(alpha, omega_alpha, phi_alpha, float(res.x), False)


def _sigma(alpha: float, n: int, omega: float, branch: str) -> complex:
    ev = gamma_line(alpha, omega)
    # plus branch: -alpha Gamma(-alpha/2 - i omega) n^(1/2 + i omega/alpha);
    # conjugate-symmetric in the branch sign.
    theta = (omega / alpha) * math.log(n) - ev.arg_continuous + math.pi
    mag = alpha * math.exp(ev.log_abs + 0.5 * math.log(n))
    if branch == "minus":
        theta = -theta
    return mag * complex(math.cos(theta), math.sin(theta))


def spiral(
    alpha: float, n: int, omega_max: float, steps: int, branch: str = "plus"
) -> SpiralLocus:
    """Sample sigma_branch on a uniform omega grid in [0, omega_max]."""
    _check_n(n)
    if omega_max <= 0.0:
        raise ValueError(f"omega_max must be > 0, got {omega_max}")
    if steps < 2:
        raise ValueError(f"steps must be >= 2, got {steps}")
    if branch not in ("plus", "minus"):
        raise ValueError(f"unknown branch {branch!r}")
    omegas = np.linspace(0.0, omega_max, steps)
    rows = np.empty((steps, 3))
    for i, w in enumerate(omegas):
        val = _sigma(alpha, n, float(w), branch)
        rows[i] = (w, val.real, val.imag)
    return SpiralLocus(alpha=alpha, n=n, branch=branch, samples=rows)


def spiral_crossings(alpha: float, n: int, omega_max: float, steps: int = 2000) -> np.ndarray:
    """Real-axis crossings of the plus spiral for omega > 0, in order.

    The m-th returned crossing coincides with the admissible root
    omega_(m+1): the locus starts ON the axis at omega = 0 (that is the
    k = 1 root), so the scan starts strictly after it.
    """
    _check_n(n)
    imag_part = lambda w: _sigma(alpha, n, w, "plus").imag
    omegas = np.linspace(0.0, omega_max, steps)[1:]
    vals = np.array([imag_part(float(w)) for w in omegas])
    out = []
    for i in np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]:
        out.append(brentq(imag_part, omegas[i], omegas[i + 1], xtol=1e-12))
    return np.array(out)


def k_star_estimate(n: int, alpha: float, k_cap: int = 10_000) -> KStarEstimate:
    """Smallest k whose predicted |lambda_k| drops below the sqrt(n)/2 edge proxy."""
    _check_n(n)
    edge = math.sqrt(n) / 2.0
    log_n = math.log(n)
    for k in range(1, k_cap + 1):
        pred = solve_omega_k(k, n, alpha)
        if abs(pred.lambda_k) < edge:
            return KStarEstimate(k_star=k, log_n=log_n, ratio=k / log_n)
    raise NoRootError(f"no k <= {k_cap} fell below the bulk edge proxy")
