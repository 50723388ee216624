"""Noise-part norm bounds, measured bulk edges, and Stieltjes solvers.

The noise part is H = A - P. Its entry variances v_ij = p_ij(1 - p_ij)
drive every bound here: sigma is the largest row deviation, sigma_star the
largest single-entry deviation, and the measured edge is ||H|| averaged
over independently sampled realizations.

The two Stieltjes solvers share one convention: the resolvent is taken of
M/sqrt(n) using G = (M - z)^(-1), so Im S(z) > 0 on the upper half plane
and the boundary density is recovered as (1/pi) Im S(lambda + i eta). The
cavity solver iterates the kernel-weighted self-consistency over the n
sampled weights; the Poisson solver iterates the same equation over the
atoms y_k = Gamma_k^(-1/alpha) of the limiting point process.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.integrate

from .model import (
    STREAM_PPP,
    FitnessVector,
    ModelParams,
    SymmetricMatrix,
    expected_matrix,
    gen_fitness,
    noise_matrix,
    sample_adjacency,
    stream_rng,
)
from .numeric import spectral_norm

__all__ = [
    "VarianceProfile",
    "LowerBoundReport",
    "StieltjesSolution",
    "PPPAtoms",
    "PPPFixedPoint",
    "variance_profile",
    "norm_upper_bound",
    "measure_bulk_edge",
    "edge_samples",
    "norm_lower_bound_check",
    "cavity_solve",
    "density_mass",
    "ppp_sample",
    "ppp_fixed_point",
]


@dataclass(frozen=True)
class VarianceProfile:
    """Bernoulli variance structure of the noise part."""

    v: np.ndarray  # v_ij = p_ij (1 - p_ij)
    sigma: float  # max_i sqrt(sum_{j != i} v_ij)
    sigma_star: float  # max_{i != j} sqrt(v_ij)
    d_max: float  # largest expected degree

    def __post_init__(self) -> None:
        v = np.asarray(self.v, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "v", v)
        # p(1-p) <= 1/4 and v <= p entrywise, so these hold in exact
        # arithmetic; a violation means the profile was not built from
        # a probability matrix
        if self.sigma_star > 0.5 + 1e-12:
            raise ValueError(f"sigma_star = {self.sigma_star} exceeds 1/2")
        if self.sigma**2 > self.d_max + 1e-9:
            raise ValueError(f"sigma^2 = {self.sigma**2} exceeds d_max = {self.d_max}")


@dataclass(frozen=True)
class LowerBoundReport:
    delta: float
    sigma: float
    threshold: float  # sqrt(1 - delta) * sigma
    fraction: float  # share of realizations with ||H|| >= threshold
    floor: float  # 1 - exp(-c delta^2 sigma^2)
    passed: bool
    witness_index: int  # row attaining sigma
    witness_max_dev: float  # max_r | ||H e_i*||^2 - sigma^2 |
    witness_width: float  # one Hoeffding width at 95%
    witness_ok: bool  # max deviation within three widths


@dataclass(frozen=True)
class StieltjesSolution:
    """Fixed point of the cavity equation on one z-grid.

    density is the Plemelj boundary value (1/pi) Im S_n, which is
    non-negative wherever the solve converged; converged and iterations
    are per grid point, and non-converged points keep their last iterate
    rather than raising.
    """

    z_grid: np.ndarray  # complex, Im z = eta > 0
    g_per_node: np.ndarray  # n x grid
    S_n: np.ndarray  # grid, (1/n) sum_i g_i
    density: np.ndarray  # grid, (1/pi) Im S_n
    iterations: np.ndarray  # grid, ints
    converged: np.ndarray  # grid, bools


@dataclass(frozen=True)
class PPPAtoms:
    """Truncated atoms y_k = Gamma_k^(-1/alpha) of the limit process."""

    alpha: float
    K: int
    gamma_cumsum: np.ndarray
    y: np.ndarray
    seed: int

    def __post_init__(self) -> None:
        g = np.asarray(self.gamma_cumsum, dtype=float)
        y = np.asarray(self.y, dtype=float)
        g.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "gamma_cumsum", g)
        object.__setattr__(self, "y", y)
        if g.size != self.K or y.size != self.K:
            raise ValueError("atom arrays must have length K")
        if self.K > 0:
            if not np.all(np.diff(g) > 0.0):
                raise ValueError("Gamma partial sums must be strictly increasing")
            if not np.all(np.diff(y) < 0.0):
                raise ValueError("atoms must be strictly decreasing")

    @property
    def tail_weight_bound(self) -> float:
        """Expected weight sum_{k > K} y_k left out by the truncation.

        E[Gamma_k^(-1/alpha)] ~ k^(-1/alpha), and the integral tail bound
        gives alpha/(1-alpha) * K^(-(1-alpha)/alpha).
        """
        if self.K == 0:
            return math.inf
        a = self.alpha
        return a / (1.0 - a) * float(self.K) ** (-(1.0 - a) / a)


@dataclass(frozen=True)
class PPPFixedPoint:
    z: complex
    g: np.ndarray  # per atom
    averaged: complex  # plain mean of g over the atoms
    iterations: int
    converged: bool


def variance_profile(P: SymmetricMatrix) -> VarianceProfile:
    """Entry variances and the derived row/entry maxima."""
    if P.kind != "expected_P":
        raise ValueError(f"need an expected_P matrix, got {P.kind}")
    p = P.entries
    v = p * (1.0 - p)
    row = v.sum(axis=1)  # diagonal is zero, so this is sum over j != i
    return VarianceProfile(
        v=v,
        sigma=float(np.sqrt(row.max())),
        sigma_star=float(np.sqrt(v.max())),
        d_max=float(p.sum(axis=1).max()),
    )


def norm_upper_bound(vp: VarianceProfile, n: int) -> tuple[float, float]:
    """(expectation_bound, crude_bound) for ||H||.

    expectation_bound is sigma + sigma_star sqrt(ln n) with the absolute
    constant set to 1, so it is a shape statement rather than a certified
    bound. crude_bound = sqrt(n)/2 + (1/4) sqrt(ln n) dominates it for
    every profile since sigma <= sqrt(n)/2 and sigma_star <= 1/2.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    root_log = math.sqrt(math.log(n))
    return (
        vp.sigma + vp.sigma_star * root_log,
        math.sqrt(n) / 2.0 + root_log / 4.0,
    )


def edge_samples(P: SymmetricMatrix, realizations: int, seed: int) -> np.ndarray:
    """||H|| for `realizations` independent adjacency draws from P.

    Realization r uses adjacency seed `seed + r`, so sweeps over seeds
    stay reproducible and non-overlapping draws need distinct base seeds.
    """
    if realizations < 1:
        raise ValueError(f"need at least one realization, got {realizations}")
    out = np.empty(realizations)
    for r in range(realizations):
        A = sample_adjacency(P, seed + r)
        out[r] = spectral_norm(noise_matrix(A, P))
    return out


def measure_bulk_edge(params: ModelParams, realizations: int) -> tuple[float, float]:
    """Mean and standard error of ||H|| over independent realizations."""
    P = expected_matrix(gen_fitness(params), params.epsilon_n)
    edges = edge_samples(P, realizations, params.seed)
    if realizations == 1:
        return float(edges[0]), 0.0
    return float(edges.mean()), float(edges.std(ddof=1) / math.sqrt(realizations))


def norm_lower_bound_check(
    vp: VarianceProfile,
    noises: Sequence[SymmetricMatrix],
    delta: float = 0.5,
    c: float = 0.01,
) -> LowerBoundReport:
    """Check ||H|| >= sqrt(1 - delta) sigma across realizations.

    The empirical pass fraction must beat the conservative floor
    1 - exp(-c delta^2 sigma^2). As a second, entrywise witness, the
    squared column norm at the row attaining sigma is a sum of n-1
    independent variables bounded by 1 with mean sigma^2, so it must sit
    within three 95% Hoeffding widths of sigma^2 in every realization.
    """
    if not 0.0 < delta <= 1.0:
        raise ValueError(f"delta must lie in (0,1], got {delta}")
    if not noises:
        raise ValueError("need at least one noise realization")
    n = vp.v.shape[0]
    i_star = int(vp.v.sum(axis=1).argmax())
    sigma2 = vp.sigma**2
    threshold = math.sqrt(1.0 - delta) * vp.sigma
    hits = 0
    max_dev = 0.0
    for H in noises:
        if H.kind != "noise_H":
            raise ValueError(f"need noise_H matrices, got {H.kind}")
        if spectral_norm(H) >= threshold:
            hits += 1
        col = H.entries[:, i_star]
        max_dev = max(max_dev, abs(float(col @ col) - sigma2))
    fraction = hits / len(noises)
    floor = 1.0 - math.exp(-c * delta**2 * sigma2)
    width = math.sqrt((n - 1) * math.log(2.0 / 0.05) / 2.0)
    return LowerBoundReport(
        delta=delta,
        sigma=vp.sigma,
        threshold=threshold,
        fraction=fraction,
        floor=floor,
        passed=fraction > floor,
        witness_index=i_star,
        witness_max_dev=max_dev,
        witness_width=width,
        witness_ok=max_dev <= 3.0 * width,
    )


def cavity_solve(
    x: FitnessVector,
    epsilon_n: float,
    z_grid: np.ndarray,
    eta: float | None = None,
    damping: float = 0.5,
    tol: float = 1e-9,
    max_iter: int = 5000,
    track_deltas: bool = False,
) -> StieltjesSolution | tuple[StieltjesSolution, list[np.ndarray]]:
    """Damped fixed point of the kernel self-consistency on a z-grid.

    z_grid holds real spectral positions lambda (on the M/sqrt(n) scale);
    each is lifted to lambda + i eta. eta defaults to 2.5/sqrt(n) times
    the grid span, small enough to resolve the bulk while keeping the
    iteration a contraction. epsilon_n = 0 is allowed and gives the free
    resolvent g_i = -1/z exactly.

    The update, damped by `damping`, is

        g_i <- -1 / (z + (1/n) sum_{j != i} (1 - exp(-eps x_i x_j)) g_j)

    and runs until the largest per-node step falls below tol, separately
    per grid point. Non-converged points are flagged, never raised.
    With track_deltas=True also returns the per-iteration step sizes.
    """
    if not 0.0 < damping <= 1.0:
        raise ValueError(f"damping must lie in (0,1], got {damping}")
    if epsilon_n < 0.0:
        raise ValueError(f"epsilon_n must be >= 0, got {epsilon_n}")
    lam = np.asarray(z_grid, dtype=float)
    if lam.ndim != 1 or lam.size == 0:
        raise ValueError("z_grid must be a nonempty 1-d real array")
    n = x.n
    if eta is None:
        span = float(lam.max() - lam.min())
        eta = 2.5 / math.sqrt(n) * (span if span > 0.0 else 1.0)
    if not eta > 0.0:
        raise ValueError(f"eta must be > 0, got {eta}")
    z = lam + 1j * eta

    kernel = -np.expm1(-epsilon_n * np.outer(x.x, x.x))
    np.fill_diagonal(kernel, 0.0)

    nz = z.size
    g = np.full((n, nz), 0j) - 1.0 / z  # free initialization
    iterations = np.zeros(nz, dtype=int)
    converged = np.zeros(nz, dtype=bool)
    active = np.ones(nz, dtype=bool)
    history: list[np.ndarray] = []
    for it in range(1, max_iter + 1):
        idx = np.flatnonzero(active)
        phi = (kernel @ g[:, idx]) / n
        g_new = (1.0 - damping) * g[:, idx] - damping / (z[idx] + phi)
        delta = np.abs(g_new - g[:, idx]).max(axis=0)
        g[:, idx] = g_new
        iterations[idx] = it
        if track_deltas:
            full = np.zeros(nz)
            full[idx] = delta
            history.append(full)
        done = delta < tol
        converged[idx[done]] = True
        active[idx[done]] = False
        if not active.any():
            break

    S = g.mean(axis=0)
    sol = StieltjesSolution(
        z_grid=z,
        g_per_node=g,
        S_n=S,
        density=np.imag(S) / math.pi,
        iterations=iterations,
        converged=converged,
    )
    return (sol, history) if track_deltas else sol


def density_mass(sol: StieltjesSolution) -> float:
    """Trapezoid mass of the density over the (truncated) grid."""
    return float(scipy.integrate.trapezoid(sol.density, sol.z_grid.real))


def ppp_sample(alpha: float, K: int, seed: int) -> PPPAtoms:
    """Atoms of the limiting point process, largest first.

    Gamma_k is the partial sum of iid standard exponentials, and
    y_k = Gamma_k^(-1/alpha), so the count of atoms above u is Poisson
    with mean u^(-alpha).
    """
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0,1), got {alpha}")
    e = stream_rng(seed, STREAM_PPP).standard_exponential(K)
    gamma = np.cumsum(e)
    return PPPAtoms(alpha=alpha, K=K, gamma_cumsum=gamma, y=gamma ** (-1.0 / alpha), seed=seed)


def ppp_fixed_point(
    atoms: PPPAtoms,
    z: float,
    eta: float,
    damping: float = 0.5,
    tol: float = 1e-9,
    max_iter: int = 5000,
    split: float = 0.01,
) -> PPPFixedPoint:
    """Damped fixed point of the atom self-consistency at one z.

    Solves g(y_k) = -1/(z + Phi_k) with Phi_k = sum_l g(y_l)(1 - e^(-y_k y_l))
    over the truncated atom set, the sum including l = k since the limit
    equation integrates over the whole process. Atom pairs with both
    sides below `split` use the cubic expansion of 1 - e^(-t) through
    shared power sums, which keeps the per-iteration cost linear in K;
    the neglected quartic term is below split^8/24, far under tol.

    The averaged transform is the plain mean of g over the atoms.
    """
    if not 0.0 < damping <= 1.0:
        raise ValueError(f"damping must lie in (0,1], got {damping}")
    if not eta > 0.0:
        raise ValueError(f"eta must be > 0, got {eta}")
    zc = complex(z, eta)
    y = atoms.y
    if y.size == 0:
        return PPPFixedPoint(z=zc, g=np.empty(0, complex), averaged=-1.0 / zc, iterations=0, converged=True)

    big = y > split
    y_big = y[big]
    y_small = y[~big]
    # exact kernel blocks touching any big atom, built once
    k_from_big = -np.expm1(-np.outer(y, y_big))  # K x B
    k_big_small = -np.expm1(-np.outer(y_big, y_small))  # B x K_small

    g = np.full(y.size, -1.0 / zc)
    iterations = 0
    converged = False
    for it in range(1, max_iter + 1):
        g_big = g[big]
        g_small = g[~big]
        phi = k_from_big @ g_big
        if y_small.size:
            phi[big] += k_big_small @ g_small
            s1 = np.dot(y_small, g_small)
            s2 = np.dot(y_small**2, g_small)
            s3 = np.dot(y_small**3, g_small)
            phi[~big] += y_small * s1 - y_small**2 * (s2 / 2.0) + y_small**3 * (s3 / 6.0)
        g_new = (1.0 - damping) * g - damping / (zc + phi)
        delta = float(np.abs(g_new - g).max())
        g = g_new
        iterations = it
        if delta < tol:
            converged = True
            break
    return PPPFixedPoint(
        z=zc, g=g, averaged=complex(g.mean()), iterations=iterations, converged=converged
    )
