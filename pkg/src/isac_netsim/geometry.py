"""BS deployments around the typical target/user and their distance statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from isac_netsim.montecarlo import substream
from isac_netsim.params import NetworkRealization

MODE_PPP = "ppp"
MODE_FIXED_N = "fixed_n"


@dataclass(frozen=True)
class DeploymentSpec:
    """How BSs are placed in the annulus ``[exclusion_radius, coop_radius_d]``.

    ``ppp``: Poisson count with mean ``lambda_b * area``.
    ``fixed_n``: exactly ``n_override`` points.
    """

    mode: str
    lambda_b: float
    coop_radius_d: float
    n_override: Optional[int] = None
    exclusion_radius: float = 1.0

    def __post_init__(self):
        if self.mode not in (MODE_PPP, MODE_FIXED_N):
            raise ValueError(f"unknown deployment mode {self.mode!r}")
        if self.mode == MODE_FIXED_N and (self.n_override is None or self.n_override < 1):
            raise ValueError("fixed_n mode needs n_override >= 1")
        if self.exclusion_radius < 0 or self.exclusion_radius >= self.coop_radius_d:
            raise ValueError("need 0 <= exclusion_radius < coop_radius_d")
        if self.mode == MODE_PPP and self.lambda_b <= 0:
            raise ValueError("lambda_b must be positive")

    @property
    def area(self) -> float:
        return math.pi * (self.coop_radius_d ** 2 - self.exclusion_radius ** 2)

    @property
    def mean_count(self) -> float:
        if self.mode == MODE_FIXED_N:
            return float(self.n_override)
        return self.lambda_b * self.area

    @classmethod
    def for_cluster(cls, n: int, lambda_b: float, exclusion_radius: float = 1.0) -> "DeploymentSpec":
        """Fixed-N disk whose radius holds ``n`` BSs on average: lambda_b*pi*D^2 = n."""
        d = math.sqrt(n / (lambda_b * math.pi))
        return cls(MODE_FIXED_N, lambda_b, d, n_override=n, exclusion_radius=exclusion_radius)


def fixed_n_for(lambda_b: float, coop_radius_d: float) -> int:
    """Cluster size used when comparing against the closed forms."""
    return int(round(lambda_b * math.pi * coop_radius_d ** 2))


def annulus_radii(rng: np.random.Generator, size, r_in: float, r_out: float) -> np.ndarray:
    """Radii of points uniform in area on the annulus [r_in, r_out]."""
    u = rng.random(size)
    return np.sqrt(r_in * r_in + u * (r_out * r_out - r_in * r_in))


def sample_realization(spec: DeploymentSpec, rng_seed) -> NetworkRealization:
    """One deployment; deterministic in ``(spec, rng_seed)``.

    ``rng_seed`` may be an int or a ``numpy.random.Generator``.
    A PPP draw with no points yields an empty realization.
    """
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else substream(rng_seed)
    if spec.mode == MODE_FIXED_N:
        n = spec.n_override
    else:
        n = int(rng.poisson(spec.lambda_b * spec.area))
    d = annulus_radii(rng, n, spec.exclusion_radius, spec.coop_radius_d)
    theta = rng.uniform(0.0, 2.0 * math.pi, n)
    return NetworkRealization(d, theta)


def sample_batch(spec: DeploymentSpec, trials: int, rng: np.random.Generator):
    """Vectorized realizations as ``(distances, bearings)`` arrays of shape (trials, width).

    In ppp mode rows are padded with ``inf`` distances (which contribute zero
    to every path-loss weighted sum); ``counts`` gives the true sizes.
    """
    if spec.mode == MODE_FIXED_N:
        n = spec.n_override
        d = annulus_radii(rng, (trials, n), spec.exclusion_radius, spec.coop_radius_d)
        theta = rng.uniform(0.0, 2.0 * math.pi, (trials, n))
        return d, theta, np.full(trials, n)
    counts = rng.poisson(spec.lambda_b * spec.area, trials)
    width = max(int(counts.max(initial=0)), 1)
    d = annulus_radii(rng, (trials, width), spec.exclusion_radius, spec.coop_radius_d)
    theta = rng.uniform(0.0, 2.0 * math.pi, (trials, width))
    d[np.arange(width)[None, :] >= counts[:, None]] = np.inf
    return d, theta, counts


def nth_nearest_mean_distance(n: int, lambda_b: float, approximate: bool = False) -> float:
    """E[d_n] for the n-th nearest point of a PPP of density ``lambda_b``.

    Exact value Gamma(n + 1/2) / (sqrt(lambda_b pi) Gamma(n)); with
    ``approximate`` the large-n form sqrt(n / (lambda_b pi)).
    """
    if n < 1 or lambda_b <= 0:
        raise ValueError("need n >= 1 and lambda_b > 0")
    if approximate:
        return math.sqrt(n / (lambda_b * math.pi))
    return math.exp(math.lgamma(n + 0.5) - math.lgamma(n)) / math.sqrt(lambda_b * math.pi)


def nearest_distance_pdf(r, lambda_b: float):
    """Density of the nearest-BS distance, 2 pi lambda r exp(-pi lambda r^2)."""
    r = np.asarray(r, dtype=float)
    out = 2.0 * math.pi * lambda_b * r * np.exp(-math.pi * lambda_b * r * r)
    out = np.where(r < 0, 0.0, out)
    return float(out) if out.ndim == 0 else out


def nearest_distance_mode(lambda_b: float) -> float:
    return 1.0 / math.sqrt(2.0 * math.pi * lambda_b)


def sample_nth_nearest(n: int, lambda_b: float, trials: int, rng: np.random.Generator,
                       mass: float | None = None) -> np.ndarray:
    """Distances of the n-th nearest point over ``trials`` independent PPPs.

    Each PPP is drawn in a disk holding ``mass`` points on average (default
    large enough that fewer than ``n`` points has probability < 1e-12).
    Trials with fewer than ``n`` points return ``inf``.
    """
    if mass is None:
        mass = n + 12.0 * math.sqrt(n) + 30.0
    radius = math.sqrt(mass / (lambda_b * math.pi))
    spec = DeploymentSpec(MODE_PPP, lambda_b, radius, exclusion_radius=0.0)
    d, _, _ = sample_batch(spec, trials, rng)
    d.sort(axis=1)
    if d.shape[1] < n:
        return np.full(trials, np.inf)
    return d[:, n - 1]


__all__ = [
    "MODE_PPP",
    "MODE_FIXED_N",
    "DeploymentSpec",
    "annulus_radii",
    "fixed_n_for",
    "nearest_distance_mode",
    "nearest_distance_pdf",
    "nth_nearest_mean_distance",
    "sample_batch",
    "sample_nth_nearest",
    "sample_realization",
]
