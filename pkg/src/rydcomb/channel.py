"""Clustered narrowband mmWave channel generation.

The channel is a sum of N_cl clusters with N_ray rays each.  Ray gains are
complex Gaussian with per-cluster variance, mean angles are uniform, and
per-ray angle offsets follow a Laplacian with configurable spread.  With
unit cluster powers the normalization gives E[||H||_F^2] = N_t * N_r.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .arrays import ArrayGeometry, array_response, upa_response
from .errors import GeometryError


@dataclass(frozen=True)
class ChannelParams:
    """Parameters of the clustered channel between a UPA transmitter and a
    configurable receive array."""

    n_tx: int
    rx_geometry: ArrayGeometry
    n_clusters: int = 5
    n_rays: int = 10
    cluster_powers: tuple[float, ...] = ()
    angular_spread: float = math.radians(10.0)

    def __post_init__(self) -> None:
        m = math.isqrt(self.n_tx)
        if m * m != self.n_tx:
            raise GeometryError(f"n_tx={self.n_tx} is not a perfect square")
        if self.n_clusters <= 0 or self.n_rays <= 0:
            raise ValueError("n_clusters and n_rays must be positive")
        if not self.cluster_powers:
            object.__setattr__(self, "cluster_powers",
                               (1.0,) * self.n_clusters)
        if len(self.cluster_powers) != self.n_clusters:
            raise ValueError("cluster_powers must have length n_clusters")
        if any(p <= 0 for p in self.cluster_powers):
            raise ValueError("cluster powers must be > 0")
        if self.angular_spread < 0:
            raise ValueError("angular_spread must be >= 0")

    @property
    def n_paths(self) -> int:
        return self.n_clusters * self.n_rays


@dataclass(frozen=True)
class PathMeta:
    """Gain and angles of one propagation path."""

    gain: complex
    aoa_azimuth: float
    aoa_elevation: float
    aod_azimuth: float
    aod_elevation: float


@dataclass(frozen=True)
class ChannelRealization:
    matrix: np.ndarray = field(repr=False)
    paths: tuple[PathMeta, ...] = field(repr=False)


def draw_paths(params: ChannelParams, rng: np.random.Generator) -> tuple[PathMeta, ...]:
    """Draw per-path gains and angles.

    The draw order is fixed and part of the reproducibility contract:
    AoA azimuth means, AoA elevation means, AoD azimuth means, AoD elevation
    means (uniform on [0,2pi) / [0,pi)), then Laplacian per-ray offsets for
    the four angle families, then ray gains (real, then imaginary parts).
    The Laplacian scale is spread/sqrt(2) so its standard deviation equals
    the configured angular spread.
    """
    ncl, nray = params.n_clusters, params.n_rays
    n_paths = params.n_paths
    scale = params.angular_spread / math.sqrt(2.0)

    aoa_az_mean = rng.uniform(0.0, 2.0 * np.pi, ncl)
    aoa_el_mean = rng.uniform(0.0, np.pi, ncl)
    aod_az_mean = rng.uniform(0.0, 2.0 * np.pi, ncl)
    aod_el_mean = rng.uniform(0.0, np.pi, ncl)
    offsets = rng.laplace(0.0, scale, size=(4, n_paths)) if scale > 0 else np.zeros((4, n_paths))

    aoa_az = np.repeat(aoa_az_mean, nray) + offsets[0]
    aoa_el = np.repeat(aoa_el_mean, nray) + offsets[1]
    aod_az = np.repeat(aod_az_mean, nray) + offsets[2]
    aod_el = np.repeat(aod_el_mean, nray) + offsets[3]

    sigma = np.repeat(np.sqrt(np.asarray(params.cluster_powers) / 2.0), nray)
    re = rng.normal(0.0, 1.0, n_paths)
    im = rng.normal(0.0, 1.0, n_paths)
    gains = sigma * (re + 1j * im)

    return tuple(
        PathMeta(gain=complex(gains[p]), aoa_azimuth=float(aoa_az[p]),
                 aoa_elevation=float(aoa_el[p]), aod_azimuth=float(aod_az[p]),
                 aod_elevation=float(aod_el[p]))
        for p in range(n_paths))


def channel_matrix(paths: tuple[PathMeta, ...], n_tx: int,
                   rx_geometry: ArrayGeometry, tx_spacing: float = 0.5) -> np.ndarray:
    """Assemble the N_r x N_t channel matrix from path metadata.

    Keeping this separate from the path draw lets several receive
    geometries share one set of paths for paired comparisons.
    """
    n_r = rx_geometry.n_elements
    n_paths = len(paths)
    a_rx = np.empty((n_r, n_paths), dtype=complex)
    a_tx = np.empty((n_tx, n_paths), dtype=complex)
    gains = np.empty(n_paths, dtype=complex)
    for p, path in enumerate(paths):
        a_rx[:, p] = array_response(rx_geometry, path.aoa_azimuth, path.aoa_elevation)
        a_tx[:, p] = upa_response(path.aod_azimuth, path.aod_elevation, n_tx, tx_spacing)
        gains[p] = path.gain
    scale = math.sqrt(n_tx * n_r / n_paths)
    return scale * (a_rx * gains) @ a_tx.conj().T


def generate_channel(params: ChannelParams,
                     rng: np.random.Generator) -> ChannelRealization:
    """Draw one channel realization.  Deterministic given the generator state."""
    paths = draw_paths(params, rng)
    matrix = channel_matrix(paths, params.n_tx, params.rx_geometry)
    return ChannelRealization(matrix=matrix, paths=paths)
