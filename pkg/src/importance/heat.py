"""Graph heat kernel H_t = U exp(-t * Λ / λ_max) Uᵀ over the combinatorial Laplacian."""

import logging
from dataclasses import dataclass

import numpy as np

from .graph import ObjectGraph

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class HeatKernel:
    """Heat kernel matrix `matrix` (n x n, symmetric) at dispersion time `t`."""

    t: float
    matrix: np.ndarray

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


def heat_kernel(graph: ObjectGraph, t: float = 1.0) -> HeatKernel:
    """
    Spectral heat filter g_t(λ) = exp(-t λ) on eigenvalues normalised by λ_max.

    L = Deg - W is eigendecomposed densely; when λ_max = 0 (no edges) every
    normalised eigenvalue is 0 and H is the identity.

    Raises:
        ValueError: If t is negative
        numpy.linalg.LinAlgError: If the eigendecomposition does not converge
    """
    if t < 0:
        raise ValueError(f"Heat time must be non-negative, got {t}")
    laplacian = graph.laplacian()
    if graph.n == 0:
        return HeatKernel(t=t, matrix=np.zeros((0, 0)))

    eigenvalues, eigenvectors = np.linalg.eigh(laplacian)
    eigenvalues = np.clip(eigenvalues, 0.0, None)
    lambda_max = eigenvalues.max()
    normalized = eigenvalues / lambda_max if lambda_max > 0 else np.zeros_like(eigenvalues)

    if graph.n > 1 and not graph.is_connected():
        logger.debug("Diffusing over a disconnected graph of %d nodes", graph.n)

    matrix = (eigenvectors * np.exp(-t * normalized)) @ eigenvectors.T
    return HeatKernel(t=t, matrix=(matrix + matrix.T) / 2.0)
