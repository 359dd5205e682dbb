"""Linear and RBF kernels over ball centers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# sigma search grid for tuning: [1e-3, 1] in steps of 0.01
SIGMA_GRID = tuple(float(s) for s in np.round(np.arange(0.001, 1.0 + 1e-12, 0.01), 3))


@dataclass(frozen=True)
class KernelSpec:
    """Inner-product rule.

    ``squared_norm=False`` selects exp(-||a-b|| / (2 sigma^2)) with the
    unsquared distance (a Laplacian-type kernel) instead of the Gaussian.
    """

    kind: str = "rbf"
    sigma: float = 1.0
    squared_norm: bool = True

    def __post_init__(self):
        if self.kind not in ("linear", "rbf"):
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "rbf" and not self.sigma > 0:
            raise ValueError("rbf kernel needs sigma > 0")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "sigma": float(self.sigma), "squared_norm": self.squared_norm}


def k_eval(spec: KernelSpec, a, b) -> float:
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.shape != b.shape:
        raise ValueError(f"vector length mismatch: {a.size} vs {b.size}")
    if spec.kind == "linear":
        return float(a @ b)
    d2 = float(((a - b) ** 2).sum())
    dist = d2 if spec.squared_norm else np.sqrt(d2)
    return float(np.exp(-dist / (2.0 * spec.sigma ** 2)))


def _sq_dists(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    # direct differences, chunked; the |a|^2+|b|^2-2ab shortcut cancels badly
    out = np.empty((A.shape[0], B.shape[0]))
    step = max(1, 4_000_000 // max(1, B.shape[0] * A.shape[1]))
    for s in range(0, A.shape[0], step):
        diff = A[s:s + step, None, :] - B[None, :, :]
        out[s:s + step] = np.einsum("ijk,ijk->ij", diff, diff)
    return out


def cross(spec: KernelSpec, A, B) -> np.ndarray:
    """Kernel matrix between the rows of A and the rows of B."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if A.shape[1] != B.shape[1]:
        raise ValueError(f"vector length mismatch: {A.shape[1]} vs {B.shape[1]}")
    if spec.kind == "linear":
        return A @ B.T
    d = _sq_dists(A, B)
    if not spec.squared_norm:
        d = np.sqrt(d)
    return np.exp(-d / (2.0 * spec.sigma ** 2))


def gram(spec: KernelSpec, centers) -> np.ndarray:
    """Symmetric n x n kernel matrix; the upper triangle is mirrored exactly."""
    C = np.atleast_2d(np.asarray(centers, dtype=float))
    G = cross(spec, C, C)
    G = np.triu(G) + np.triu(G, 1).T
    if spec.kind == "rbf":
        np.fill_diagonal(G, 1.0)
    return G
