"""Point-wise epsilon-SVR trained by SMO, the comparison baseline."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .data import Dataset, DataError, Standardization, fit_standardize
from .kernel import KernelSpec, cross, gram
from .solver import DualProblem, DualSolution, recover_weights


@dataclass(frozen=True)
class SvrModel:
    beta: np.ndarray
    bias: float
    kernel: KernelSpec
    support_inputs: np.ndarray = field(repr=False)
    standardization: Standardization
    iterations: int = 0
    train_seconds: float = 0.0

    def decision(self, Z) -> np.ndarray:
        Z = np.atleast_2d(np.asarray(Z, dtype=float))
        if Z.shape[1] != self.support_inputs.shape[1]:
            raise DataError(f"expected {self.support_inputs.shape[1]} features, got {Z.shape[1]}")
        nz = np.flatnonzero(self.beta)
        if nz.size == 0:
            return np.full(Z.shape[0], self.bias)
        return cross(self.kernel, Z, self.support_inputs[nz]) @ self.beta[nz] + self.bias

    def predict(self, X, standardized: bool = False):
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        if single:
            X = X.reshape(1, -1)
        z = self.decision(self.standardization.transform_features(X))
        out = z if standardized else self.standardization.inverse_targets(z)
        return out[0] if single else out

    def explicit_weights(self) -> np.ndarray:
        if self.kernel.kind != "linear":
            raise ValueError("explicit weights exist only for the linear kernel")
        return self.beta @ self.support_inputs


def svr_fit(train: Dataset, epsilon: float = 0.01, C: float = 10.0, kernel: KernelSpec = KernelSpec(),
            standardize: bool = True, tol: float = 1e-3, max_iter: int = 100_000,
            seed: int = 0, gram_matrix=None) -> SvrModel:
    """Fit the classical epsilon-SVR dual.

    Pair selection is deterministic (maximal violator plus second-order
    partner), so ``seed`` does not change the result. ``gram_matrix`` lets a
    grid search reuse the kernel matrix of the (standardized) training inputs.
    """
    if train.m < 2:
        raise DataError("training set needs at least 2 rows")
    if standardize:
        z, st = fit_standardize(train)
    else:
        z, st = train, Standardization.identity(train.l)
    t0 = time.perf_counter()
    K = np.ascontiguousarray(gram(kernel, z.features) if gram_matrix is None else gram_matrix, dtype=float)
    zvec, iters, _ = _backend.smo_svr(K, z.targets, float(epsilon), float(C), float(tol), int(max_iter), False)
    m = z.m
    duals = DualSolution(np.asarray(zvec[:m]), np.asarray(zvec[m:]), iterations=iters)
    problem = DualProblem(K, np.zeros(m), z.targets, epsilon, C)
    w = recover_weights(problem, duals)
    elapsed = time.perf_counter() - t0
    return SvrModel(w.beta, w.bias, kernel, np.array(z.features), st, iters, elapsed)


def svr_predict(model: SvrModel, x, standardized: bool = False):
    return model.predict(x, standardized=standardized)


def smo_trace(train: Dataset, epsilon: float, C: float, kernel: KernelSpec, tol: float = 1e-3,
              max_iter: int = 100_000) -> list[float]:
    """Dual objective after every SMO pair update (standardized data)."""
    z, _ = fit_standardize(train)
    K = np.ascontiguousarray(gram(kernel, z.features))
    _, _, objs = _backend.smo_svr(K, z.targets, float(epsilon), float(C), float(tol), int(max_iter), True)
    return objs
