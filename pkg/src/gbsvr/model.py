"""End-to-end GBSVR: standardize, granulate, solve the dual, predict."""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .data import Dataset, DataError, Standardization, fit_standardize
from .granulation import BallSet, GranularRegressionBall, GranulationConfig, generate_balls
from .kernel import KernelSpec, cross, gram
from .solver import DualProblem, DualSolution, SolverConfig, WeightRepr, recover_weights, solve_dual

FORMAT = "gbsvr-model/1"


@dataclass(frozen=True)
class GbsvrParams:
    purity: float = 0.95
    min_points: int = 2
    label_count: int = 10
    epsilon: float = 0.01
    C: float = 10.0
    kernel: KernelSpec = field(default_factory=KernelSpec)
    seed: int = 0
    radius: str = "mean"
    solver: SolverConfig = field(default_factory=SolverConfig)

    def granulation(self) -> GranulationConfig:
        return GranulationConfig(self.purity, self.min_points, self.label_count, self.seed, self.radius)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["kernel"] = self.kernel.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "GbsvrParams":
        d = dict(d)
        d["kernel"] = KernelSpec(**d["kernel"])
        d["solver"] = SolverConfig(**d["solver"])
        return cls(**d)


@dataclass(frozen=True)
class GbsvrModel:
    ball_set: BallSet
    kernel: KernelSpec
    weights: WeightRepr
    duals: DualSolution
    standardization: Standardization
    params: GbsvrParams
    timings: dict = field(default_factory=dict, compare=False)

    @property
    def n_balls(self) -> int:
        return len(self.ball_set)

    @property
    def train_seconds(self) -> float:
        return self.timings.get("granulate", 0.0) + self.timings.get("solve", 0.0)

    def _coef(self) -> np.ndarray:
        return self.weights.scale * self.weights.beta

    def decision(self, Z) -> np.ndarray:
        """Regressor on standardized inputs, standardized output."""
        Z = np.atleast_2d(np.asarray(Z, dtype=float))
        if Z.shape[1] != self.ball_set.centers.shape[1]:
            raise DataError(f"expected {self.ball_set.centers.shape[1]} features, got {Z.shape[1]}")
        coef = self._coef()
        if not np.any(coef):
            return np.full(Z.shape[0], self.weights.bias)
        return cross(self.kernel, Z, self.ball_set.centers) @ coef + self.weights.bias

    def predict(self, X, standardized: bool = False) -> np.ndarray:
        """Predict original-scale targets (``standardized=True`` keeps the z-scale)."""
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        if single:
            X = X.reshape(1, -1)
        z = self.decision(self.standardization.transform_features(X))
        out = z if standardized else self.standardization.inverse_targets(z)
        return out[0] if single else out

    def explicit_weights(self) -> np.ndarray:
        """w = (||A|| - B) A / ||A|| in input space (linear kernel only)."""
        if self.kernel.kind != "linear":
            raise ValueError("explicit weights exist only for the linear kernel")
        return self._coef() @ self.ball_set.centers

    def center_residuals(self) -> np.ndarray:
        """f(c_i) - y_hat_i - ||w|| r_i per ball; |value| <= eps for balls with dual < C."""
        bs = self.ball_set
        return self.decision(bs.centers) - bs.y_hat - self.weights.norm_w * bs.radii

    # serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        st = self.standardization
        return {
            "format": FORMAT,
            "params": self.params.to_dict(),
            "standardization": {
                "feature_means": st.feature_means.tolist(),
                "feature_stds": st.feature_stds.tolist(),
                "target_mean": st.target_mean,
                "target_std": st.target_std,
            },
            "source_m": self.ball_set.source_m,
            "balls": [
                {
                    "center": b.center.tolist(),
                    "radius": b.radius,
                    "y_hat": b.y_hat,
                    "cardinality": b.cardinality,
                    "majority_label": b.majority_label,
                    "quality": b.quality,
                    "member_indices": b.member_indices.tolist(),
                    "unsplittable": b.unsplittable,
                }
                for b in self.ball_set.balls
            ],
            "duals": {
                "alpha": self.duals.alpha.tolist(),
                "alpha_star": self.duals.alpha_star.tolist(),
                "objective": self.duals.objective,
                "kkt_residual": self.duals.kkt_residual,
                "iterations": self.duals.iterations,
                "converged": self.duals.converged,
            },
            "weights": {
                "beta": self.weights.beta.tolist(),
                "norm_A": self.weights.norm_A,
                "B": self.weights.B,
                "norm_w": self.weights.norm_w,
                "bias": self.weights.bias,
                "clamped": self.weights.clamped,
            },
            "timings": dict(self.timings),
        }

    def save(self, path) -> None:
        # json writes floats with repr(), which round-trips every double exactly
        Path(path).write_text(json.dumps(self.to_dict(), indent=1))

    @classmethod
    def from_dict(cls, d: dict) -> "GbsvrModel":
        if d.get("format") != FORMAT:
            raise DataError(f"not a GBSVR model document (format={d.get('format')!r})")
        params = GbsvrParams.from_dict(d["params"])
        balls = tuple(
            GranularRegressionBall(
                center=np.array(b["center"], dtype=float),
                radius=b["radius"],
                y_hat=b["y_hat"],
                cardinality=b["cardinality"],
                majority_label=b["majority_label"],
                quality=b["quality"],
                member_indices=np.array(b["member_indices"], dtype=int),
                unsplittable=b["unsplittable"],
            )
            for b in d["balls"]
        )
        du = d["duals"]
        duals = DualSolution(np.array(du["alpha"]), np.array(du["alpha_star"]), du["objective"],
                             du["kkt_residual"], du["iterations"], du["converged"])
        w = d["weights"]
        weights = WeightRepr(np.array(w["beta"]), w["norm_A"], w["B"], w["norm_w"], w["bias"], w["clamped"])
        st = d["standardization"]
        return cls(
            ball_set=BallSet(balls, d["source_m"], params.granulation()),
            kernel=params.kernel,
            weights=weights,
            duals=duals,
            standardization=Standardization(np.array(st["feature_means"]), np.array(st["feature_stds"]),
                                            st["target_mean"], st["target_std"]),
            params=params,
            timings=d.get("timings", {}),
        )

    @classmethod
    def load(cls, path) -> "GbsvrModel":
        return cls.from_dict(json.loads(Path(path).read_text()))


def fit(train: Dataset, params: GbsvrParams = GbsvrParams(), standardize: bool = True) -> GbsvrModel:
    """Standardize, granulate, solve the dual and recover w and b."""
    if train.m < 2:
        raise DataError("training set needs at least 2 rows")
    if standardize:
        z, st = fit_standardize(train)
    else:
        z, st = train, Standardization.identity(train.l)
    t0 = time.perf_counter()
    balls = generate_balls(z, params.granulation())
    granulate = time.perf_counter() - t0
    return fit_balls(balls, st, params, granulate_seconds=granulate)


def fit_balls(balls: BallSet, st: Standardization, params: GbsvrParams, gram_matrix=None,
              granulate_seconds: float = 0.0) -> GbsvrModel:
    """Solve the dual over an existing ball set (lets grid searches reuse granulations)."""
    t0 = time.perf_counter()
    G = gram(params.kernel, balls.centers) if gram_matrix is None else gram_matrix
    problem = DualProblem(G, balls.radii, balls.y_hat, params.epsilon, params.C)
    duals = solve_dual(problem, params.solver)
    weights = recover_weights(problem, duals)
    solve = time.perf_counter() - t0
    return GbsvrModel(balls, params.kernel, weights, duals, st, params,
                      {"granulate": granulate_seconds, "solve": solve})


def predict(model: GbsvrModel, x, standardized: bool = False):
    return model.predict(x, standardized=standardized)
