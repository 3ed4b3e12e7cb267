"""Bayesian optimization loop over a box of knot parameters.

Quasi-random initialization, GP surrogate refit every round, acquisition
maximization by seeded candidate search (scrambled Sobol over the whole
box plus Gaussian perturbations of the incumbent at several scales - a
global-only candidate set cannot resolve optima much finer than the box
diameter divided by candidate_count**(1/d)).  Batches larger than one use
constant-liar imputation: each proposal is written into the surrogate at
its posterior mean before the next proposal is chosen.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc

from .gp import GPModel, Matern52Kernel, expected_improvement, fit, ucb_acquisition
from .seeds import derive

ACQUISITIONS = ("EI", "UCB")

# Incumbent perturbation scales as fractions of each box width.
_LOCAL_SCALES = (0.1, 0.02, 0.004)

_AMPLITUDE_FLOOR = 1e-6


@dataclass(frozen=True)
class OptimizeConfig:
    """Settings for one optimization run."""

    bounds: tuple                      # ((lo, hi), ...) per dimension
    n_init: int = 8
    n_iter: int = 60
    batch: int = 1
    acquisition: str = "EI"
    kappa: float = 2.0                 # UCB exploration weight
    candidate_count: int = 4096
    noise_var: float = 1e-4
    lengthscale_factors: tuple = (1.0,)  # of box width; >1 entry = MLL grid
    seed: int = 0

    def __post_init__(self):
        bounds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        object.__setattr__(self, "bounds", bounds)
        if any(hi <= lo for lo, hi in bounds):
            raise ValueError("bounds must be non-degenerate")
        if self.n_init < 2:
            raise ValueError("n_init must be at least 2")
        if self.n_iter < self.n_init:
            raise ValueError("n_iter must cover the initial design")
        if self.batch < 1:
            raise ValueError("batch must be positive")
        if self.acquisition not in ACQUISITIONS:
            raise ValueError(f"acquisition must be one of {ACQUISITIONS}")
        if self.candidate_count < 1:
            raise ValueError("candidate_count must be positive")
        if self.noise_var < 0:
            raise ValueError("noise_var must be non-negative")

    @property
    def dim(self) -> int:
        return len(self.bounds)

    @property
    def lows(self) -> np.ndarray:
        return np.array([lo for lo, _ in self.bounds])

    @property
    def highs(self) -> np.ndarray:
        return np.array([hi for _, hi in self.bounds])


@dataclass
class Evaluation:
    """One objective evaluation; ``failed`` marks a non-finite result
    that was penalized with the worst value observed so far."""

    point: tuple
    value: float
    failed: bool = False


def _sobol(config: OptimizeConfig, count: int, *tags) -> np.ndarray:
    sampler = qmc.Sobol(d=config.dim, scramble=True,
                        seed=derive(config.seed, *tags))
    # Draw the next power of two and slice: Sobol balance is only defined
    # at powers of two and scipy warns otherwise.
    pts = sampler.random_base2(max(0, (count - 1).bit_length()))[:count]
    return qmc.scale(pts, config.lows, config.highs)


def fit_surrogate(X, t, config: OptimizeConfig) -> GPModel:
    """Refit the GP: amplitude from target variance, lengthscales as a
    fixed fraction of the box widths (or the best of a small grid by
    marginal likelihood)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    t = np.asarray(t, dtype=float)
    amplitude = max(float(np.var(t)), _AMPLITUDE_FLOOR)
    widths = config.highs - config.lows
    best_model = None
    best_mll = -np.inf
    for factor in config.lengthscale_factors:
        kernel = Matern52Kernel(amplitude=amplitude,
                                lengthscales=tuple(widths * factor),
                                noise_var=config.noise_var)
        model = fit(X, t, kernel)
        if len(config.lengthscale_factors) == 1:
            return model
        mll = model.log_marginal_likelihood()
        if mll > best_mll:
            best_mll = mll
            best_model = model
    return best_model


def _acquisition_values(model: GPModel, pts: np.ndarray,
                        config: OptimizeConfig) -> np.ndarray:
    mu, var = model.posterior_batch(pts)
    sigma = np.sqrt(var)
    if config.acquisition == "EI":
        return expected_improvement(mu, sigma, float(np.max(model.t)))
    return ucb_acquisition(mu, sigma, config.kappa)


def _fold_into_box(pts: np.ndarray, lows: np.ndarray,
                   highs: np.ndarray) -> np.ndarray:
    """Reflect points at the box walls (no probability atom on the bound,
    unlike clipping)."""
    widths = highs - lows
    z = np.mod(pts - lows, 2.0 * widths)
    return lows + widths - np.abs(z - widths)


def _candidates(model: GPModel, config: OptimizeConfig) -> np.ndarray:
    """Global Sobol candidates plus local perturbations of the incumbent."""
    total = config.candidate_count
    n_local_groups = len(_LOCAL_SCALES)
    n_global = max(1, total // 2)
    per_scale = max(1, (total - n_global) // n_local_groups)
    pts = [_sobol(config, n_global, "candidates", model.n)]
    incumbent = model.X[int(np.argmax(model.t))]
    widths = config.highs - config.lows
    rng = np.random.Generator(np.random.Philox(
        key=derive(config.seed, "local", model.n)))
    for scale in _LOCAL_SCALES:
        jitter = rng.normal(0.0, 1.0, size=(per_scale, config.dim))
        local = incumbent + jitter * (widths * scale)
        pts.append(_fold_into_box(local, config.lows, config.highs))
    return np.vstack(pts)


def propose_next(model: GPModel, config: OptimizeConfig, batch: int | None = None,
                 candidates=None) -> np.ndarray:
    """Acquisition argmax over a candidate set; returns (batch, dim).

    With batch > 1, each accepted point is imputed into the surrogate at
    its posterior mean (constant liar) before scoring the next, which
    keeps the batch spread out.
    """
    batch = config.batch if batch is None else batch
    points = []
    for _ in range(batch):
        cands = _candidates(model, config) if candidates is None \
            else np.atleast_2d(np.asarray(candidates, dtype=float))
        scores = _acquisition_values(model, cands, config)
        if points:
            taken = np.array(points)
            dup = (cands[:, None, :] == taken[None, :, :]).all(axis=2).any(axis=1)
            if not dup.all():
                scores = np.where(dup, -np.inf, scores)
        choice = cands[int(np.argmax(scores))]
        points.append(choice)
        if len(points) < batch:
            lie, _ = model.posterior(choice)
            X = np.vstack([model.X, choice])
            t = np.append(model.t, lie)
            model = fit_surrogate(X, t, config)
    return np.array(points)


def bayesopt_loop(objective, config: OptimizeConfig,
                  callback=None) -> tuple[np.ndarray, list[Evaluation]]:
    """Maximize a noisy black-box objective over the configured box.

    Runs n_init quasi-random evaluations and then propose/evaluate rounds
    until n_iter total evaluations.  Non-finite objective values are
    recorded as failures and penalized with the worst value seen so far.
    Returns the best observed point and the full evaluation history.
    """
    history: list[Evaluation] = []

    def record(point: np.ndarray) -> None:
        raw = float(objective(np.asarray(point, dtype=float)))
        failed = not np.isfinite(raw)
        if failed:
            finite = [e.value for e in history if not e.failed]
            raw = min(finite) if finite else 0.0
        history.append(Evaluation(tuple(float(v) for v in point), raw, failed))
        if callback is not None:
            callback(history[-1])

    for point in _sobol(config, config.n_init, "init"):
        record(point)

    while len(history) < config.n_iter:
        X = np.array([e.point for e in history])
        t = np.array([e.value for e in history])
        model = fit_surrogate(X, t, config)
        todo = min(config.batch, config.n_iter - len(history))
        for point in propose_next(model, config, batch=todo):
            record(point)

    best = max(range(len(history)), key=lambda i: history[i].value)
    return np.array(history[best].point), history


def random_search(objective, config: OptimizeConfig) -> tuple[np.ndarray, list[Evaluation]]:
    """Uniform-random baseline with the same evaluation budget and seed."""
    rng = np.random.Generator(np.random.Philox(
        key=derive(config.seed, "random-search")))
    history: list[Evaluation] = []
    for _ in range(config.n_iter):
        point = config.lows + rng.random(config.dim) * (config.highs - config.lows)
        value = float(objective(point))
        failed = not np.isfinite(value)
        if failed:
            finite = [e.value for e in history if not e.failed]
            value = min(finite) if finite else 0.0
        history.append(Evaluation(tuple(point), value, failed))
    best = max(range(len(history)), key=lambda i: history[i].value)
    return np.array(history[best].point), history
