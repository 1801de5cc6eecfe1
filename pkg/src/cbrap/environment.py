"""Synthetic linear-payoff environments and context replay.

Rewards follow mean + noise, where the mean is the inner product of the
chosen arm's context with a hidden parameter vector and the noise is
R-sub-Gaussian.  Everything an environment produces is a pure function of
(seed, round), so any two policies run against the same seed consume
identical context and noise streams, and reruns replay exactly.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import (ConfigError, DatasetError, EndOfDataError,
                     InvalidDimensionError, InvalidInputError)
from .projection import ContextVector, as_context
from .rng import STREAM_CONTEXT, STREAM_NOISE, STREAM_THETA, check_seed, derive_rng


class NoiseKind(enum.Enum):
    NONE = "none"
    GAUSSIAN = "gaussian"
    BOUNDED_UNIFORM = "bounded-uniform"


@dataclass(frozen=True)
class NoiseSpec:
    """Reward noise family; ``sub_gaussian_r`` is the R in the moment bound.

    Gaussian noise with standard deviation R is R-sub-Gaussian; uniform
    noise on [-w, w] is w-sub-Gaussian; the none kind is 0-sub-Gaussian.
    """

    kind: NoiseKind = NoiseKind.NONE
    scale: float = 0.0

    def __post_init__(self):
        if self.kind is NoiseKind.NONE:
            if self.scale != 0.0:
                raise ConfigError("noise kind 'none' takes no scale")
        elif not self.scale > 0:
            raise ConfigError(f"noise scale must be positive, got {self.scale}")

    @staticmethod
    def none() -> "NoiseSpec":
        return NoiseSpec(NoiseKind.NONE, 0.0)

    @staticmethod
    def gaussian(r: float) -> "NoiseSpec":
        return NoiseSpec(NoiseKind.GAUSSIAN, float(r))

    @staticmethod
    def bounded_uniform(half_width: float) -> "NoiseSpec":
        return NoiseSpec(NoiseKind.BOUNDED_UNIFORM, float(half_width))

    @property
    def sub_gaussian_r(self) -> float:
        return self.scale


@dataclass(frozen=True)
class GaussianUnit:
    """Isotropic contexts normalized to unit length."""


@dataclass(frozen=True)
class SparseUniform:
    """Contexts with exactly ``nnz`` nonzero coordinates, unit length."""

    nnz: int = 5


@dataclass(frozen=True)
class AlignedSpread:
    """Well-separated contexts: mean rewards spread uniformly over [low, high].

    Each arm is c * u + w with u the hidden parameter direction, c drawn
    uniformly from [low, high] and w a length-``noise_scale`` perturbation
    orthogonal to u, so the arm's mean reward is exactly c * ||theta*||.
    Gaps between arms are order (high-low)/K rather than the 1/sqrt(n) of
    isotropic contexts.

    With ``nuisance_dim`` = 0 the perturbation is isotropic and fresh each
    round; with d > 0 it lives in a fixed d-dimensional subspace drawn once
    per environment, giving the estimator reward-irrelevant structure it
    can (and must) learn to ignore.
    """

    low: float = 0.0
    high: float = 0.95
    noise_scale: float = 0.2
    nuisance_dim: int = 0

    def __post_init__(self):
        if not 0.0 <= self.low < self.high:
            raise ConfigError("need 0 <= low < high")
        if self.noise_scale < 0:
            raise ConfigError("noise_scale must be nonnegative")
        if self.nuisance_dim < 0:
            raise ConfigError("nuisance_dim must be nonnegative")


@dataclass(frozen=True)
class ReplayDataset:
    """In-memory context dataset: K rows per round, each of length n."""

    n: int
    K: int
    rows: np.ndarray  # (n_rounds * K, n), read-only

    @property
    def n_rounds(self) -> int:
        return self.rows.shape[0] // self.K


@dataclass(frozen=True)
class Replay:
    """Context generator that replays a fixed dataset round by round."""

    dataset: ReplayDataset


ContextGen = GaussianUnit | SparseUniform | AlignedSpread | Replay


@dataclass(frozen=True)
class RoundRecord:
    """One row of a run log.

    ``ucb_gap`` is the chosen arm's score minus the best other arm's score
    (inf for a single arm); ``instant_regret`` compares expected rewards,
    not noisy realizations.
    """

    t: int
    chosen: int
    reward: float
    instant_regret: float
    ucb_gap: float
    elapsed_ns: int


@dataclass(frozen=True)
class EnvConfig:
    """Environment description; synthetic generators keep every ||x|| <= 1,
    which makes the norm bounds the theory formulas need easy to certify."""

    n: int
    K: int
    context: ContextGen = field(default_factory=GaussianUnit)
    noise: NoiseSpec = field(default_factory=NoiseSpec.none)
    seed: int = 0
    theta_norm: float = 1.0
    clip_rewards: bool = False  # demonstration only; breaks linearity


class Environment:
    """Linear-payoff environment with a hidden parameter vector.

    ``theta_star`` is ground truth: policies never read it, but oracles,
    regret accounting and the theory validators do.  Instances are
    immutable after construction; draw/realize are pure in (seed, t).
    """

    def __init__(self, cfg: EnvConfig):
        if cfg.n < 1 or cfg.K < 1:
            raise ConfigError(f"n and K must be >= 1, got n={cfg.n}, K={cfg.K}")
        if not cfg.theta_norm > 0:
            raise ConfigError(f"theta_norm must be positive, got {cfg.theta_norm}")
        if isinstance(cfg.context, SparseUniform) and not 1 <= cfg.context.nnz <= cfg.n:
            raise ConfigError(f"nnz must lie in [1, n], got {cfg.context.nnz}")
        if isinstance(cfg.context, AlignedSpread) and cfg.context.nuisance_dim > cfg.n - 1:
            raise ConfigError(f"nuisance_dim must be <= n-1, got {cfg.context.nuisance_dim}")
        if isinstance(cfg.context, Replay):
            ds = cfg.context.dataset
            if ds.n != cfg.n or ds.K != cfg.K:
                raise ConfigError(
                    f"replay dataset is (n={ds.n}, K={ds.K}), config wants "
                    f"(n={cfg.n}, K={cfg.K})"
                )
        check_seed(cfg.seed)
        self.cfg = cfg
        self.n = cfg.n
        self.K = cfg.K
        self.seed = cfg.seed
        self.noise = cfg.noise
        raw = derive_rng(cfg.seed, STREAM_THETA).standard_normal(cfg.n)
        self.theta_star = raw * (cfg.theta_norm / np.linalg.norm(raw))
        self.theta_star.setflags(write=False)
        self._nuisance_basis: np.ndarray | None = None
        if isinstance(cfg.context, AlignedSpread) and cfg.context.nuisance_dim > 0:
            # fixed orthonormal directions orthogonal to theta*, drawn once
            d = cfg.context.nuisance_dim
            u = self.theta_star / np.linalg.norm(self.theta_star)
            G = derive_rng(cfg.seed, STREAM_THETA, 1).standard_normal((cfg.n, d))
            Q, _ = np.linalg.qr(np.column_stack([u, G]))
            self._nuisance_basis = np.ascontiguousarray(Q[:, 1:].T)  # (d, n)

    def draw_round(self, t: int) -> list[ContextVector]:
        """The K contexts revealed at round t (1-based); each has norm <= 1."""
        if t < 1:
            raise InvalidInputError(f"round index must be >= 1, got {t}")
        gen = self.cfg.context
        if isinstance(gen, Replay):
            rows = gen.dataset.rows
            lo, hi = (t - 1) * self.K, t * self.K
            if hi > rows.shape[0]:
                raise EndOfDataError(
                    f"replay dataset has {gen.dataset.n_rounds} rounds, round {t} requested"
                )
            return [ContextVector.dense(rows[i]) for i in range(lo, hi)]
        rng = derive_rng(self.seed, STREAM_CONTEXT, t)
        if isinstance(gen, GaussianUnit):
            X = rng.standard_normal((self.K, self.n))
            norms = np.linalg.norm(X, axis=1, keepdims=True)
            X = np.divide(X, norms, out=X, where=norms > 0)
            return [ContextVector.dense(row) for row in X]
        if isinstance(gen, SparseUniform):
            out = []
            for _ in range(self.K):
                idx = np.sort(rng.choice(self.n, size=gen.nnz, replace=False))
                vals = rng.uniform(-1.0, 1.0, size=gen.nnz)
                nv = np.linalg.norm(vals)
                if nv > 0:
                    vals /= nv
                out.append(ContextVector.sparse(self.n, idx, vals))
            return out
        if isinstance(gen, AlignedSpread):
            u = self.theta_star / np.linalg.norm(self.theta_star)
            c = rng.uniform(gen.low, gen.high, size=self.K)
            if self._nuisance_basis is not None:
                coef = rng.standard_normal((self.K, gen.nuisance_dim))
                W = coef @ self._nuisance_basis
            else:
                W = rng.standard_normal((self.K, self.n))
                W -= np.outer(W @ u, u)
            wn = np.linalg.norm(W, axis=1, keepdims=True)
            W = np.divide(W, wn, out=W, where=wn > 0) * gen.noise_scale
            X = c[:, None] * u + W
            norms = np.linalg.norm(X, axis=1, keepdims=True)
            np.divide(X, norms, out=X, where=norms > 1.0)
            return [ContextVector.dense(row) for row in X]
        raise ConfigError(f"unknown context generator: {gen!r}")

    def noise_draw(self, t: int) -> float:
        """The round-t noise value; one draw per round, shared by all arms."""
        spec = self.noise
        if spec.kind is NoiseKind.NONE:
            return 0.0
        rng = derive_rng(self.seed, STREAM_NOISE, t)
        if spec.kind is NoiseKind.GAUSSIAN:
            return float(rng.standard_normal() * spec.scale)
        return float(rng.uniform(-spec.scale, spec.scale))

    def mean_reward(self, x: ContextVector | np.ndarray) -> float:
        """Expected reward <x, theta*> of a context."""
        x = as_context(x)
        if x.dim != self.n:
            raise InvalidDimensionError(f"context dim {x.dim} does not match n={self.n}")
        return x.dot_dense(self.theta_star)

    def realize_reward(self, x: ContextVector | np.ndarray, t: int) -> float:
        """Noisy reward <x, theta*> + eta_t for the chosen arm at round t."""
        if t < 1:
            raise InvalidInputError(f"round index must be >= 1, got {t}")
        r = self.mean_reward(x) + self.noise_draw(t)
        if self.cfg.clip_rewards:
            r = min(1.0, max(0.0, r))
        return r

    def instant_regret(self, contexts: Sequence[ContextVector | np.ndarray],
                       chosen: int) -> float:
        """Best expected reward this round minus the chosen arm's expected reward."""
        if not 0 <= chosen < len(contexts):
            raise InvalidInputError(f"arm index {chosen} out of range [0, {len(contexts)})")
        means = [self.mean_reward(x) for x in contexts]
        return max(0.0, max(means) - means[chosen])


def make_env(spec: EnvConfig | dict) -> Environment:
    """Build an environment from a config object or an equivalent dict."""
    if isinstance(spec, dict):
        spec = env_config_from_dict(spec)
    if not isinstance(spec, EnvConfig):
        raise ConfigError(f"expected EnvConfig or dict, got {type(spec).__name__}")
    return Environment(spec)


def env_config_from_dict(d: dict) -> EnvConfig:
    """Parse the JSON-friendly environment description used by config files."""
    d = dict(d)
    try:
        n = int(d.pop("n"))
        K = int(d.pop("k", d.pop("K", None)))
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"env config needs integer fields 'n' and 'k': {exc}") from exc
    ctx_name = str(d.pop("context", "gaussian-unit"))
    if ctx_name == "gaussian-unit":
        context: ContextGen = GaussianUnit()
    elif ctx_name == "sparse-uniform":
        context = SparseUniform(nnz=int(d.pop("nnz", 5)))
    elif ctx_name == "aligned-spread":
        context = AlignedSpread(
            low=float(d.pop("low", 0.0)),
            high=float(d.pop("high", 0.95)),
            noise_scale=float(d.pop("noise_scale", 0.2)),
            nuisance_dim=int(d.pop("nuisance_dim", 0)),
        )
    elif ctx_name == "replay":
        path = d.pop("replay_path", None)
        if path is None:
            raise ConfigError("context 'replay' requires 'replay_path'")
        context = Replay(load_context_dataset(path))
    else:
        raise ConfigError(f"unknown context generator '{ctx_name}'")
    noise_name = str(d.pop("noise", "none"))
    if noise_name == "none":
        noise = NoiseSpec.none()
    elif noise_name == "gaussian":
        noise = NoiseSpec.gaussian(float(d.pop("noise_r", 0.1)))
    elif noise_name == "bounded-uniform":
        noise = NoiseSpec.bounded_uniform(float(d.pop("noise_r", 0.1)))
    else:
        raise ConfigError(f"unknown noise kind '{noise_name}'")
    cfg = EnvConfig(n=n, K=K, context=context, noise=noise,
                    seed=int(d.pop("seed", 0)),
                    theta_norm=float(d.pop("theta_norm", 1.0)),
                    clip_rewards=bool(d.pop("clip_rewards", False)))
    if d:
        raise ConfigError(f"unknown env config fields: {sorted(d)}")
    return cfg


def with_seed(env: Environment, seed: int) -> Environment:
    """The same environment family re-keyed to another seed."""
    return Environment(replace(env.cfg, seed=seed))


# --- context dataset CSV: header "dim=<n>,arms=<K>", then K rows per round ---

def load_context_dataset(path: str) -> ReplayDataset:
    """Read a context CSV, reporting the offending line on any parse failure."""
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            lines = fh.read().split("\n")
    except OSError as exc:
        raise DatasetError(f"cannot read {path}: {exc}") from exc
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise DatasetError(f"{path}: empty file")
    header = lines[0].strip()
    try:
        fields = dict(part.split("=", 1) for part in header.split(","))
        n, K = int(fields["dim"]), int(fields["arms"])
    except (ValueError, KeyError) as exc:
        raise DatasetError(
            f"{path}: line 1: expected header 'dim=<n>,arms=<K>', got {header!r}"
        ) from exc
    if n < 1 or K < 1:
        raise DatasetError(f"{path}: line 1: dim and arms must be >= 1")
    rows = np.empty((len(lines) - 1, n))
    for i, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != n:
            raise DatasetError(f"{path}: line {i}: expected {n} values, got {len(parts)}")
        try:
            rows[i - 2] = [float(p) for p in parts]
        except ValueError as exc:
            raise DatasetError(f"{path}: line {i}: {exc}") from exc
        if not np.all(np.isfinite(rows[i - 2])):
            raise DatasetError(f"{path}: line {i}: non-finite value")
    if rows.shape[0] % K != 0:
        raise DatasetError(
            f"{path}: {rows.shape[0]} data rows not divisible by arms={K}"
        )
    rows.setflags(write=False)
    return ReplayDataset(n=n, K=K, rows=rows)


def save_context_dataset(dataset: ReplayDataset, path: str) -> None:
    """Write a dataset in the replay CSV format (LF endings, trailing newline)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"dim={dataset.n},arms={dataset.K}\n")
        for row in dataset.rows:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
