"""Experiment runner: paired policy runs, validators, CSV/JSON artifacts.

An experiment executes one or more policies over a shared list of seeds.
Environment streams are pure functions of (seed, round), so every policy
in an experiment consumes identical contexts and noise; the runner hashes
the contexts each policy actually observed and refuses to summarize
unpaired runs.  Two further experiments validate the theory: a coverage
run checking that the projected true parameter stays inside the confidence
ellipsoid, and a distortion-tail run comparing Monte Carlo exceedance
rates against the closed-form bound.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import os
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .environment import (Environment, EnvConfig, Replay, RoundRecord,
                          env_config_from_dict, make_env)
from .errors import ConfigError, DatasetError
from .estimator import RidgeState
from .policies import (AdaptiveBeta, BetaMode, FixedBeta, PolicyConfig,
                       cbrap_run, cbrap_select, linucb_run, uniform_run)
from .projection import (ProjectionKind, ProjectionMatrix, build_projection,
                         kaban_failure_bound, project_rows, sg_distortion_sample)
from .rng import STREAM_PROJECTION, STREAM_UNIFORM, derive_seed
from .theory import (TheoryParams, beta_schedule, confidence_distance,
                     derive_gamma, regret_bound, success_probability)

ALGOS = ("cbrap-sg", "cbrap-rs", "linucb", "uniform")

_PROJECTION_KINDS = {
    "cbrap-sg": ProjectionKind.STANDARD_GAUSSIAN,
    "cbrap-rs": ProjectionKind.RANDOM_SIGN_DENSE,
}


@dataclass(frozen=True)
class ExperimentConfig:
    env: EnvConfig
    m: int
    T: int
    algos: tuple[str, ...] = ("cbrap-sg",)
    beta: float = 1.0
    adaptive_beta: bool = False
    lam: float = 1.0
    delta: float = 0.05
    seeds: tuple[int, ...] = (0,)
    out_dir: str | None = None
    timing_in_csv: bool = False  # real timings make reruns non-identical

    def __post_init__(self):
        if not isinstance(self.env, EnvConfig):
            raise ConfigError(f"env: expected EnvConfig, got {type(self.env).__name__}")
        if self.m < 1 or self.m > self.env.n:
            raise ConfigError(f"m: need 1 <= m <= n, got m={self.m}, n={self.env.n}")
        if self.T < 1:
            raise ConfigError(f"T: must be >= 1, got {self.T}")
        if not self.algos:
            raise ConfigError("algos: need at least one policy")
        for a in self.algos:
            if a not in ALGOS:
                raise ConfigError(f"algos: unknown policy '{a}', expected one of {ALGOS}")
        if not self.adaptive_beta and not self.beta > 0:
            raise ConfigError(f"beta: must be positive, got {self.beta}")
        if not self.lam > 0:
            raise ConfigError(f"lam: must be positive, got {self.lam}")
        if not 0.0 < self.delta < 1.0:
            raise ConfigError(f"delta: must lie in (0, 1), got {self.delta}")
        if not self.seeds:
            raise ConfigError("seeds: need at least one seed")


@dataclass
class AlgoSummary:
    algo: str
    regret_curves: list[list[float]]  # one nondecreasing length-T curve per seed
    final_regret_mean: float
    final_regret_std: float
    mean_round_latency_ns: float  # post warm-up


@dataclass
class ExperimentSummary:
    config: dict
    T: int
    seeds: list[int]
    algos: list[AlgoSummary]
    theory_bound: float | None = None
    success_probability: float | None = None
    coverage_rate: float | None = None

    def algo(self, name: str) -> AlgoSummary:
        for a in self.algos:
            if a.algo == name:
                return a
        raise KeyError(name)


def oracle_theory_params(env: Environment, P: ProjectionMatrix | None, *,
                         R: float, delta: float, lam: float, T: int,
                         rounds: Sequence | None = None) -> TheoryParams:
    """Theory constants measured from the ground truth over the full stream.

    Context streams do not depend on the policy's actions, so the scan can
    run ahead of any bandit run.  ``P=None`` means the identity map, for
    which the distortion terms are exactly zero; ``rounds`` may supply the
    prefetched context lists to avoid re-drawing the stream.
    """
    theta = env.theta_star
    zeta = theta if P is None else P.entries @ theta
    S = float(np.linalg.norm(zeta))
    L = B = eps = x_max = 0.0
    for t in range(1, T + 1):
        contexts = env.draw_round(t) if rounds is None else rounds[t - 1]
        X = np.stack([c.to_dense() for c in contexts])
        Z = X if P is None else project_rows(P, contexts)
        means = X @ theta
        L = max(L, float(np.max(np.linalg.norm(Z, axis=1))))
        B = max(B, float(np.max(np.abs(means))))
        eps = max(eps, float(np.max(np.abs(Z @ zeta - means))))
        x_max = max(x_max, float(np.max(np.linalg.norm(X, axis=1))))
    theta_norm = float(np.linalg.norm(theta))
    eps1 = eps / (x_max * theta_norm) if x_max > 0 and theta_norm > 0 else 0.0
    # S, L, B are bounds; floor them away from zero for degenerate streams
    return TheoryParams(R=R, S=max(S, 1e-12), L=max(L, 1e-12), B=max(B, 1e-12),
                        lam=lam, delta=delta, eps=eps, eps1=eps1,
                        gamma=derive_gamma(P.m if P is not None else env.n, T, eps1))


class _ContextDigest:
    """Accumulates a digest of the contexts a run actually observed."""

    def __init__(self):
        self._h = hashlib.blake2b(digest_size=16)

    def __call__(self, t: int, contexts, chosen: int) -> None:
        self._h.update(t.to_bytes(8, "little"))
        for c in contexts:
            if c.indices is not None:
                self._h.update(np.ascontiguousarray(c.indices).tobytes())
            self._h.update(np.ascontiguousarray(c.values).tobytes())

    def hexdigest(self) -> str:
        return self._h.hexdigest()


def _run_one(cfg: ExperimentConfig, algo: str, seed: int
             ) -> tuple[list[RoundRecord], str, TheoryParams | None]:
    env = make_env(replace(cfg.env, seed=seed))
    digest = _ContextDigest()
    params: TheoryParams | None = None
    noise_r = env.noise.sub_gaussian_r
    if algo in _PROJECTION_KINDS:
        kind = _PROJECTION_KINDS[algo]
        P = build_projection(kind, cfg.m, env.n, derive_seed(seed, STREAM_PROJECTION))
        if cfg.adaptive_beta:
            params = oracle_theory_params(env, P, R=noise_r, delta=cfg.delta,
                                          lam=cfg.lam, T=cfg.T)
            beta_mode: BetaMode = AdaptiveBeta(params)
        else:
            beta_mode = FixedBeta(cfg.beta)
        pol = PolicyConfig(m=cfg.m, kind=kind, beta_mode=beta_mode, lam=cfg.lam)
        records = cbrap_run(env, pol, cfg.T, projection=P, observer=digest)
    elif algo == "linucb":
        if cfg.adaptive_beta:
            params = oracle_theory_params(env, None, R=noise_r, delta=cfg.delta,
                                          lam=cfg.lam, T=cfg.T)
            beta_mode = AdaptiveBeta(params)
        else:
            beta_mode = FixedBeta(cfg.beta)
        records = linucb_run(env, cfg.lam, beta_mode, cfg.T, observer=digest)
    else:
        records = uniform_run(env, derive_seed(seed, STREAM_UNIFORM), cfg.T,
                              observer=digest)
    return records, digest.hexdigest(), params


def run_experiment(cfg: ExperimentConfig) -> ExperimentSummary:
    """Run every (algo, seed) pair, write artifacts, and summarize.

    Per-round CSVs are written with ``elapsed_ns`` zeroed unless
    ``timing_in_csv`` is set, so identical configs produce byte-identical
    files; real latencies still feed the summary statistics.
    """
    if cfg.out_dir is not None:
        os.makedirs(cfg.out_dir, exist_ok=True)
    warmup = min(50, cfg.T // 10)
    summaries = []
    digests: dict[int, str] = {}
    bounds: list[float] = []
    succs: list[float] = []
    for algo in cfg.algos:
        curves, finals, latencies = [], [], []
        for seed in cfg.seeds:
            records, digest, params = _run_one(cfg, algo, seed)
            if digests.setdefault(seed, digest) != digest:
                raise RuntimeError(
                    f"unpaired runs: seed {seed} context stream differed across policies"
                )
            cum = np.cumsum([r.instant_regret for r in records])
            curves.append([float(v) for v in cum])
            finals.append(float(cum[-1]))
            latencies.extend(r.elapsed_ns for r in records[warmup:])
            if params is not None:
                bounds.append(regret_bound(params, cfg.m, cfg.T))
                succs.append(success_probability(params, cfg.m, cfg.T))
            if cfg.out_dir is not None:
                out = records if cfg.timing_in_csv \
                    else [dataclasses.replace(r, elapsed_ns=0) for r in records]
                emit_csv(out, os.path.join(cfg.out_dir, f"{algo}_seed{seed}.csv"))
        summaries.append(AlgoSummary(
            algo=algo,
            regret_curves=curves,
            final_regret_mean=float(np.mean(finals)),
            final_regret_std=float(np.std(finals)),
            mean_round_latency_ns=float(np.mean(latencies)),
        ))
    summary = ExperimentSummary(
        config=experiment_config_to_dict(cfg),
        T=cfg.T,
        seeds=list(cfg.seeds),
        algos=summaries,
        theory_bound=float(np.mean(bounds)) if bounds else None,
        success_probability=float(np.mean(succs)) if succs else None,
    )
    if cfg.out_dir is not None:
        emit_summary(summary, os.path.join(cfg.out_dir, "summary.json"))
    return summary


# --- coverage of the confidence ellipsoid ---------------------------------

@dataclass(frozen=True)
class SeedCoverage:
    seed: int
    covered: bool
    first_violation: int | None
    cum_regret: float
    regret_bound: float
    success_probability: float
    params: TheoryParams


@dataclass
class CoverageResult:
    coverage_rate: float
    per_seed: list[SeedCoverage]
    first_violation_hist: dict[int, int]

    @property
    def dominance_fraction(self) -> float:
        """Fraction of seeds whose empirical regret stayed below the bound."""
        ok = sum(1 for s in self.per_seed if s.cum_regret <= s.regret_bound)
        return ok / len(self.per_seed)


def coverage_experiment(cfg: ExperimentConfig, num_seeds: int,
                        beta_scale: float = 1.0) -> CoverageResult:
    """Check that the projected true parameter stays in every ellipsoid.

    For each seed the theory constants (including the distortion) are
    measured from the ground truth, the projected policy runs with the
    adaptive width, and after each round the distance of zeta = M theta*
    from the estimate is compared with the round's width.  The state here
    absorbs each observation at the end of its round, which yields the same
    decision trace as the start-of-next-round placement while exposing the
    post-round state the membership check needs.
    """
    if num_seeds < 1:
        raise ConfigError(f"num_seeds must be >= 1, got {num_seeds}")
    if isinstance(cfg.env.context, Replay):
        raise ConfigError("coverage_experiment needs a synthetic environment "
                          "(replay contexts are unsupported)")
    kind = _PROJECTION_KINDS.get(cfg.algos[0], ProjectionKind.STANDARD_GAUSSIAN)
    per_seed = []
    hist: dict[int, int] = {}
    for seed_index in range(num_seeds):
        seed = cfg.seeds[seed_index] if seed_index < len(cfg.seeds) \
            else derive_seed(cfg.seeds[-1], 99, seed_index)
        env = make_env(replace(cfg.env, seed=seed))
        P = build_projection(kind, cfg.m, env.n, derive_seed(seed, STREAM_PROJECTION))
        rounds = [env.draw_round(t) for t in range(1, cfg.T + 1)]
        params = oracle_theory_params(env, P, R=env.noise.sub_gaussian_r,
                                      delta=cfg.delta, lam=cfg.lam, T=cfg.T,
                                      rounds=rounds)
        zeta = P.entries @ env.theta_star
        state = RidgeState(cfg.m, lam=cfg.lam)
        cum = 0.0
        first_violation: int | None = None
        for t in range(1, cfg.T + 1):
            contexts = rounds[t - 1]
            Z = project_rows(P, contexts)
            chosen, _ = cbrap_select(
                state, Z, beta_scale * beta_schedule(params, cfg.m, t - 1))
            reward = env.realize_reward(contexts[chosen], t)
            cum += env.instant_regret(contexts, chosen)
            state.update(Z[chosen], reward)
            width = beta_scale * beta_schedule(params, cfg.m, t)
            if first_violation is None and confidence_distance(state, zeta) > width:
                first_violation = t
        if first_violation is not None:
            hist[first_violation] = hist.get(first_violation, 0) + 1
        per_seed.append(SeedCoverage(
            seed=seed,
            covered=first_violation is None,
            first_violation=first_violation,
            cum_regret=cum,
            regret_bound=regret_bound(params, cfg.m, cfg.T),
            success_probability=success_probability(params, cfg.m, cfg.T),
            params=params,
        ))
    rate = sum(1 for s in per_seed if s.covered) / len(per_seed)
    return CoverageResult(coverage_rate=rate, per_seed=per_seed,
                          first_violation_hist=dict(sorted(hist.items())))


# --- distortion tail vs closed-form bound ----------------------------------

@dataclass(frozen=True)
class KabanCell:
    m: int
    eps1: float
    trials: int
    empirical_rate: float
    bound: float
    slack: float
    violated: bool


def kaban_experiment(m_list: Sequence[int], eps1_list: Sequence[float],
                     trials: int, seed: int = 0, n: int | None = None
                     ) -> list[KabanCell]:
    """Empirical exceedance rate of the normalized distortion per (m, eps1).

    One distortion sample of ``trials`` fresh Gaussian projections is drawn
    per m and compared against every eps1.  A cell is flagged violated when
    the rate exceeds the bound, allowing three-sigma binomial slack on
    cells whose bound is below 1e-3.
    """
    if trials < 1:
        raise ConfigError(f"trials must be >= 1, got {trials}")
    cells = []
    for i, m in enumerate(m_list):
        errs = sg_distortion_sample(m, n or m, trials, derive_seed(seed, 17, i))
        for eps1 in eps1_list:
            rate = float(np.mean(errs > eps1))
            bound = kaban_failure_bound(m, eps1)
            slack = 3.0 * math.sqrt(bound * (1.0 - bound) / trials) \
                if bound < 1e-3 else 0.0
            cells.append(KabanCell(m=int(m), eps1=float(eps1), trials=trials,
                                   empirical_rate=rate, bound=bound, slack=slack,
                                   violated=rate > bound + slack))
    return cells


# --- artifacts --------------------------------------------------------------

_CSV_HEADER = "t,chosen,reward,instant_regret,cum_regret,elapsed_ns"


def emit_csv(records: Sequence[RoundRecord], path: str) -> None:
    """Write a round log; cum_regret is the running sum of instant_regret."""
    cum = 0.0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(_CSV_HEADER + "\n")
        for r in records:
            cum += r.instant_regret
            fh.write(f"{r.t},{r.chosen},{r.reward!r},{r.instant_regret!r},"
                     f"{cum!r},{r.elapsed_ns}\n")


def load_round_csv(path: str) -> list[RoundRecord]:
    """Parse an emitted round log back into records, checking the cum column."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        lines = fh.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0] != _CSV_HEADER:
        raise DatasetError(f"{path}: line 1: expected header {_CSV_HEADER!r}")
    records = []
    cum = 0.0
    for i, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 6:
            raise DatasetError(f"{path}: line {i}: expected 6 columns, got {len(parts)}")
        try:
            rec = RoundRecord(t=int(parts[0]), chosen=int(parts[1]),
                              reward=float(parts[2]), instant_regret=float(parts[3]),
                              ucb_gap=0.0, elapsed_ns=int(parts[5]))
            cum += rec.instant_regret
            if float(parts[4]) != cum:
                raise DatasetError(
                    f"{path}: line {i}: cum_regret {parts[4]} != running sum {cum!r}")
        except ValueError as exc:
            raise DatasetError(f"{path}: line {i}: {exc}") from exc
        records.append(rec)
    return records


def _jsonable(value):
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, float) and math.isinf(value):
        return "inf" if value > 0 else "-inf"
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {k: _jsonable(v) for k, v in dataclasses.asdict(value).items()}
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def emit_summary(summary: ExperimentSummary | CoverageResult | list, path: str) -> None:
    """Write a summary as pretty-printed JSON with a trailing newline."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_jsonable(summary), fh, indent=2, sort_keys=True)
        fh.write("\n")


# --- config files -----------------------------------------------------------

def experiment_config_to_dict(cfg: ExperimentConfig) -> dict:
    d = dataclasses.asdict(cfg)
    env = d.pop("env")
    ctx = cfg.env.context
    env_d = {"n": cfg.env.n, "k": cfg.env.K, "seed": cfg.env.seed,
             "theta_norm": cfg.env.theta_norm}
    if isinstance(ctx, Replay):
        env_d["context"] = "replay"
    else:
        env_d["context"] = {"GaussianUnit": "gaussian-unit",
                            "SparseUniform": "sparse-uniform",
                            "AlignedSpread": "aligned-spread"}[type(ctx).__name__]
        env_d.update({k: v for k, v in dataclasses.asdict(ctx).items()})
    env_d["noise"] = cfg.env.noise.kind.value
    if cfg.env.noise.scale:
        env_d["noise_r"] = cfg.env.noise.scale
    d["env"] = env_d
    d["algos"] = list(cfg.algos)
    d["seeds"] = list(cfg.seeds)
    return _jsonable(d)


def experiment_config_from_dict(d: dict) -> ExperimentConfig:
    d = dict(d)
    try:
        env = env_config_from_dict(d.pop("env"))
        m = int(d.pop("m"))
        T = int(d.pop("t", d.pop("T", None)))
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"experiment config needs 'env', 'm' and 't': {exc}") from exc
    algos = d.pop("algos", d.pop("algo", "cbrap-sg"))
    if isinstance(algos, str):
        algos = [a for a in algos.split(",") if a]
    seeds = d.pop("seeds", d.pop("seed", 0))
    if isinstance(seeds, str):
        seeds = [int(s) for s in seeds.split(",") if s]
    elif isinstance(seeds, int):
        seeds = [seeds]
    cfg = ExperimentConfig(
        env=env, m=m, T=T, algos=tuple(algos),
        beta=float(d.pop("beta", 1.0)),
        adaptive_beta=bool(d.pop("adaptive_beta", False)),
        lam=float(d.pop("lambda", d.pop("lam", 1.0))),
        delta=float(d.pop("delta", 0.05)),
        seeds=tuple(int(s) for s in seeds),
        out_dir=d.pop("out_dir", None),
        timing_in_csv=bool(d.pop("timing_in_csv", False)),
    )
    if d:
        raise ConfigError(f"unknown experiment config fields: {sorted(d)}")
    return cfg


def load_experiment_config(path: str) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    return experiment_config_from_dict(raw)
