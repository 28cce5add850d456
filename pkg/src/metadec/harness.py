"""Train/test orchestration, model persistence, and statistical reporting.

Components are registered under the METAOPT_BASEOPT_LEARNEDOBJ naming
convention (DQN_DE_MS, DDPG_DE_F, DE_DE_FCR); the fixed-control comparison
optimizer is plain "DE".  Everything downstream of a master seed is
deterministic: replication r on problem (f, d) always draws from the seed
stream derived from (master_seed, f, d, r), and parallel execution merges
results in the same order as a serial run.
"""

from __future__ import annotations

import hashlib
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .baseopt import BaseControl, DEFAULT_CR, DEFAULT_F, DEFAULT_POP_SIZE, Strategy
from .environment import EnvConfig, MetaEnv
from .errors import (
    ConfigurationError,
    IncompatibleModelError,
    ModelFormatError,
    RegistryError,
)
from .metaopt import agent_from_payload, build_agent, decode_action
from .metrics import (
    ComparisonMark,
    aggregate_meta,
    generalization_index,
    transferability_index,
    wilcoxon_ranksum,
    PerformanceTable,
    PerfRow,
)
from .problems import ProblemSplit, make_bbob

MODEL_FORMAT_VERSION = 1

COMPONENTS = {
    "DQN_DE_MS": "dqn_de_ms",
    "DDPG_DE_F": "ddpg_de_f",
    "DE_DE_FCR": "de_de_fcr",
}

BASELINE_NAME = "DE"
BASELINE_CONTROL = BaseControl(F=DEFAULT_F, CR=DEFAULT_CR, strategy=Strategy.RAND_1)

_RATIO_EPS = 1e-12


# -- options and records -----------------------------------------------------


@dataclass
class TrainOptions:
    max_episodes: int = 1000
    max_steps_per_episode: int = 500
    stop_window: int = 10
    stop_threshold: float = 100.0
    master_seed: int = 0
    pop_size: int = DEFAULT_POP_SIZE
    dims: tuple[int, ...] = (10,)
    instance_seed: int = 0

    def __post_init__(self):
        self.dims = tuple(int(d) for d in self.dims)
        if self.stop_window < 1:
            raise ConfigurationError("stop_window must be >= 1")
        if not np.isfinite(self.stop_threshold):
            raise ConfigurationError("stop_threshold must be finite")


@dataclass
class TestOptions:
    __test__ = False  # not a pytest class

    dims: tuple[int, ...] = (10,)
    replications: int = 31
    max_steps: int = 500
    pop_size: int = DEFAULT_POP_SIZE
    master_seed: int = 0
    instance_seed: int = 0
    alpha: float = 0.05
    workers: int = 1

    def __post_init__(self):
        self.dims = tuple(int(d) for d in self.dims)
        if self.replications < 2:
            raise ConfigurationError("replications must be >= 2")


@dataclass
class TrainingLog:
    episode_rewards: list[float] = field(default_factory=list)
    episode_problems: list[int] = field(default_factory=list)
    episode_perfs: list[float] = field(default_factory=list)
    epoch_metrics: list[tuple[float, float, float]] = field(default_factory=list)
    eval_counts: dict[int, int] = field(default_factory=dict)
    episodes_run: int = 0
    stopped_early: bool = False
    wall_clock: float = 0.0


@dataclass
class AgentModel:
    format_version: int
    components: str
    agent_payload: dict
    config_hash: str
    episodes_trained: int
    train_dims: tuple[int, ...]
    instance_seed: int


@dataclass
class RunRecord:
    components: str
    function_id: int
    dim: int
    instance_seed: int
    replication: int
    f_opt: float
    final_best_f: float
    final_error: float
    evals_used: int
    trace: list[float]  # best_f per generation
    wall_clock: float


@dataclass
class ReportRow:
    function_id: int
    dim: int
    membership: str
    values: tuple[float, ...]
    base_values: tuple[float, ...]
    mark: ComparisonMark

    @property
    def v_avg(self) -> float:
        return float(np.mean(self.values))

    @property
    def v_std(self) -> float:
        return float(np.std(self.values, ddof=1)) if len(self.values) > 1 else 0.0

    @property
    def base_avg(self) -> float:
        return float(np.mean(self.base_values))

    @property
    def base_std(self) -> float:
        return float(np.std(self.base_values, ddof=1)) if len(self.base_values) > 1 else 0.0


@dataclass
class TestReport:
    __test__ = False  # not a pytest class

    components: str
    baseline: str
    dims: tuple[int, ...]
    replications: int
    rows: list[ReportRow]
    ti: dict[int, float | None]
    gi: float | None
    records: list[RunRecord]
    master_seed: int
    instance_seed: int
    pop_size: int
    max_steps: int

    def footer_counts(self, dim: int | None = None) -> tuple[int, int, int]:
        rows = [r for r in self.rows if dim is None or r.dim == dim]
        syms = [r.mark.symbol for r in rows]
        return syms.count("+"), syms.count("-"), syms.count("=")


# -- seeding -------------------------------------------------------------------


def replication_seed(
    master_seed: int, function_id: int, dim: int, replication: int
) -> np.random.SeedSequence:
    """Independent stream per (problem, replication); shared by both sides."""
    return np.random.SeedSequence(
        [int(master_seed), int(function_id), int(dim), int(replication)]
    )


def _config_hash(opts: TrainOptions) -> str:
    blob = json.dumps(asdict(opts), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _kind_for(components: str) -> str:
    if components not in COMPONENTS:
        raise RegistryError(
            f"unknown components {components!r}; registered: {sorted(COMPONENTS)}"
        )
    return COMPONENTS[components]


# -- training -----------------------------------------------------------------


def train(
    components: str, split: ProblemSplit, opts: TrainOptions
) -> tuple[AgentModel, TrainingLog]:
    """Episode loop over the seen problems with sliding-window stopping."""
    kind = _kind_for(components)
    if not split.seen:
        raise ConfigurationError("training requires a non-empty seen set")
    t0 = time.perf_counter()
    root = np.random.SeedSequence([int(opts.master_seed), int(opts.instance_seed)])
    env_ss, agent_ss, explore_ss = root.spawn(3)
    problems = [
        make_bbob(fid, dim, opts.instance_seed)
        for dim in opts.dims
        for fid in split.seen
    ]
    env = MetaEnv(
        problems,
        EnvConfig(
            pop_size=opts.pop_size,
            max_steps=opts.max_steps_per_episode,
            mode="train",
        ),
        seed=env_ss,
    )
    horizon = max(1, opts.max_episodes * opts.max_steps_per_episode)
    agent = build_agent(kind, np.random.default_rng(agent_ss), exploration_horizon=horizon)
    explore_rng = np.random.default_rng(explore_ss)

    log = TrainingLog()
    for _ in range(opts.max_episodes):
        obs = env.reset()
        total = 0.0
        while True:
            raw = agent.get_action_with_exploration(obs, explore_rng)
            control = decode_action(kind, raw)
            tr = env.step(control)
            if agent.learns_per_step:
                agent.record(obs, raw, tr.reward, tr.next_observation, tr.done)
                agent.learn()
            total += tr.reward
            obs = tr.next_observation
            if tr.done:
                break
        if not agent.learns_per_step:
            ratio = env.best_error / (env.initial_error + _RATIO_EPS)
            agent.learn(ratio)
        log.episode_rewards.append(total)
        log.episode_problems.append(env.problem.function_id)
        log.episode_perfs.append(-env.best_error)
        if (
            len(log.episode_rewards) >= opts.stop_window
            and float(np.mean(log.episode_rewards[-opts.stop_window :]))
            >= opts.stop_threshold
        ):
            log.stopped_early = True
            break

    log.episodes_run = len(log.episode_rewards)
    epoch = max(1, len(problems))
    for start in range(0, log.episodes_run, epoch):
        block = log.episode_perfs[start : start + epoch]
        log.epoch_metrics.append(aggregate_meta(block))
    log.eval_counts = dict(env.eval_counts)
    log.wall_clock = time.perf_counter() - t0

    model = AgentModel(
        format_version=MODEL_FORMAT_VERSION,
        components=components,
        agent_payload=agent.to_payload(),
        config_hash=_config_hash(opts),
        episodes_trained=log.episodes_run,
        train_dims=opts.dims,
        instance_seed=opts.instance_seed,
    )
    return model, log


# -- model persistence -----------------------------------------------------


def save_model(model: AgentModel, path) -> None:
    doc = {
        "format_version": model.format_version,
        "components": model.components,
        "agent": model.agent_payload,
        "config_hash": model.config_hash,
        "episodes_trained": model.episodes_trained,
        "train_dims": list(model.train_dims),
        "instance_seed": model.instance_seed,
    }
    Path(path).write_text(json.dumps(doc, sort_keys=True, indent=1))


def load_model(path) -> AgentModel:
    try:
        doc = json.loads(Path(path).read_text())
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ModelFormatError(f"cannot parse model file {path}: {exc}") from exc
    if not isinstance(doc, dict) or "format_version" not in doc:
        raise ModelFormatError(f"model file {path} is missing its format header")
    if doc["format_version"] != MODEL_FORMAT_VERSION:
        raise IncompatibleModelError(
            f"model format {doc['format_version']} unsupported "
            f"(expected {MODEL_FORMAT_VERSION})"
        )
    try:
        components = doc["components"]
        if components not in COMPONENTS:
            raise IncompatibleModelError(f"unknown components {components!r}")
        return AgentModel(
            format_version=doc["format_version"],
            components=components,
            agent_payload=doc["agent"],
            config_hash=doc["config_hash"],
            episodes_trained=doc["episodes_trained"],
            train_dims=tuple(doc["train_dims"]),
            instance_seed=doc["instance_seed"],
        )
    except KeyError as exc:
        raise ModelFormatError(f"model file {path} is missing field {exc}") from exc


# -- replication running -------------------------------------------------------


def run_replication(
    problem,
    control_fn,
    pop_size: int,
    max_steps: int,
    seed_seq: np.random.SeedSequence,
) -> tuple[float, list[float], int]:
    """One fixed-budget inner run; returns (final_best_f, best_f trace, evals)."""
    env = MetaEnv(
        [problem],
        EnvConfig(pop_size=pop_size, max_steps=max_steps, mode="test", solved_tol=None),
        seed=seed_seq,
    )
    obs = env.reset()
    trace = []
    while True:
        tr = env.step(control_fn(obs))
        trace.append(env.state.best_f)
        obs = tr.next_observation
        if tr.done:
            break
    return env.state.best_f, trace, env.state.evals_used


def _model_controller(model: AgentModel):
    kind = _kind_for(model.components)
    agent = agent_from_payload(model.agent_payload)
    return lambda obs: decode_action(kind, agent.get_action(obs))


def _baseline_controller():
    return lambda obs: BASELINE_CONTROL


def _run_one(model_payload, components, fid, dim, rep, opts_dict) -> dict:
    """One (problem, replication) job: model-driven run plus baseline run."""
    problem = make_bbob(fid, dim, opts_dict["instance_seed"])
    out = {"function_id": fid, "dim": dim, "replication": rep}
    results = {}
    for label in ("alg", "base"):
        if label == "alg":
            model = AgentModel(
                format_version=MODEL_FORMAT_VERSION,
                components=components,
                agent_payload=model_payload,
                config_hash="",
                episodes_trained=0,
                train_dims=(),
                instance_seed=opts_dict["instance_seed"],
            )
            control_fn = _model_controller(model)
        else:
            control_fn = _baseline_controller()
        t0 = time.perf_counter()
        seed_seq = replication_seed(opts_dict["master_seed"], fid, dim, rep)
        final_f, trace, evals = run_replication(
            problem, control_fn, opts_dict["pop_size"], opts_dict["max_steps"], seed_seq
        )
        results[label] = {
            "final_best_f": final_f,
            "final_error": max(final_f - problem.f_opt, 0.0),
            "trace": trace,
            "evals": evals,
            "wall": time.perf_counter() - t0,
            "f_opt": problem.f_opt,
        }
    out["results"] = results
    return out


def _worker(job):
    return _run_one(*job)


def test(
    components: str,
    model: AgentModel,
    split: ProblemSplit,
    opts: TestOptions,
    baseline: str = BASELINE_NAME,
) -> TestReport:
    """Replicated comparison of a trained model against fixed-control DE.

    Runs every function in the split (seen and unseen) at every requested
    dimension; alg and baseline share per-replication seed streams.
    """
    _kind_for(components)
    if model.components != components:
        raise IncompatibleModelError(
            f"model was trained for {model.components!r}, not {components!r}"
        )
    if baseline != BASELINE_NAME:
        raise ConfigurationError(f"unknown baseline {baseline!r}; only 'DE' is registered")

    fids = sorted((*split.seen, *split.unseen))
    membership = {fid: ("seen" if fid in split.seen else "unseen") for fid in fids}
    opts_dict = {
        "instance_seed": opts.instance_seed,
        "master_seed": opts.master_seed,
        "pop_size": opts.pop_size,
        "max_steps": opts.max_steps,
    }
    jobs = [
        (model.agent_payload, components, fid, dim, rep, opts_dict)
        for dim in opts.dims
        for fid in fids
        for rep in range(opts.replications)
    ]
    if opts.workers > 1:
        with ProcessPoolExecutor(max_workers=opts.workers) as pool:
            raw_results = list(pool.map(_worker, jobs, chunksize=4))
    else:
        raw_results = [_worker(job) for job in jobs]
    # deterministic merge regardless of execution order
    raw_results.sort(key=lambda r: (r["dim"], r["function_id"], r["replication"]))

    records: list[RunRecord] = []
    by_problem: dict[tuple[int, int], dict[str, list[float]]] = {}
    for res in raw_results:
        fid, dim, rep = res["function_id"], res["dim"], res["replication"]
        key = (fid, dim)
        by_problem.setdefault(key, {"alg": [], "base": []})
        for label, comp_name in (("alg", components), ("base", baseline)):
            r = res["results"][label]
            records.append(
                RunRecord(
                    components=comp_name,
                    function_id=fid,
                    dim=dim,
                    instance_seed=opts.instance_seed,
                    replication=rep,
                    f_opt=r["f_opt"],
                    final_best_f=r["final_best_f"],
                    final_error=r["final_error"],
                    evals_used=r["evals"],
                    trace=r["trace"],
                    wall_clock=r["wall"],
                )
            )
            by_problem[key][label].append(r["final_error"])

    rows: list[ReportRow] = []
    for dim in opts.dims:
        for fid in fids:
            samples = by_problem[(fid, dim)]
            mark = wilcoxon_ranksum(samples["alg"], samples["base"], opts.alpha)
            rows.append(
                ReportRow(
                    function_id=fid,
                    dim=dim,
                    membership=membership[fid],
                    values=tuple(samples["alg"]),
                    base_values=tuple(samples["base"]),
                    mark=mark,
                )
            )

    ti: dict[int, float | None] = {}
    for dim in opts.dims:
        table = PerformanceTable(
            rows=tuple(
                PerfRow(r.function_id, r.dim, r.values, r.membership)
                for r in rows
                if r.dim == dim
            )
        )
        try:
            ti[dim] = transferability_index(table)
        except Exception:
            ti[dim] = None

    gi = None
    train_dim = model.train_dims[0] if model.train_dims else None
    diff_dims = [d for d in opts.dims if d != train_dim]
    if train_dim in opts.dims and diff_dims and split.seen:
        delta = {}
        for r in rows:
            if r.membership == "seen":
                delta[(r.function_id, r.dim)] = (-r.v_avg) - (-r.base_avg)
        gi = generalization_index(delta, train_dim, diff_dims, split.seen)

    return TestReport(
        components=components,
        baseline=baseline,
        dims=opts.dims,
        replications=opts.replications,
        rows=rows,
        ti=ti,
        gi=gi,
        records=records,
        master_seed=opts.master_seed,
        instance_seed=opts.instance_seed,
        pop_size=opts.pop_size,
        max_steps=opts.max_steps,
    )


# -- report emission -----------------------------------------------------------


def sci(v: float, decimals: int) -> str:
    """Scientific notation with a bare exponent: 1.6059e-1, 0.0000e+0."""
    if not np.isfinite(v):
        return str(v)
    mant, exp = f"{v:.{decimals}e}".split("e")
    e = int(exp)
    return f"{mant}e{'+' if e >= 0 else '-'}{abs(e)}"


def emit_report(report: TestReport, fmt: str, out_dir) -> list[Path]:
    """Write csv, latex or traces artifacts; returns the written paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        return _emit_csv(report, out_dir)
    if fmt == "latex":
        return [_emit_latex(report, out_dir)]
    if fmt == "traces":
        return _emit_traces(report, out_dir)
    raise ConfigurationError(f"unknown report format {fmt!r}")


def _emit_csv(report: TestReport, out_dir: Path) -> list[Path]:
    lines = [
        "function_id,dim,membership,v_avg,v_std,baseline_avg,baseline_std,mark,p_value"
    ]
    for r in report.rows:
        lines.append(
            f"{r.function_id},{r.dim},{r.membership},{sci(r.v_avg, 4)},"
            f"{sci(r.v_std, 2)},{sci(r.base_avg, 4)},{sci(r.base_std, 2)},"
            f"{r.mark.symbol},{r.mark.p_value:.6e}"
        )
    path = out_dir / "results.csv"
    path.write_text("\n".join(lines) + "\n")

    idx_lines = ["metric,dim,value"]
    for dim in report.dims:
        value = report.ti.get(dim)
        idx_lines.append(f"TI,{dim},{'' if value is None else sci(value, 4)}")
        plus, minus, eq = report.footer_counts(dim)
        idx_lines.append(f"marks,{dim},{plus}/{minus}/{eq}")
    idx_lines.append(f"GI,,{'' if report.gi is None else sci(report.gi, 4)}")
    idx_path = out_dir / "indices.csv"
    idx_path.write_text("\n".join(idx_lines) + "\n")
    return [path, idx_path]


def _emit_latex(report: TestReport, out_dir: Path) -> Path:
    comp = report.components.replace("_", r"\_")
    base = report.baseline.replace("_", r"\_")
    lines = []
    for dim in report.dims:
        lines.append(r"\begin{tabular}{ccc}")
        lines.append(r"\toprule")
        lines.append(
            rf"\textbf{{Problem}} & \textbf{{{comp}}} & \textbf{{{base}}} \\"
        )
        lines.append(r"\midrule")
        for r in report.rows:
            if r.dim != dim:
                continue
            cell = f"{sci(r.v_avg, 4)} ({sci(r.v_std, 2)}) {r.mark.symbol}"
            base_cell = f"{sci(r.base_avg, 4)} ({sci(r.base_std, 2)})"
            lines.append(rf"BBOB\_F{r.function_id} & {cell} & {base_cell} \\")
        plus, minus, eq = report.footer_counts(dim)
        lines.append(r"\midrule")
        lines.append(rf"+/-/= & {plus}/{minus}/{eq} & \\")
        lines.append(r"\bottomrule")
        lines.append(r"\end{tabular}")
        lines.append("")
    path = out_dir / "results.tex"
    path.write_text("\n".join(lines))
    return path


def _emit_traces(report: TestReport, out_dir: Path) -> list[Path]:
    groups: dict[tuple[int, int, str], list[RunRecord]] = {}
    for rec in report.records:
        groups.setdefault((rec.function_id, rec.dim, rec.components), []).append(rec)
    paths = []
    for (fid, dim, comp), recs in sorted(groups.items()):
        lines = ["replication,generation,best_f,best_error"]
        for rec in sorted(recs, key=lambda r: r.replication):
            for gen, best_f in enumerate(rec.trace):
                err = max(best_f - rec.f_opt, 0.0)
                lines.append(f"{rec.replication},{gen + 1},{best_f!r},{err!r}")
        path = out_dir / f"traces_F{fid}_D{dim}_{comp}.csv"
        path.write_text("\n".join(lines) + "\n")
        paths.append(path)
    return paths
