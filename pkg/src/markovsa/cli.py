"""Command-line experiment runner.

Config files are flat ``key = value`` lines with ``#`` comments. Every run
writes ``<experiment>.csv``, ``summary.json`` and ``manifest.json`` into the
output directory (default ``runs/<experiment>-seed<seed>``, placed under
``$MARKOVSA_OUTPUT_ROOT`` when set).
"""
from __future__ import annotations

import csv
import difflib
import hashlib
import io
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from importlib import resources
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

import click
import numpy as np

from .errors import MarkovSAError

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2
OUTPUT_ROOT_ENV = "MARKOVSA_OUTPUT_ROOT"

FIXTURES = {
    "paper-2x3": ("mdp", "2-state, 3-action MDP used for the gradient-estimator comparison"),
    "paper-2x3-theta": ("matrix", "randomized policy at which the gradient is evaluated"),
    "chain-2": ("matrix", "2-state chain [[0.9, 0.1], [0.2, 0.8]]"),
    "cmdp-2x2": ("cmdp", "2-state, 2-action MDP with one action-frequency constraint"),
}


class ConfigError(Exception):
    def __init__(self, problems):
        self.problems = [problems] if isinstance(problems, str) else list(problems)
        super().__init__("; ".join(self.problems))


def fixture_path(name: str) -> Path:
    if name not in FIXTURES:
        near = difflib.get_close_matches(name, FIXTURES, n=1)
        hint = f" (did you mean {near[0]!r}?)" if near else ""
        raise ConfigError(f"unknown fixture {name!r}{hint}")
    return Path(str(resources.files("markovsa") / "fixtures" / f"{name}.txt"))


# schema -------------------------------------------------------------------------

def _floats(text: str) -> list[float]:
    return [float(t) for t in text.replace(",", " ").split()]


def _ints(text: str) -> list[int]:
    return [int(t) for t in text.replace(",", " ").split()]


def _bool(text: str) -> bool:
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _words(text: str) -> list[str]:
    return text.replace(",", " ").split()


COMMON = {"experiment": (str, None), "seed": (int, 0), "output": (str, ""), "fixture": (str, ""),
          "instance": (str, "")}

SCHEMAS = {
    "gradcheck": {"kind": (str, "exponential"), "estimator": (str, "wd"), "N": (int, 1000),
                  "batches": (int, 100), "m": (int, 100), "train_batches": (int, 0),
                  "schedule": (str, "decreasing"), "step": (float, 0.001), "zeta": (float, 1.0),
                  "gamma_exp": (float, 0.0)},
    "compare-estimators": {"kind": (str, "exponential"), "Ns": (_ints, "1000 10000"), "batches": (int, 100),
                           "score_batches": (int, 100), "m": (int, 100)},
    "qlearn": {"rho": (float, 0.8), "interval": (int, 1), "steps": (int, 1_000_000), "explore": (float, 0.1),
               "eps": (float, 1.0), "submodular": (_bool, "false")},
    "cmdp": {"kind": (str, "exponential"), "N": (int, 1000), "batches": (int, 2000), "eps": (float, 0.005),
             "penalty": (float, 100.0), "estimator": (str, "wd"), "grid_points": (int, 41)},
    "discrete-opt": {"lam": (float, 1.0), "S": (int, 10), "steps": (int, 10000), "runs": (int, 100),
                     "algorithms": (_words, "AS RS UCB"), "decreasing": (_bool, "true"), "mu": (float, 0.01),
                     "gamma0": (float, 1.0), "gamma_exp": (float, 0.2), "disc": (float, 1.0), "xi": (float, 2.0),
                     "bound": (float, 1.0)},
    "hmm-rmle": {"sigma": (_floats, "1 1"), "sigma0": (_floats, "1.5 1.5"), "n": (int, 200_000),
                 "eps": (float, 1e-3)},
    "lms-track": {"mus": (_floats, "0.02 0.01"), "kappa": (float, 1.0), "n": (int, 2_000_000),
                  "noise_sd": (float, 1.0), "rate": (float, 1.0)},
    "meanfield": {"a": (float, 0.05), "b": (float, 0.4), "c": (float, 0.1), "theta0": (_floats, "0.8 0.2"),
                  "Ms": (_ints, "100 1000 10000"), "runs": (int, 50)},
    "bounds": {"h": (_floats, "1 0"), "pi0": (_floats, "1 0"), "n": (int, 1000), "paths": (int, 200)},
}

DEFAULT_FIXTURE = {"gradcheck": "paper-2x3", "compare-estimators": "paper-2x3", "qlearn": "paper-2x3",
                   "cmdp": "cmdp-2x2", "hmm-rmle": "chain-2", "bounds": "chain-2"}


@dataclass
class ExperimentConfig:
    experiment: str
    seed: int
    output: str
    source: str  # fixture name or instance path, "" when the experiment needs none
    params: dict
    warnings: list = field(default_factory=list)

    def resolved(self) -> dict:
        out = {"experiment": self.experiment, "seed": self.seed, "source": self.source}
        for k, v in self.params.items():
            out[k] = v
        return out


def parse_config_text(text: str) -> dict:
    raw = {}
    problems = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            problems.append(f"line {lineno}: expected key = value")
            continue
        key, value = (s.strip() for s in line.split("=", 1))
        if key in raw:
            problems.append(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value
    if problems:
        raise ConfigError(problems)
    return raw


def build_config(raw: dict) -> ExperimentConfig:
    problems, warnings = [], []
    exp = raw.get("experiment")
    if exp is None:
        raise ConfigError("missing key 'experiment'")
    if exp not in SCHEMAS:
        near = difflib.get_close_matches(exp, SCHEMAS, n=1)
        raise ConfigError(f"unknown experiment {exp!r}" + (f" (did you mean {near[0]!r}?)" if near else ""))
    schema = SCHEMAS[exp]
    for key in raw:
        if key not in schema and key not in COMMON:
            problems.append(f"unknown key {key!r} for experiment {exp!r}")
    if "seed" not in raw:
        warnings.append("warning: seed not given, using 0")
    params = {}
    for key, (conv, default) in schema.items():
        text = raw.get(key)
        try:
            if text is not None:
                params[key] = conv(text)
            else:
                params[key] = conv(default) if isinstance(default, str) and conv is not str else default
        except ValueError as exc:
            problems.append(f"bad value for {key!r}: {exc}")
    try:
        seed = int(raw.get("seed", 0))
        if seed < 0:
            raise ValueError("seed must be nonnegative")
    except ValueError as exc:
        problems.append(f"bad seed: {exc}")
        seed = 0
    source = ""
    if raw.get("fixture") and raw.get("instance"):
        problems.append("give either 'fixture' or 'instance', not both")
    elif raw.get("instance"):
        source = raw["instance"]
        if not Path(source).is_file():
            problems.append(f"instance file not found: {source}")
    elif exp in DEFAULT_FIXTURE or raw.get("fixture"):
        source = raw.get("fixture") or DEFAULT_FIXTURE[exp]
        try:
            fixture_path(source)
        except ConfigError as exc:
            problems.extend(exc.problems)
    if len(params) == len(schema):
        problems.extend(_constraint_problems(exp, params))
    if problems:
        raise ConfigError(problems)
    return ExperimentConfig(exp, seed, raw.get("output", ""), source, params, warnings)


def _constraint_problems(exp: str, p: dict) -> list[str]:
    out = []
    if exp == "cmdp" and not 0 < p["eps"] < p["penalty"]:
        out.append("cmdp needs 0 < eps < penalty")
    if exp in ("gradcheck", "compare-estimators"):
        if p["kind"] not in ("exponential", "spherical"):
            out.append(f"unknown parametrization {p['kind']!r}")
        if exp == "gradcheck" and p["estimator"] not in ("score", "wd", "wd_parameter_free"):
            out.append(f"unknown estimator {p['estimator']!r}")
    if exp == "gradcheck":
        from .errors import ScheduleError
        from .gradients import StepSchedule
        try:
            StepSchedule(p["schedule"], p["step"], zeta=p["zeta"], gamma_exp=p["gamma_exp"])
        except ScheduleError as exc:
            out.append(f"step schedule: {exc}")
    if exp == "qlearn" and not 0 < p["rho"] < 1:
        out.append("qlearn needs 0 < rho < 1")
    if exp == "discrete-opt":
        bad = [a for a in p["algorithms"] if a not in ("AS", "RS", "UCB")]
        if bad:
            out.append(f"unknown algorithms {bad}")
    if exp == "meanfield" and abs(sum(p["theta0"]) - 1.0) > 1e-12:
        out.append("theta0 must sum to 1")
    return out


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    return build_config(parse_config_text(text))


# instance loading ----------------------------------------------------------------

def _source_path(cfg: ExperimentConfig) -> Path:
    return fixture_path(cfg.source) if cfg.source in FIXTURES else Path(cfg.source)


def _load_mdp(cfg):
    from .mdp import MdpModel
    return MdpModel.from_file(_source_path(cfg))


def _load_matrix(cfg):
    from .textio import read_matrix
    return read_matrix(_source_path(cfg))


# experiments --------------------------------------------------------------------
# each returns (header, rows, summary)

def _policy_param(kind, X, U):
    theta = np.asarray(_load_theta(), dtype=np.float64) if (X, U) == (2, 3) else np.full((X, U), 1.0 / U)
    return param_from_theta(kind, theta)


def _load_theta():
    from .textio import read_matrix
    return read_matrix(fixture_path("paper-2x3-theta"))


def param_from_theta(kind: str, theta):
    """Parameter that reproduces a given randomized policy."""
    from .mdp import PolicyParam
    theta = np.asarray(theta, dtype=np.float64)
    if kind == "exponential":
        return PolicyParam(kind, np.log(theta))
    X, U = theta.shape
    psi = np.empty((X, U - 1))
    run = np.ones(X)
    for a in range(U - 1):
        psi[:, a] = np.arccos(np.sqrt(np.clip(theta[:, a] / run, 0.0, 1.0)))
        run = run - theta[:, a]
    return PolicyParam(kind, psi)


def exp_gradcheck(cfg, rng):
    from .gradients import GradientEstimate
    from .mdp import exact_policy_gradient, theta_from_params
    from .policy_gradient import score_gradient_mdp, simulate_batch, wd_gradient_mdp, wd_gradient_parameter_free
    p = cfg.params
    mdp = _load_mdp(cfg)
    param = _policy_param(p["kind"], mdp.X, mdp.U)
    theta = theta_from_params(param)
    exact = exact_policy_gradient(mdp, param)
    if p["estimator"] == "wd":
        ge = wd_gradient_mdp(mdp, param, p["m"], p["N"], rng.child("wd"), batches=p["batches"])
    else:
        vals = []
        for b in range(p["batches"]):
            batch = simulate_batch(mdp, theta, p["N"] + 1, 0, rng.child("batch", b), b)
            if p["estimator"] == "score":
                vals.append(score_gradient_mdp(batch, theta, param).value)
            else:
                vals.append(wd_gradient_parameter_free(batch, theta, param, rng=rng.child("free", b)).value)
        ge = GradientEstimate.from_samples(vals)
    rows = [[x, a, exact[x, a], ge.value[x, a], ge.variance[x, a], ge.half_width[x, a]]
            for x, a in np.ndindex(exact.shape)]
    err = float(np.abs(ge.value - exact).max())
    summary = {"max_abs_error": err, "exact": exact.tolist(), "estimate": ge.value.tolist()}
    if p["train_batches"] > 0:
        from .gradients import StepSchedule
        from .mdp import average_cost
        from .policy_gradient import policy_gradient_train
        sched = StepSchedule(p["schedule"], p["step"], zeta=p["zeta"], gamma_exp=p["gamma_exp"])
        tr = policy_gradient_train(mdp, param, sched, p["N"], p["train_batches"], p["estimator"], rng.child("train"))
        summary["cost_before"] = average_cost(mdp, theta)
        summary["cost_after"] = average_cost(mdp, theta_from_params(param.replace(tr.psi[-1])))
        summary["estimator_failures"] = tr.failures
    return (["x", "a", "exact", "estimate", "variance", "half_width"], rows, summary)


def exp_compare(cfg, rng):
    from .policy_gradient import variance_comparison_experiment
    p = cfg.params
    mdp = _load_mdp(cfg)
    param = _policy_param(p["kind"], mdp.X, mdp.U)
    res = variance_comparison_experiment(mdp, param, p["Ns"], p["batches"], rng, ("wd", "score"),
                                         p["score_batches"], p["m"])
    rows = []
    cpu = {}
    for r in res["results"]:
        ge = r["estimate"]
        cpu[f"{r['estimator']}-{r['N']}"] = r["cpu"]
        for x, a in np.ndindex(ge.value.shape):
            rows.append([r["estimator"], r["N"], r["batches"], x, a, res["truth"][x, a], ge.value[x, a],
                         ge.variance[x, a], ge.half_width[x, a]])
    return (["estimator", "N", "batches", "x", "a", "truth", "mean", "variance", "half_width"], rows,
            {"truth": res["truth"].tolist(), "timing": {"cpu_seconds": cpu}})


def exp_qlearn(cfg, rng):
    from .mdp import policy_q_values, value_iteration
    from .qlearn import primal_dual_q_learning, q_learning_run, submodular_constraint_matrix
    p = cfg.params
    mdp = _load_mdp(cfg)
    if p["submodular"]:
        M = submodular_constraint_matrix(mdp.X, mdp.U)
        res = primal_dual_q_learning(mdp, p["rho"], M, p["steps"], rng, p["eps"], p["interval"], p["explore"])
    else:
        res = q_learning_run(mdp, p["rho"], p["interval"], p["steps"] // p["interval"], p["explore"], p["eps"], rng)
    vi = value_iteration(mdp, p["rho"], 2000)
    Qg = policy_q_values(mdp, res.policy, p["rho"])
    rows = [[x, u, res.Q[x, u], Qg[x, u], vi.Q[x, u], int(res.counts[x, u])] for x, u in np.ndindex(res.Q.shape)]
    scale = float(np.abs(vi.Q).max())
    return (["x", "u", "Q_learned", "Q_greedy_policy", "Q_star", "visits"], rows,
            {"greedy_policy_error": float(np.abs(Qg - vi.Q).max() / scale),
             "table_error": float(np.abs(res.Q - vi.Q).max() / scale),
             "policy": res.policy.tolist(), "optimal_policy": vi.policy.tolist(),
             "unvisited": [list(u) for u in res.unvisited]})


def exp_cmdp(cfg, rng):
    from .cmdp import CmdpModel, cmdp_grid_oracle, cmdp_train
    p = cfg.params
    cm = CmdpModel.from_file(_source_path(cfg))
    tr = cmdp_train(cm, p["kind"], p["N"], p["batches"], p["eps"], p["penalty"], p["estimator"], rng)
    oracle = cmdp_grid_oracle(cm, p["grid_points"])
    header = ["batch", "cost"] + [f"constraint_{l}" for l in range(cm.L)] + \
             [f"lambda_{l}" for l in range(cm.L)] + [f"B_hat_{l}" for l in range(cm.L)]
    rows = [[n, tr.cost[n], *tr.constraints[n], *tr.lam[n], *tr.B_hat[n]] for n in range(len(tr.cost))]
    return (header, rows,
            {"final_cost": float(tr.cost[-1]), "final_violation": (tr.constraints[-1] - cm.levels).tolist(),
             "oracle_cost": oracle["cost"], "oracle_theta": oracle["theta"].tolist(),
             "relative_cost_gap": float(abs(tr.cost[-1] - oracle["cost"]) / abs(oracle["cost"])),
             "estimator_failures": tr.failures})


def exp_discrete(cfg, rng):
    from .discrete_opt import CHECKPOINTS, poisson_mode_benchmark
    p = cfg.params
    cps = tuple(c for c in CHECKPOINTS + (20000, 50000) if c <= p["steps"])
    table = {}
    for algo in p["algorithms"]:
        table[algo] = poisson_mode_benchmark(p["lam"], p["S"], algo, p["steps"], p["runs"], rng.child(algo), cps,
                                             p["decreasing"], p["mu"], p["gamma0"], p["gamma_exp"], p["disc"],
                                             p["xi"], p["bound"])
    rows = [[c] + [table[a]["percent"][i] for a in p["algorithms"]] for i, c in enumerate(cps)]
    return (["n"] + list(p["algorithms"]), rows,
            {"optimum_set": next(iter(table.values()))["optimum_set"] if table else [],
             "final_percent": {a: table[a]["percent"][-1] for a in table}})


def exp_hmm(cfg, rng):
    from .hmm import HmmModel, rmle_run, simulate_hmm
    p = cfg.params
    P = _load_matrix(cfg)
    true = HmmModel.from_transition(P, p["sigma"])
    _, y = simulate_hmm(true, p["n"], rng.child("data"))
    X = true.X
    est, ll = rmle_run(y, HmmModel(np.zeros((X, X)), p["sigma0"]), p["eps"])
    rows = [["P", i, j, true.P[i, j], est.P[i, j]] for i, j in np.ndindex(X, X)]
    rows += [["sigma", i, "", true.sigma[i], est.sigma[i]] for i in range(X)]
    return (["parameter", "i", "j", "true", "estimate"], rows,
            {"transition_sup_error": float(np.abs(est.P - true.P).max()), "log_likelihood": ll})


def exp_lms(cfg, rng):
    from .hmm import slow_chain_for_step, slow_chain_track
    p = cfg.params
    q = p["rate"]
    Q = np.array([[-q, q], [q, -q]])
    values = np.array([[1.0, 0.0], [-1.0, 0.5]])
    rows = []
    for i, mu in enumerate(p["mus"]):
        model = slow_chain_for_step(Q, values, mu, p["kappa"])
        out = slow_chain_track(model, mu, p["n"], rng.child("mu", i), p["noise_sd"])
        rows.append([mu, model.eps, out["mse"]])
    ratios = [rows[i + 1][2] / rows[i][2] for i in range(len(rows) - 1)]
    return (["mu", "eps_slow", "mse"], rows, {"mse": [r[2] for r in rows], "successive_ratios": ratios})


def exp_meanfield(cfg, rng):
    from .meanfield import adoption_kernel, deviation_experiment
    p = cfg.params
    k = adoption_kernel(p["a"], p["b"], p["c"])
    res = deviation_experiment(k, p["theta0"], p["Ms"], p["runs"], rng)
    rows = [[M, r, d] for M, devs in zip(res["M"], res["max_deviation"]) for r, d in enumerate(devs)]
    return (["M", "run", "max_deviation"], rows,
            {"median": dict(zip(map(str, res["M"]), res["median"])),
             "tail": {str(M): {str(e): v for e, v in t.items()} for M, t in res["tail"].items()}})


def exp_bounds(cfg, rng):
    from .markov import bounds_experiment
    p = cfg.params
    r = bounds_experiment(_load_matrix(cfg), p["h"], p["pi0"], p["n"], p["paths"], rng)
    rows = [["bias", r["bias_bound"], r["empirical_bias"], int(r["empirical_bias"] <= r["bias_bound"])],
            ["msd", r["msd_bound"], r["empirical_msd"], int(r["empirical_msd"] <= r["msd_bound"])]]
    return (["quantity", "bound", "empirical", "within_bound"], rows, {k: float(v) for k, v in r.items()})


EXPERIMENTS = {
    "gradcheck": exp_gradcheck, "compare-estimators": exp_compare, "qlearn": exp_qlearn, "cmdp": exp_cmdp,
    "discrete-opt": exp_discrete, "hmm-rmle": exp_hmm, "lms-track": exp_lms, "meanfield": exp_meanfield,
    "bounds": exp_bounds,
}


# output ---------------------------------------------------------------------------

def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        if not math.isfinite(v):
            raise FloatingPointError("non-finite value in output table")
        return f"{float(v):.12g}"
    return str(v)


def format_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def package_version() -> str:
    try:
        return version("artifact")
    except PackageNotFoundError:
        return "unknown"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        if not math.isfinite(obj):
            raise FloatingPointError("non-finite value in summary")
        return float(obj)
    return obj


def output_dir(cfg: ExperimentConfig) -> Path:
    base = Path(cfg.output) if cfg.output else Path("runs") / f"{cfg.experiment}-seed{cfg.seed}"
    root = os.environ.get(OUTPUT_ROOT_ENV)
    return Path(root) / base if root and not base.is_absolute() else base


def run_experiment(cfg: ExperimentConfig) -> dict:
    """Run one experiment and write its CSV, JSON summary and manifest; return the manifest."""
    from .rng import RngStream
    start = time.time()
    header, rows, summary = EXPERIMENTS[cfg.experiment](cfg, RngStream(cfg.seed).child(cfg.experiment))
    # timings vary between runs, so they go to the manifest and the outputs stay byte-stable
    timing = summary.pop("timing", {})
    body = format_csv(header, rows)
    summary_text = json.dumps(_jsonable(summary), indent=2, sort_keys=True) + "\n"
    out = output_dir(cfg)
    out.mkdir(parents=True, exist_ok=True)
    files = {f"{cfg.experiment}.csv": body, "summary.json": summary_text}
    for name, text in files.items():
        (out / name).write_text(text)
    manifest = {
        "config": _jsonable(cfg.resolved()),
        "started": start,
        "finished": time.time(),
        "version": package_version(),
        "backend": __import__("markovsa._backend", fromlist=["BACKEND"]).BACKEND,
        "timing": timing,
        "checksums": {name: hashlib.sha256(text.encode()).hexdigest() for name, text in files.items()},
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest


# commands ---------------------------------------------------------------------------

def _fail(code: int, reason: str):
    click.echo(f"error: {reason}", err=True)
    sys.exit(code)


@click.group()
def main():
    """Simulation-based stochastic approximation experiments."""


@main.command()
@click.argument("config_file", type=click.Path(dir_okay=False))
def run(config_file):
    """Run the experiment described by CONFIG_FILE."""
    try:
        cfg = load_config(config_file)
    except ConfigError as exc:
        _fail(EXIT_CONFIG, "; ".join(exc.problems))
    for w in cfg.warnings:
        click.echo(w, err=True)
    try:
        manifest = run_experiment(cfg)
    except (MarkovSAError, FloatingPointError, ValueError, OSError) as exc:
        _fail(EXIT_RUNTIME, f"{type(exc).__name__}: {exc}")
    click.echo(str(output_dir(cfg)))
    for name, digest in manifest["checksums"].items():
        click.echo(f"{digest}  {name}")


@main.command()
@click.argument("config_file", type=click.Path(dir_okay=False))
def validate(config_file):
    """Check CONFIG_FILE without running it."""
    try:
        cfg = load_config(config_file)
    except ConfigError as exc:
        for p in exc.problems:
            click.echo(f"error: {p}", err=True)
        sys.exit(EXIT_CONFIG)
    for w in cfg.warnings:
        click.echo(w, err=True)
    if cfg.source:
        try:
            if cfg.experiment == "cmdp":
                from .cmdp import CmdpModel
                CmdpModel.from_file(_source_path(cfg))
            elif cfg.experiment in ("hmm-rmle", "bounds"):
                _load_matrix(cfg)
            else:
                _load_mdp(cfg)
        except (MarkovSAError, ValueError, OSError) as exc:
            _fail(EXIT_CONFIG, f"instance load failed: {exc}")
    click.echo("ok")


@main.command("list-fixtures")
def list_fixtures():
    """List the bundled instances."""
    for name, (kind, desc) in FIXTURES.items():
        click.echo(f"{name}\t{kind}\t{desc}")


if __name__ == "__main__":
    main()
