"""Command-line experiment runner.

A run is described by an INI file::

    [run]
    experiment = distill-damping
    output = damping.csv
    seed = 0

    [distill-damping]
    p_min = 0
    p_max = 0.95
    p_step = 0.01

Subcommands: ``run``, ``validate`` and ``list-experiments``. Exit codes are
0 on success, 1 for configuration errors and 2 for numerical failures.
"""

from __future__ import annotations

import argparse
import configparser
import io
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import cavity, filtering, polarizer, recurrence
from .errors import PurificationError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2
REQUIRED = object()


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class Param:
    kind: type
    default: object = REQUIRED
    lo: float | None = None
    hi: float | None = None
    lo_open: bool = False


@dataclass(frozen=True)
class Diagnostic:
    key: str
    message: str

    def __str__(self) -> str:
        return f"{self.key}: {self.message}"


@dataclass
class ExperimentConfig:
    experiment: str
    parameters: dict
    output_path: str | None
    seed: int


@dataclass(frozen=True)
class Experiment:
    name: str
    description: str
    params: dict
    run: Callable


def _grid(lo: float, hi: float, step: float) -> list[float]:
    n = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return [float(round(lo + i * step, 12)) for i in range(n)]


def _map(fn, items, threads: int) -> list:
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(fn, items))
    return [fn(x) for x in items]


# Experiments ---------------------------------------------------------------
# Each returns (columns, rows, metadata lines).

def _p_grid(p):
    if p["p_max"] < p["p_min"]:
        raise ConfigError("p_max must not be smaller than p_min")
    return _grid(p["p_min"], p["p_max"], p["p_step"])


def _distill_rows(family: str, p: dict, threads: int, a=None, b=None, closed_filter=False):
    ps = _p_grid(p)
    reps = _map(lambda x: filtering.distill_family(family, x, a, b, use_closed_form_filter=closed_filter), ps, threads)
    cols = ["p", "C_before", "C_after", "beta_before", "beta_after", "success_prob", "epsilon_a", "epsilon_b",
            "C_before_closed", "C_after_closed", "beta_before_closed", "beta_after_closed", "discrepancies"]
    rows, notes = [], []
    for x, r in zip(ps, reps):
        cf = r.closed_form
        rows.append([x, r.C_before, r.C_after, r.beta_before, r.beta_after, r.success_prob,
                     r.filter.epsilon_a, r.filter.epsilon_b,
                     cf.get("C_before"), cf.get("C_after"), cf.get("beta_before"), cf.get("beta_after"),
                     ";".join(r.discrepancies)])
        for n in r.notes:
            if n not in notes:
                notes.append(n)
    interval = filtering.hidden_nonlocality_interval(ps, reps)
    meta = [f"note: {n}" for n in notes]
    meta.append("hidden nonlocality grid interval: " + ("none" if interval is None else f"[{interval[0]:.12g}, {interval[1]:.12g}]"))
    crosses = filtering.crossings(ps, [r.beta_after for r in reps], [1.0] * len(ps))
    meta.append("beta_after = 1 crossings: " + (", ".join(f"{c:.12g}" for c in crosses) or "none"))
    return cols, rows, meta


def _exp_depolarizing(p, threads):
    return _distill_rows("depolarizing", p, threads, p["a"], p["b"], p["closed_form_filter"])


def _exp_damping(p, threads):
    return _distill_rows("amplitude_damping", p, threads, closed_filter=p["closed_form_filter"])


def _exp_phase(p, threads):
    return _distill_rows("phase_damping", p, threads, p["a"], p["b"], p["closed_form_filter"])


def _exp_rank_two(p, threads):
    Fs = _grid(p["F_min"], p["F_max"], p["F_step"])
    es = _grid(p["eps_min"], p["eps_max"], p["eps_step"])
    pts = [(F, e) for F in Fs for e in es]

    def row(pt):
        F, e = pt
        Fo, pr = filtering.rank_two_distill(F, e)
        Fm, pm = filtering.rank_two_distill_matrix(F, e)
        return [F, e, Fo, pr, Fm, pm]

    return ["F", "epsilon", "F_out", "success_prob", "F_out_matrix", "success_prob_matrix"], _map(row, pts, threads), []


def _exp_recurrence(p, threads):
    tr = recurrence.iterate(recurrence.BellDiagonal.werner(p["F"]), int(p["max_rounds"]), p["target"])
    rows = []
    for k, r in enumerate(tr.rounds):
        rows.append([k, r.state.fidelity, r.success_prob, r.cumulative_yield, *r.state.weights, int(r.in_basin)])
    meta = ["yield after r rounds = prod(N_k) / 2^r", f"converged: {int(tr.converged)}"]
    return ["round", "fidelity", "N", "yield", "A", "B", "C", "D", "in_basin"], rows, meta


def _exp_cavity(p, threads):
    if p["g_max"] < p["g_min"]:
        raise ConfigError("g_max must not be smaller than g_min")
    base = cavity.CavityParams.from_mhz(p["g_min"], p["kappa"], p["gamma"])
    gs = _grid(p["g_min"], p["g_max"], p["g_step"])
    rf = p["recurrence_fidelity"]
    rows = cavity.sweep(gs, base, p["eps"], p["T"], int(p["n_samples"]), strict=p["strict"],
                        recurrence_fidelity=rf if rf > 0 else None, threads=threads)
    cols = ["g_over_2pi_MHz", "F_POVM", "F_BSM", "F_worst"] + (["final_fidelity"] if rf > 0 else [])
    out = [[r.g_over_2pi_MHz, r.F_POVM, r.F_BSM, r.F_worst] + ([r.final_fidelity] if rf > 0 else []) for r in rows]
    ref = max(r.F_POVM for r in rows)
    meta = ["F_BSM = F_POVM^2", "F_POVM: uniform Bloch-sphere average; F_worst: minimum over inputs",
            f"max |F_POVM - max F_POVM| over grid: {max(abs(r.F_POVM - ref) for r in rows):.12g}"]
    return cols, out, meta


def _exp_polarizer(p, threads):
    n2, k = p["n_slab"], int(p["slabs"])
    thetas = np.linspace(0.0, np.radians(p["theta_max_deg"]), int(p["theta_steps"]))

    def row(th):
        t = polarizer.stack_epsilon(polarizer.SlabStack(float(th), 1.0, n2, k))
        return [np.degrees(th), t.T_h, t.T_v, t.epsilon_literal, t.T_p_physical, t.T_s_physical,
                t.epsilon_physical, t.epsilon_amplitude, int(t.literal_exceeds_one)]

    rows = _map(row, thetas, threads)
    th = polarizer.theta_for_epsilon(p["target_eps"], n2, k)
    t = polarizer.stack_epsilon(polarizer.SlabStack(th, 1.0, n2, k))
    meta = [f"design: epsilon_physical {p['target_eps']:.12g} at theta = {np.degrees(th):.12g} deg "
            f"(T_p {t.T_p_physical:.12g}, T_s {t.T_s_physical:.12g}, amplitude epsilon {t.epsilon_amplitude:.12g})"]
    cols = ["theta_deg", "T_h_literal", "T_v_literal", "epsilon_literal", "T_p", "T_s",
            "epsilon_physical", "epsilon_amplitude", "literal_exceeds_one"]
    return cols, rows, meta


_PGRID = {
    "p_min": Param(float, 0.0, 0.0, 1.0),
    "p_max": Param(float, REQUIRED, 0.0, 1.0),
    "p_step": Param(float, 0.01, 0.0, 1.0, lo_open=True),
    "closed_form_filter": Param(bool, False),
}
_AB = {"a": Param(float, REQUIRED, 0.0, 1.0), "b": Param(float, REQUIRED, 0.0, 1.0)}

EXPERIMENTS = {
    e.name: e
    for e in [
        Experiment("distill-depolarizing", "optimal local filtering of a depolarized a|00>+b|11>",
                   {**_AB, **_PGRID}, _exp_depolarizing),
        Experiment("distill-damping", "optimal local filtering of amplitude-damped (|00>+|11>)/sqrt2",
                   dict(_PGRID), _exp_damping),
        Experiment("distill-phase", "optimal local filtering of a phase-damped a|00>+b|11>",
                   {**_AB, **_PGRID}, _exp_phase),
        Experiment("rank-two", "bilateral diag(1, eps) filtering of F|Psi+><Psi+| + (1-F)|11><11|",
                   {"F_min": Param(float, 0.1, 0.0, 1.0, lo_open=True), "F_max": Param(float, 1.0, 0.0, 1.0, lo_open=True),
                    "F_step": Param(float, 0.1, 0.0, 1.0, lo_open=True),
                    "eps_min": Param(float, 0.1, 0.0, 1.0, lo_open=True), "eps_max": Param(float, 1.0, 0.0, 1.0, lo_open=True),
                    "eps_step": Param(float, 0.1, 0.0, 1.0, lo_open=True)},
                   _exp_rank_two),
        Experiment("recurrence", "two-copy recurrence purification of a Werner state",
                   {"F": Param(float, REQUIRED, 0.0, 1.0), "max_rounds": Param(int, 20, 0, 10_000),
                    "target": Param(float, 0.99, 0.0, 1.0)},
                   _exp_recurrence),
        Experiment("cavity-sweep", "cavity-implemented diag(1, eps) POVM fidelity versus coupling g/2pi",
                   {"g_min": Param(float, 13.5, 0.0, None), "g_max": Param(float, 40.0, 0.0, None),
                    "g_step": Param(float, 0.5, 0.0, None, lo_open=True),
                    "kappa": Param(float, 2.4, 0.0, None, lo_open=True), "gamma": Param(float, 2.6, 0.0, None),
                    "T": Param(float, 10.0, 0.0, None, lo_open=True), "eps": Param(float, 0.2, 0.0, 1.0, lo_open=True),
                    "n_samples": Param(int, 4096, 2, None), "strict": Param(bool, False),
                    "recurrence_fidelity": Param(float, 0.0, 0.0, 1.0)},
                   _exp_cavity),
        Experiment("polarizer-design", "tilted-slab partial polarizer transmissions and tilt for a target epsilon",
                   {"n_slab": Param(float, polarizer.DEFAULT_GLASS_INDEX, 1.0, 3.0), "slabs": Param(int, 4, 1, 1000),
                    "target_eps": Param(float, 0.2, 0.0, 1.0, lo_open=True),
                    "theta_max_deg": Param(float, 89.0, 0.0, 89.999), "theta_steps": Param(int, 90, 2, 100_000)},
                   _exp_polarizer),
    ]
}


# Config parsing --------------------------------------------------------------

def _read_ini(path: str) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc.strerror}") from None
    except configparser.Error as exc:
        raise ConfigError(f"malformed config file {path!r}: {' '.join(str(exc).split())}") from None
    return cp


def _convert(kind: type, raw: str):
    if kind is bool:
        v = raw.strip().lower()
        if v in ("1", "true", "yes", "on"):
            return True
        if v in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"expected a boolean, got {raw!r}")
    return kind(raw)


def _diagnose(cp: configparser.ConfigParser, seed_override=None) -> tuple[list[Diagnostic], ExperimentConfig | None]:
    diags: list[Diagnostic] = []
    if not cp.has_section("run"):
        return [Diagnostic("run", "missing [run] section")], None
    name = cp.get("run", "experiment", fallback=None)
    if name is None:
        return [Diagnostic("run.experiment", "missing required key")], None
    if name not in EXPERIMENTS:
        return [Diagnostic("run.experiment", f"unknown experiment {name!r}")], None
    seed = 0
    if seed_override is not None:
        seed = seed_override
    elif cp.has_option("run", "seed"):
        try:
            seed = int(cp.get("run", "seed"))
        except ValueError:
            diags.append(Diagnostic("run.seed", f"expected an integer, got {cp.get('run', 'seed')!r}"))
    for key in cp["run"]:
        if key not in ("experiment", "output", "seed"):
            diags.append(Diagnostic(f"run.{key}", "unknown key"))

    exp = EXPERIMENTS[name]
    section = cp[name] if cp.has_section(name) else {}
    for key in section:
        if key not in exp.params:
            diags.append(Diagnostic(f"{name}.{key}", "unknown parameter"))
    params = {}
    for key, spec in exp.params.items():
        path = f"{name}.{key}"
        if key not in section:
            if spec.default is REQUIRED:
                diags.append(Diagnostic(path, "missing required parameter"))
            else:
                params[key] = spec.default
            continue
        try:
            val = _convert(spec.kind, section[key])
        except ValueError:
            diags.append(Diagnostic(path, f"expected {spec.kind.__name__}, got {section[key]!r}"))
            continue
        if spec.kind is not bool:
            if not np.isfinite(val):
                diags.append(Diagnostic(path, f"value {val!r} is not finite"))
                continue
            low_bad = spec.lo is not None and (val <= spec.lo if spec.lo_open else val < spec.lo)
            high_bad = spec.hi is not None and val > spec.hi
            if low_bad or high_bad:
                lo = "-inf" if spec.lo is None else repr(spec.lo)
                hi = "inf" if spec.hi is None else repr(spec.hi)
                br = "(" if spec.lo_open else "["
                diags.append(Diagnostic(path, f"value {val!r} out of range {br}{lo}, {hi}]"))
                continue
        params[key] = val
    if diags:
        return diags, None
    return [], ExperimentConfig(name, params, cp.get("run", "output", fallback=None), seed)


def validate(path: str) -> list[Diagnostic]:
    """Diagnostics for a config file; empty iff ``run`` would start."""
    return _diagnose(_read_ini(path))[0]


def load_config(path: str, seed: int | None = None) -> ExperimentConfig:
    diags, cfg = _diagnose(_read_ini(path), seed)
    if diags:
        raise ConfigError("; ".join(str(d) for d in diags))
    return cfg


# CSV --------------------------------------------------------------------------

def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        x = float(v)
        if x == 0:
            x = 0.0  # drop the sign of negative zero
        return f"{x:.12g}"
    return str(v)


def render_csv(cfg: ExperimentConfig, columns, rows, meta) -> str:
    """CSV text: ``#`` metadata lines, then the column header, then one line per row."""
    exp = EXPERIMENTS[cfg.experiment]
    buf = io.StringIO()
    buf.write(f"# experiment: {cfg.experiment} ({exp.description})\n")
    buf.write(f"# seed: {cfg.seed}\n")
    buf.write("# parameters: " + ", ".join(f"{k}={_fmt(v)}" for k, v in sorted(cfg.parameters.items())) + "\n")
    for m in meta:
        buf.write(f"# {' '.join(str(m).split())}\n")
    buf.write(",".join(columns) + "\n")
    for r in rows:
        buf.write(",".join(_fmt(v) for v in r) + "\n")
    return buf.getvalue()


def run(cfg: ExperimentConfig, threads: int = 1) -> str:
    """Execute an experiment and return its CSV text."""
    np.random.seed(cfg.seed % 2**32)
    columns, rows, meta = EXPERIMENTS[cfg.experiment].run(cfg.parameters, max(1, threads))
    return render_csv(cfg, columns, rows, meta)


def _one_line(exc: BaseException) -> str:
    return " ".join(str(exc).split()) or type(exc).__name__


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="atompurify", description="Entanglement purification experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run the experiment described by a config file")
    p_run.add_argument("config")
    p_run.add_argument("--output", help="CSV path (overrides [run] output; '-' for stdout)")
    p_run.add_argument("--seed", type=int, help="override [run] seed")
    p_run.add_argument("--threads", type=int, default=1, help="worker threads for sweep points")
    p_val = sub.add_parser("validate", help="check a config file without running it")
    p_val.add_argument("config")
    sub.add_parser("list-experiments", help="list experiment names")
    args = parser.parse_args(argv)

    if args.command == "list-experiments":
        for e in EXPERIMENTS.values():
            print(f"{e.name}\t{e.description}")
        return EXIT_OK

    if args.command == "validate":
        try:
            diags = validate(args.config)
        except ConfigError as exc:
            print(f"error: {_one_line(exc)}", file=sys.stderr)
            return EXIT_CONFIG
        for d in diags:
            print(d)
        return EXIT_OK if not diags else EXIT_CONFIG

    try:
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        cfg = load_config(args.config, args.seed)
        text = run(cfg, args.threads)
    except ConfigError as exc:
        print(f"error: {_one_line(exc)}", file=sys.stderr)
        return EXIT_CONFIG
    except (PurificationError, ArithmeticError, np.linalg.LinAlgError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {_one_line(exc)}", file=sys.stderr)
        return EXIT_NUMERIC

    out = args.output or cfg.output_path
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        try:
            with open(out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"error: cannot write {out!r}: {exc.strerror}", file=sys.stderr)
            return EXIT_CONFIG
    return EXIT_OK
