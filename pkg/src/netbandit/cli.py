"""Command-line front end.

    netbandit solve-lp GRAPH [--sporadic PFILE]
    netbandit run CONFIG [--seed S] [--reps R] [--horizon T] [--out CSV] [--parallel P]
    netbandit er-tau [--n 64,256,1024] [--p 0.5] [--reps 1000] [--seed 0] [--out CSV]
    netbandit bounds ENV [--horizon T] [--c C] [--d D] [--alpha A] [--out CSV]

Exit codes: 0 ok, 2 config/validation error, 3 parse error, 4 internal error.
"""
from __future__ import annotations

import argparse
import csv
import functools
import hashlib
import io
import math
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from . import bounds as bd
from . import env as envmod
from . import graph as gr
from . import lp as lpmod
from . import policy as pol
from . import sim

EXIT_OK, EXIT_CONFIG, EXIT_PARSE, EXIT_INTERNAL = 0, 2, 3, 4

KINDS = ("flixster-style", "routing", "er-tau", "custom")
ER_TAU_HEADER = ("N", "mean_tau", "std_tau", "log_bound", "mean_zsum", "mean_greedy")


class ConfigError(ValueError):
    pass


class ConfigParseError(ConfigError):
    pass


# ------------------------------------------------------------------ config

def parse_kv(text: str, where: str = "config") -> dict[str, str]:
    """``key = value`` lines with ``#`` comments; later keys override earlier ones."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        key = key.strip()
        if not sep or not key or not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", key):
            raise ConfigParseError(f"{where}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        out[key] = val.strip()
    return out


_POLICY_RE = re.compile(r"\s*([a-z0-9-]+)\s*(?:\(([^()]*)\))?\s*")


def parse_policies(text: str) -> list[sim.PolicySpec]:
    """``ucb1, eps-greedy-lp(c=4, d=0.05), ucb-lp`` -> PolicySpec list."""
    specs = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _POLICY_RE.match(text, pos)
        if not m or not m.group(1):
            raise ConfigError(f"cannot parse policy list at {text[pos:]!r}")
        name, args = m.group(1), m.group(2)
        if name not in pol.ALL_POLICIES:
            raise ConfigError(f"unknown policy {name!r}; choose from {', '.join(pol.ALL_POLICIES)}")
        params = {}
        if args:
            for item in args.split(","):
                key, sep, val = item.partition("=")
                if not sep:
                    raise ConfigError(f"policy parameter {item.strip()!r} needs key=value")
                try:
                    params[key.strip()] = float(val)
                except ValueError:
                    raise ConfigError(f"policy parameter {item.strip()!r} is not numeric") from None
        label = name if not params else f"{name}(" + ",".join(f"{k}={v:g}" for k, v in params.items()) + ")"
        specs.append(sim.PolicySpec(name, params, label))
        pos = m.end()
        if pos < len(text):
            if text[pos] != ",":
                raise ConfigError(f"expected ',' between policies at {text[pos:]!r}")
            pos += 1
    if not specs:
        raise ConfigError("no policies given")
    return specs


@dataclass
class ExperimentConfig:
    kind: str
    policies: list = field(default_factory=list)
    horizon: int = 10_000
    reps: int = 1
    seed: int = 0
    stride: int = 100
    out: Optional[str] = None
    parallel: int = 1
    params: dict = field(default_factory=dict)
    base_dir: Path = Path(".")

    def resolved(self) -> dict[str, str]:
        d = {"kind": self.kind, "policies": ", ".join(p.key for p in self.policies),
             "horizon": str(self.horizon), "reps": str(self.reps), "seed": str(self.seed),
             "stride": str(self.stride), "out": str(self.out), "parallel": str(self.parallel)}
        d.update({k: str(v) for k, v in self.params.items()})
        return d


_GENERAL = {"kind", "policies", "horizon", "reps", "seed", "stride", "out", "parallel"}
_KIND_KEYS = {
    "flixster-style": {"k", "exponent", "min_degree", "graph_seed", "env_seed", "n_optimal"},
    "routing": {"bound", "path_cap"},
    "er-tau": {"n_list", "p"},
    "custom": {"env"},
}
_DEFAULTS = {
    "flixster-style": {"k": 500, "exponent": 1.5, "min_degree": 3, "graph_seed": 7},
    "routing": {"bound": 5.0},
    "er-tau": {"n_list": "64,256,1024", "p": 0.5},
    "custom": {},
}


def _as_int(key, val):
    try:
        f = float(val)
    except ValueError:
        raise ConfigError(f"{key} must be an integer, got {val!r}") from None
    if not f.is_integer():
        raise ConfigError(f"{key} must be an integer, got {val!r}")
    return int(f)


def _as_float(key, val):
    try:
        return float(val)
    except ValueError:
        raise ConfigError(f"{key} must be a number, got {val!r}") from None


def build_config(kv: dict[str, str], base_dir: Path = Path(".")) -> ExperimentConfig:
    kind = kv.get("kind")
    if kind not in KINDS:
        raise ConfigError(f"kind must be one of {', '.join(KINDS)}, got {kind!r}")
    unknown = set(kv) - _GENERAL - _KIND_KEYS[kind]
    if unknown:
        raise ConfigError(f"unknown keys for kind {kind}: {', '.join(sorted(unknown))}")
    cfg = ExperimentConfig(kind=kind, base_dir=base_dir)
    if kind != "er-tau":
        if "policies" not in kv:
            raise ConfigError("policies = ... is required")
        cfg.policies = parse_policies(kv["policies"])
    for key in ("horizon", "reps", "seed", "stride", "parallel"):
        if key in kv:
            setattr(cfg, key, _as_int(key, kv[key]))
    cfg.out = kv.get("out")
    params = dict(_DEFAULTS[kind])
    for key in _KIND_KEYS[kind]:
        if key in kv:
            params[key] = kv[key]
    cfg.params = params
    return cfg


def validate_config(cfg: ExperimentConfig) -> None:
    """Fail fast before any run starts."""
    if cfg.horizon < 1:
        raise ConfigError("horizon must be >= 1")
    if cfg.reps < 1:
        raise ConfigError("reps must be >= 1")
    if cfg.stride < 1:
        raise ConfigError("stride must be >= 1")
    if cfg.parallel < 1:
        raise ConfigError("parallel must be >= 1")
    for spec in cfg.policies:
        p = spec.params
        allowed = {"eps-greedy-lp": {"c", "d"}, "ucb-lp": {"horizon"}}.get(spec.name, set())
        extra = set(p) - allowed
        if extra:
            raise ConfigError(f"{spec.name} does not take {', '.join(sorted(extra))}")
        if spec.name == "eps-greedy-lp":
            if not p.get("c", 5.0) > 0:
                raise ConfigError("eps-greedy-lp needs c > 0")
            if not 0 < p.get("d", 0.2) < 1:
                raise ConfigError("eps-greedy-lp needs 0 < d < 1")
    if cfg.kind == "custom":
        if "env" not in cfg.params:
            raise ConfigError("custom experiments need env = <fixture path>")
        path = cfg.base_dir / cfg.params["env"]
        if not path.is_file():
            raise ConfigError(f"env fixture not found: {path}")
    if cfg.kind == "er-tau":
        ns = er_sizes(cfg.params["n_list"])
        p = _as_float("p", cfg.params["p"])
        if not 0 < p < 1 or not ns:
            raise ConfigError("er-tau needs 0 < p < 1 and a non-empty n_list")
    # building the environment checks graph and parameter preconditions
    source = env_source(cfg)
    if source is not None:
        e = source if isinstance(source, envmod.Environment) else source(cfg.seed + 1)
        for spec in cfg.policies:
            if spec.name in ("eps-greedy-lp", "ucb-lp", "ucb-lp-doubling"):
                sim.allocation(e)
                break


def er_sizes(text) -> list[int]:
    try:
        return [int(x) for x in str(text).replace(",", " ").split()]
    except ValueError:
        raise ConfigError(f"n_list must be integers, got {text!r}") from None


def env_source(cfg: ExperimentConfig):
    p = cfg.params
    if cfg.kind == "flixster-style":
        k = _as_int("k", p["k"])
        g = gr.gen_powerlaw(k, _as_float("exponent", p["exponent"]), _as_int("graph_seed", p["graph_seed"]),
                            min_degree=_as_int("min_degree", p["min_degree"]))
        n_opt = _as_int("n_optimal", p["n_optimal"]) if "n_optimal" in p else None
        env_seed = _as_int("env_seed", p.get("env_seed", p["graph_seed"]))
        return envmod.flixster_style_env(g, env_seed, n_optimal=n_opt)
    if cfg.kind == "routing":
        cap = _as_int("path_cap", p.get("path_cap", 10_000))
        inst = gr.gen_routing(gr.SIX_NODE_EDGES, 1, 6, cap)
        return functools.partial(envmod.routing_env, inst, bound=_as_float("bound", p["bound"]))
    if cfg.kind == "custom":
        return envmod.load_env(cfg.base_dir / p["env"])
    return None


def load_config(path: Path) -> ExperimentConfig:
    text = path.read_text(encoding="utf-8")
    return build_config(parse_kv(text, str(path)), path.parent)


def code_version() -> str:
    """Package version plus a digest of the installed sources."""
    h = hashlib.sha256()
    for f in sorted(Path(__file__).parent.glob("*.py")):
        h.update(f.name.encode())
        h.update(f.read_bytes())
    return f"{__version__}+{h.hexdigest()[:12]}"


def write_manifest(cfg: ExperimentConfig, out: Path) -> Path:
    path = out.with_name(out.name + ".manifest")
    lines = [f"{k} = {v}" for k, v in cfg.resolved().items()]
    lines.append(f"seeds = {cfg.seed + 1}..{cfg.seed + cfg.reps}")
    lines.append(f"code_version = {code_version()}")
    lines.append(f"numpy = {np.__version__}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


# ------------------------------------------------------------------ er-tau

def er_tau_rows(sizes, p: float, reps: int, seed: int) -> list[dict]:
    """Mean/std of the stopping time tau, with mean sum z* and greedy hitting-set size, per N."""
    rows = []
    for n in sizes:
        taus, zs, greedy = [], [], []
        for s in range(seed + 1, seed + reps + 1):
            g = gr.er_stopping_graph(n, p, s)
            taus.append(g.num_actions)
            sol = lpmod.solve_p2(g)
            zs.append(sol.objective)
            greedy.append(len(gr.greedy_hitting_set(g)))
        taus = np.array(taus, dtype=float)
        log_bound = math.log(n) / math.log(1.0 / (1.0 - p))
        rows.append({"N": n, "mean_tau": taus.mean(), "std_tau": taus.std(ddof=1) if reps > 1 else 0.0,
                     "log_bound": log_bound, "mean_zsum": float(np.mean(zs)), "mean_greedy": float(np.mean(greedy))})
    return rows


def er_tau_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ER_TAU_HEADER)
    for r in rows:
        w.writerow([r["N"]] + [repr(float(r[k])) for k in ER_TAU_HEADER[1:]])
    return buf.getvalue()


# ---------------------------------------------------------------- commands

def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def read_probabilities(path: Path) -> np.ndarray:
    text = path.read_text(encoding="utf-8")
    toks = [t for line in text.splitlines() for t in line.split("#", 1)[0].split()]
    try:
        return np.array([float(t) for t in toks])
    except ValueError as exc:
        raise ConfigParseError(f"{path}: {exc}") from None


def cmd_solve_lp(args) -> int:
    g = gr.load_graph(Path(args.graph).read_text(encoding="utf-8"))
    obs_prob = read_probabilities(Path(args.sporadic)) if args.sporadic else None
    sol = lpmod.solve_p2(g, obs_prob)
    if sol.status != lpmod.OPTIMAL:
        print(f"status: {sol.status}")
        return EXIT_CONFIG
    greedy = gr.greedy_hitting_set(g)
    lines = ["action,z"] + [f"{j + 1},{x:.10g}" for j, x in enumerate(sol.x)]
    lines.append(f"sum_z = {sol.objective:.10g}")
    lines.append(f"greedy_hitting_set = {len(greedy)} ({' '.join(str(j + 1) for j in greedy)})")
    if g.num_actions <= gr.CLIQUE_CAP:
        lines.append(f"hitting_number = {gr.brute_force_hitting_number(g)}")
        lines.append(f"clique_partition_number = {gr.brute_force_clique_partition(g)}")
    print("\n".join(lines))
    return EXIT_OK


def cmd_run(args) -> int:
    path = Path(args.config)
    cfg = load_config(path)
    for key in ("seed", "reps", "horizon", "out", "parallel", "stride"):
        val = getattr(args, key, None)
        if val is not None:
            setattr(cfg, key, val)
    validate_config(cfg)
    if cfg.kind == "er-tau":
        rows = er_tau_rows(er_sizes(cfg.params["n_list"]), float(cfg.params["p"]), cfg.reps, cfg.seed)
        text = er_tau_csv(rows)
    else:
        source = env_source(cfg)
        configs = [sim.RunConfig(source, spec, cfg.horizon, cfg.seed, cfg.stride) for spec in cfg.policies]
        result = sim.replicate(configs, cfg.reps, cfg.parallel)
        text = sim.to_csv(list(result.values()))
        if not cfg.out:
            sys.stderr.write(sim.format_compare(sim.compare(list(result.values()), at=[cfg.horizon])) + "\n")
    if cfg.out:
        out = Path(cfg.out)
        if not out.is_absolute():
            out = Path.cwd() / out
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")
        write_manifest(cfg, out)
        print(f"wrote {out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_er_tau(args) -> int:
    sizes = er_sizes(args.n)
    if not sizes or any(n < 1 for n in sizes):
        raise ConfigError("--n needs positive integers")
    if not 0 < args.p < 1:
        raise ConfigError("--p must lie in (0, 1)")
    if args.reps < 1:
        raise ConfigError("--reps must be >= 1")
    _emit(er_tau_csv(er_tau_rows(sizes, args.p, args.reps, args.seed)), args.out)
    return EXIT_OK


BOUNDS_HEADER = ("horizon", "c_mu", "eps_greedy_log_coeff", "eps_greedy_constant", "ucb_lp_bound_at_T",
                 "ucb_lp_const_64", "ucb_lp_const_32", "ucb_n_clique_bound_coeff", "m_bar")


def cmd_bounds(args) -> int:
    e = envmod.load_env(args.env)
    z = sim.allocation(e)
    info = e.gap_info
    sub_gaps = info.gaps[list(info.suboptimal)]
    d = args.d if args.d is not None else (float(sub_gaps.min()) / 2 if sub_gaps.size else 0.1)
    failed = bd.check_eps_greedy_params(sub_gaps, args.c, d, args.alpha)
    if failed:
        raise bd.BoundError("parameter check failed: " + "; ".join(failed))
    rep = bd.bound_report(e, z, args.horizon, c=args.c, d=d, alpha=args.alpha)
    rows = [("c", f"{args.c:g}"), ("d", f"{d:.10g}"), ("alpha", f"{args.alpha:g}")] + rep.as_rows()
    width = max(len(k) for k, _ in rows)
    block = "\n".join(f"{k:<{width}} = {v}" for k, v in rows)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BOUNDS_HEADER)
    vals = (args.horizon, rep.c_mu, rep.eps_greedy_log_coeff, rep.eps_greedy_constant, rep.ucb_lp_bound_at_T,
            rep.ucb_lp_const_1b, rep.ucb_lp_const_2, rep.ucb_n_clique_bound_coeff)
    w.writerow([repr(float(v)) for v in vals] + [rep.m_bar])
    print(block)
    print()
    sys.stdout.write(buf.getvalue())
    if args.out:
        Path(args.out).write_text(buf.getvalue(), encoding="utf-8")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="netbandit", description="Bandits with graph side-observations.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve-lp", help="solve the exploration LP for a graph file")
    p.add_argument("graph", help="graph file ('K N' header, then 'j | V: ... | R: ...' lines)")
    p.add_argument("--sporadic", metavar="PFILE", help="file with one side-observation probability per action")
    p.set_defaults(func=cmd_solve_lp)

    p = sub.add_parser("run", help="run an experiment config and write a regret CSV")
    p.add_argument("config", help="key = value experiment config")
    p.add_argument("--seed", type=int, help="base seed; replications use seed+1..seed+reps")
    p.add_argument("--reps", type=int, help="number of paired replications")
    p.add_argument("--horizon", type=int, help="horizon T")
    p.add_argument("--stride", type=int, help="record regret every STRIDE steps (T always recorded)")
    p.add_argument("--out", help="CSV output path (a .manifest file is written next to it)")
    p.add_argument("--parallel", type=int, help="worker processes for replications")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("er-tau", help="stopping-time scaling of random graphs")
    p.add_argument("--n", default="64,256,1024", help="comma-separated base-arm counts N")
    p.add_argument("--p", type=float, default=0.5, help="edge probability")
    p.add_argument("--reps", type=int, default=1000, help="graphs per N")
    p.add_argument("--seed", type=int, default=0, help="base seed; graphs use seed+1..seed+reps")
    p.add_argument("--out", help="CSV output path (stdout when omitted)")
    p.set_defaults(func=cmd_er_tau)

    p = sub.add_parser("bounds", help="evaluate regret bounds for an environment fixture")
    p.add_argument("env", help="environment fixture (graph:, theta:, reward: lines)")
    p.add_argument("--horizon", type=float, default=1e5, help="horizon T")
    p.add_argument("--c", type=float, default=10.0, help="eps-greedy-LP parameter c")
    p.add_argument("--d", type=float, default=None, help="eps-greedy-LP parameter d (default: half the smallest gap)")
    p.add_argument("--alpha", type=float, default=2.0, help="alpha > 1 used by the eps-greedy-LP bound")
    p.add_argument("--out", help="also write the CSV row here")
    p.set_defaults(func=cmd_bounds)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (gr.GraphParseError, envmod.FixtureParseError, ConfigParseError) as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (FileNotFoundError, IsADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, bd.BoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
