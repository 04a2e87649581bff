"""Experiment configuration, orchestration, and artifact emission.

Subcommands::

    mirrorbench run <config>            one experiment (config path or preset name)
    mirrorbench sweep <config> --grid   cartesian grid of config overrides
    mirrorbench report <dir>            plot-ready series + timing ratios
    mirrorbench lowerbound <config>     adversarial-stream floor check

Configs are JSON documents; ``paper-simplex`` and ``paper-ball`` are built-in
presets encoding the synthetic regression experiments.  The output root
defaults to $MIRRORBENCH_OUT (falling back to ./runs).  With
``--enforce-bounds`` the exit code is nonzero iff any bound check fails.
"""

from __future__ import annotations

import argparse
import copy
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bench import (AdversarialStream, RegressionStream, RegretLedger,
                    lower_bound_check, run_single_optimizer)
from .errors import ConfigError, IntegrityError, UnsupportedPairError
from .geometry import Domain
from .meta import (FastMasterGD, MasterGD, check_bandit_master_bound,
                   check_best_regularizer_bound, check_framework_decomposition,
                   check_omd_expert_bounds, check_squint_master_bound,
                   estimate_surrogate_bound, make_engine,
                   surrogate_regret_dominates)
from .optimizers import AnytimeStep, FixedStep, OnlineOptimizer
from .regularizers import diameter, make_regularizer

OUTPUT_ENV = "MIRRORBENCH_OUT"
CSV_HEADER = "t,algorithm,cum_loss,cum_regret,avg_regret,wall_ms"

# Preset Squint rate: 1/2 scaled by the realized loss half-range (~1/4, since
# the surrogate bound F carries a factor-2 Cauchy-Schwarz headroom).
PRESETS = {
    "paper-simplex": {
        "name": "paper-simplex",
        "domain": {"kind": "simplex", "dim": 20},
        "family": (
            [{"reg": "hypentropy", "beta": 2.0 ** n} for n in range(-5, 3)]
            + [{"reg": "quadratic"}, {"reg": "neg_entropy"}]
        ),
        "meta": ["none", "mgd", "fmgd"],
        "engine": {"mgd": {"kind": "squint", "eta": 2.0},
                   "fmgd": {"kind": "exp3"}},
        "T": 20000,
        "seeds": [1],
        "stream": {"kind": "regression", "trunc_radius": 1.0, "noise": 1.0,
                   "trunc_mode": "radial"},
        "f_policy": "analytic",
        "f_init": 1.0,
        "l_init": 1.0,
        "optimizer_mode": "lazy_closed_form",
    },
    "paper-ball": {
        "name": "paper-ball",
        "domain": {"kind": "l2_ball", "dim": 20, "radius": 1.0},
        "family": (
            [{"reg": "hypentropy", "beta": 2.0 ** n} for n in range(-4, 4)]
            + [{"reg": "quadratic"}]
        ),
        "meta": ["none", "mgd", "fmgd"],
        "engine": {"mgd": {"kind": "squint", "eta": 2.0},
                   "fmgd": {"kind": "exp3"}},
        "T": 20000,
        "seeds": [1],
        "stream": {"kind": "regression", "trunc_radius": 1.0, "noise": 1.0,
                   "trunc_mode": "radial"},
        "f_policy": "analytic",
        "f_init": 1.0,
        "l_init": 1.0,
        "optimizer_mode": "lazy_closed_form",
    },
}

_DEFAULTS = {
    "meta": ["none", "mgd", "fmgd"],
    "engine": {"mgd": {"kind": "squint"}, "fmgd": {"kind": "exp3"}},
    "seeds": [1],
    "stream": {"kind": "regression"},
    "f_policy": "analytic",
    "f_init": 1.0,
    "l_init": 1.0,
    "optimizer_mode": "lazy_closed_form",
}


# ---------------------------------------------------------------------------
# Config handling
# ---------------------------------------------------------------------------

def load_config(source: str) -> dict:
    """Load a config from a JSON file path or a preset name."""
    if source in PRESETS:
        return copy.deepcopy(PRESETS[source])
    path = Path(source)
    if not path.exists():
        raise ConfigError("config", f"no file or preset named {source!r}")
    with open(path) as fh:
        return json.load(fh)


def emit_config(config: dict) -> str:
    return json.dumps(config, indent=2, sort_keys=True)


def parse_config(text: str) -> dict:
    return json.loads(text)


def validate_config(config: dict) -> dict:
    """Fill defaults and validate; raises ConfigError naming the bad field."""
    cfg = copy.deepcopy(config)
    for key, val in _DEFAULTS.items():
        cfg.setdefault(key, copy.deepcopy(val))
    cfg.setdefault("name", "run")
    if "domain" not in cfg:
        raise ConfigError("domain", "missing")
    dom = cfg["domain"]
    if dom.get("kind") not in ("simplex", "l2_ball"):
        raise ConfigError("domain.kind", f"unsupported {dom.get('kind')!r}")
    if int(dom.get("dim", 0)) < 1:
        raise ConfigError("domain.dim", "must be a positive integer")
    fam = cfg.get("family")
    if not fam or not isinstance(fam, list):
        raise ConfigError("family", "must be a non-empty list (K >= 1)")
    for i, member in enumerate(fam):
        kind = member.get("reg")
        if kind not in ("quadratic", "neg_entropy", "hypentropy"):
            raise ConfigError(f"family[{i}].reg", f"unsupported {kind!r}")
        if kind == "hypentropy" and not member.get("beta", 0) > 0:
            raise ConfigError(f"family[{i}].beta", "must be positive")
    if int(cfg.get("T", 0)) < 1:
        raise ConfigError("T", "must be a positive integer")
    metas = cfg["meta"]
    if isinstance(metas, str):
        metas = [metas]
    for m in metas:
        if m not in ("none", "mgd", "fmgd"):
            raise ConfigError("meta", f"unsupported meta algorithm {m!r}")
    cfg["meta"] = metas
    if cfg["stream"].get("kind", "regression") not in ("regression", "adversarial"):
        raise ConfigError("stream.kind", f"unsupported {cfg['stream'].get('kind')!r}")
    if cfg["f_policy"] not in ("analytic", "running-max"):
        raise ConfigError("f_policy", f"unsupported {cfg['f_policy']!r}")
    seeds = cfg["seeds"]
    if isinstance(seeds, dict):
        seeds = [int(seeds.get("base", 0)) + i for i in range(int(seeds["count"]))]
    cfg["seeds"] = [int(s) for s in seeds]
    if not cfg["seeds"]:
        raise ConfigError("seeds", "need at least one seed")
    return cfg


def build_domain(cfg: dict) -> Domain:
    spec = cfg["domain"]
    if spec["kind"] == "simplex":
        return Domain.simplex(int(spec["dim"]))
    dim = int(spec["dim"])
    center = spec.get("center")
    if isinstance(center, (int, float)):
        center = np.full(dim, float(center))
    return Domain.l2_ball(dim, center=center, radius=float(spec.get("radius", 1.0)))


def build_stream(cfg: dict, seed: int):
    spec = cfg["stream"]
    dim = int(cfg["domain"]["dim"])
    T = int(cfg["T"])
    if spec.get("kind", "regression") == "regression":
        return RegressionStream(seed, spec.get("d", dim), T,
                                trunc_radius=float(spec.get("trunc_radius", 1.0)),
                                noise=float(spec.get("noise", 1.0)),
                                trunc_mode=spec.get("trunc_mode", "radial"))
    return AdversarialStream(seed, dim, T, lipschitz=float(spec.get("L", 1.0)))


def _member_name(member: dict) -> str:
    if member["reg"] == "hypentropy":
        return f"hypentropy_b{member['beta']:g}"
    return member["reg"]


def _start_point(member: dict, reg, dom: Domain) -> np.ndarray | None:
    if "x0" in member:
        return np.asarray(member["x0"], dtype=float)
    if reg.kind == "neg_entropy" and dom.kind == Domain.L2_BALL:
        # interior positive start, as in the entropic ball analysis
        return np.full(dom.dim, 1.0 / np.sqrt(dom.dim))
    return None  # domain default


def build_family(cfg: dict, dom: Domain) -> list[OnlineOptimizer]:
    """Fresh optimizer instances for every family member."""
    opts = []
    mode = cfg.get("optimizer_mode", "lazy_closed_form")
    for member in cfg["family"]:
        reg = make_regularizer(member["reg"], member.get("beta"), dom)
        x0 = _start_point(member, reg, dom)
        basepoint = dom.start_point() if x0 is None else x0
        if "eta" in member:
            schedule = FixedStep(float(member["eta"]))
        else:
            try:
                diam = diameter(reg, dom, basepoint, mode="analytic").value
            except UnsupportedPairError:
                diam = diameter(reg, dom, basepoint, mode="sampled", samples=2000,
                                rng=np.random.default_rng(0)).value
            schedule = AnytimeStep(reg.rho, diam,
                                   initial_l=float(cfg.get("l_init", 1.0)))
        opts.append(OnlineOptimizer(reg, dom, schedule, x0=x0, mode=mode,
                                    name=_member_name(member)))
    return opts


# ---------------------------------------------------------------------------
# Running
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_ledger_csv(path: Path, ledger: RegretLedger) -> None:
    with open(path, "w") as fh:
        fh.write(CSV_HEADER + "\n")
        for t, algo, cl, cr, ar, wm in ledger.csv_rows():
            fh.write(f"{t},{algo},{_fmt(cl)},{_fmt(cr)},{_fmt(ar)},{_fmt(wm)}\n")


def output_root(explicit: str | None = None) -> Path:
    if explicit:
        return Path(explicit)
    return Path(os.environ.get(OUTPUT_ENV, "runs"))


def run_experiment(cfg: dict, out_dir: Path) -> dict:
    """Execute a validated config; returns the summary dict it wrote."""
    cfg = validate_config(cfg)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "config.json").write_text(emit_config(cfg))
    (out_dir / "VERSION").write_text(__version__ + "\n")
    dom = build_domain(cfg)
    summary: dict = {"name": cfg["name"], "version": __version__, "seeds": {},
                     "bound_checks": []}
    fmgd_ledgers, fmgd_optsets = [], []
    engine_cfg = cfg["engine"]
    for seed in cfg["seeds"]:
        stream = build_stream(cfg, seed)
        if cfg["f_policy"] == "analytic":
            bound = estimate_surrogate_bound(stream, dom,
                                             initial_guess=float(cfg["f_init"]))
        else:
            bound = float(cfg["f_init"])  # grows with observed gradients
        seed_info: dict = {"F": bound, "algorithms": {}}
        ledgers: dict[str, RegretLedger] = {}

        if "none" in cfg["meta"]:
            for member in cfg["family"]:
                single = build_family({**cfg, "family": [member]}, dom)[0]
                led = run_single_optimizer(single, stream, dom)
                ledgers[single.name] = led
        mgd_opts = None
        if "mgd" in cfg["meta"]:
            mgd_opts = build_family(cfg, dom)
            spec = engine_cfg.get("mgd", {"kind": "squint"})
            engine = make_engine(spec.get("kind", "squint"), len(mgd_opts),
                                 int(cfg["T"]), eta=spec.get("eta"),
                                 alpha=spec.get("alpha", 0.5))
            mgd = MasterGD(mgd_opts, engine, bound, dom)
            if cfg["f_policy"] == "running-max":
                mgd.normalizer = _running_normalizer(dom, bound, mgd.diag)
            led = mgd.run(stream)
            ledgers["mgd"] = led
            seed_info["mgd_engine"] = engine.kind
            _collect_mgd_checks(summary, led, mgd_opts, engine, seed)
        if "fmgd" in cfg["meta"]:
            fmgd_opts = build_family(cfg, dom)
            spec = engine_cfg.get("fmgd", {"kind": "exp3"})
            engine = make_engine(spec.get("kind", "exp3"), len(fmgd_opts),
                                 int(cfg["T"]), eta=spec.get("eta"),
                                 alpha=spec.get("alpha", 0.5))
            rng = np.random.default_rng([seed, 0x5EED])
            fmgd = FastMasterGD(fmgd_opts, engine, bound, dom, rng)
            if cfg["f_policy"] == "running-max":
                fmgd.normalizer = _running_normalizer(dom, bound, fmgd.diag)
            led = fmgd.run(stream)
            ledgers["fmgd"] = led
            seed_info["fmgd_engine"] = engine.kind
            fmgd_ledgers.append(led)
            fmgd_optsets.append(fmgd_opts)
            summary["bound_checks"].append({
                "name": f"one_oracle_call[fmgd,seed={seed}]",
                "lhs": led.oracle_calls, "rhs": led.T,
                "passed": led.oracle_calls == led.T})

        for name, led in ledgers.items():
            write_ledger_csv(out_dir / f"{name}__seed{seed}.csv", led)
            seed_info["algorithms"][name] = {
                "final_regret": led.final_regret,
                "final_avg_regret": float(led.avg_regret[-1]),
                "oracle_calls": led.oracle_calls,
                "median_wall_ms": led.median_wall_ms(),
                "loss_clips": led.loss_clips,
            }
        if "mgd" in ledgers and "fmgd" in ledgers:
            ratio = ledgers["mgd"].median_wall_ms() / ledgers["fmgd"].median_wall_ms()
            seed_info["mgd_fmgd_wall_ratio"] = ratio
        summary["seeds"][str(seed)] = seed_info

    if fmgd_ledgers:
        kind = engine_cfg.get("fmgd", {}).get("kind", "exp3")
        for chk in check_bandit_master_bound(fmgd_ledgers, fmgd_optsets, kind):
            summary["bound_checks"].append(chk.as_dict())
    summary["all_bounds_pass"] = all(c["passed"] for c in summary["bound_checks"])
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=2))
    return summary


def _running_normalizer(dom: Domain, init: float, diag):
    from .meta import SurrogateNormalizer

    class _Running(SurrogateNormalizer):
        def observe(self, grad):
            self.bound = max(self.bound, dom.support_value(grad) * 2.0)

    return _Running(init, diag)


def _collect_mgd_checks(summary: dict, led: RegretLedger, opts, engine, seed: int) -> None:
    tag = f"seed={seed}"
    checks = [surrogate_regret_dominates(led)]
    checks += check_framework_decomposition(led)
    if engine.kind == "squint":
        checks += check_squint_master_bound(led)
    checks += check_omd_expert_bounds(led, opts)
    checks += check_best_regularizer_bound(led, opts)
    for chk in checks:
        entry = chk.as_dict()
        entry["name"] = f"{entry['name']}[{tag}]"
        summary["bound_checks"].append(entry)
    summary["bound_checks"].append({
        "name": f"one_oracle_call[mgd,{tag}]", "lhs": led.oracle_calls,
        "rhs": led.T, "passed": led.oracle_calls == led.T})
    clip_frac = led.loss_clips / (led.T * led.K)
    summary["bound_checks"].append({
        "name": f"f_validity_clip_fraction[{tag}]", "lhs": clip_frac,
        "rhs": 1e-3, "passed": clip_frac < 1e-3})


# ---------------------------------------------------------------------------
# Sweep / report / lowerbound
# ---------------------------------------------------------------------------

def _set_dotted(cfg: dict, key: str, value) -> None:
    parts = key.split(".")
    node = cfg
    for part in parts[:-1]:
        node = node[int(part)] if isinstance(node, list) else node.setdefault(part, {})
    last = parts[-1]
    if isinstance(node, list):
        node[int(last)] = value
    else:
        node[last] = value


def expand_grid(grid: dict) -> list[dict]:
    """Cartesian product of {dotted.key: [values]} into override dicts."""
    cells = [{}]
    for key in sorted(grid):
        values = grid[key]
        if not isinstance(values, list):
            raise ConfigError(f"grid.{key}", "grid values must be lists")
        cells = [dict(cell, **{key: v}) for cell in cells for v in values]
    return cells


def run_sweep(cfg: dict, grid: dict, out_dir: Path) -> dict:
    cells = expand_grid(grid)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = {"grid": grid, "cells": []}
    summaries = []
    for i, overrides in enumerate(cells):
        cell_dir = out_dir / f"cell_{i:03d}"
        cell_cfg = copy.deepcopy(cfg)
        for key, value in overrides.items():
            _set_dotted(cell_cfg, key, value)
        manifest["cells"].append({"dir": cell_dir.name, "overrides": overrides})
        summaries.append(run_experiment(cell_cfg, cell_dir))
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2))
    return {"manifest": manifest, "summaries": summaries}


def read_ledger_csv(path: Path) -> dict:
    with open(path) as fh:
        header = fh.readline().strip()
        if header != CSV_HEADER:
            raise IntegrityError(f"{path}: unexpected header {header!r}")
        t, cl, cr, ar, wm = [], [], [], [], []
        algo = None
        for line in fh:
            cells = line.rstrip("\n").split(",")
            if len(cells) != 6:
                raise IntegrityError(f"{path}: malformed row {line!r}")
            t.append(int(cells[0]))
            algo = cells[1]
            cl.append(float(cells[2]))
            cr.append(float(cells[3]))
            ar.append(float(cells[4]))
            wm.append(float(cells[5]))
    if not t:
        raise IntegrityError(f"{path}: no data rows")
    return {"algorithm": algo, "t": np.array(t), "cum_loss": np.array(cl),
            "cum_regret": np.array(cr), "avg_regret": np.array(ar),
            "wall_ms": np.array(wm)}


def run_report(ledger_dir: Path) -> dict:
    """Emit per-algorithm average-regret series and the MGD/FMGD timing ratio."""
    ledger_dir = Path(ledger_dir)
    files = sorted(ledger_dir.glob("*__seed*.csv"))
    if not ledger_dir.is_dir() or not files:
        raise IntegrityError(f"no ledger CSVs found in {ledger_dir}")
    report_dir = ledger_dir / "report"
    report_dir.mkdir(exist_ok=True)
    walls: dict[str, dict[str, float]] = {}
    for path in files:
        data = read_ledger_csv(path)
        series = report_dir / f"avg_regret__{path.stem}.csv"
        with open(series, "w") as fh:
            fh.write("t,avg_regret\n")
            for ti, ai in zip(data["t"], data["avg_regret"]):
                fh.write(f"{ti},{_fmt(ai)}\n")
        name, seed = path.stem.split("__seed")
        walls.setdefault(seed, {})[name] = float(np.median(data["wall_ms"]))
    ratios = []
    for seed, by_algo in sorted(walls.items()):
        if "mgd" in by_algo and "fmgd" in by_algo:
            ratios.append((seed, by_algo["mgd"], by_algo["fmgd"],
                           by_algo["mgd"] / by_algo["fmgd"]))
    if ratios:
        with open(report_dir / "timing_ratio.csv", "w") as fh:
            fh.write("seed,mgd_median_ms,fmgd_median_ms,ratio\n")
            for seed, m, f, r in ratios:
                fh.write(f"{seed},{_fmt(m)},{_fmt(f)},{_fmt(r)}\n")
    return {"series": len(files), "timing_ratios": [r[-1] for r in ratios]}


def run_lowerbound(cfg: dict) -> dict:
    dom_spec = cfg.get("domain", {"kind": "l2_ball", "dim": 5, "radius": 1.0})
    dom = build_domain({"domain": dom_spec})
    mean_regret, floor = lower_bound_check(
        dom, float(cfg.get("L", 1.0)), int(cfg.get("T", 10000)),
        int(cfg.get("seeds", 50)), base_seed=int(cfg.get("base_seed", 0)))
    return {"mean_regret": mean_regret, "floor": floor,
            "threshold": 0.5 * floor, "passed": mean_regret >= 0.5 * floor}


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="mirrorbench",
                                     description=__doc__.split("\n")[0])
    parser.add_argument("--enforce-bounds", action="store_true",
                        help="exit nonzero if any bound check fails")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment config or preset")
    p_run.add_argument("config")
    p_run.add_argument("--out", default=None, help="output directory")

    p_sweep = sub.add_parser("sweep", help="run a grid of config overrides")
    p_sweep.add_argument("config")
    p_sweep.add_argument("--grid", required=True,
                         help="JSON object {dotted.key: [values]} or a path to one")
    p_sweep.add_argument("--out", default=None)

    p_report = sub.add_parser("report", help="summarize a run directory")
    p_report.add_argument("dir")

    p_low = sub.add_parser("lowerbound", help="adversarial lower-bound check")
    p_low.add_argument("config")
    p_low.add_argument("--out", default=None)

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            cfg = validate_config(load_config(args.config))
            out = output_root(args.out) / cfg["name"] if args.out is None \
                else Path(args.out)
            summary = run_experiment(cfg, out)
            print(f"wrote {out}/summary.json "
                  f"(bounds {'pass' if summary['all_bounds_pass'] else 'FAIL'})")
            if args.enforce_bounds and not summary["all_bounds_pass"]:
                return 1
        elif args.command == "sweep":
            cfg = validate_config(load_config(args.config))
            grid_src = args.grid
            grid = json.loads(Path(grid_src).read_text()) \
                if Path(grid_src).exists() else json.loads(grid_src)
            out = output_root(args.out) / f"{cfg['name']}-sweep" if args.out is None \
                else Path(args.out)
            result = run_sweep(cfg, grid, out)
            print(f"wrote {len(result['manifest']['cells'])} cells under {out}")
            if args.enforce_bounds and not all(
                    s["all_bounds_pass"] for s in result["summaries"]):
                return 1
        elif args.command == "report":
            result = run_report(Path(args.dir))
            print(f"wrote {result['series']} series files; "
                  f"timing ratios: {result['timing_ratios']}")
        elif args.command == "lowerbound":
            cfg = load_config(args.config)
            result = run_lowerbound(cfg)
            line = (f"mean_regret={result['mean_regret']:.4f} "
                    f"floor={result['floor']:.4f} passed={result['passed']}")
            print(line)
            if args.out:
                Path(args.out).mkdir(parents=True, exist_ok=True)
                (Path(args.out) / "lowerbound.json").write_text(
                    json.dumps(result, indent=2))
            if args.enforce_bounds and not result["passed"]:
                return 1
    except (ConfigError, IntegrityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
