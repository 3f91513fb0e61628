"""Command-line front end: simulate | detect | estimate | verify.

Configuration comes from an optional flat key=value file (--config) with
command-line flags taking precedence.  Every command is a deterministic
function of (config, master seed); outputs are byte-identical across
reruns and thread counts.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import detect, estimate, verify
from . import stats as tstats
from . import tree_core as tc
from .rng import RngSpec
from .tree_core import GrowthRule

_STATISTICS = {
    "MaxDegreeJoint": detect.MAX_DEGREE_JOINT,
    "HProduct": detect.H_PRODUCT,
    "AntiCentralityGap": detect.ANTICENTRALITY_GAP,
}


@dataclass
class ExperimentConfig:
    rule: GrowthRule = GrowthRule.UA
    seed_spec: str = "S2"
    n: int = 1000
    t_star: list[int] = field(default_factory=list)
    trials: int = 1
    alpha: float = 0.05
    statistic: str = "AntiCentralityGap"
    master_seed: int = 0
    output_path: str | None = None
    threads: int | None = None
    k_constant: float = estimate.K_CONSTANT_DEFAULT

    def validate(self) -> None:
        if self.n < 1:
            raise ValueError(f"n must be positive, got {self.n}")
        if self.trials < 1:
            raise ValueError(f"trials must be positive, got {self.trials}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.statistic not in _STATISTICS:
            raise ValueError(f"unknown statistic {self.statistic!r}")
        seed = tc.make_seed(self.seed_spec)
        for ts in self.t_star:
            if not seed.size <= ts <= self.n:
                raise ValueError(f"t_star={ts} outside [{seed.size}, {self.n}]")


def _read_config_file(path: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for ln, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{ln}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _build_config(args: argparse.Namespace) -> ExperimentConfig:
    cfg = ExperimentConfig()
    values: dict[str, str] = {}
    if getattr(args, "config", None):
        values.update(_read_config_file(args.config))
    for key in ("rule", "seed_spec", "n", "t_star", "trials", "alpha",
                "statistic", "master_seed", "threads", "out", "k_constant"):
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = str(flag)
    if "rule" in values:
        cfg.rule = GrowthRule(values["rule"])
    if "seed_spec" in values:
        cfg.seed_spec = values["seed_spec"]
    if "n" in values:
        cfg.n = int(values["n"])
    if "t_star" in values:
        cfg.t_star = [int(tok) for tok in values["t_star"].split(",") if tok.strip()]
    if "trials" in values:
        cfg.trials = int(values["trials"])
    if "alpha" in values:
        cfg.alpha = float(values["alpha"])
    if "statistic" in values:
        cfg.statistic = values["statistic"]
    if "master_seed" in values:
        cfg.master_seed = int(values["master_seed"])
    if "threads" in values:
        cfg.threads = int(values["threads"])
    if "out" in values:
        cfg.output_path = values["out"]
    if "k_constant" in values:
        cfg.k_constant = float(values["k_constant"])
    cfg.validate()
    return cfg


def _emit(cfg: ExperimentConfig, text: str) -> None:
    if cfg.output_path:
        Path(cfg.output_path).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_simulate(cfg: ExperimentConfig) -> int:
    seed = tc.make_seed(cfg.seed_spec)
    base = RngSpec(cfg.master_seed)
    stem = cfg.output_path or "tree"
    pair_mode = bool(cfg.t_star)
    t_star = cfg.t_star[0] if pair_mode else None
    for i in range(cfg.trials):
        spec = base.substream(i)
        if pair_mode:
            pair = tc.grow_correlated(seed, cfg.rule, cfg.n, t_star, spec)
            trees = [(f"{stem}_{i:04d}_1.tree", pair.t1), (f"{stem}_{i:04d}_2.tree", pair.t2)]
        else:
            trees = [(f"{stem}_{i:04d}.tree", tc.grow(seed, cfg.rule, cfg.n, spec))]
        for path, t in trees:
            tc.save_tree(t, path)
            c = tstats.centroid(t)
            print(
                f"{path}: n={t.n} max_degree={tstats.max_degree(t)} "
                f"H={tstats.H_statistic(t):.12g} psi={c.psi} centroid={c.canonical}"
            )
    return 0


def cmd_detect(cfg: ExperimentConfig) -> int:
    seed = tc.make_seed(cfg.seed_spec)
    stat = _STATISTICS[cfg.statistic]
    base = RngSpec(cfg.master_seed)
    t_stars = cfg.t_star or [seed.size]
    lines = [detect.POWER_CSV_HEADER]
    for j, ts in enumerate(t_stars):
        report = detect.estimate_power(
            stat, seed, cfg.rule, cfg.n, ts, cfg.alpha,
            trials_cal=max(100, cfg.trials), trials_power=cfg.trials,
            rng=base.substream(j), threads=cfg.threads,
        )
        lines.append(detect.power_csv_row(report, stat, cfg.n, ts, cfg.master_seed))
    _emit(cfg, "\n".join(lines) + "\n")
    return 0


def cmd_estimate(cfg: ExperimentConfig) -> int:
    seed = tc.make_seed(cfg.seed_spec)
    base = RngSpec(cfg.master_seed)
    t_stars = cfg.t_star or [cfg.n]
    lines = [estimate.ESTIMATE_CSV_HEADER]
    summaries = {}
    for j, ts in enumerate(t_stars):
        reports, summary = estimate.batch_estimate(
            seed, cfg.rule, cfg.n, ts, cfg.trials, base.substream(j),
            k_constant=cfg.k_constant, threads=cfg.threads,
        )
        lines.extend(r.csv_row() for r in reports)
        summaries[str(ts)] = summary
    _emit(cfg, "\n".join(lines) + "\n")
    print(json.dumps(summaries, indent=2))
    return 0


def cmd_verify(cfg: ExperimentConfig, suite: str) -> int:
    results = verify.run_all() if suite == "all" else verify.run_suite(suite)
    for r in results:
        print(r.line())
    return 0 if all(r.passed for r in results) else 1


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--rule", choices=["UA", "PA"])
    p.add_argument("--seed-spec", dest="seed_spec")
    p.add_argument("--n", type=int)
    p.add_argument("--t-star", dest="t_star", help="comma-separated list")
    p.add_argument("--trials", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--statistic", choices=sorted(_STATISTICS))
    p.add_argument("--master-seed", dest="master_seed", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--out")
    p.add_argument("--k-constant", dest="k_constant", type=float)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="corrgrow",
        description="Simulate correlated randomly growing trees; detect and estimate correlation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("simulate", "detect", "estimate"):
        _add_common(sub.add_parser(name))
    pv = sub.add_parser("verify")
    pv.add_argument("suite", choices=sorted(verify.SUITES) + ["all"])
    _add_common(pv)

    args = parser.parse_args(argv)
    try:
        cfg = _build_config(args)
    except (ValueError, OSError) as exc:
        parser.error(str(exc))
    if args.command == "simulate":
        return cmd_simulate(cfg)
    if args.command == "detect":
        return cmd_detect(cfg)
    if args.command == "estimate":
        return cmd_estimate(cfg)
    return cmd_verify(cfg, args.suite)


if __name__ == "__main__":
    sys.exit(main())
