"""Command-line entry point.

Subcommands: ``sample`` (run one experiment config), ``compare`` (several
configs sharing a target, tabulated against a baseline), ``verify`` (property
suite), ``ess`` (recompute diagnostics from an existing draws.csv).

Exit codes: 0 success, 1 usage/config error, 2 verification failure.
"""

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import config as cfgmod
from . import diagnostics, gp_surrogate, verify
from .samplers import (
    Chain,
    ExactGradientOracle,
    HmcConfig,
    HmcSampler,
    SghmcConfig,
    run_chain,
    sghmc_run,
)
from .schedule import NetSpec, TrainingSchedule, run_nng_chain


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(1)


def run_experiment(cfg, verbose=False):
    """Execute one resolved config; returns (chain, artifacts dict)."""
    target = cfgmod.build_target(cfg["target"])
    smp = cfg["sampler"]
    init = (
        np.asarray(smp["init"], dtype=float)
        if smp["init"] is not None
        else cfgmod.default_init(target, cfg["target"])
    )
    hmc_cfg = HmcConfig(
        leapfrog_steps=smp["leapfrog_steps"],
        step_size=smp["step_size"],
        n_iterations=smp["n_iterations"],
        seed=smp["seed"],
    )
    orc = cfg["oracle"]
    artifacts = {}

    if orc["kind"] == "exact":
        chain = run_chain(target, ExactGradientOracle(target), hmc_cfg, init)

    elif orc["kind"] == "nn":
        sched = cfg["schedule"]
        schedule = TrainingSchedule(
            start_iter=sched["start_iter"],
            end_iter=sched["end_iter"],
            check_interval=sched["check_interval"],
            acceptance_target=sched["acceptance_target"],
            probe_draws=sched["probe_draws"],
        )
        spec = NetSpec(
            hidden=orc["hidden"],
            n_blocks=orc["blocks"],
            epochs=orc["epochs"],
            batch_size=orc["batch_size"],
            learning_rate=orc["learning_rate"],
            seed=orc["seed"],
            max_train_points=orc["max_train_points"],
        )
        result, chain = run_nng_chain(
            target,
            hmc_cfg,
            spec,
            schedule,
            init,
            collect_stride=orc["collect_stride"],
        )
        if result.adopted:
            artifacts["net"] = result.net
        if verbose:
            print(
                f"schedule: adopted={result.adopted} "
                f"probes={['%.2f' % a for a in result.probe_acceptances]}"
            )

    elif orc["kind"] == "sghmc":
        sg_cfg = SghmcConfig(
            step_size=smp["step_size"],
            n_leapfrog=smp["leapfrog_steps"],
            minibatch_size=orc["minibatch_size"],
            friction=orc["friction"],
            n_iterations=smp["n_iterations"],
            seed=smp["seed"],
            mh_correction=orc["mh_correction"],
        )
        chain = sghmc_run(target, sg_cfg, init)

    elif orc["kind"] == "gp_surrogate":
        n_train = orc["n_train"]
        tic = time.perf_counter()
        sampler = HmcSampler(
            target,
            ExactGradientOracle(target),
            hmc_cfg.leapfrog_steps,
            hmc_cfg.step_size,
            smp["seed"] + 1,
            init,
        )
        seen = {}
        while len(seen) < n_train and len(seen) < 5 * n_train + 100:
            q, _, _ = sampler.step()
            seen.setdefault(q.tobytes(), (q.copy(), sampler.u_q))
        pairs = list(seen.values())[:n_train]
        train_q = np.array([p[0] for p in pairs])
        train_u = np.array([p[1] for p in pairs])
        collect_s = time.perf_counter() - tic
        tic = time.perf_counter()
        surr = gp_surrogate.fit(
            train_q,
            train_u,
            length_grid=orc["length_grid"],
            noise_grid=orc["noise_grid"],
        )
        train_s = time.perf_counter() - tic
        chain = run_chain(target, surr, hmc_cfg, init)
        chain.timings["collect_s"] = collect_s
        chain.timings["train_s"] = train_s
        chain.meta["gp_length_scale"] = surr.length_scale
        chain.meta["gp_noise_var"] = surr.noise_var
    else:  # unreachable after config validation
        raise cfgmod.ConfigError(f"unknown oracle kind {orc['kind']!r}")

    return chain, artifacts


def summarize(cfg, chain):
    rep = diagnostics.ess(chain.draws, elapsed_s=max(chain.total_time(), 1e-12))
    return {
        "name": cfg["name"],
        "acceptance": chain.acceptance,
        "ess_min": rep.minimum,
        "ess_median": rep.median,
        "ess_max": rep.maximum,
        "median_ess_per_s": rep.median_per_second,
        "timings": chain.timings,
        "counters": chain.counters,
        "meta": {k: v for k, v in chain.meta.items() if _jsonable(v)},
    }


def _jsonable(v):
    try:
        json.dumps(v)
        return True
    except TypeError:
        return False


def _prepare_run_dir(cfg, out_override, overwrite):
    base = Path(out_override) if out_override else Path(cfg["output_dir"])
    run_dir = base / cfg["name"]
    if run_dir.exists() and any(run_dir.iterdir()) and not overwrite:
        raise SystemExit(
            f"error: {run_dir} already has contents; run directories are "
            "append-only (pass --overwrite to replace)"
        )
    run_dir.mkdir(parents=True, exist_ok=True)
    return run_dir


def cmd_sample(args):
    try:
        cfg = cfgmod.load(args.config)
    except (OSError, cfgmod.ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    run_dir = _prepare_run_dir(cfg, args.output_dir, args.overwrite)
    (run_dir / "resolved_config.json").write_text(cfgmod.dumps(cfg))
    chain, artifacts = run_experiment(cfg, verbose=args.verbose)
    chain.to_csv(run_dir / "draws.csv")
    if "net" in artifacts:
        artifacts["net"].save(run_dir / "net.json")
    summary = summarize(cfg, chain)
    (run_dir / "summary.json").write_text(json.dumps(summary, indent=2))
    print(f"run written to {run_dir}")
    print(json.dumps(summary, indent=2))
    return 0


def cmd_compare(args):
    try:
        cfgs = [cfgmod.load(p) for p in args.configs]
    except (OSError, cfgmod.ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if not 0 <= args.baseline < len(cfgs):
        print("error: baseline index out of range", file=sys.stderr)
        return 1
    tgt0 = cfgs[0]["target"]
    if any(c["target"] != tgt0 for c in cfgs[1:]):
        print("error: compare requires configs sharing one target", file=sys.stderr)
        return 1
    entries = []
    for cfg in cfgs:
        if args.verbose:
            print(f"running {cfg['name']} ...")
        chain, _ = run_experiment(cfg, verbose=args.verbose)
        entries.append((cfg["name"], chain))
    rows, table = diagnostics.speed_report(entries, baseline=args.baseline)
    print(table)
    pairs = {}
    base_name, base_chain = entries[args.baseline]
    for name, chain in entries:
        if name == base_name:
            continue
        comp = diagnostics.compare_chains(base_chain.draws, chain.draws)
        pairs[f"{base_name} vs {name}"] = {
            k: v.tolist() for k, v in comp.items()
        }
    if args.output_dir:
        out = Path(args.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "comparison.json").write_text(
            json.dumps({"rows": rows, "pairs": pairs}, indent=2)
        )
        (out / "table.txt").write_text(table + "\n")
        print(f"comparison written to {out}")
    return 0


def cmd_verify(args):
    results = verify.run_all(seed=args.seed)
    failed = False
    for name, passed, detail in results:
        status = "PASS" if passed else "FAIL"
        print(f"[{status}] {name}: {detail}")
        failed = failed or not passed
    return 2 if failed else 0


def cmd_ess(args):
    try:
        chain = Chain.from_csv(args.draws)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    rep = diagnostics.ess(chain.draws, burn_in=args.burn_in)
    print(
        json.dumps(
            {
                "n_draws": chain.n,
                "burn_in": rep.burn_in,
                "ess_min": rep.minimum,
                "ess_median": rep.median,
                "ess_max": rep.maximum,
                "degenerate": rep.degenerate,
                "acceptance": chain.acceptance,
            },
            indent=2,
        )
    )
    return 0


def main(argv=None):
    parser = _Parser(prog="gradhmc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_sample = sub.add_parser("sample", help="run one experiment config")
    p_sample.add_argument("config", help="path to a JSON experiment config")
    p_sample.add_argument("--output-dir", help="override the config output_dir")
    p_sample.add_argument("--overwrite", action="store_true")
    p_sample.add_argument("-v", "--verbose", action="store_true")
    p_sample.set_defaults(func=cmd_sample)

    p_cmp = sub.add_parser("compare", help="run several configs on one target")
    p_cmp.add_argument("configs", nargs="+", help="config paths")
    p_cmp.add_argument("--baseline", type=int, default=0)
    p_cmp.add_argument("--output-dir", help="where to write comparison records")
    p_cmp.add_argument("-v", "--verbose", action="store_true")
    p_cmp.set_defaults(func=cmd_compare)

    p_ver = sub.add_parser("verify", help="run the property-check suite")
    p_ver.add_argument("--seed", type=int, default=0)
    p_ver.set_defaults(func=cmd_verify)

    p_ess = sub.add_parser("ess", help="recompute diagnostics from draws.csv")
    p_ess.add_argument("draws", help="path to a draws.csv written by sample")
    p_ess.add_argument("--burn-in", type=float, default=0.1)
    p_ess.set_defaults(func=cmd_ess)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SystemExit as exc:
        if isinstance(exc.code, str):
            print(exc.code, file=sys.stderr)
            return 1
        raise


if __name__ == "__main__":
    sys.exit(main())
