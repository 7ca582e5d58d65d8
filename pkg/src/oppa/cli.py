"""Command-line front end: one verb per experiment stage.

Every verb takes --config (flat JSON file), --seed (overrides the config
seed) and --out (output directory). Failures print a structured JSON
diagnostic to stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .harness import (ExperimentConfig, ablation_table, curve_to_csv,
                      load_policy, run_ablations, run_crossplay, run_eval,
                      run_pretrain, run_train, save_policy)


def _add_common(sub):
    sub.add_argument("--config", help="flat JSON config file")
    sub.add_argument("--seed", type=int, help="override the config seed")
    sub.add_argument("--out", help="output directory")


def _config(args) -> ExperimentConfig:
    if args.config:
        cfg = ExperimentConfig.from_json(Path(args.config).read_text())
    else:
        cfg = ExperimentConfig()
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    return cfg.validate()


def _out_dir(args) -> Path:
    out = Path(args.out if args.out else ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_pretrain(args) -> int:
    cfg = _config(args)
    out = _out_dir(args)
    policy, report = run_pretrain(cfg)
    save_policy(policy, out / "checkpoint")
    (out / "pretrain_report.json").write_text(
        json.dumps(report, sort_keys=True, indent=2) + "\n")
    print(json.dumps(report, sort_keys=True))
    return 0


def cmd_train(args) -> int:
    cfg = _config(args)
    out = _out_dir(args)
    policy = load_policy(cfg, Path(args.init)) if args.init else None
    result = run_train(cfg, policy=policy)
    save_policy(result.policy, out / "checkpoint")
    (out / "curve.csv").write_text(curve_to_csv(result.curve))
    if result.curve:
        print(json.dumps(result.curve[-1], sort_keys=True))
    return 0


def cmd_eval(args) -> int:
    cfg = _config(args)
    out = _out_dir(args)
    policy = load_policy(cfg, Path(args.ckpt))
    seeds = tuple(int(s) for s in args.seeds.split(","))
    report = run_eval(policy, cfg, seeds=seeds)
    (out / "eval_report.csv").write_text(report.to_csv())
    print(report.to_csv(), end="")
    return 0


def cmd_crossplay(args) -> int:
    cfg = _config(args)
    out = _out_dir(args)
    policy_x = load_policy(cfg, Path(args.ckpt_a))
    policy_y = load_policy(cfg, Path(args.ckpt_b))
    report = run_crossplay(policy_x, policy_y, cfg, episodes=args.episodes,
                           seed=cfg.seed, label=args.label)
    (out / "crossplay.csv").write_text(report.to_csv())
    print(report.to_csv(), end="")
    return 0


def cmd_ablate(args) -> int:
    cfg = _config(args)
    out = _out_dir(args)
    results = run_ablations(cfg)
    table = ablation_table(results)
    (out / "ablations.csv").write_text(table)
    for name, bundle in results.items():
        (out / f"curve_{name}.csv").write_text(curve_to_csv(bundle["train"].curve))
    print(table, end="")
    return 0


def cmd_play_serve(args) -> int:
    import uvicorn

    from .service import create_app

    cfg = _config(args)
    policy = load_policy(cfg, Path(args.ckpt)) if args.ckpt else None
    app = create_app(cfg, policy=policy)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oppa",
        description="Opposite-aware dialogue policy experiments")
    subs = parser.add_subparsers(dest="verb", required=True)

    p = subs.add_parser("pretrain", help="supervised warm start from scripts")
    _add_common(p)
    p.set_defaults(fn=cmd_pretrain)

    p = subs.add_parser("train", help="reinforcement-learning training run")
    _add_common(p)
    p.add_argument("--init", help="checkpoint directory to start from")
    p.set_defaults(fn=cmd_train)

    p = subs.add_parser("eval", help="greedy evaluation of a checkpoint")
    _add_common(p)
    p.add_argument("--ckpt", required=True, help="checkpoint directory")
    p.add_argument("--seeds", default="0", help="comma-separated eval seeds")
    p.set_defaults(fn=cmd_eval)

    p = subs.add_parser("crossplay", help="two checkpoints play each other")
    _add_common(p)
    p.add_argument("--ckpt-a", required=True)
    p.add_argument("--ckpt-b", required=True)
    p.add_argument("--episodes", type=int, default=100)
    p.add_argument("--label", default="x vs y")
    p.set_defaults(fn=cmd_crossplay)

    p = subs.add_parser("ablate", help="train and evaluate every variant")
    _add_common(p)
    p.set_defaults(fn=cmd_ablate)

    p = subs.add_parser("play-serve", help="serve live human-vs-agent sessions")
    _add_common(p)
    p.add_argument("--ckpt", help="checkpoint directory for the agent")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(fn=cmd_play_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except Exception as e:  # structured diagnostics for scripting
        print(json.dumps({"error": type(e).__name__, "detail": str(e)}),
              file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
