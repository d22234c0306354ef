"""Command-line entry points: render, session, analyze, serve, corpus.

A JSON config file can predefine any flag (keys use the flag name with
dashes replaced by underscores); explicit command-line flags win.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import analysis
from .corpus import Corpus, frame_to_u8, make_demo_corpus, read_image, write_image_u8
from .errors import SpvError
from .experiment import (
    DEFAULT_CONDITION_GRID,
    Condition,
    NullAgent,
    OracleAgent,
    StimulusEngine,
    SweepAgent,
    build_trial_plan,
    run_headless_session,
)
from .geometry import normalize_quaternion, quaternion_from_euler
from .renderer import PhospheneRenderer

AGENTS = {"null": NullAgent, "sweep": SweepAgent, "oracle": OracleAgent}


def parse_conditions(text: str):
    """Parse a condition list like ``500x20,200x60`` (phosphenes x fov_deg)."""
    conditions = []
    for item in text.split(","):
        item = item.strip()
        try:
            n, fov = item.split("x")
            conditions.append(Condition(fov_deg=float(fov), phosphenes=int(n)))
        except ValueError:
            raise argparse.ArgumentTypeError(
                f"bad condition {item!r}; expected PHOSPHENESxFOV, e.g. 500x20"
            ) from None
    return conditions


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spvlab",
        description="Simulated prosthetic vision: phosphene rendering, trial protocol, analysis.",
    )
    parser.add_argument("--config", type=Path, help="JSON file of flag defaults")
    sub = parser.add_subparsers(dest="command", required=True)
    parser.spv_subparsers = []

    original_add_parser = sub.add_parser

    def add_parser(*a, **kw):
        child = original_add_parser(*a, **kw)
        parser.spv_subparsers.append(child)
        return child

    sub.add_parser = add_parser

    p = sub.add_parser("render", help="render one phosphene frame from a panorama")
    p.add_argument("--panorama", type=Path, help="equirectangular image (PNG/PGM)")
    p.add_argument("--out", type=Path, help="output image (.png or .pgm)")
    p.add_argument("--quat", type=float, nargs=4, metavar=("A", "B", "C", "D"), help="head orientation quaternion, scalar first")
    p.add_argument("--yaw", type=float, default=0.0, help="degrees, ignored with --quat")
    p.add_argument("--pitch", type=float, default=0.0)
    p.add_argument("--roll", type=float, default=0.0)
    p.add_argument("--fov", type=float, default=60.0, help="circular field of view, degrees")
    p.add_argument("--phosphenes", type=int, default=500)
    p.add_argument("--levels", type=int, default=8)
    p.add_argument("--sigma-ratio", type=float, default=0.5)
    p.add_argument("--eyes", type=int, choices=(1, 2), default=1, help="2 writes both eye buffers side by side")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("session", help="run a scripted headless session over a corpus")
    p.add_argument("--corpus", type=Path, help="corpus manifest JSON")
    p.add_argument("--out", type=Path, help="output session log (.jsonl)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--agent", choices=sorted(AGENTS), default="null")
    p.add_argument("--conditions", type=parse_conditions, default=list(DEFAULT_CONDITION_GRID))
    p.add_argument("--length", type=int, default=15)
    p.add_argument("--break-after", type=int, default=7)
    p.add_argument("--tick-hz", type=float, default=20.0)
    p.add_argument("--timeout", type=float, default=60.0)
    p.set_defaults(func=cmd_session)

    p = sub.add_parser("analyze", help="summarize session logs and fit the published-style curves")
    p.add_argument("--logs", type=Path, nargs="+", help="session log files")
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("--timeout", type=float, default=60.0, help="cap used for timed-out steps")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("serve", help="serve frames and plans to the browser viewer")
    p.add_argument("--corpus", type=Path, help="corpus manifest JSON")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--levels", type=int, default=8)
    p.add_argument("--sigma-ratio", type=float, default=0.5)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("corpus", help="generate a synthetic demo corpus")
    p.add_argument("--out", type=Path, help="corpus directory to create")
    p.add_argument("--scenes", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--width", type=int, default=1024)
    p.add_argument("--height", type=int, default=512)
    p.set_defaults(func=cmd_corpus)
    return parser


def _require(parser, args, *names):
    """Enforce required flags and coerce config-supplied strings to paths."""
    for name in names:
        value = getattr(args, name, None)
        if value is None:
            parser.error(f"--{name.replace('_', '-')} is required")
        if name == "logs":
            setattr(args, name, [Path(v) for v in value])
        elif not isinstance(value, Path):
            setattr(args, name, Path(value))


def cmd_render(parser, args) -> int:
    _require(parser, args, "panorama", "out")
    if args.out.suffix.lower() not in (".png", ".pgm"):
        parser.error("--out must end in .png or .pgm")
    if args.quat is not None:
        quat = normalize_quaternion(args.quat)
    else:
        quat = quaternion_from_euler(args.yaw, args.pitch, args.roll, degrees=True)
    renderer = PhospheneRenderer(
        n_phosphenes=args.phosphenes,
        fov_deg=args.fov,
        levels=args.levels,
        sigma_ratio=args.sigma_ratio,
        eye_count=args.eyes,
    ).fit(read_image(args.panorama))
    start = time.perf_counter()
    frames = renderer.render_eyes(quat)
    elapsed_ms = (time.perf_counter() - start) * 1e3
    buffer = np.hstack([f.buffer for f in frames])
    write_image_u8(args.out, frame_to_u8(buffer))
    print(f"wrote {args.out} ({buffer.shape[1]}x{buffer.shape[0]}, {elapsed_ms:.2f} ms)")
    return 0


def cmd_session(parser, args) -> int:
    _require(parser, args, "corpus", "out")
    if isinstance(args.conditions, str):  # config files carry the raw flag text
        args.conditions = parse_conditions(args.conditions)
    corpus = Corpus.load(args.corpus)
    plan = build_trial_plan(
        corpus.scene_ids,
        conditions=args.conditions,
        seed=args.seed,
        length=args.length,
        break_after=args.break_after,
    )
    if args.agent == "oracle":
        missing = [s.scene for s in plan.steps if corpus.annotations(s.scene) is None]
        if missing:
            parser.error(f"oracle agent needs annotated scenes; missing: {', '.join(missing)}")
    agent = AGENTS[args.agent]()
    log = run_headless_session(
        plan,
        agent,
        StimulusEngine(corpus),
        tick_hz=args.tick_hz,
        timeout_s=args.timeout,
    )
    log.write(args.out)
    steps = len({r["step"] for r in log.records})
    print(f"wrote {args.out} ({steps} steps, {len(log.records)} records)")
    for note in log.skipped_scenes:
        print(f"skipped: {note}", file=sys.stderr)
    return 0


def cmd_analyze(parser, args) -> int:
    _require(parser, args, "logs", "out")
    results = analysis.read_session_logs(args.logs)
    rows = analysis.summarize_conditions(results, timeout_s=args.timeout)
    args.out.mkdir(parents=True, exist_ok=True)
    csv_path = args.out / "summary.csv"
    analysis.write_summary_csv(rows, csv_path)
    print(f"wrote {csv_path} ({len(rows)} conditions, {len(results)} steps)")

    def fit_and_write(name, pairs):
        if len(pairs) < 3:
            print(f"{name}: regression refused, needs >= 3 conditions (have {len(pairs)})")
            return
        x, y = zip(*pairs)
        try:
            fit = analysis.fit_log_regression(x, y)
        except SpvError as exc:
            print(f"{name}: regression refused, {exc}")
            return
        path = args.out / f"{name}_fit.json"
        analysis.write_regression_report(fit, path, label=name)
        print(
            f"wrote {path} (slope {fit.slope:+.4f}, R^2 {fit.r_squared:.4f}, "
            f"F {fit.f_value:.2f}, {analysis.p_band(fit.p_value)})"
        )

    fit_and_write("recognition", [(r.angular_resolution, r.recognition_mean) for r in rows])
    fit_and_write("time", [(r.angular_resolution, r.time_mean_s) for r in rows if r.time_mean_s is not None])

    scores = analysis.normalize_recognition(results)
    try:
        table = analysis.two_way_anova(
            scores,
            [r.condition.phosphenes for r in results],
            [r.condition.fov_deg for r in results],
            names=("phosphenes", "fov_deg"),
        )
    except SpvError as exc:
        print(f"anova: refused, {exc}")
        return 0
    doc = [
        {
            "name": row.name,
            "ss": row.ss,
            "df": row.df,
            # strict JSON has no Infinity literal
            "f_value": None if row.f_value is None or math.isinf(row.f_value) else row.f_value,
            "p_value": row.p_value,
            "p_band": None if row.p_value is None else analysis.p_band(row.p_value),
        }
        for row in table.rows
    ]
    anova_path = args.out / "anova.json"
    anova_path.write_text(json.dumps(doc, indent=1) + "\n")
    print(f"wrote {anova_path}")
    return 0


def cmd_serve(parser, args) -> int:
    _require(parser, args, "corpus")
    import uvicorn

    from .service import create_app

    app = create_app(Corpus.load(args.corpus), levels=args.levels, sigma_ratio=args.sigma_ratio)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_corpus(parser, args) -> int:
    _require(parser, args, "out")
    manifest = make_demo_corpus(args.out, n_scenes=args.scenes, seed=args.seed, width=args.width, height=args.height)
    print(f"wrote {manifest} ({args.scenes} scenes, {args.width}x{args.height})")
    return 0


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    if "--config" in argv:
        config_path = Path(argv[argv.index("--config") + 1])
        try:
            config = {k.replace("-", "_"): v for k, v in json.loads(config_path.read_text()).items()}
        except (OSError, json.JSONDecodeError, AttributeError) as exc:
            print(f"error: cannot read config {config_path}: {exc}", file=sys.stderr)
            return 1
        # config values become parser defaults, so explicit flags still win
        for sub in [parser, *parser.spv_subparsers]:
            sub.set_defaults(**config)
    args = parser.parse_args(argv)
    try:
        return args.func(parser, args)
    except (SpvError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
