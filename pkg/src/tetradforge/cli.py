"""forge: build and inspect affordance-insertion training corpora."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .config import load_config
from .errors import ConfigDrift, CorruptManifest, ForgeError, GatewayDown
from .gateway import make_gateway


def _add_config_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", required=True, help="flat key=value config file")
    p.add_argument("--mock", action="store_true", help="use the in-process mock gateway")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--input", default=None, help="override input_dir")
    p.add_argument("--output", default=None, help="override output_dir")


def _config_from_args(args) -> "PipelineConfig":
    overrides = {
        "mock_gateway": True if args.mock else None,
        "workers": args.workers,
        "seed": args.seed,
        "input_dir": args.input,
        "output_dir": args.output,
    }
    return load_config(args.config, overrides)


def _gateway_from_flags(mock: bool, url: str | None, token: str | None = None):
    return make_gateway(url or os.environ.get("FORGE_GATEWAY_URL"), mock, token)


def cmd_build(args) -> int:
    from .pipeline import build

    config = _config_from_args(args)
    summary = build(config)
    _print_summary(summary)
    return 0


def cmd_resume(args) -> int:
    from .pipeline import resume

    config = _config_from_args(args)
    summary = resume(config)
    _print_summary(summary)
    return 0


def _print_summary(summary: dict) -> None:
    print(f"sources processed : {summary['sources']} ({summary['errors']} errors)")
    print(f"records out       : {summary['records_out']}")
    print("per-stage counts  :")
    for name, count in summary["per_stage_counts"].items():
        print(f"  {name:<16} {count}")


def cmd_stats(args) -> int:
    from .pipeline import corpus_quality_metrics, stats_table

    manifest = Path(args.manifest)
    print(stats_table(manifest))
    if args.metrics:
        gateway = _gateway_from_flags(args.mock, args.gateway_url)
        result = corpus_quality_metrics(manifest, gateway)
        print()
        for key in sorted(result):
            print(f"{key:<24} {result[key]}")
    return 0


def cmd_encode_prompts(args) -> int:
    from .tools import encode_prompts

    written = encode_prompts(args.manifest)
    print(f"encoded {len(written)} position maps")
    return 0


def cmd_noise_preview(args) -> int:
    from .tools import noise_preview

    paths = noise_preview(args.manifest, args.record, args.t, seed=args.seed)
    for kind, path in paths.items():
        print(f"{kind}: {path}")
    return 0


def cmd_eval(args) -> int:
    from .tools import evaluate_sets, format_report, write_report

    gateway = _gateway_from_flags(args.mock, args.gateway_url)
    result = evaluate_sets(args.set_a, args.set_b, gateway, space=args.space, paired=args.paired)
    print(format_report(result))
    if args.json:
        write_report(result, args.json)
        print(f"report written to {args.json}")
    return 0


def cmd_serve_review(args) -> int:
    from .review import create_server, serve_forever

    ui_dir = args.ui_dir
    if ui_dir is None:
        default = Path("frontend/dist")
        ui_dir = str(default) if default.is_dir() else None
    server = create_server(args.out, port=args.port, ui_dir=ui_dir, token=args.token)
    host, port = server.server_address[:2]
    print(f"review server on http://{host}:{port}/ (api under /api/)")
    serve_forever(server)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="forge", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="run the pipeline over an input directory")
    _add_config_args(p)
    p.set_defaults(fn=cmd_build)

    p = sub.add_parser("resume", help="continue an interrupted run")
    _add_config_args(p)
    p.set_defaults(fn=cmd_resume)

    p = sub.add_parser("stats", help="print the filter cascade report")
    p.add_argument("--manifest", required=True)
    p.add_argument("--metrics", action="store_true", help="add corpus quality metrics")
    p.add_argument("--mock", action="store_true")
    p.add_argument("--gateway-url", default=None)
    p.set_defaults(fn=cmd_stats)

    p = sub.add_parser("encode-prompts", help="rasterize prompts to position maps")
    p.add_argument("--manifest", required=True)
    p.set_defaults(fn=cmd_encode_prompts)

    p = sub.add_parser("noise-preview", help="visualize a noised record at step t")
    p.add_argument("--manifest", required=True)
    p.add_argument("--record", required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_noise_preview)

    p = sub.add_parser("eval", help="metrics between two image sets")
    p.add_argument("--set-a", required=True, help="directory of PNGs or a manifest")
    p.add_argument("--set-b", required=True)
    p.add_argument("--space", default="metric_clip")
    p.add_argument("--paired", action="store_true")
    p.add_argument("--json", default=None, help="also write a JSON report")
    p.add_argument("--mock", action="store_true")
    p.add_argument("--gateway-url", default=None)
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("serve-review", help="serve the human labeling API and UI")
    p.add_argument("--out", required=True, help="pipeline output directory")
    p.add_argument("--port", type=int, default=8371)
    p.add_argument("--ui-dir", default=None)
    p.add_argument("--token", default=None)
    p.set_defaults(fn=cmd_serve_review)

    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.fn(args)
    except GatewayDown as exc:
        print(f"gateway down, run checkpointed: {exc}", file=sys.stderr)
        print("fix the gateway and run `forge resume` with the same config", file=sys.stderr)
        return 2
    except (ConfigDrift, CorruptManifest) as exc:
        print(f"refusing to continue: {exc}", file=sys.stderr)
        return 3
    except (ForgeError, ValueError, FileNotFoundError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
