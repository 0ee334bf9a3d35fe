"""Command-line entry point: ``acousim run`` and ``acousim validate``."""

import argparse
import logging
import sys

from ..exceptions import AcousimError, ParseError, StageFailure, UpstreamMissing, ValidationError
from .cache import STAGES
from .config import build_room, load_config
from .stages import run_pipeline, select_positions

EXIT_OK, EXIT_VALIDATION, EXIT_STAGE = 0, 2, 3


def _parser():
    p = argparse.ArgumentParser(prog="acousim", description="Indoor acoustic positioning simulator.")
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run pipeline stages")
    run.add_argument("--config", required=True)
    run.add_argument("--stage", choices=(*STAGES, "all"), default="all")
    run.add_argument("--workers", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--out")
    run.add_argument("--force", action="store_true", help="ignore cached outputs")
    run.add_argument("-v", "--verbose", action="store_true")
    val = sub.add_parser("validate", help="check a config file without running it")
    val.add_argument("--config", required=True)
    return p


def main(argv=None):
    args = _parser().parse_args(argv)
    level = logging.INFO if getattr(args, "verbose", False) else logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        if args.command == "validate":
            room = build_room(cfg)
            pos = select_positions(cfg, room)
            print(f"ok: {room.n_walls}-wall room, volume {room.volume:.3f} m^3, "
                  f"{len(cfg.transducers.speakers)} speaker(s), "
                  f"{len(pos.test_grid)} test / {len(pos.train_cloud)} train / {len(pos.dev_cloud)} dev positions")
            return EXIT_OK
        run = {}
        if args.seed is not None:
            run["seed"] = args.seed
        if args.workers is not None:
            if args.workers < 1:
                raise ValidationError("must be >= 1", "--workers")
            run["workers"] = args.workers
        if args.out is not None:
            run["out"] = args.out
        if run:
            cfg = cfg.with_overrides(run=run)
    except (ParseError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        report = run_pipeline(cfg, args.stage, force=args.force)
    except StageFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        for tid, msg in sorted(exc.failures.items(), key=lambda kv: str(kv[0])):
            print(f"  task {tid}: {msg}", file=sys.stderr)
        return EXIT_STAGE
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (UpstreamMissing, AcousimError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STAGE
    except Exception as exc:  # anything else is still a failed stage, not a crash
        logging.getLogger(__name__).debug("stage failure", exc_info=True)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_STAGE
    for name in STAGES:
        if name in report.executed:
            print(f"{name}: executed")
        elif name in report.cached:
            print(f"{name}: cached")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
