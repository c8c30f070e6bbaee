"""Command-line entry point: ``extract --images <dir> --out <file.fset>``.

Logs go to stderr; a single JSON status line goes to stdout. Exit codes:
0 success, 2 invalid arguments, 3 input/output failure (unreadable
directory, unobtainable weights, unwritable output), 4 no decodable image
in the directory.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .errors import AdapterError, ConfigError, EmptyInputError, InputError, WeightsError
from .extract import ExtractorConfig, run_extraction
from .model import MODE_NAMES, MODEL_NAMES, WEIGHTS_POLICIES

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_FILE = 3
EXIT_PRECONDITION = 4

log = logging.getLogger("extractor_adapter")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="extract",
        description="Turn a directory of images into an FSET feature file.",
    )
    parser.add_argument("--model", choices=MODEL_NAMES, default="resnet34")
    parser.add_argument(
        "--mode",
        choices=MODE_NAMES,
        default="conv",
        help="conv = pooled last-convolutional-layer features; softmax = 1000-class probabilities",
    )
    parser.add_argument("--images", required=True, help="directory of image files")
    parser.add_argument("--out", required=True, help="output FSET path")
    parser.add_argument("--batch", type=int, default=64, help="inference batch size")
    parser.add_argument("--device", default="cpu", help="torch device selector")
    parser.add_argument(
        "--weights",
        choices=WEIGHTS_POLICIES,
        default="auto",
        help="auto = pretrained when downloadable, else a fixed-seed initialization",
    )
    return parser


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(levelname)s %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        config = ExtractorConfig(
            images_dir=args.images,
            out_path=args.out,
            model=args.model,
            mode=args.mode,
            batch=args.batch,
            device=args.device,
            weights=args.weights,
        )
    except ConfigError as exc:
        log.error("invalid arguments: %s", exc)
        return EXIT_USAGE

    try:
        result = run_extraction(config)
    except EmptyInputError as exc:
        log.error("precondition violated: %s", exc)
        return EXIT_PRECONDITION
    except (InputError, WeightsError) as exc:
        log.error("%s", exc)
        return EXIT_FILE
    except ConfigError as exc:
        log.error("invalid arguments: %s", exc)
        return EXIT_USAGE
    except (AdapterError, OSError) as exc:
        log.error("extraction failed: %s", exc)
        return EXIT_FILE
    except (RuntimeError, ValueError) as exc:
        # torch rejects unknown/unavailable device selectors at runtime
        log.error("extraction failed: %s", exc)
        return EXIT_USAGE

    status = {
        "command": "extract",
        "model": config.model,
        "mode": config.mode,
        "n": result.n,
        "d": result.d,
        "space": result.space_tag,
        "skipped": len(result.skipped),
        "out": result.out_path,
        "manifest": result.manifest_path,
        "weights": result.weights.get("source"),
        "status": "ok",
    }
    print(json.dumps(status, sort_keys=True))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
