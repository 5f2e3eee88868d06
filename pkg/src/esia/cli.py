"""Batch command-line interface.

Subcommands: ``schedule``, ``attack``, ``mitigate``, ``eval``, ``metrics``.

Exit codes: 0 success, 2 usage, 3 input/output, 4 manifest, 5 adapter.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path, PurePosixPath

from .attack import AttackMode, PadPolicy, attack, derive_seed, generate_schedule, n_from_fraction
from .core import PHASES, IDENTICAL, psnr
from .errors import AdapterError, DimensionError, EvalError, ManifestError, ScheduleError
from .evaluation import CorpusItem, ExperimentConfig, adapter_from_config, run_experiment
from .imageio import IMAGE_SUFFIXES, atomic_write, load_image, save_png
from .manifest import AttackManifest, ManifestEntry
from .mitigation import mitigate

log = logging.getLogger("esia")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_MANIFEST = 4
EXIT_ADAPTER = 5

MANIFEST_NAME = "manifest.json"
_MASK64 = (1 << 64) - 1


class CLIError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def list_images(root: Path) -> dict:
    """Map image id (posix path relative to ``root``) to file path."""
    if root.is_file():
        return {root.name: root}
    if not root.is_dir():
        raise CLIError(f"no such file or directory: {root}", EXIT_IO)
    found = {}
    for path in sorted(root.rglob("*")):
        if path.is_file() and path.suffix.lower() in IMAGE_SUFFIXES:
            found[PurePosixPath(path.relative_to(root).as_posix()).as_posix()] = path
    return found


def _output_name(image_id: str) -> str:
    return PurePosixPath(image_id).with_suffix(".png").as_posix()


def _pool_map(fn, items, workers):
    if workers <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def cmd_schedule(args) -> int:
    entries = []
    for k in range(args.count):
        seed = (args.seed + k) & _MASK64
        s = generate_schedule(args.height, args.n, seed)
        entries.append({"height": s.source_height, "n": s.n, "seed": s.seed, "rows": list(s.rows)})
    print(json.dumps({"schedules": entries}, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_attack(args) -> int:
    if (args.n is None) == (args.fraction is None):
        raise CLIError("give exactly one of --n and --fraction", EXIT_USAGE)
    images = list_images(Path(args.input))
    if not images:
        raise CLIError(f"no images found under {args.input}", EXIT_IO)
    out_dir = Path(args.output)
    mode = AttackMode(args.mode)

    def run(item):
        image_id, path = item
        try:
            img = load_image(path)
        except OSError as exc:
            log.warning("skipping %s: %s", image_id, exc)
            return None
        h, w, _ = img.shape
        n = args.n if args.n is not None else n_from_fraction(args.fraction, h)
        if n > h:
            log.warning("skipping %s: n=%d exceeds height %d", image_id, n, h)
            return None
        seed = derive_seed(args.seed, image_id, n)
        schedule = generate_schedule(h, n, seed)
        save_png(out_dir / _output_name(image_id), attack(img, schedule, mode, args.phase, args.pad))
        return ManifestEntry(image_id, w, h, mode.value, args.phase, PadPolicy(args.pad).value,
                             seed, n, schedule.rows)

    entries = [e for e in _pool_map(run, sorted(images.items()), args.workers) if e is not None]
    if not entries:
        raise CLIError("no image could be attacked", EXIT_IO)
    atomic_write(out_dir / MANIFEST_NAME, AttackManifest(tuple(entries)).to_json().encode())
    log.info("attacked %d of %d images", len(entries), len(images))
    return EXIT_OK


def _read_manifest(path: Path) -> AttackManifest:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise CLIError(f"cannot read manifest {path}: {exc}", EXIT_MANIFEST) from exc
    return AttackManifest.from_json(text)


def cmd_mitigate(args) -> int:
    attacked_dir = Path(args.attacked)
    manifest_path = Path(args.manifest) if args.manifest else attacked_dir / MANIFEST_NAME
    manifest = _read_manifest(manifest_path)
    by_output = {_output_name(e.image_id): e for e in manifest.entries}
    images = list_images(attacked_dir)
    missing = sorted(i for i in images if i not in by_output)
    if missing:
        raise CLIError("no manifest entry for: " + ", ".join(missing), EXIT_MANIFEST)
    out_dir = Path(args.output)

    def run(item):
        image_id, path = item
        entry = by_output[image_id]
        img = load_image(path)
        if img.shape[:2] != (entry.height, entry.width):
            raise CLIError(f"{image_id}: size {img.shape[1]}x{img.shape[0]} does not match "
                           f"manifest {entry.width}x{entry.height}", EXIT_MANIFEST)
        save_png(out_dir / image_id, mitigate(img, entry.schedule))

    _pool_map(run, sorted(images.items()), args.workers)
    return EXIT_OK


def read_labels(path: Path) -> dict:
    """Labels from a JSON object ``{id: label}`` or a CSV with ``image_id,label`` columns."""
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".json":
        labels = json.loads(text)
        if not isinstance(labels, dict):
            raise CLIError("JSON label file must be an object mapping image id to label", EXIT_IO)
        return {str(k): str(v) for k, v in labels.items()}
    rows = list(csv.DictReader(text.splitlines()))
    if rows and not {"image_id", "label"} <= set(rows[0]):
        raise CLIError("CSV label file needs 'image_id' and 'label' columns", EXIT_IO)
    return {r["image_id"]: r["label"] for r in rows}


def cmd_eval(args) -> int:
    images = list_images(Path(args.corpus))
    labels = read_labels(Path(args.labels))
    only_images = sorted(set(images) - set(labels))
    only_labels = sorted(set(labels) - set(images))
    if only_images or only_labels:
        lines = [f"- {i} (image without label)" for i in only_images]
        lines += [f"+ {i} (label without image)" for i in only_labels]
        raise CLIError("labels do not match corpus:\n" + "\n".join(lines), EXIT_IO)
    try:
        cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise CLIError(f"cannot read config {args.config}: {exc}", EXIT_USAGE) from exc
    try:
        config = ExperimentConfig.from_dict(cfg)
        adapter = adapter_from_config(cfg["adapter"]) if cfg.get("adapter") else None
    except (EvalError, TypeError, ValueError) as exc:
        raise CLIError(f"invalid config: {exc}", EXIT_USAGE) from exc
    corpus = [CorpusItem(i, load_image(p), labels[i]) for i, p in sorted(images.items())]
    result = run_experiment(corpus, config, adapter)
    out_dir = Path(args.output)
    atomic_write(out_dir / "corpus_result.json", result.corpus.to_json().encode())
    atomic_write(out_dir / "degradation_report.json", result.report_json().encode())
    if result.failures:
        log.warning("classifier failures: %s", result.failures)
    return EXIT_OK


def cmd_metrics(args) -> int:
    a, b = Path(args.reference), Path(args.candidate)
    if a.is_file() and b.is_file():
        pairs = [(a.name, a, b)]
    else:
        ref, cand = list_images(a), list_images(b)
        common = sorted(set(ref) & set(cand))
        if not common:
            raise CLIError("no images in common between the two directories", EXIT_IO)
        pairs = [(i, ref[i], cand[i]) for i in common]
    for image_id, pa, pb in pairs:
        value = psnr(load_image(pa), load_image(pb))
        print(f"{image_id}\t{'identical' if value == IDENTICAL else f'{value:.4f}'}")
    return EXIT_OK


def _nonneg_int(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="esia", description="Synthesize and mitigate row-drop camera attacks.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("schedule", help="print drop schedules")
    s.add_argument("--height", type=int, required=True)
    s.add_argument("--n", type=_nonneg_int, required=True)
    s.add_argument("--seed", type=_nonneg_int, default=0)
    s.add_argument("--count", type=_nonneg_int, default=1)
    s.set_defaults(func=cmd_schedule)

    workers = os.cpu_count() or 1

    s = sub.add_parser("attack", help="attack an image or a directory of images")
    s.add_argument("input")
    s.add_argument("output")
    s.add_argument("--mode", choices=[m.value for m in AttackMode], default=AttackMode.COLOR_STRIPS.value)
    s.add_argument("--n", type=_nonneg_int)
    s.add_argument("--fraction", type=float)
    s.add_argument("--seed", type=_nonneg_int, default=0)
    s.add_argument("--phase", choices=PHASES, default="RGGB")
    s.add_argument("--pad", choices=[m.value for m in PadPolicy], default=PadPolicy.REPLICATE_LAST.value)
    s.add_argument("--workers", type=int, default=workers)
    s.set_defaults(func=cmd_attack)

    s = sub.add_parser("mitigate", help="median-fill attacked images listed in a manifest")
    s.add_argument("attacked")
    s.add_argument("output")
    s.add_argument("--manifest", help=f"defaults to ATTACKED/{MANIFEST_NAME}")
    s.add_argument("--workers", type=int, default=workers)
    s.set_defaults(func=cmd_mitigate)

    s = sub.add_parser("eval", help="run the degradation experiment on a labelled corpus")
    s.add_argument("corpus")
    s.add_argument("--labels", required=True)
    s.add_argument("--config", required=True)
    s.add_argument("--output", required=True)
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("metrics", help="PSNR between two images or two directories")
    s.add_argument("reference")
    s.add_argument("candidate")
    s.set_defaults(func=cmd_metrics)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except CLIError as exc:
        print(f"esia {args.command}: {exc}", file=sys.stderr)
        return exc.code
    except (ScheduleError, DimensionError, EvalError) as exc:
        print(f"esia {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ManifestError as exc:
        print(f"esia {args.command}: {exc}", file=sys.stderr)
        return EXIT_MANIFEST
    except AdapterError as exc:
        print(f"esia {args.command}: {exc}", file=sys.stderr)
        return EXIT_ADAPTER
    except OSError as exc:
        print(f"esia {args.command}: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
