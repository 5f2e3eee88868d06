"""Experiment harness: clean / pixel-loss / color-strip / mitigated conditions.

Every image is attacked at every requested level with a schedule derived
from ``(base_seed, image_id, n)``.  The same schedule drives both attack
modes, so the gap between them isolates the effect of the color strips.
Each condition is scored with PSNR against the clean image and, when a
classifier adapter is given, with top-1 accuracy.  Accuracies are split into

    total = f + g,   f = acc_clean - acc_loss,   g = acc_loss - acc_strip

where ``f`` is the drop due to pixel loss and ``g`` the extra drop due to
color strips.
"""

from __future__ import annotations

import json
import math
import os
import shlex
import subprocess
import tempfile
import urllib.error
import urllib.request
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .attack import (AttackMode, DropSchedule, PadPolicy, color_strip_attack, derive_seed,
                     generate_schedule, n_from_fraction, pixel_loss_attack)
from .core import IDENTICAL, as_image, psnr
from .errors import AdapterError, ESIAError, EvalError
from .imageio import encode_png
from .mitigation import mitigate

__all__ = [
    "CONDITIONS",
    "TOY_LABELS",
    "dominant_channel",
    "ClassifierAdapter",
    "FunctionAdapter",
    "SubprocessAdapter",
    "HttpAdapter",
    "adapter_from_config",
    "classify",
    "accuracy",
    "DegradationReport",
    "decompose",
    "pooled_strip_share",
    "CorpusItem",
    "ExperimentConfig",
    "CorpusResult",
    "ExperimentResult",
    "run_experiment",
]

CONDITIONS = ("clean", "loss", "strip", "mitigated")
TOY_LABELS = ("red", "green", "blue")


def dominant_channel(image) -> str:
    """Toy classifier: channel with the largest mean; ties go to R, then G."""
    sums = as_image(image).astype(np.int64).sum(axis=(0, 1))
    return TOY_LABELS[int(np.argmax(sums))]


# ---------------------------------------------------------------------------
# classifier adapters


class ClassifierAdapter:
    """Maps an image to one label token.

    Subclasses implement :meth:`raw_label`; :func:`classify` validates the
    answer.  ``labels`` (optional) restricts the accepted tokens.
    """

    labels: Optional[tuple] = None
    timeout: float = 30.0

    def raw_label(self, image: np.ndarray) -> str:
        raise NotImplementedError


class FunctionAdapter(ClassifierAdapter):
    """In-process adapter wrapping a plain ``image -> label`` function."""

    def __init__(self, fn: Callable[[np.ndarray], str], labels=None):
        self.fn = fn
        self.labels = tuple(labels) if labels is not None else None

    def raw_label(self, image):
        return self.fn(image)


class SubprocessAdapter(ClassifierAdapter):
    """Runs an external command on a temporary PNG file.

    ``command`` is an argument list (or shell-style string); the token
    ``{path}`` is replaced by the image path, or the path is appended if no
    argument contains it.  The command must print exactly one label token.
    """

    def __init__(self, command, labels=None, timeout: float = 30.0):
        self.command = shlex.split(command) if isinstance(command, str) else list(command)
        if not self.command:
            raise EvalError("subprocess adapter needs a command")
        self.labels = tuple(labels) if labels is not None else None
        self.timeout = float(timeout)

    def _argv(self, path: str) -> list:
        if any("{path}" in a for a in self.command):
            return [a.replace("{path}", path) for a in self.command]
        return self.command + [path]

    def raw_label(self, image):
        fd, path = tempfile.mkstemp(suffix=".png")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(encode_png(image))
            proc = subprocess.run(self._argv(path), capture_output=True, text=True,
                                  timeout=self.timeout)
        except subprocess.TimeoutExpired as exc:
            raise AdapterError(f"adapter timed out after {self.timeout}s") from exc
        except OSError as exc:
            raise AdapterError(f"cannot run adapter: {exc}") from exc
        finally:
            os.unlink(path)
        if proc.returncode != 0:
            raise AdapterError(f"adapter exited with {proc.returncode}: {proc.stderr.strip()}")
        return proc.stdout


class HttpAdapter(ClassifierAdapter):
    """POSTs the PNG body to ``url``; a 200 response body is the label."""

    def __init__(self, url: str, labels=None, timeout: float = 30.0):
        self.url = url
        self.labels = tuple(labels) if labels is not None else None
        self.timeout = float(timeout)

    def raw_label(self, image):
        req = urllib.request.Request(self.url, data=encode_png(image), method="POST",
                                     headers={"Content-Type": "image/png"})
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                if resp.status != 200:
                    raise AdapterError(f"adapter answered HTTP {resp.status}")
                return resp.read().decode("utf-8")
        except (urllib.error.URLError, TimeoutError, OSError, UnicodeDecodeError) as exc:
            raise AdapterError(f"adapter request failed: {exc}") from exc


def adapter_from_config(cfg: dict) -> ClassifierAdapter:
    """Build an adapter from a config mapping.

    ``{"kind": "toy"}``, ``{"kind": "subprocess", "command": [...]}`` or
    ``{"kind": "http", "url": ...}``; optional ``labels`` and ``timeout``.
    """
    kind = cfg.get("kind")
    labels = cfg.get("labels")
    timeout = cfg.get("timeout", 30.0)
    if kind == "toy":
        return FunctionAdapter(dominant_channel, labels if labels is not None else TOY_LABELS)
    if kind == "subprocess":
        if "command" not in cfg:
            raise EvalError("subprocess adapter needs 'command'")
        return SubprocessAdapter(cfg["command"], labels, timeout)
    if kind == "http":
        if "url" not in cfg:
            raise EvalError("http adapter needs 'url'")
        return HttpAdapter(cfg["url"], labels, timeout)
    raise EvalError(f"unknown adapter kind {kind!r}")


def classify(adapter: ClassifierAdapter, image) -> str:
    """Top-1 label of ``image`` from ``adapter``; malformed answers raise AdapterError."""
    raw = adapter.raw_label(as_image(image))
    if not isinstance(raw, str):
        raise AdapterError(f"adapter returned {type(raw).__name__}, not a label string")
    tokens = raw.split()
    if len(tokens) != 1:
        raise AdapterError(f"expected exactly one label token, got {raw!r}")
    label = tokens[0]
    if adapter.labels is not None and label not in adapter.labels:
        raise AdapterError(f"label {label!r} not in the adapter's label space")
    return label


# ---------------------------------------------------------------------------
# accuracy and the degradation split


def _correct_counts(pairs) -> tuple:
    pairs = list(pairs)
    if not pairs:
        raise EvalError("accuracy of an empty result set")
    correct = sum(1 for true, pred in pairs if pred is not None and pred == true)
    return correct, len(pairs)


def accuracy(pairs) -> float:
    """Share of ``(true, predicted)`` pairs that agree; ``predicted=None`` is a failure."""
    correct, total = _correct_counts(pairs)
    return correct / total


def _exact(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        # shortest repr, so 0.7 means 7/10 and differences stay exact
        return Fraction(repr(x))
    return Fraction(x)


@dataclass(frozen=True)
class DegradationReport:
    """Accuracy per condition and the split of the accuracy drop into f and g.

    All quantities are exact :class:`~fractions.Fraction` values, so
    ``total_degradation == f_value + g_value`` holds exactly.
    ``strip_share`` is ``None`` when there is no degradation to share.
    """

    acc_clean: Fraction
    acc_loss: Fraction
    acc_strip: Fraction
    f_value: Fraction
    g_value: Fraction
    total_degradation: Fraction
    strip_share: Optional[Fraction]
    acc_mitigated: Optional[Fraction] = None
    flags: tuple = ()

    def to_dict(self) -> dict:
        def num(x):
            return None if x is None else float(x)

        return {
            "acc_clean": num(self.acc_clean),
            "acc_loss": num(self.acc_loss),
            "acc_strip": num(self.acc_strip),
            "acc_mitigated": num(self.acc_mitigated),
            "f_value": num(self.f_value),
            "g_value": num(self.g_value),
            "total_degradation": num(self.total_degradation),
            "strip_share": num(self.strip_share),
            "flags": list(self.flags),
        }


def decompose(acc_clean, acc_loss, acc_strip, acc_mitigated=None) -> DegradationReport:
    """Split the clean-to-strip accuracy drop into pixel-loss and color-strip parts."""
    clean, loss, strip = _exact(acc_clean), _exact(acc_loss), _exact(acc_strip)
    mitigated = None if acc_mitigated is None else _exact(acc_mitigated)
    for name, v in (("acc_clean", clean), ("acc_loss", loss), ("acc_strip", strip),
                    ("acc_mitigated", mitigated)):
        if v is not None and not 0 <= v <= 1:
            raise EvalError(f"{name} must lie in [0, 1], got {float(v)}")
    f = clean - loss
    g = loss - strip
    total = f + g
    flags = []
    if f < 0:
        flags.append("negative_f")
    if g < 0:
        flags.append("negative_g")
    share = g / total if total > 0 else None
    return DegradationReport(clean, loss, strip, f, g, total, share, mitigated, tuple(flags))


def pooled_strip_share(reports: Sequence[DegradationReport]) -> Optional[Fraction]:
    """``sum(g) / sum(total)`` over levels, or ``None`` if the pooled total is not positive."""
    g = sum((r.g_value for r in reports), Fraction(0))
    total = sum((r.total_degradation for r in reports), Fraction(0))
    return g / total if total > 0 else None


# ---------------------------------------------------------------------------
# experiment runner


@dataclass(frozen=True)
class CorpusItem:
    image_id: str
    image: np.ndarray
    label: Optional[str] = None


@dataclass(frozen=True)
class ExperimentConfig:
    """Attack levels and conditions of one run.

    Exactly one of ``n_levels`` (rows dropped) and ``loss_fractions``
    (resolved per image as ``round_half_up(fraction * H)``) must be set.
    ``mitigated`` mitigates the color-strip attack.
    """

    n_levels: Optional[tuple] = None
    loss_fractions: Optional[tuple] = None
    base_seed: int = 0
    conditions: tuple = CONDITIONS
    phase: str = "RGGB"
    pad: PadPolicy = PadPolicy.REPLICATE_LAST
    max_in_flight: int = 1

    def __post_init__(self):
        if (self.n_levels is None) == (self.loss_fractions is None):
            raise EvalError("set exactly one of n_levels and loss_fractions")
        levels = self.n_levels if self.n_levels is not None else self.loss_fractions
        if not levels:
            raise EvalError("at least one level is required")
        if self.n_levels is not None:
            if any(int(n) != n or n < 0 for n in self.n_levels):
                raise EvalError(f"n levels must be non-negative integers: {self.n_levels}")
            object.__setattr__(self, "n_levels", tuple(int(n) for n in self.n_levels))
        else:
            if any(not 0 <= f <= 1 for f in self.loss_fractions):
                raise EvalError(f"loss fractions must lie in [0, 1]: {self.loss_fractions}")
            object.__setattr__(self, "loss_fractions", tuple(float(f) for f in self.loss_fractions))
        unknown = set(self.conditions) - set(CONDITIONS)
        if unknown:
            raise EvalError(f"unknown conditions {sorted(unknown)}; choose from {CONDITIONS}")
        object.__setattr__(self, "conditions",
                           tuple(c for c in CONDITIONS if c in set(self.conditions)))
        if self.max_in_flight < 1:
            raise EvalError("max_in_flight must be >= 1")
        object.__setattr__(self, "pad", PadPolicy(self.pad))

    @property
    def levels(self) -> list:
        """``(key, kind, value)`` for each level, e.g. ``("n=16", "n", 16)``."""
        if self.n_levels is not None:
            return [(f"n={n}", "n", n) for n in self.n_levels]
        return [(f"fraction={f!r}", "fraction", f) for f in self.loss_fractions]

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {"n_levels", "loss_fractions", "base_seed", "conditions", "phase", "pad",
                 "max_in_flight"}
        kwargs = {k: v for k, v in d.items() if k in known}
        for k in ("n_levels", "loss_fractions", "conditions"):
            if kwargs.get(k) is not None:
                kwargs[k] = tuple(kwargs[k])
        return cls(**kwargs)

    def to_dict(self) -> dict:
        return {
            "n_levels": None if self.n_levels is None else list(self.n_levels),
            "loss_fractions": None if self.loss_fractions is None else list(self.loss_fractions),
            "base_seed": self.base_seed,
            "conditions": list(self.conditions),
            "phase": self.phase,
            "pad": self.pad.value,
        }


def _psnr_json(value: float):
    return "identical" if value == IDENTICAL else value


@dataclass
class CorpusResult:
    """Per-image, per-level records of schedules, predictions and PSNR."""

    config: ExperimentConfig
    records: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"version": 1, "config": self.config.to_dict(), "records": self.records}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


@dataclass
class ExperimentResult:
    corpus: CorpusResult
    reports: dict
    failures: dict

    @property
    def pooled_strip_share(self) -> Optional[Fraction]:
        return pooled_strip_share(list(self.reports.values())) if self.reports else None

    def report_dict(self) -> dict:
        pooled = self.pooled_strip_share
        return {
            "version": 1,
            "levels": [dict(level=k, **r.to_dict()) for k, r in self.reports.items()],
            "per_level_strip_share": {k: (None if r.strip_share is None else float(r.strip_share))
                                      for k, r in self.reports.items()},
            "pooled_strip_share": None if pooled is None else float(pooled),
            "failures": self.failures,
        }

    def report_json(self) -> str:
        return json.dumps(self.report_dict(), indent=2, sort_keys=True) + "\n"


def _run_image(item: CorpusItem, config: ExperimentConfig, adapter) -> dict:
    image = as_image(item.image)
    h, w, _ = image.shape
    clean_pred = None
    clean_err = None
    if adapter is not None and "clean" in config.conditions:
        try:
            clean_pred = classify(adapter, image)
        except AdapterError as exc:
            clean_err = str(exc)
    levels = []
    for key, kind, value in config.levels:
        entry = {"level": key, "predictions": {}, "psnr": {}, "errors": {}}
        levels.append(entry)
        try:
            n = value if kind == "n" else n_from_fraction(value, h)
            seed = derive_seed(config.base_seed, item.image_id, n)
            schedule = generate_schedule(h, n, seed)
        except ESIAError as exc:
            entry["errors"]["schedule"] = str(exc)
            for cond in config.conditions:
                entry["predictions"][cond] = None
                entry["psnr"][cond] = None
            continue
        entry.update(n=n, seed=seed, rows=list(schedule.rows))
        outputs = {}
        strip_img = None
        if "strip" in config.conditions or "mitigated" in config.conditions:
            strip_img = color_strip_attack(image, schedule, config.phase, config.pad)
        for cond in config.conditions:
            if cond == "clean":
                outputs[cond] = image
            elif cond == "loss":
                outputs[cond] = pixel_loss_attack(image, schedule, config.pad)
            elif cond == "strip":
                outputs[cond] = strip_img
            else:
                outputs[cond] = mitigate(strip_img, schedule)
        for cond, out in outputs.items():
            entry["psnr"][cond] = _psnr_json(psnr(image, out))
            if adapter is None:
                continue
            if cond == "clean":
                entry["predictions"][cond] = clean_pred
                if clean_err is not None:
                    entry["errors"][cond] = clean_err
                continue
            try:
                entry["predictions"][cond] = classify(adapter, out)
            except AdapterError as exc:
                entry["predictions"][cond] = None
                entry["errors"][cond] = str(exc)
    return {"image_id": item.image_id, "label": item.label, "height": h, "width": w,
            "levels": levels}


def run_experiment(corpus: Sequence[CorpusItem], config: ExperimentConfig,
                   adapter: Optional[ClassifierAdapter] = None) -> ExperimentResult:
    """Attack, mitigate and score every image at every level of ``config``.

    Without an adapter only PSNR is recorded and no accuracy reports are
    produced.  Adapter failures count as wrong predictions and are tallied
    in ``failures``.
    """
    items = sorted(corpus, key=lambda it: it.image_id)
    if not items:
        raise EvalError("corpus is empty")
    ids = [it.image_id for it in items]
    if len(set(ids)) != len(ids):
        raise EvalError("duplicate image ids in corpus")
    if adapter is not None and any(it.label is None for it in items):
        raise EvalError("every image needs a label when a classifier is used")

    if config.max_in_flight == 1:
        records = [_run_image(it, config, adapter) for it in items]
    else:
        with ThreadPoolExecutor(max_workers=config.max_in_flight) as pool:
            records = list(pool.map(lambda it: _run_image(it, config, adapter), items))

    failures = {}
    for rec in records:
        for entry in rec["levels"]:
            for cond in entry["errors"]:
                failures[cond] = failures.get(cond, 0) + 1
    result = CorpusResult(config, records)

    reports = {}
    needed = {"clean", "loss", "strip"}
    if adapter is not None and needed <= set(config.conditions):
        for i, (key, _, _) in enumerate(config.levels):
            acc = {}
            for cond in config.conditions:
                correct, total = _correct_counts(
                    (rec["label"], rec["levels"][i]["predictions"].get(cond)) for rec in records)
                acc[cond] = Fraction(correct, total)
            reports[key] = decompose(acc["clean"], acc["loss"], acc["strip"], acc.get("mitigated"))
    return ExperimentResult(result, reports, dict(sorted(failures.items())))
