"""End-to-end sampling/recovery runs, corpus benchmarks, and CSV reporting."""

from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import metrics, recovery, sampler
from .imgcore import FormatError, as_image, read_pgm

__all__ = [
    "CSV_FIELDS",
    "RunConfig",
    "RoundtripResult",
    "BenchResult",
    "roundtrip",
    "bench",
    "sweep",
    "load_corpus",
    "csv_row",
    "format_csv",
]

log = logging.getLogger(__name__)

CSV_FIELDS = ("image", "rate%", "psnr", "ssim", "nre", "generations", "seed")


@dataclass(frozen=True)
class RunConfig:
    """Every knob of one sampling/recovery run.

    ``baseline_rate`` replaces the adaptive sampler with a pure random mask:
    a fraction in [0, 1], or ``"matched"`` for the adaptive rate of the same
    image.
    """

    sampler: sampler.SamplerConfig = field(default_factory=sampler.SamplerConfig)
    zeta: float = 1.05
    post: recovery.PostprocessConfig = field(default_factory=recovery.PostprocessConfig)
    noise_var: float = 0.0
    baseline_rate: float | str | None = None
    workers: int = 1

    @property
    def seed(self) -> int:
        return int(self.sampler.seed)

    def with_(self, **changes) -> "RunConfig":
        """Copy with top-level fields or nested sampler/postprocess fields replaced."""
        samp = {k: changes.pop(k) for k in ("c", "d", "tau", "seed") if k in changes}
        post = {k: changes.pop(k) for k in ("rho", "omega_f", "sigma_f") if k in changes}
        cfg = replace(self, **changes)
        if samp:
            cfg = replace(cfg, sampler=replace(cfg.sampler, **samp))
        if post:
            cfg = replace(cfg, post=replace(cfg.post, **post))
        return cfg


@dataclass
class RoundtripResult:
    name: str
    mask: np.ndarray
    sampled: np.ndarray
    recovered: np.ndarray
    generations: int
    metrics: metrics.MetricsReport
    seed: int
    sampling_report: sampler.SamplingReport | None = None


def _make_mask(img: np.ndarray, cfg: RunConfig):
    if cfg.baseline_rate is None or cfg.baseline_rate == "matched":
        mask, sampled, report = sampler.sample_image(img, cfg.sampler, workers=cfg.workers)
        if cfg.baseline_rate is None:
            return mask, sampled, report
        rate = report.live / img.size
    else:
        rate = float(cfg.baseline_rate)
    mask = sampler.random_baseline_mask(*img.shape, rate, seed=cfg.seed)
    return mask, np.where(mask, img, 0.0), None


def roundtrip(
    img,
    cfg: RunConfig = RunConfig(),
    name: str = "image",
    on_generation: Callable[[recovery.CaState], None] | None = None,
) -> RoundtripResult:
    """Sample, optionally add measurement noise, recover, post-process, score."""
    img = as_image(img)
    mask, sampled, report = _make_mask(img, cfg)
    observed = sampled
    if cfg.noise_var > 0:
        # noise model works on the [0, 1] scale
        noisy = metrics.add_measurement_noise(
            sampled / 255.0, mask, metrics.NoiseConfig(cfg.noise_var, cfg.seed)
        )
        observed = noisy * 255.0
    rec = recovery.recover(mask, observed, zeta=cfg.zeta, on_generation=on_generation)
    final = recovery.postprocess(rec.image, mask, cfg.post)
    return RoundtripResult(
        name=name,
        mask=mask,
        sampled=observed,
        recovered=final,
        generations=rec.generations,
        metrics=metrics.evaluate(img, final, mask),
        seed=cfg.seed,
        sampling_report=report,
    )


def _fmt(x: float) -> str:
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    return repr(float(x))


def csv_row(res: RoundtripResult) -> dict:
    m = res.metrics
    return {
        "image": res.name,
        "rate%": _fmt(m.sampling_rate),
        "psnr": _fmt(m.psnr),
        "ssim": _fmt(m.ssim),
        "nre": _fmt(m.nre),
        "generations": str(res.generations),
        "seed": str(res.seed),
    }


def format_csv(rows: Sequence[dict], fields: Sequence[str] = CSV_FIELDS, header: bool = True) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(fields), lineterminator="\n")
    if header:
        writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


@dataclass
class BenchResult:
    rows: list[RoundtripResult]

    def _column(self, attr: str) -> np.ndarray:
        if attr == "generations":
            return np.array([r.generations for r in self.rows], dtype=np.float64)
        return np.array([getattr(r.metrics, attr) for r in self.rows], dtype=np.float64)

    def mean(self, attr: str) -> float:
        return float(np.mean(self._column(attr)))

    def var(self, attr: str) -> float:
        return float(np.var(self._column(attr)))

    def csv(self) -> str:
        rows = [csv_row(r) for r in self.rows]
        seed = str(self.rows[0].seed) if self.rows else ""
        for label, agg in (("mean", self.mean), ("var", self.var)):
            rows.append(
                {
                    "image": label,
                    "rate%": _fmt(agg("sampling_rate")),
                    "psnr": _fmt(agg("psnr")),
                    "ssim": _fmt(agg("ssim")),
                    "nre": _fmt(agg("nre")),
                    "generations": _fmt(agg("generations")),
                    "seed": seed,
                }
            )
        return format_csv(rows)


def load_corpus(directory) -> list[tuple[str, np.ndarray]]:
    """Read every ``*.pgm`` in ``directory``, sorted by filename."""
    directory = Path(directory)
    if not directory.is_dir():
        raise FormatError(f"corpus directory not found: {directory}")
    files = sorted(p for p in directory.iterdir() if p.suffix.lower() == ".pgm")
    if not files:
        raise FormatError(f"no PGM images in {directory}")
    return [(p.stem, read_pgm(p)) for p in files]


def _bench_one(args):
    name, img, cfg = args
    res = roundtrip(img, cfg, name=name)
    # drop the large arrays before crossing the process boundary
    return replace(res, mask=np.zeros((0, 0), bool), sampled=np.zeros((0, 0)), recovered=np.zeros((0, 0)))


def bench(corpus: Sequence[tuple[str, np.ndarray]], cfg: RunConfig = RunConfig(), workers: int = 1) -> BenchResult:
    """Run :func:`roundtrip` on every image; rows come back sorted by name."""
    if not corpus:
        raise ValueError("empty corpus")
    jobs = [(name, img, replace(cfg, workers=1)) for name, img in sorted(corpus, key=lambda t: t[0])]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_bench_one, jobs))
    else:
        rows = [_bench_one(j) for j in jobs]
    return BenchResult(rows)


SWEEP_FIELDS = ("param", "value", "rate%", "psnr", "ssim", "nre", "generations")


def sweep(corpus, cfg: RunConfig, param: str, values: Sequence[float], workers: int = 1) -> str:
    """Corpus means for each value of one parameter, as CSV text."""
    key = {"noise-var": "noise_var", "sigma-f": "sigma_f"}.get(param, param)
    rows = []
    for v in values:
        res = bench(corpus, cfg.with_(**{key: v}), workers=workers)
        rows.append(
            {
                "param": param,
                "value": _fmt(v),
                "rate%": _fmt(res.mean("sampling_rate")),
                "psnr": _fmt(res.mean("psnr")),
                "ssim": _fmt(res.mean("ssim")),
                "nre": _fmt(res.mean("nre")),
                "generations": _fmt(res.mean("generations")),
            }
        )
        log.info("sweep %s=%s: psnr %.3f dB", param, v, res.mean("psnr"))
    return format_csv(rows, SWEEP_FIELDS)
