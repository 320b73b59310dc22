"""Config-driven experiment runs: point files, metadata, convergence tables.

A run takes an ExperimentConfig (usually parsed from JSON), executes one of
the spectral algorithms per level n, and emits three kinds of files per
level into the output directory:

* ``<label>_n<k>.csv``       point file: UTF-8, header line ``re,im``, one
                             point per line with 17 significant digits,
                             lexicographic (re, im) order.  Byte-identical
                             across reruns and worker counts.
* ``<label>_n<k>.meta.json`` metadata sidecar: every input needed to rerun
                             the level (operator/problem config, n, l, caps),
                             the threshold, k_n, the sampling error bound
                             where applicable, point count, backend, and
                             wall-clock timing.
* ``<label>_n<k>.plot.json`` optional scatter description (axis ranges and
                             labels only; no plotting engine).

Convergence mode additionally writes ``<label>_convergence.json`` with a
table of n against the localized window distance and the truncated
Attouch-Wets distance to a reference descriptor, plus monotone-trend flags.
"""

from __future__ import annotations

import json
import re as _re
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .algorithms import SpectralSet, gamma1, gamma2, resolve_workers
from .errors import ValidationError
from .kernels import BACKEND_NAME
from .operators import (
    DEFAULT_DIMENSION_CAP,
    DecomposedOperator,
    provider_from_config,
)
from .oracles import gamma1_discrepancy
from .schrodinger import (
    DEFAULT_RESOLUTION_CAP,
    DEFAULT_SAMPLE_CAP,
    gamma3,
    problem_from_config,
)
from .setdist import (
    DEFAULT_TERMS,
    Disk,
    attouch_wets_report,
    descriptor_from_config,
    window_distance,
)

POINT_HEADER = "re,im"
MODES = ("gamma1", "gamma2", "gamma3", "oracle-compare", "convergence")
DEFAULT_WINDOW = {"center": [0.0, 0.0], "radius": 10.0}

_CONFIG_KEYS = {
    "mode",
    "levels",
    "operator",
    "problem",
    "l",
    "reference",
    "window",
    "out",
    "workers",
    "cap",
    "l_cap",
    "sample_cap",
    "aw_terms",
    "label",
    "plot",
    "algorithm",
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated description of one experiment run."""

    mode: str
    levels: tuple[int, ...]
    operator: Optional[dict] = None
    problem: Optional[dict] = None
    l_override: Optional[int] = None
    reference: Optional[dict] = None
    window: Optional[dict] = None
    out_dir: Optional[str] = None
    workers: Optional[int] = None
    cap: int = DEFAULT_DIMENSION_CAP
    l_cap: int = DEFAULT_RESOLUTION_CAP
    sample_cap: int = DEFAULT_SAMPLE_CAP
    aw_terms: int = DEFAULT_TERMS
    label: str = "run"
    emit_plot: bool = False
    algorithm: Optional[str] = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValidationError(
                f"mode: expected one of {', '.join(MODES)}, got {self.mode!r}"
            )
        if not self.levels:
            raise ValidationError("levels: at least one level is required")
        for n in self.levels:
            if not isinstance(n, int) or isinstance(n, bool) or n < 1:
                raise ValidationError(f"levels: entries must be integers >= 1, got {n!r}")
        if any(b <= a for a, b in zip(self.levels, self.levels[1:])):
            raise ValidationError("levels: must be strictly increasing")
        for name in ("cap", "l_cap", "sample_cap", "aw_terms"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or v < 1:
                raise ValidationError(f"{name}: must be a positive integer, got {v!r}")
        if self.l_override is not None and (
            not isinstance(self.l_override, int) or self.l_override < 1
        ):
            raise ValidationError(f"l: must be a positive integer, got {self.l_override!r}")
        if self.workers is not None and (
            not isinstance(self.workers, int) or self.workers < 1
        ):
            raise ValidationError(f"workers: must be a positive integer, got {self.workers!r}")
        needs_problem = self.mode == "gamma3" or (
            self.mode == "convergence" and self._inferred_algorithm() == "gamma3"
        )
        if needs_problem:
            if self.problem is None:
                raise ValidationError("problem: required for gamma3 runs")
        elif self.operator is None:
            raise ValidationError("operator: required for this mode")
        if self.mode == "convergence" and self.reference is None:
            raise ValidationError("reference: required for convergence mode")
        if self.algorithm is not None and self.algorithm not in (
            "gamma1",
            "gamma2",
            "gamma3",
        ):
            raise ValidationError(
                f"algorithm: expected gamma1, gamma2 or gamma3, got {self.algorithm!r}"
            )

    def _inferred_algorithm(self) -> str:
        if self.algorithm is not None:
            return self.algorithm
        if self.problem is not None:
            return "gamma3"
        if self.operator is not None and self.operator.get("name") == "decomposed":
            return "gamma2"
        return "gamma1"

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ValidationError("config: expected a JSON object")
        unknown = set(raw) - _CONFIG_KEYS
        if unknown:
            raise ValidationError(f"config: unknown keys {sorted(unknown)}")
        if "mode" not in raw:
            raise ValidationError("mode: required")
        if "levels" not in raw:
            raise ValidationError("levels: required")
        levels = raw["levels"]
        if not isinstance(levels, (list, tuple)):
            raise ValidationError("levels: expected a list of integers")
        kwargs = dict(
            mode=raw["mode"],
            levels=tuple(levels),
            operator=raw.get("operator"),
            problem=raw.get("problem"),
            l_override=raw.get("l"),
            reference=raw.get("reference"),
            window=raw.get("window"),
            out_dir=raw.get("out"),
            workers=raw.get("workers"),
            label=raw.get("label", "run"),
            emit_plot=bool(raw.get("plot", False)),
            algorithm=raw.get("algorithm"),
        )
        for name in ("cap", "l_cap", "sample_cap", "aw_terms"):
            if name in raw:
                kwargs[name] = raw[name]
        return cls(**kwargs)

    @staticmethod
    def raw_from_file(path) -> dict:
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ValidationError(f"config: cannot read {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config: invalid JSON in {path}: {exc}") from exc
        if not isinstance(raw, dict):
            raise ValidationError(f"config: {path} must contain a JSON object")
        return raw

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        return cls.from_dict(cls.raw_from_file(path))

    def describe(self) -> dict:
        out = {"mode": self.mode, "levels": list(self.levels), "label": self.label}
        if self.operator is not None:
            out["operator"] = self.operator
        if self.problem is not None:
            out["problem"] = self.problem
        if self.l_override is not None:
            out["l"] = self.l_override
        if self.reference is not None:
            out["reference"] = self.reference
        if self.window is not None:
            out["window"] = self.window
        if self.algorithm is not None:
            out["algorithm"] = self.algorithm
        out.update(
            cap=self.cap,
            l_cap=self.l_cap,
            sample_cap=self.sample_cap,
            aw_terms=self.aw_terms,
        )
        return out


@dataclass
class LevelResult:
    n: int
    result: SpectralSet
    seconds: float
    extra: dict = field(default_factory=dict)
    point_file: Optional[str] = None
    meta_file: Optional[str] = None
    plot_file: Optional[str] = None


@dataclass
class RunArtifact:
    config: ExperimentConfig
    levels: list[LevelResult]
    table: Optional[list[dict]] = None
    trend: Optional[dict] = None
    files: list[str] = field(default_factory=list)


def points_to_text(points: np.ndarray) -> str:
    """Render points in the canonical file format (header + 17 digits)."""
    pts = np.asarray(points, dtype=np.complex128).ravel()
    lines = [POINT_HEADER]
    for p in pts.tolist():
        lines.append(f"{p.real + 0.0:.17g},{p.imag + 0.0:.17g}")
    return "\n".join(lines) + "\n"


def write_point_file(path, points: np.ndarray) -> None:
    Path(path).write_text(points_to_text(points), encoding="utf-8", newline="\n")


def read_point_file(path) -> np.ndarray:
    text = Path(path).read_text(encoding="utf-8")
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != POINT_HEADER:
        raise ValidationError(f"point file {path} must start with '{POINT_HEADER}'")
    out = []
    for ln in lines[1:]:
        re_s, im_s = ln.split(",")
        out.append(complex(float(re_s), float(im_s)))
    return np.asarray(out, dtype=np.complex128)


def _slug(label: str) -> str:
    s = _re.sub(r"[^a-z0-9._-]+", "-", label.lower()).strip("-")
    return s or "run"


def _plot_description(points: np.ndarray, title: str, point_file: str) -> dict:
    pts = np.asarray(points, dtype=np.complex128)
    if pts.size:
        x_lo, x_hi = float(pts.real.min()), float(pts.real.max())
        y_lo, y_hi = float(pts.imag.min()), float(pts.imag.max())
    else:
        x_lo = x_hi = y_lo = y_hi = 0.0
    pad_x = max(0.5, 0.05 * (x_hi - x_lo))
    pad_y = max(0.5, 0.05 * (y_hi - y_lo))
    return {
        "kind": "scatter",
        "title": title,
        "points_file": point_file,
        "x_label": "Re(lambda)",
        "y_label": "Im(lambda)",
        "x_range": [x_lo - pad_x, x_hi + pad_x],
        "y_range": [y_lo - pad_y, y_hi + pad_y],
    }


def _compute_level(cfg: ExperimentConfig, algorithm: str, n: int, workers: int):
    extra: dict = {}
    if algorithm == "gamma1":
        p = provider_from_config(cfg.operator)
        result = gamma1(p, n, cfg.cap, workers)
    elif algorithm == "gamma2":
        p = provider_from_config(cfg.operator)
        if not isinstance(p, DecomposedOperator):
            raise ValidationError(
                "operator: gamma2 needs a 'decomposed' operator with 't' and 'v' parts"
            )
        result = gamma2(p, n, cfg.cap, workers)
    elif algorithm == "gamma3":
        prob = problem_from_config(cfg.problem)
        result = gamma3(
            prob,
            n,
            l=cfg.l_override,
            cap=cfg.cap,
            l_cap=cfg.l_cap,
            sample_cap=cfg.sample_cap,
            workers=workers,
        )
    elif algorithm == "oracle-compare":
        p = provider_from_config(cfg.operator)
        result = gamma1(p, n, cfg.cap, workers)
        report = gamma1_discrepancy(p, n, cfg.cap, workers=workers)
        extra["oracle"] = {
            "method": report.method,
            "discrepancy": {
                k: ([[c.real, c.imag] for c in v] if k == "points" else v)
                for k, v in report.discrepancy.items()
            },
        }
    else:  # pragma: no cover - guarded by config validation
        raise ValidationError(f"mode: no runner for {algorithm!r}")
    return result, extra


def _level_metadata(cfg: ExperimentConfig, lev: LevelResult, workers: int) -> dict:
    s = lev.result
    meta = {
        "algorithm": s.algorithm,
        "mode": cfg.mode,
        "label": cfg.label,
        "n": lev.n,
        "threshold": s.threshold,
        "point_count": len(s.points),
        "backend": BACKEND_NAME,
        "workers": workers,
        "timings": {"seconds": lev.seconds},
        "config": cfg.describe(),
    }
    meta.update({k: v for k, v in s.info.items()})
    meta.update(lev.extra)
    return meta


def run_experiment(cfg: ExperimentConfig) -> RunArtifact:
    """Execute the configured algorithm per level; write point files and
    metadata when an output directory is configured."""
    if cfg.mode == "convergence":
        return convergence_report(cfg)
    workers = resolve_workers(cfg.workers)
    algorithm = cfg.mode
    out = None
    if cfg.out_dir is not None:
        out = Path(cfg.out_dir)
        out.mkdir(parents=True, exist_ok=True)
    artifact = RunArtifact(config=cfg, levels=[])
    slug = _slug(cfg.label)
    for n in cfg.levels:
        t0 = time.perf_counter()
        result, extra = _compute_level(cfg, algorithm, n, workers)
        lev = LevelResult(n=n, result=result, seconds=time.perf_counter() - t0, extra=extra)
        if out is not None:
            base = f"{slug}_n{n}"
            point_path = out / f"{base}.csv"
            write_point_file(point_path, result.points)
            lev.point_file = str(point_path)
            meta_path = out / f"{base}.meta.json"
            meta = _level_metadata(cfg, lev, workers)
            meta_path.write_text(
                json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8"
            )
            lev.meta_file = str(meta_path)
            artifact.files += [str(point_path), str(meta_path)]
            if cfg.emit_plot:
                plot_path = out / f"{base}.plot.json"
                desc = _plot_description(
                    result.points, f"{cfg.label}: {result.algorithm} n={n}", point_path.name
                )
                plot_path.write_text(
                    json.dumps(desc, indent=2, sort_keys=True) + "\n", encoding="utf-8"
                )
                lev.plot_file = str(plot_path)
                artifact.files.append(str(plot_path))
        artifact.levels.append(lev)
    return artifact


def _window_from_config(spec: Optional[dict]) -> Disk:
    spec = DEFAULT_WINDOW if spec is None else spec
    try:
        c = spec["center"]
        return Disk(complex(c[0], c[1]), spec["radius"])
    except (KeyError, TypeError, IndexError) as exc:
        raise ValidationError(f"window: expected center [re, im] and radius: {exc}") from exc


def convergence_report(cfg: ExperimentConfig) -> RunArtifact:
    """Run the inferred algorithm over all levels and tabulate distances to
    the reference descriptor: window distance d_K and truncated
    Attouch-Wets, with monotone-trend flags."""
    if cfg.reference is None:
        raise ValidationError("reference: required for convergence mode")
    reference = descriptor_from_config(cfg.reference)
    window = _window_from_config(cfg.window)
    workers = resolve_workers(cfg.workers)
    algorithm = cfg._inferred_algorithm()
    out = None
    if cfg.out_dir is not None:
        out = Path(cfg.out_dir)
        out.mkdir(parents=True, exist_ok=True)
    artifact = RunArtifact(config=cfg, levels=[], table=[])
    slug = _slug(cfg.label)
    for n in cfg.levels:
        t0 = time.perf_counter()
        result, extra = _compute_level(cfg, algorithm, n, workers)
        lev = LevelResult(n=n, result=result, seconds=time.perf_counter() - t0, extra=extra)
        dk = window_distance(result.points, reference, window)
        aw = attouch_wets_report(result.points, reference, cfg.aw_terms)
        row = {
            "n": n,
            "point_count": len(result.points),
            "d_K": dk,
            "d_AW": aw.value,
            "d_AW_slack": aw.slack,
            "d_AW_tail": aw.tail,
        }
        artifact.table.append(row)
        if out is not None:
            base = f"{slug}_n{n}"
            point_path = out / f"{base}.csv"
            write_point_file(point_path, result.points)
            lev.point_file = str(point_path)
            meta = _level_metadata(cfg, lev, workers)
            meta["distances"] = row
            meta_path = out / f"{base}.meta.json"
            meta_path.write_text(
                json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8"
            )
            lev.meta_file = str(meta_path)
            artifact.files += [str(point_path), str(meta_path)]
        artifact.levels.append(lev)
    dks = [row["d_K"] for row in artifact.table]
    aws = [row["d_AW"] for row in artifact.table]
    slacks = [row["d_AW_slack"] for row in artifact.table]
    artifact.trend = {
        "d_K_strictly_decreasing": all(b < a for a, b in zip(dks, dks[1:])),
        "d_AW_strictly_decreasing": all(b < a for a, b in zip(aws, aws[1:])),
        "d_AW_nonincreasing_within_slack": all(
            b <= a + sa + sb
            for (a, b, sa, sb) in zip(aws, aws[1:], slacks, slacks[1:])
        ),
    }
    if out is not None:
        table_path = out / f"{slug}_convergence.json"
        payload = {
            "config": cfg.describe(),
            "window": {"center": [window.center.real, window.center.imag],
                       "radius": window.radius},
            "table": artifact.table,
            "trend": artifact.trend,
        }
        table_path.write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        artifact.files.append(str(table_path))
    return artifact
