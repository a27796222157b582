"""Experiment configs, sweep execution and report serialization.

Configs are JSON documents.  A minimal one::

    {
      "schema_version": 1,
      "dataset": {"toy": {"theta": 1.5707963267948966}},
      "classifier": {"variant": "STC", "copies": 1, "label_width": 1},
      "shots": {"count": 8192, "seeds": [0]},
      "sweep": {"param": "theta", "start": 0, "stop": 6.283185307179586, "steps": 41}
    }

See README.md for every key.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Optional

import numpy as np

from . import circuits, kernels, moments, noise, sampling
from .circuits import ClassifierSpec, LabeledDataset
from .errors import ConfigInvalid, QkclfError
from .noise import NoiseSpec

SCHEMA_VERSION = 1
SWEEP_PARAMS = ("theta", "p", "theta0", "theta1", "phi", "shots", "k_copies", "lambda")
FORMATS = ("csv", "json")
CSV_COLUMNS = (
    "sweep_param",
    "sweep_value",
    "f_analytic",
    "expectation",
    "variance",
    "skewness",
    "shots_planned",
    "shots_used",
    "empirical_mean",
    "label_mean",
    "label_majority",
    "noise_scale",
    "seed",
)


def parse_complex(value) -> complex:
    """Accept a real number, a ``[re, im]`` pair or a string such as ``"0.5-1j"``."""
    if isinstance(value, bool):
        raise ValueError("booleans are not amplitudes")
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, str):
        return complex(value.replace(" ", ""))
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    raise ValueError(f"cannot read amplitude {value!r}")


def _vector(values) -> np.ndarray:
    if not isinstance(values, (list, tuple)) or not values:
        raise ValueError("a vector must be a nonempty list of amplitudes")
    return np.array([parse_complex(v) for v in values], dtype=complex)


@dataclass(frozen=True)
class DatasetSource:
    toy_theta: Optional[float] = None
    training: tuple = ()
    labels: tuple = ()
    weights: Optional[tuple] = None
    test: tuple = ()

    @property
    def is_toy(self) -> bool:
        return self.toy_theta is not None

    def build(self, theta: Optional[float] = None) -> LabeledDataset:
        if self.is_toy:
            return circuits.toy_dataset(self.toy_theta if theta is None else theta)
        return LabeledDataset.from_vectors(
            [np.asarray(x) for x in self.training], self.labels, np.asarray(self.test), self.weights
        )


@dataclass(frozen=True)
class ShotSettings:
    count: int = sampling.DEFAULT_SHOTS
    seeds: tuple[int, ...] = (0,)
    repetitions: int = 1
    c: float = 2.0
    delta: float = moments.DEFAULT_DELTA
    reduce: bool = True

    def expanded_seeds(self) -> tuple[int, ...]:
        """Each base seed yields ``repetitions`` streams at consecutive offsets."""
        return tuple(s + r for s in self.seeds for r in range(self.repetitions))


@dataclass(frozen=True)
class Sweep:
    param: str
    values: tuple[float, ...]


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: DatasetSource
    classifier: ClassifierSpec = field(default_factory=ClassifierSpec)
    noise: Optional[NoiseSpec] = None
    shots: ShotSettings = field(default_factory=ShotSettings)
    sweep: Optional[Sweep] = None
    output_path: Optional[str] = None
    output_format: str = "csv"
    schema_version: int = SCHEMA_VERSION


@dataclass(frozen=True)
class SweepPoint:
    data: LabeledDataset
    spec: ClassifierSpec
    noise: Optional[NoiseSpec]
    shots: int


def _point(cfg: ExperimentConfig, value: Optional[float]) -> SweepPoint:
    spec, nz, shots, theta = cfg.classifier, cfg.noise, cfg.shots.count, None
    param = cfg.sweep.param if cfg.sweep else None
    if param == "theta":
        theta = value
    elif param == "p":
        nz = NoiseSpec(depolarizing=value)
    elif param in ("theta0", "theta1", "phi"):
        angles = list(spec.angles)
        angles[("theta0", "theta1", "phi").index(param)] = value
        spec = spec.replace(angles=tuple(angles))
    elif param == "shots":
        if value != int(value) or value < 1:
            raise ValueError(f"shots sweep value {value!r} is not a positive integer")
        shots = int(value)
    elif param == "k_copies":
        spec = spec.replace(copies=int(value) if value == int(value) else value)
    elif param == "lambda":
        spec = spec.replace(label_width=int(value) if value == int(value) else value)
    data = cfg.dataset.build(theta)
    if nz is not None:
        if spec.label_width != 1:
            raise ValueError("noise runs use the single-qubit measurement path and need label_width 1")
        n = circuits.final_state_qubits(data, spec)
        if nz.max_qubits > n:
            raise ValueError(f"noise Pauli strings are longer than the {n}-qubit final state")
    if spec.variant == "HTC" and not data.is_pure:
        raise ValueError("HTC requires pure states")
    return SweepPoint(data, spec, nz, shots)


def sweep_values(cfg: ExperimentConfig) -> list[Optional[float]]:
    return list(cfg.sweep.values) if cfg.sweep else [None]


# ---------------------------------------------------------------------------
# Parsing and validation
# ---------------------------------------------------------------------------


def _section(raw: dict, key: str, diags: list[str]) -> dict:
    value = raw.get(key) or {}
    if not isinstance(value, dict):
        diags.append(f"{key}: must be an object")
        return {}
    return value


def _int(value, name: str, diags: list[str], minimum: int) -> Optional[int]:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or value != int(value):
        diags.append(f"{name}: must be an integer")
        return None
    if value < minimum:
        diags.append(f"{name}: must be >= {minimum}")
        return None
    return int(value)


def _parse_dataset(raw: dict, base_dir: Path, diags: list[str]) -> Optional[DatasetSource]:
    ds = raw.get("dataset")
    if not isinstance(ds, dict):
        diags.append("dataset: missing or not an object")
        return None
    if "file" in ds:
        path = Path(ds["file"])
        if not path.is_absolute():
            path = base_dir / path
        if not path.is_file():
            diags.append(f"dataset.file: {path} does not exist")
            return None
        try:
            ds = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            diags.append(f"dataset.file: invalid JSON ({exc})")
            return None
        if not isinstance(ds, dict):
            diags.append("dataset.file: must contain an object")
            return None
    if "toy" in ds:
        toy = ds["toy"] or {}
        theta = toy.get("theta", math.pi / 2) if isinstance(toy, dict) else None
        if isinstance(theta, bool) or not isinstance(theta, (int, float)):
            diags.append("dataset.toy.theta: must be a number")
            return None
        return DatasetSource(toy_theta=float(theta))
    ok = True
    try:
        training = tuple(tuple(_vector(x).tolist()) for x in ds.get("training") or [])
    except (ValueError, TypeError) as exc:
        diags.append(f"dataset.training: {exc}")
        training, ok = (), False
    if ok and not training:
        diags.append("dataset.training: at least one training vector is required")
        ok = False
    try:
        test = tuple(_vector(ds.get("test")).tolist())
    except (ValueError, TypeError) as exc:
        diags.append(f"dataset.test: {exc}")
        test, ok = (), False
    labels = ds.get("labels")
    if not isinstance(labels, list) or any(y not in (0, 1) or isinstance(y, bool) for y in labels):
        diags.append("dataset.labels: must be a list of 0/1 labels")
        ok = False
    elif training and len(labels) != len(training):
        diags.append("dataset.labels: need one label per training vector")
        ok = False
    weights = ds.get("weights")
    if weights is not None:
        if not isinstance(weights, list) or not all(
            isinstance(w, (int, float)) and not isinstance(w, bool) for w in weights
        ):
            diags.append("dataset.weights: must be a list of numbers")
            ok = False
        else:
            if any(w < 0 for w in weights):
                diags.append("dataset.weights: weights must be nonnegative")
                ok = False
            if abs(math.fsum(weights) - 1.0) > circuits.WEIGHT_TOL:
                diags.append("dataset.weights: weights must sum to 1")
                ok = False
            if training and len(weights) != len(training):
                diags.append("dataset.weights: need one weight per training vector")
                ok = False
            weights = tuple(float(w) for w in weights)
    if not ok:
        return None
    src = DatasetSource(training=training, labels=tuple(labels), weights=weights, test=test)
    try:
        src.build()
    except (QkclfError, ValueError) as exc:
        diags.append(f"dataset: {exc}")
        return None
    return src


def _parse_classifier(raw: dict, diags: list[str]) -> Optional[ClassifierSpec]:
    cl = _section(raw, "classifier", diags)
    kwargs: dict[str, Any] = {}
    if "variant" in cl:
        kwargs["variant"] = cl["variant"]
    for key, name in (("copies", "copies"), ("label_width", "label_width")):
        if key in cl:
            v = _int(cl[key], f"classifier.{key}", diags, 1)
            if v is None:
                return None
            kwargs[name] = v
    if "angles" in cl:
        angles = cl["angles"]
        if not isinstance(angles, list) or len(angles) != 3 or not all(
            isinstance(a, (int, float)) and not isinstance(a, bool) for a in angles
        ):
            diags.append("classifier.angles: must be [theta0, theta1, phi]")
            return None
        kwargs["angles"] = tuple(float(a) for a in angles)
    try:
        return ClassifierSpec(**kwargs)
    except (QkclfError, ValueError) as exc:
        diags.append(f"classifier: {exc}")
        return None


def _parse_noise(raw: dict, diags: list[str]) -> tuple[bool, Optional[NoiseSpec]]:
    nz = raw.get("noise")
    if nz is None:
        return True, None
    if not isinstance(nz, dict):
        diags.append("noise: must be an object or null")
        return False, None
    try:
        if "depolarizing" in nz:
            p = nz["depolarizing"]
            if isinstance(p, bool) or not isinstance(p, (int, float)):
                raise ValueError("depolarizing rate must be a number")
            return True, NoiseSpec(depolarizing=float(p))
        if "pauli" in nz:
            terms = nz["pauli"]
            if isinstance(terms, dict):
                terms = list(terms.items())
            return True, NoiseSpec(terms=tuple((str(s), float(c)) for s, c in terms))
        raise ValueError("expected 'depolarizing' or 'pauli'")
    except (QkclfError, ValueError, TypeError) as exc:
        diags.append(f"noise: {exc}")
        return False, None


def _parse_shots(raw: dict, diags: list[str]) -> Optional[ShotSettings]:
    sh = _section(raw, "shots", diags)
    kw: dict[str, Any] = {}
    bad = False
    if "count" in sh:
        v = _int(sh["count"], "shots.count", diags, 1)
        bad |= v is None
        kw["count"] = v
    if "seeds" in sh:
        seeds = sh["seeds"]
        if isinstance(seeds, int) and not isinstance(seeds, bool):
            seeds = [seeds]
        if not isinstance(seeds, list) or not seeds:
            diags.append("shots.seeds: must be a nonempty list of integers")
            bad = True
        else:
            parsed = [_int(s, "shots.seeds", diags, 0) for s in seeds]
            bad |= any(s is None for s in parsed)
            kw["seeds"] = tuple(parsed)
    if "repetitions" in sh:
        v = _int(sh["repetitions"], "shots.repetitions", diags, 1)
        bad |= v is None
        kw["repetitions"] = v
    if "c" in sh:
        c = sh["c"]
        if isinstance(c, bool) or not isinstance(c, (int, float)) or not c > 1:
            diags.append("shots.c: precision ratio must be a number > 1")
            bad = True
        kw["c"] = c
    if "delta" in sh:
        d = sh["delta"]
        if isinstance(d, bool) or not isinstance(d, (int, float)) or not 0 < d < 1:
            diags.append("shots.delta: failure bound must lie in (0, 1)")
            bad = True
        kw["delta"] = d
    if "reduce" in sh:
        if not isinstance(sh["reduce"], bool):
            diags.append("shots.reduce: must be true or false")
            bad = True
        kw["reduce"] = sh["reduce"]
    return None if bad else ShotSettings(**kw)


def _parse_sweep(raw: dict, diags: list[str]) -> tuple[bool, Optional[Sweep]]:
    sw = raw.get("sweep")
    if sw is None:
        return True, None
    if not isinstance(sw, dict):
        diags.append("sweep: must be an object or null")
        return False, None
    param = sw.get("param")
    if param not in SWEEP_PARAMS:
        diags.append(f"sweep.param: must be one of {', '.join(SWEEP_PARAMS)}")
        return False, None
    if "values" in sw:
        vals = sw["values"]
        if not isinstance(vals, list) or not vals or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in vals
        ):
            diags.append("sweep.values: must be a nonempty list of numbers")
            return False, None
        return True, Sweep(param, tuple(float(v) for v in vals))
    start, stop = sw.get("start"), sw.get("stop", sw.get("start"))
    steps = _int(sw.get("steps", 1), "sweep.steps", diags, 1)
    if isinstance(start, bool) or not isinstance(start, (int, float)) or isinstance(stop, bool) or not isinstance(
        stop, (int, float)
    ):
        diags.append("sweep: need numeric 'start'/'stop' or a 'values' list")
        return False, None
    if steps is None:
        return False, None
    return True, Sweep(param, tuple(float(v) for v in np.linspace(start, stop, steps)))


def parse_config(raw: dict, base_dir: Path | str = ".") -> ExperimentConfig:
    """Build an :class:`ExperimentConfig`, raising ConfigInvalid with every diagnostic."""
    diags: list[str] = []
    if not isinstance(raw, dict):
        raise ConfigInvalid(["config: top level must be an object"])
    version = raw.get("schema_version")
    if version != SCHEMA_VERSION:
        diags.append(f"schema_version: expected {SCHEMA_VERSION}, got {version!r}")
    dataset = _parse_dataset(raw, Path(base_dir), diags)
    spec = _parse_classifier(raw, diags)
    noise_ok, nz = _parse_noise(raw, diags)
    shots = _parse_shots(raw, diags)
    sweep_ok, sweep = _parse_sweep(raw, diags)
    out = _section(raw, "output", diags)
    fmt = out.get("format", "csv")
    if fmt not in FORMATS:
        diags.append(f"output.format: must be one of {', '.join(FORMATS)}")
    path = out.get("path")
    if path is not None and not isinstance(path, str):
        diags.append("output.path: must be a string")
    if diags or None in (dataset, spec, shots) or not (noise_ok and sweep_ok):
        raise ConfigInvalid(diags or ["config: invalid"])
    cfg = ExperimentConfig(dataset, spec, nz, shots, sweep, path, fmt, version)
    # Build every sweep point once so that run() cannot fail on config grounds.
    if sweep is not None and sweep.param == "theta" and not dataset.is_toy:
        diags.append("sweep.param: 'theta' sweeps the toy test-state angle and needs dataset.toy")
    if sweep is not None and sweep.param == "p" and nz is not None and nz.depolarizing is None:
        diags.append("sweep.param: 'p' sweeps a depolarizing rate and conflicts with a Pauli noise spec")
    if not diags:
        for v in sweep_values(cfg):
            try:
                _point(cfg, v)
            except (QkclfError, ValueError) as exc:
                label = f"sweep value {v!r}" if v is not None else "experiment"
                diags.append(f"{label}: {exc}")
    if diags:
        raise ConfigInvalid(diags)
    return cfg


def load_config(path: Path | str) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigInvalid([f"config: {path} does not exist"])
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigInvalid([f"config: invalid JSON ({exc})"]) from None
    return parse_config(raw, path.parent)


def validate(raw: dict, base_dir: Path | str = ".") -> list[str]:
    """Every violated rule of a raw config; empty when it is runnable."""
    try:
        parse_config(raw, base_dir)
    except ConfigInvalid as exc:
        return exc.diagnostics
    return []


# ---------------------------------------------------------------------------
# Execution
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReportRow:
    sweep_param: str
    sweep_value: Optional[float]
    f_analytic: float
    expectation: float
    variance: float
    skewness: Optional[float]
    shots_planned: Optional[int]
    shots_used: int
    empirical_mean: float
    label_mean: Optional[int]
    label_majority: Optional[int]
    noise_scale: Optional[float]
    seed: int


def point_distribution(point: SweepPoint, reduce: bool = True) -> tuple[circuits.OutcomeDistribution, Optional[float]]:
    """Exact measured distribution at a sweep point, and the noise scale if any."""
    lam = point.spec.label_width
    if point.noise is None:
        return circuits.simulate_distribution(point.data, point.spec, reduce=reduce and lam == 1), None
    rho = circuits.final_state(point.data, point.spec, reduce=True)
    rho = noise.apply_noise(rho, point.noise)
    return circuits.outcome_distribution(rho, 1, reduced=True), noise.effective_scale(point.noise).scale


def _planned(f: float, scale: Optional[float], lam: int, shots: ShotSettings) -> Optional[int]:
    if abs(f) < kernels.ABSTAIN_TOL:
        return None
    base = moments.plan_shots(f, lam, shots.c, shots.delta).shots
    if scale is None:
        return base
    if abs(scale) < noise.SCALE_ZERO_TOL:
        return None
    return noise.noise_overhead(scale, base).planned_shots


def evaluate_point(cfg: ExperimentConfig, value: Optional[float]) -> list[ReportRow]:
    point = _point(cfg, value)
    spec, lam = point.spec, point.spec.label_width
    f = kernels.general_expectation(point.data, spec.angles, spec.variant, spec.copies)
    dist, scale = point_distribution(point, cfg.shots.reduce)
    mom = moments.moments_from_distribution(dist, lam)
    planned = _planned(f, scale, lam, cfg.shots)
    rows = []
    for seed in cfg.shots.expanded_seeds():
        rec = sampling.sample(dist, point.shots, seed)
        rows.append(
            ReportRow(
                sweep_param=cfg.sweep.param if cfg.sweep else "",
                sweep_value=value,
                f_analytic=f,
                expectation=mom.mean,
                variance=mom.variance,
                skewness=mom.skewness,
                shots_planned=planned,
                shots_used=point.shots,
                empirical_mean=rec.mean(lam),
                label_mean=sampling.decide_mean(rec, lam),
                label_majority=sampling.decide_majority(rec) if lam == 1 else None,
                noise_scale=scale,
                seed=seed,
            )
        )
    return rows


def run_rows(cfg: ExperimentConfig, jobs: int = 1) -> list[ReportRow]:
    """All report rows in sweep-then-seed order."""
    values = sweep_values(cfg)
    if jobs > 1 and len(values) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(lambda v: evaluate_point(cfg, v), values))
    else:
        chunks = [evaluate_point(cfg, v) for v in values]
    return [row for chunk in chunks for row in chunk]


def repro_toy(
    shots: int = sampling.DEFAULT_SHOTS,
    seeds=range(100),
    steps: int = 41,
    noise_spec: Optional[NoiseSpec] = None,
) -> list[ReportRow]:
    """Theta sweep of the toy swap-test classifier measured through the ancilla only."""
    cfg = ExperimentConfig(
        dataset=DatasetSource(toy_theta=0.0),
        classifier=ClassifierSpec("STC", 1, 1),
        noise=noise_spec,
        shots=ShotSettings(count=shots, seeds=tuple(seeds), reduce=True),
        sweep=Sweep("theta", tuple(float(v) for v in np.linspace(0.0, 2 * math.pi, steps))),
    )
    return run_rows(cfg)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(value).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def _label_text(label: Optional[int]) -> str:
    return "abstain" if label is None else str(label)


def row_values(row: ReportRow) -> list[str]:
    out = []
    for name in CSV_COLUMNS:
        v = getattr(row, name)
        out.append(_label_text(v) if name.startswith("label_") else _fmt(v))
    return out


def rows_to_csv(rows, columns=CSV_COLUMNS, formatter=row_values) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow(formatter(row))
    return buf.getvalue()


def rows_to_json(rows) -> str:
    records = []
    for row in rows:
        rec = asdict(row)
        for key in ("label_mean", "label_majority"):
            rec[key] = _label_text(rec[key])
        records.append(rec)
    return json.dumps({"schema_version": SCHEMA_VERSION, "columns": list(CSV_COLUMNS), "rows": records}, indent=1) + "\n"


def render(rows, fmt: str = "csv") -> str:
    if fmt == "json":
        return rows_to_json(rows)
    return rows_to_csv(rows)


def run(cfg: ExperimentConfig, out: Optional[Path | str] = None, fmt: Optional[str] = None, jobs: int = 1) -> str:
    """Run a config and write (or return) the rendered report."""
    text = render(run_rows(cfg, jobs), fmt or cfg.output_format)
    target = out if out is not None else cfg.output_path
    if target:
        Path(target).write_text(text)
    return text


def with_overrides(cfg: ExperimentConfig, seed: Optional[int] = None, shots: Optional[int] = None) -> ExperimentConfig:
    sh = cfg.shots
    if seed is not None:
        sh = replace(sh, seeds=(seed,), repetitions=1)
    if shots is not None:
        sh = replace(sh, count=shots)
    return replace(cfg, shots=sh)

