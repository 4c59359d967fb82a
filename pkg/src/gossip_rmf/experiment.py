"""Experiment configs, orchestration of all solution methods, CSV output.

A config is a flat UTF-8 text of ``key = value`` lines; ``#`` starts a
comment and lists are comma separated::

    model = six-state
    N = 100
    gmax = 3
    init = single
    t_max = 500
    runs = 500
    seed = 2020
    methods = classic, refined, popsim
    measures = replication, coverage

``init = single`` introduces one fresh copy into a network where nobody has
seen it (the only initial condition the agent simulator can reproduce).
Alternatively ``counts`` lists the number of nodes per model state.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np

from .agentsim import run_experiment as agent_experiment
from .exact import exact_expected_series
from .kernels import GossipParams, InvalidParams, ModelKind, build_model, measure, state_names
from .meanfield import classic_trajectory, measure_series
from .popsim import simulate_runs, stats_from_samples
from .refined import refined_trajectory

METHODS = ("classic", "refined", "popsim", "agentsim", "exact")
MEASURES = ("replication", "coverage")
COLUMN_GROUPS = ("classic", "refined", "popsim_mean", "popsim_std", "agentsim_mean", "agentsim_std", "exact")
PRESETS = ("fig1", "fig3", "fig5", "fig7", "fig8")


class ConfigError(ValueError):
    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


class UnknownKey(ConfigError):
    pass


class TypeMismatch(ConfigError):
    pass


class InvariantViolation(ConfigError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    model: ModelKind
    params: GossipParams
    counts: tuple
    init: str = "counts"
    t_max: int = 100
    runs: int = 100
    seed: int = 0
    methods: tuple = ("classic",)
    measures: tuple = ("replication",)
    out: str | None = None

    @property
    def N(self) -> int:
        return self.params.n_population

    def with_overrides(self, **kw) -> "ExperimentConfig":
        """Copy with some keys replaced; ``None`` values are ignored. Re-validated."""
        kw = {k: v for k, v in kw.items() if v is not None}
        if "methods" in kw:
            kw["methods"] = _ordered(kw["methods"], METHODS, "methods")
        cfg = replace(self, **kw)
        _check(cfg)
        return cfg


def _int(key, raw):
    try:
        return int(raw)
    except ValueError:
        raise TypeMismatch(key, f"expected an integer, got {raw!r}") from None


def _list(raw):
    return [x.strip() for x in raw.split(",") if x.strip()]


def _ordered(values, allowed, key):
    values = list(values)
    for v in values:
        if v not in allowed:
            raise InvariantViolation(key, f"unknown entry {v!r} (allowed: {', '.join(allowed)})")
    return tuple(v for v in allowed if v in values)


_INT_KEYS = {"N": "n_population", "n_items": "n_items", "c": "c", "s": "s", "gmax": "gmax"}
_KEYS = set(_INT_KEYS) | {"model", "init", "counts", "t_max", "runs", "seed", "methods", "measures", "out"}


def single_fresh_counts(kind: ModelKind, N: int, gmax: int) -> tuple:
    """One node holds the fresh item, all others have never seen it.

    In the delay-resolved models the holder sits in D0 and the remaining
    nodes are spread round-robin over the delay classes.
    """
    kind = ModelKind.parse(kind)
    names = state_names(kind, gmax)
    counts = dict.fromkeys(names, 0)
    if kind is ModelKind.SIX_STATE:
        counts["PD"], counts["I"] = 1, N - 1
    elif kind is ModelKind.THREE_STATE:
        counts["D"], counts["I"] = 1, N - 1
    elif kind is ModelKind.TWO_STATE:
        counts["D"], counts["O"] = 1, N - 1
    else:
        counts["D0"] = 1
        prefix = "I" if kind is ModelKind.FULL_COVERAGE else "O"
        for k in range(N - 1):
            counts[f"{prefix}{(k + 1) % (gmax + 1)}"] += 1
    return tuple(counts[x] for x in names)


def parse_config(text: str) -> ExperimentConfig:
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise TypeMismatch(f"line {lineno}", f"expected 'key = value', got {line!r}")
        key, value = (x.strip() for x in line.split("=", 1))
        if key not in _KEYS:
            raise UnknownKey(key, "not a recognised config key")
        raw[key] = value

    if "model" not in raw:
        raise InvariantViolation("model", "missing")
    try:
        kind = ModelKind.parse(raw["model"])
    except ValueError as e:
        raise TypeMismatch("model", str(e)) from None

    ints = {field_: _int(key, raw[key]) for key, field_ in _INT_KEYS.items() if key in raw}
    try:
        params = GossipParams(**ints)
    except InvalidParams as e:
        raise InvariantViolation("params", str(e)) from None

    if "counts" in raw and "init" in raw:
        raise InvariantViolation("init", "give either init or counts, not both")
    if "counts" in raw:
        init = "counts"
        counts = tuple(_int("counts", x) for x in _list(raw["counts"]))
    else:
        init = raw.get("init", "single")
        if init != "single":
            raise InvariantViolation("init", f"unknown preset {init!r} (only 'single' is defined)")
        counts = single_fresh_counts(kind, params.n_population, params.gmax)

    cfg = ExperimentConfig(
        model=kind,
        params=params,
        counts=counts,
        init=init,
        t_max=_int("t_max", raw.get("t_max", "100")),
        runs=_int("runs", raw.get("runs", "100")),
        seed=_int("seed", raw.get("seed", "0")),
        methods=_ordered(_list(raw.get("methods", "classic")), METHODS, "methods"),
        measures=_ordered(_list(raw.get("measures", "replication")), MEASURES, "measures"),
        out=raw.get("out"),
    )
    _check(cfg)
    return cfg


def _check(cfg: ExperimentConfig):
    n = cfg.model.n_states(cfg.params.gmax)
    if len(cfg.counts) != n:
        raise InvariantViolation("counts", f"{cfg.model.value} with gmax={cfg.params.gmax} has {n} states, got {len(cfg.counts)} counts")
    if any(c < 0 for c in cfg.counts):
        raise InvariantViolation("counts", "counts must be non-negative")
    if sum(cfg.counts) != cfg.N:
        raise InvariantViolation("counts", f"counts sum to {sum(cfg.counts)}, expected N={cfg.N}")
    if cfg.t_max < 0:
        raise InvariantViolation("t_max", "must be non-negative")
    if cfg.runs < 1:
        raise InvariantViolation("runs", "must be at least 1")
    if "agentsim" in cfg.methods and cfg.init != "single":
        raise InvariantViolation("init", "agentsim needs init = single")
    if "agentsim" in cfg.methods and cfg.N < 2:
        raise InvariantViolation("N", "agentsim needs at least two nodes")
    for name in cfg.measures:
        try:
            measure(cfg.model, name, cfg.params.gmax)
        except ValueError as e:
            raise InvariantViolation("measures", str(e)) from None


def preset_text(name: str) -> str:
    if name not in PRESETS:
        raise UnknownKey("preset", f"unknown preset {name!r} (available: {', '.join(PRESETS)})")
    return resources.files(__package__).joinpath("presets", f"{name}.cfg").read_text(encoding="utf-8")


def load_config(source: str) -> ExperimentConfig:
    """Parse a config file, or a shipped preset given by name (``fig7``)."""
    if source in PRESETS:
        return parse_config(preset_text(source))
    path = Path(source)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError("config", f"cannot read {path}: {e.strerror}") from None
    return parse_config(text)


@dataclass
class ResultTable:
    t: np.ndarray
    columns: dict = field(default_factory=dict)

    @property
    def header(self) -> list:
        return ["t", *self.columns]

    def __getitem__(self, name) -> np.ndarray:
        return self.columns[name]

    def __eq__(self, other):
        if not isinstance(other, ResultTable) or self.header != other.header:
            return False
        return np.array_equal(self.t, other.t) and all(
            np.array_equal(self.columns[k], other.columns[k]) for k in self.columns
        )


def column_name(group: str, measure_name: str) -> str:
    return f"{group}_{measure_name}"


def run(cfg: ExperimentConfig) -> ResultTable:
    """Run every selected method; columns come out in the fixed CSV order."""
    model = build_model(cfg.model, cfg.params)
    gmax = cfg.params.gmax
    counts = np.array(cfg.counts, dtype=np.int64)
    mu0 = counts / cfg.N
    hs = {name: measure(cfg.model, name, gmax) for name in cfg.measures}
    values = {}

    if "classic" in cfg.methods or "refined" in cfg.methods:
        if "refined" in cfg.methods:
            rt = refined_trajectory(model, mu0, cfg.t_max, cfg.N)
            mu = rt.mu
        else:
            mu = classic_trajectory(model, mu0, cfg.t_max)
        for name, h in hs.items():
            if "classic" in cfg.methods:
                values[("classic", name)] = measure_series(mu, h)
            if "refined" in cfg.methods:
                values[("refined", name)] = rt.measure(h)

    if "popsim" in cfg.methods:
        occ = simulate_runs(model, counts, cfg.t_max, cfg.runs, cfg.seed) / cfg.N
        for name, h in hs.items():
            st = stats_from_samples(occ @ h.weights, cfg.seed)
            values[("popsim_mean", name)] = st.mean
            values[("popsim_std", name)] = st.std

    if "agentsim" in cfg.methods:
        rep, cov = agent_experiment(cfg.params, cfg.t_max, cfg.runs, cfg.seed)
        for name, st in (("replication", rep), ("coverage", cov)):
            if name in hs:
                values[("agentsim_mean", name)] = st.mean
                values[("agentsim_std", name)] = st.std

    if "exact" in cfg.methods:
        E = exact_expected_series(model, counts, cfg.t_max)
        for name, h in hs.items():
            values[("exact", name)] = measure_series(E, h)

    columns = {}
    for group in COLUMN_GROUPS:
        for name in MEASURES:
            if (group, name) in values:
                columns[column_name(group, name)] = np.asarray(values[(group, name)], dtype=float)
    t = np.arange(cfg.t_max + 1) if columns else np.arange(0)
    return ResultTable(t, columns)


def _fmt(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        raise ValueError("non-finite value in result table")
    return "%.17g" % x


def csv_text(table: ResultTable) -> str:
    buf = io.StringIO()
    buf.write(",".join(table.header) + "\n")
    cols = list(table.columns.values())
    for i, t in enumerate(table.t):
        buf.write(",".join([str(int(t))] + [_fmt(float(c[i])) for c in cols]) + "\n")
    return buf.getvalue()


def write_csv(table: ResultTable, path) -> Path:
    path = Path(path)
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(csv_text(table))
    except OSError as e:
        raise OSError(e.errno, f"cannot write {path}: {e.strerror}") from None
    return path


def read_csv(path) -> ResultTable:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    t = np.array([int(r[0]) for r in body], dtype=np.int64)
    columns = {name: np.array([float(r[j]) for r in body]) for j, name in enumerate(header[1:], 1)}
    return ResultTable(t, columns)


_PLOT_TEMPLATE = '''"""Plot {csv_name}: one panel per measure, std-dev bars on simulation curves."""
import csv
import sys

import matplotlib.pyplot as plt

CSV = {csv_path!r}
MEASURES = {measures!r}
LINES = {lines!r}
BANDS = {bands!r}

with open(CSV, newline="") as fh:
    rows = list(csv.DictReader(fh))
t = [int(r["t"]) for r in rows]
col = lambda name: [float(r[name]) for r in rows]

fig, axes = plt.subplots(1, max(1, len(MEASURES)), figsize=(6 * max(1, len(MEASURES)), 4), squeeze=False)
for ax, m in zip(axes[0], MEASURES):
    for label, name in LINES.get(m, []):
        ax.plot(t, col(name), label=label)
    for label, mean, std in BANDS.get(m, []):
        step = max(1, len(t) // 25)
        ax.errorbar(t[::step], col(mean)[::step], yerr=col(std)[::step], fmt="o", ms=3, capsize=2, label=label)
    ax.set_xlabel("t")
    ax.set_ylabel(m)
    ax.legend()
fig.tight_layout()
out = sys.argv[1] if len(sys.argv) > 1 else {png!r}
fig.savefig(out)
'''


def write_plot_script(table: ResultTable, path, csv_path=None) -> Path:
    """Emit a stand-alone matplotlib script that renders the CSV of ``table``."""
    path = Path(path)
    csv_path = Path(csv_path) if csv_path is not None else path.with_suffix(".csv")
    measures = [m for m in MEASURES if any(c.endswith("_" + m) for c in table.columns)]
    lines, bands = {}, {}
    for m in measures:
        for group in ("classic", "refined", "exact", "popsim_mean", "agentsim_mean"):
            name = column_name(group, m)
            if name not in table.columns:
                continue
            std = column_name(group.replace("_mean", "_std"), m)
            if group.endswith("_mean") and std in table.columns:
                bands.setdefault(m, []).append((group[: -len("_mean")], name, std))
            else:
                lines.setdefault(m, []).append((group, name))
    text = _PLOT_TEMPLATE.format(
        csv_name=csv_path.name,
        csv_path=str(csv_path),
        measures=measures,
        lines=lines,
        bands=bands,
        png=str(path.with_suffix(".png")),
    )
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as e:
        raise OSError(e.errno, f"cannot write {path}: {e.strerror}") from None
    return path
