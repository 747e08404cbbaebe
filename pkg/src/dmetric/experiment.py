"""Experiment configuration and the work behind each CLI subcommand.

All pairwise quantities in one run share one sample set per measure, and
every output is written in a fixed order so identical configs give
byte-identical files.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import jsonschema
import numpy as np

from .measure import InputMeasure, ball, density, kappa, measure_from_config, sample
from .metric import DistanceEstimate, d_mu_disagreement, region_indices
from .net import Activation, NetworkParams, euclidean_distance, param_count, unflatten
from .oracle import exact_disagreement, halfplane_of, has_closed_form, quad_disagreement
from .quotient import continuity_probe, metric_axiom_suite

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1

_measure_schema = {
    "type": "object",
    "additionalProperties": False,
    "required": ["domain"],
    "properties": {
        "domain": {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {
                "kind": {"enum": ["box", "ball"]},
                "bounds": {
                    "type": "array",
                    "minItems": 1,
                    "items": {"type": "array", "minItems": 2, "maxItems": 2, "items": {"type": "number"}},
                },
                "radius": {"type": "number", "exclusiveMinimum": 0},
                "dim": {"type": "integer", "minimum": 1},
            },
        },
        "law": {"enum": ["uniform", "truncated_gaussian"]},
        "mean": {"type": "array", "items": {"type": "number"}},
    },
}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["schema_version", "measures", "networks", "n_samples", "seed"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "measures": {"type": "object", "minProperties": 1, "additionalProperties": _measure_schema},
        "networks": {
            "type": "object",
            "additionalProperties": False,
            "required": ["layer_dims", "vectors"],
            "properties": {
                "layer_dims": {"type": "array", "minItems": 2, "items": {"type": "integer", "minimum": 1}},
                "activation": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["kind"],
                    "properties": {
                        "kind": {"enum": ["identity", "tanh", "logistic", "leaky_relu", "softplus"]},
                        "slope": {"type": "number", "exclusiveMinimum": 0},
                    },
                },
                "vectors": {
                    "type": "object",
                    "minProperties": 1,
                    "additionalProperties": {"type": "array", "items": {"type": "number"}},
                },
            },
        },
        "n_samples": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer"},
        "tie_tol": {"type": "number", "minimum": 0},
        "oracle_grid": {"type": "integer", "minimum": 64},
        "kappa_probe_res": {"type": "integer", "minimum": 2},
        "reference_values": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "euclidean": {"type": "object", "additionalProperties": {"type": "number"}},
                "d_mu": {
                    "type": "object",
                    "additionalProperties": {"type": "object", "additionalProperties": {"type": "number"}},
                },
                "label": {"type": "string"},
            },
        },
        "sweep": {
            "type": "object",
            "additionalProperties": False,
            "required": ["reference", "base", "free_param_indices", "ranges", "resolution"],
            "properties": {
                "reference": {"type": "string"},
                "base": {"type": ["string", "array"], "items": {"type": "number"}},
                "free_param_indices": {
                    "type": "array",
                    "minItems": 2,
                    "maxItems": 2,
                    "items": {"type": "integer", "minimum": 0},
                },
                "ranges": {
                    "type": "array",
                    "minItems": 2,
                    "maxItems": 2,
                    "items": {"type": "array", "minItems": 2, "maxItems": 2, "items": {"type": "number"}},
                },
                "resolution": {"type": "integer", "minimum": 2},
                "measure": {"type": "string"},
            },
        },
        "notes": {"type": "array", "items": {"type": "string"}},
    },
}


class ConfigError(ValueError):
    """Invalid experiment configuration or arguments; maps to exit code 2."""


@dataclass
class ExperimentConfig:
    raw: dict
    measures: dict
    layer_dims: tuple
    activation: Activation
    vectors: dict
    n_samples: int
    seed: int
    tie_tol: float = 0.0

    def network(self, name: str) -> NetworkParams:
        if name not in self.vectors:
            raise ConfigError(f"unknown network {name!r}; known: {sorted(self.vectors)}")
        return unflatten(self.layer_dims, self.activation, self.vectors[name])

    def networks(self) -> dict:
        return {name: self.network(name) for name in self.vectors}

    def measure(self, name: str | None = None) -> tuple:
        if name is None:
            name = self.raw.get("sweep", {}).get("measure") or next(iter(self.measures))
        if name not in self.measures:
            raise ConfigError(f"unknown measure {name!r}; known: {sorted(self.measures)}")
        return name, self.measures[name]

    def resolved(self) -> dict:
        out = dict(self.raw)
        out["seed"] = self.seed
        out.setdefault("tie_tol", self.tie_tol)
        return out


def parse_config(text: str, source: str = "<config>", seed: int | None = None) -> ExperimentConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    try:
        jsonschema.validate(raw, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{source}: field {where}: {exc.message}") from None

    measures = {}
    for name, mcfg in raw["measures"].items():
        dom = mcfg["domain"]
        if dom["kind"] == "box" and "bounds" not in dom:
            raise ConfigError(f"{source}: field measures/{name}/domain: box needs bounds")
        if dom["kind"] == "ball" and "radius" not in dom:
            raise ConfigError(f"{source}: field measures/{name}/domain: ball needs radius")
        try:
            measures[name] = measure_from_config(mcfg)
        except ValueError as exc:
            raise ConfigError(f"{source}: field measures/{name}: {exc}") from None

    net = raw["networks"]
    dims = tuple(net["layer_dims"])
    try:
        act = Activation.from_dict(net.get("activation", {"kind": "identity"}))
    except ValueError as exc:
        raise ConfigError(f"{source}: field networks/activation: {exc}") from None
    m = param_count(dims)
    for name, vec in net["vectors"].items():
        if len(vec) != m:
            raise ConfigError(f"{source}: field networks/vectors/{name}: length {len(vec)}, expected {m}")
    for name, meas in measures.items():
        if meas.dim != dims[0]:
            raise ConfigError(f"{source}: field measures/{name}: dimension {meas.dim} does not match n_0={dims[0]}")

    sweep = raw.get("sweep")
    if sweep is not None:
        if sweep["reference"] not in net["vectors"]:
            raise ConfigError(f"{source}: field sweep/reference: unknown network {sweep['reference']!r}")
        base = sweep["base"]
        if isinstance(base, str) and base not in net["vectors"]:
            raise ConfigError(f"{source}: field sweep/base: unknown network {base!r}")
        if not isinstance(base, str) and len(base) != m:
            raise ConfigError(f"{source}: field sweep/base: length {len(base)}, expected {m}")
        if any(i >= m for i in sweep["free_param_indices"]) or len(set(sweep["free_param_indices"])) != 2:
            raise ConfigError(f"{source}: field sweep/free_param_indices: need two distinct indices < {m}")
        for lo, hi in sweep["ranges"]:
            if not lo < hi:
                raise ConfigError(f"{source}: field sweep/ranges: need lower < upper, got [{lo}, {hi}]")
        if "measure" in sweep and sweep["measure"] not in measures:
            raise ConfigError(f"{source}: field sweep/measure: unknown measure {sweep['measure']!r}")

    return ExperimentConfig(
        raw=raw,
        measures=measures,
        layer_dims=dims,
        activation=act,
        vectors={k: np.asarray(v, dtype=float) for k, v in net["vectors"].items()},
        n_samples=raw["n_samples"],
        seed=raw["seed"] if seed is None else seed,
        tie_tol=float(raw.get("tie_tol", 0.0)),
    )


def load_config(path, seed: int | None = None) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, str(path), seed)


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def _pair_key(a: str, b: str) -> str:
    return f"{a},{b}"


def _reference(table: dict, a: str, b: str):
    for key in (_pair_key(a, b), _pair_key(b, a)):
        if key in table:
            return table[key]
    return None


EXACT_ORACLE_TOL = 1e-12


def _oracle(w: NetworkParams, w2: NetworkParams, meas: InputMeasure, grid: int, tie_tol: float):
    """Oracle value, method name and an error allowance for the oracle itself."""
    if w.n_inputs != 2:
        return None, None, None
    if w.layer_dims == (2, 2) and tie_tol == 0:
        h1, h2 = halfplane_of(w), halfplane_of(w2)
        if not (h1.degenerate or h2.degenerate) and has_closed_form(h1, h2, meas):
            return exact_disagreement(h1, h2, meas), "exact", EXACT_ORACLE_TOL
    fine = quad_disagreement(w, w2, meas, grid, tie_tol)
    # grid-halving gap as the discretisation error estimate
    coarse = quad_disagreement(w, w2, meas, max(64, grid // 2), tie_tol)
    return fine, "quadrature", abs(fine - coarse) + EXACT_ORACLE_TOL


# --- tables ---------------------------------------------------------------


def run_tables(cfg: ExperimentConfig, out_dir, workers: int = 1) -> dict:
    names = list(cfg.vectors)
    if len(names) < 2:
        raise ConfigError("tables needs at least two named networks")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    refs = cfg.raw.get("reference_values", {})
    ref_euc = refs.get("euclidean", {})
    ref_dmu = refs.get("d_mu", {})
    grid = cfg.raw.get("oracle_grid", 1024)
    nets = cfg.networks()
    pairs = list(itertools.combinations(names, 2))

    euclid = []
    for a, b in pairs:
        euclid.append(
            {
                "a": a,
                "b": b,
                "distance": euclidean_distance(cfg.vectors[a], cfg.vectors[b]),
                "reference": _reference(ref_euc, a, b),
            }
        )

    per_measure = {}
    rows = []
    for mname, meas in cfg.measures.items():
        x = sample(meas, cfg.n_samples, cfg.seed, workers)
        axioms = metric_axiom_suite([nets[n] for n in names], x, cfg.tie_tol) if len(names) >= 3 else None
        entries = []
        for a, b in pairs:
            est = d_mu_disagreement(nets[a], nets[b], x, cfg.tie_tol)
            oracle, method, oracle_tol = _oracle(nets[a], nets[b], meas, grid, cfg.tie_tol)
            ref = _reference(ref_dmu.get(mname, {}), a, b)
            entry = {
                "a": a,
                "b": b,
                "estimate": est.to_dict(),
                "oracle": oracle,
                "oracle_method": method,
                "oracle_tol": oracle_tol,
                "within_3ci_of_oracle": (
                    None if oracle is None else bool(abs(est.value - oracle) <= 3 * est.ci_half_width + oracle_tol)
                ),
                "reference": ref,
            }
            entries.append(entry)
            rows.append((mname, a, b, est, oracle, method, ref))
        per_measure[mname] = {
            "measure": meas.to_dict(),
            "pairs": entries,
            "axioms": None if axioms is None else axioms.to_dict(),
        }

    checked = [e["within_3ci_of_oracle"] for m in per_measure.values() for e in m["pairs"] if e["oracle"] is not None]
    report = {
        "config": cfg.resolved(),
        "euclidean": euclid,
        "d_mu": per_measure,
        "cross_validation": {
            "entries_with_oracle": len(checked),
            "within_3ci": int(sum(checked)),
        },
        "reference_label": refs.get("label", "setup unconfirmed"),
        "notes": cfg.raw.get("notes", []),
    }

    with open(out_dir / "report.json", "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2)
        fh.write("\n")
    with open(out_dir / "euclidean.csv", "w", encoding="utf-8", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["a", "b", "distance", "reference"])
        for e in euclid:
            wr.writerow([e["a"], e["b"], fmt(e["distance"]), "" if e["reference"] is None else fmt(e["reference"])])
    with open(out_dir / "d_mu.csv", "w", encoding="utf-8", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["measure", "a", "b", "d_mu", "ci95", "oracle", "oracle_method", "reference"])
        for mname, a, b, est, oracle, method, ref in rows:
            wr.writerow(
                [
                    mname,
                    a,
                    b,
                    fmt(est.value),
                    fmt(est.ci_half_width),
                    "" if oracle is None else fmt(oracle),
                    method or "",
                    "" if ref is None else fmt(ref),
                ]
            )
    return report


def format_tables(report: dict) -> str:
    lines = ["Euclidean distances"]
    for e in report["euclidean"]:
        ref = "" if e["reference"] is None else f"   reference {e['reference']:.4f}"
        lines.append(f"  {e['a']:>6} {e['b']:>6}  {e['distance']:.4f}{ref}")
    label = report["reference_label"]
    for mname, block in report["d_mu"].items():
        lines.append(f"d_mu under {mname}")
        for e in block["pairs"]:
            est = e["estimate"]
            s = f"  {e['a']:>6} {e['b']:>6}  {est['value']:.4f} +/- {est['ci95']:.4f}"
            if e["oracle"] is not None:
                s += f"   oracle({e['oracle_method']}) {e['oracle']:.4f}"
            if e["reference"] is not None:
                s += f"   reference {e['reference']:.4f} ({label})"
            lines.append(s)
        ax = block["axioms"]
        if ax is not None:
            bad = ax["negative"] + ax["nonzero_diagonal"] + ax["asymmetric"] + ax["triangle_violations"]
            lines.append(f"  metric axioms: {bad} violations over {ax['triangle_checks']} triangle checks")
    for note in report["notes"]:
        lines.append(f"note: {note}")
    return "\n".join(lines)


# --- sweep ----------------------------------------------------------------


def sweep_grid(cfg: ExperimentConfig) -> tuple:
    sw = cfg.raw.get("sweep")
    if sw is None:
        raise ConfigError("config has no sweep section")
    (lo1, hi1), (lo2, hi2) = sw["ranges"]
    res = sw["resolution"]
    return np.linspace(lo1, hi1, res), np.linspace(lo2, hi2, res)


def run_sweep(cfg: ExperimentConfig, workers: int = 1, measure_name: str | None = None) -> list:
    """Distance to the reference at every grid node, row-major with p1 outermost."""
    sw = cfg.raw.get("sweep")
    if sw is None:
        raise ConfigError("config has no sweep section")
    _, meas = cfg.measure(measure_name)
    ref = cfg.network(sw["reference"])
    base = cfg.vectors[sw["base"]] if isinstance(sw["base"], str) else np.asarray(sw["base"], dtype=float)
    i1, i2 = sw["free_param_indices"]
    g1, g2 = sweep_grid(cfg)
    x = sample(meas, cfg.n_samples, cfg.seed, workers)
    ref_regions = region_indices(ref, x, cfg.tie_tol)
    n = x.shape[0]
    nodes = [(p1, p2) for p1 in g1 for p2 in g2]

    def node(p):
        v = base.copy()
        v[i1], v[i2] = p
        r = region_indices(unflatten(cfg.layer_dims, cfg.activation, v), x, cfg.tie_tol)
        return DistanceEstimate.from_count(int(np.count_nonzero(r != ref_regions)), n, "disagreement")

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            ests = list(pool.map(node, nodes))
    else:
        ests = [node(p) for p in nodes]
    return [(p1, p2, e.value, e.ci_half_width) for (p1, p2), e in zip(nodes, ests)]


def sweep_csv(rows: list) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["p1", "p2", "d_mu", "ci95"])
    for row in rows:
        wr.writerow([fmt(v) for v in row])
    return buf.getvalue()


# --- kappa ----------------------------------------------------------------


def run_kappa(cfg: ExperimentConfig) -> list:
    res = cfg.raw.get("kappa_probe_res", 512)
    out = []
    for name, meas in cfg.measures.items():
        k = kappa(meas)
        entry = {"measure": name, "law": meas.law, "domain": meas.domain.to_dict(), "kappa": k}
        if meas.dim == 2:
            (x0, x1), (y0, y1) = meas.domain.bounding_box()
            gx, gy = np.meshgrid(np.linspace(x0, x1, res), np.linspace(y0, y1, res), indexing="ij")
            dens = density(meas, np.column_stack([gx.ravel(), gy.ravel()]))
            entry["probe_max_density"] = float(dens.max())
            entry["margin"] = k - float(dens.max())
            entry["violations"] = int(np.count_nonzero(dens > k))
        if meas.domain.kind == "box":
            half = min(hi - lo for lo, hi in meas.domain.bounds) / 2
            inscribed = InputMeasure(ball(half, meas.dim), meas.law, None if meas.law == "uniform" else (0.0,) * meas.dim)
            entry["kappa_inscribed_ball"] = kappa(inscribed)
        out.append(entry)
    return out


def format_kappa(entries: list) -> str:
    lines = []
    for e in entries:
        s = f"{e['measure']}: kappa = {e['kappa']:.8f}"
        if "margin" in e:
            s += f"  max density on probe grid = {e['probe_max_density']:.8f}  margin = {e['margin']:.3e}  violations = {e['violations']}"
        if "kappa_inscribed_ball" in e:
            s += f"  (centred inscribed ball: {e['kappa_inscribed_ball']:.8f})"
        lines.append(s)
    return "\n".join(lines)


# --- probe ----------------------------------------------------------------


def run_probe(
    cfg: ExperimentConfig,
    center: str,
    radius: float,
    n_neighbors: int,
    measure_name: str | None = None,
    workers: int = 1,
) -> dict:
    if not radius > 0:
        raise ConfigError("radius must be positive")
    if n_neighbors < 1:
        raise ConfigError("neighbors must be >= 1")
    net = cfg.network(center)
    mname, meas = cfg.measure(measure_name)
    x = sample(meas, cfg.n_samples, cfg.seed, workers)
    res = continuity_probe(net, radius, n_neighbors, x, cfg.seed, cfg.tie_tol, workers)
    out = {"config": cfg.resolved(), "center_name": center, "measure": mname}
    out.update(res.to_dict())
    out["bound_satisfied"] = bool(res.max_quotient_distance >= res.discontinuity_bound)
    return out
