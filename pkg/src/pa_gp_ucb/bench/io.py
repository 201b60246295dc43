"""Config files, CSV traces and aggregates, and SVG regret plots."""
from __future__ import annotations

import csv
import dataclasses
import math
import typing
import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np

from ..algorithms import RegretTrace, RunConfig
from ..errors import InputError, ParseError
from ..gp_core import Domain
from ..offline_design import epsilon_net, net_from_count

FLOAT_FMT = ".12g"
AGGREGATE_HEADER = ["algorithm", "t", "mean_cum_regret", "stderr", "n_runs"]
# set from the command line only, never from a config file
CLI_ONLY_KEYS = {"env.remote_endpoint"}
NET_KEYS = {"epsilon", "per_dim", "replication"}


def fmt(v) -> str:
    return format(float(v), FLOAT_FMT)


# -- config files -----------------------------------------------------------
def parse_config_text(text: str) -> dict:
    """``key = value`` lines; ``#`` starts a comment; duplicate keys are an error."""
    pairs = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected key=value, got {line!r}", row=lineno)
        key, value = (p.strip() for p in line.split("=", 1))
        if not key:
            raise ParseError("empty key", row=lineno)
        if key in pairs:
            raise ParseError(f"duplicate key {key!r}", row=lineno)
        pairs[key] = value
    return pairs


def _coerce(tp, raw: str, key: str):
    if typing.get_origin(tp) is typing.Union:
        if raw.lower() in ("none", ""):
            return None
        tp = next(a for a in typing.get_args(tp) if a is not type(None))
    try:
        if tp is bool:
            low = raw.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(raw)
            return low in ("true", "1", "yes")
        if tp is int:
            return int(raw)
        if tp is float:
            return float(raw)
        if tp is str:
            return raw
        if tp is tuple:
            return tuple(float(v) for v in raw.split(","))
    except ValueError:
        raise InputError(f"bad value {raw!r} for {key}") from None
    raise InputError(f"{key} cannot be set from a config file")


def _nest(pairs: dict) -> dict:
    tree = {}
    for key, value in pairs.items():
        node = tree
        *head, last = key.split(".")
        for part in head:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise InputError(f"{key} conflicts with a scalar key")
        if isinstance(node.get(last), dict):
            raise InputError(f"{key} conflicts with nested keys")
        node[last] = value
    return tree


def _build(cls, tree: dict, prefix: str):
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls)}
    kwargs = {}
    for name, value in tree.items():
        key = f"{prefix}{name}"
        if name not in names:
            raise InputError(f"unknown config key {key!r}")
        tp = hints[name]
        if isinstance(value, dict):
            if not dataclasses.is_dataclass(tp):
                raise InputError(f"{key} takes a value, not nested keys")
            kwargs[name] = _build(tp, value, key + ".")
        elif dataclasses.is_dataclass(tp):
            raise InputError(f"{key} needs nested keys such as {key}.<field>")
        else:
            kwargs[name] = _coerce(tp, value, key)
    return cls(**kwargs)


def _build_net(tree: dict, domain: Domain):
    unknown = set(tree) - NET_KEYS
    if unknown:
        raise InputError(f"unknown config key(s) {sorted('net.' + k for k in unknown)}")
    replication = int(tree.get("replication", 1))
    if ("epsilon" in tree) == ("per_dim" in tree):
        raise InputError("give exactly one of net.epsilon and net.per_dim")
    if "epsilon" in tree:
        return epsilon_net(domain, float(tree["epsilon"]), replication)
    return net_from_count(domain, int(tree["per_dim"]), replication)


def config_from_pairs(pairs: dict) -> RunConfig:
    """Build a :class:`RunConfig` from flat dotted keys mirroring its field names."""
    for key in pairs:
        if key in CLI_ONLY_KEYS:
            raise InputError(f"{key} may only be given on the command line")
    tree = _nest(pairs)
    net_tree = tree.pop("net", None)
    if net_tree is not None and not isinstance(net_tree, dict):
        raise InputError("net needs nested keys (net.per_dim or net.epsilon, net.replication)")
    cfg = _build(RunConfig, tree, "")
    if net_tree is not None:
        cfg = cfg.replace(net=_build_net(net_tree, cfg.env.domain))
    return cfg


def config_to_pairs(cfg: RunConfig) -> dict:
    """Flat dotted keys for ``cfg`` (the net is written back by radius)."""
    out = {}

    def walk(obj, prefix):
        for f in dataclasses.fields(obj):
            v = getattr(obj, f.name)
            key = prefix + f.name
            if f.name == "net" and prefix == "":
                if v is not None:
                    out["net.epsilon"] = repr(v.epsilon)
                    out["net.replication"] = str(v.replication)
                continue
            if dataclasses.is_dataclass(v):
                walk(v, key + ".")
            elif key in CLI_ONLY_KEYS:
                continue
            elif isinstance(v, tuple):
                out[key] = ",".join(repr(float(x)) for x in v)
            else:
                out[key] = "none" if v is None else (repr(v) if isinstance(v, float) else str(v))

    walk(cfg, "")
    return out


def load_config(path, overrides=()) -> RunConfig:
    """Read a config file; ``overrides`` are extra ``key=value`` strings applied on top."""
    pairs = parse_config_text(Path(path).read_text(encoding="utf-8"))
    for item in overrides:
        if "=" not in item:
            raise InputError(f"override {item!r} is not key=value")
        k, v = (p.strip() for p in item.split("=", 1))
        pairs[k] = v
    return config_from_pairs(pairs)


# -- CSV --------------------------------------------------------------------
def trace_header(dim: int) -> list:
    return ["run_id", "t"] + [f"x_{i}" for i in range(1, dim + 1)] + ["y", "y_ml", "f_x", "inst_regret", "cum_regret"]


def write_traces_csv(traces, path, dim=None):
    """One row per round of every trace. All traces must share a dimension."""
    if isinstance(traces, RegretTrace):
        traces = [traces]
    traces = list(traces)
    if dim is None:
        dims = {tr.x.shape[1] for tr in traces if tr.x.ndim == 2}
        if len(dims) > 1:
            raise InputError("traces of different dimensions")
        dim = dims.pop() if dims else 1
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(trace_header(dim))
        for tr in traces:
            for k in range(len(tr)):
                w.writerow([tr.run_id, k + 1, *(fmt(v) for v in tr.x[k]),
                            *(fmt(v[k]) for v in (tr.y, tr.y_ml, tr.f_x, tr.inst_regret, tr.cum_regret))])


def read_traces_csv(path) -> dict:
    """``run_id -> {column: array}`` from a trace CSV."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[:2] != ["run_id", "t"]:
            raise ParseError("not a trace CSV", row=1)
        dim = len(header) - 7
        if dim < 1 or header != trace_header(dim):
            raise ParseError(f"bad trace header {header}", row=1)
        runs = {}
        for rowno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ParseError(f"expected {len(header)} fields", row=rowno)
            runs.setdefault(row[0], []).append([float(v) for v in row[1:]])
    out = {}
    for run_id, rows in runs.items():
        A = np.array(rows)
        cols = {"t": A[:, 0].astype(int), "x": A[:, 1:1 + dim]}
        for j, name in enumerate(header[2 + dim:]):
            cols[name] = A[:, 1 + dim + j]
        out[run_id] = cols
    return out


def write_aggregate_csv(series, path):
    """``series`` is an :class:`EnsembleResult`, a dict of aggregates or a list of them."""
    series = getattr(series, "series", series)
    if isinstance(series, dict):
        series = list(series.values())
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(AGGREGATE_HEADER)
        for s in series:
            for t, m, se in zip(s.t, s.mean, s.stderr):
                w.writerow([s.algorithm, int(t), fmt(m), fmt(se), s.n_runs])


def read_aggregate_csv(path) -> dict:
    """``algorithm -> {"t", "mean_cum_regret", "stderr", "n_runs"}``."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != AGGREGATE_HEADER:
            raise ParseError(f"bad aggregate header {header}", row=1)
        rows = {}
        for rowno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ParseError(f"expected {len(header)} fields", row=rowno)
            rows.setdefault(row[0], []).append((int(row[1]), float(row[2]), float(row[3]), int(row[4])))
    out = {}
    for alg, rs in rows.items():
        A = np.array(rs, dtype=float)
        out[alg] = {"t": A[:, 0].astype(int), "mean_cum_regret": A[:, 1], "stderr": A[:, 2],
                    "n_runs": A[:, 3].astype(int)}
    return out


# -- SVG --------------------------------------------------------------------
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _nice_ticks(lo, hi, n=5):
    if not hi > lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 5, 10) if m * mag >= raw)
    start = math.ceil(lo / step) * step
    return [start + i * step for i in range(int((hi - start) / step + 1e-9) + 1)]


def write_svg(series, path, title="", xlabel="round t", ylabel="cumulative regret", width=640, height=400):
    """Mean curves with shaded one-standard-error bands; one ``<path>`` per series."""
    series = getattr(series, "series", series)
    if isinstance(series, dict):
        series = list(series.values())
    series = [s for s in series if s.n_runs > 0]
    ml, mr, mt, mb = 60, 150, 30, 45
    pw, ph = width - ml - mr, height - mt - mb
    if series:
        x_hi = max(float(s.t[-1]) for s in series)
        y_hi = max(float(np.max(s.mean + s.stderr)) for s in series)
        y_lo = min(0.0, min(float(np.min(s.mean - s.stderr)) for s in series))
    else:
        x_hi, y_lo, y_hi = 1.0, 0.0, 1.0
    x_lo = 1.0 if x_hi > 1 else 0.0
    y_hi = y_hi if y_hi > y_lo else y_lo + 1.0

    def sx(x):
        return ml + (x - x_lo) / (x_hi - x_lo if x_hi > x_lo else 1.0) * pw

    def sy(y):
        return mt + ph - (y - y_lo) / (y_hi - y_lo) * ph

    svg = ET.Element("svg", xmlns="http://www.w3.org/2000/svg", width=str(width), height=str(height),
                     viewBox=f"0 0 {width} {height}")
    ET.SubElement(svg, "rect", x="0", y="0", width=str(width), height=str(height), fill="white")
    if title:
        ET.SubElement(svg, "text", x=str(ml + pw / 2), y="18", attrib={"text-anchor": "middle", "font-size": "14"}).text = title
    axis = {"stroke": "black", "stroke-width": "1"}
    ET.SubElement(svg, "line", x1=str(ml), y1=str(mt + ph), x2=str(ml + pw), y2=str(mt + ph), attrib=axis)
    ET.SubElement(svg, "line", x1=str(ml), y1=str(mt), x2=str(ml), y2=str(mt + ph), attrib=axis)
    small = {"font-size": "11"}
    for v in _nice_ticks(x_lo, x_hi):
        ET.SubElement(svg, "line", x1=f"{sx(v):.2f}", y1=str(mt + ph), x2=f"{sx(v):.2f}", y2=str(mt + ph + 4), attrib=axis)
        ET.SubElement(svg, "text", x=f"{sx(v):.2f}", y=str(mt + ph + 16), attrib={**small, "text-anchor": "middle"}).text = f"{v:g}"
    for v in _nice_ticks(y_lo, y_hi):
        ET.SubElement(svg, "line", x1=str(ml - 4), y1=f"{sy(v):.2f}", x2=str(ml), y2=f"{sy(v):.2f}", attrib=axis)
        ET.SubElement(svg, "text", x=str(ml - 6), y=f"{sy(v) + 4:.2f}", attrib={**small, "text-anchor": "end"}).text = f"{v:g}"
    ET.SubElement(svg, "text", x=str(ml + pw / 2), y=str(height - 8), attrib={**small, "text-anchor": "middle"}).text = xlabel
    ET.SubElement(svg, "text", x="14", y=str(mt + ph / 2), attrib={**small, "text-anchor": "middle",
                  "transform": f"rotate(-90 14 {mt + ph / 2})"}).text = ylabel
    for k, s in enumerate(series):
        color = PALETTE[k % len(PALETTE)]
        upper = [(sx(t), sy(m + e)) for t, m, e in zip(s.t, s.mean, s.stderr)]
        lower = [(sx(t), sy(m - e)) for t, m, e in zip(s.t, s.mean, s.stderr)]
        pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in upper + lower[::-1])
        ET.SubElement(svg, "polygon", points=pts, fill=color, attrib={"fill-opacity": "0.2", "stroke": "none"})
        d = " ".join(f"{'M' if j == 0 else 'L'}{sx(t):.2f},{sy(m):.2f}" for j, (t, m) in enumerate(zip(s.t, s.mean)))
        ET.SubElement(svg, "path", d=d, fill="none", stroke=color, attrib={"stroke-width": "1.5", "data-series": s.algorithm})
        ly = mt + 14 + 18 * k
        ET.SubElement(svg, "line", x1=str(ml + pw + 12), y1=str(ly), x2=str(ml + pw + 32), y2=str(ly),
                      stroke=color, attrib={"stroke-width": "2"})
        ET.SubElement(svg, "text", x=str(ml + pw + 38), y=str(ly + 4), attrib=small).text = f"{s.algorithm} (n={s.n_runs})"
    ET.ElementTree(svg).write(path, encoding="utf-8", xml_declaration=True)
