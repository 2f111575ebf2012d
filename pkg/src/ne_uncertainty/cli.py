"""Command-line front end.

Verbs: analyze, fig1, fig2, region, entangle.  Every verb writes a CSV into
``--out`` and, with ``--svg``, an SVG next to it.  Exit codes: 0 success,
2 input error, 3 numeric or truncation error, 4 sweep with fewer than 95 %
successful cells.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import bounds, config, entanglement, fock, states, svg
from .errors import NumericsError, TruncationError

log = logging.getLogger("ne_uncertainty")

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_PARTIAL = 0, 2, 3, 4
SUCCESS_FRACTION = 0.95
SCHEMA_VERSION = 1

FIG_COLUMNS = ("alpha", "sqrt_det_v", "ne", "pg", "rs")
REGION_COLUMNS = ("b", "nu_plus", "nu_minus", "allowed")
ENTANGLE_COLUMNS = (
    "r",
    "nbar",
    "verdict",
    "branch",
    "simon_duan",
    "nu_tilde_plus",
    "nu_tilde_minus",
    "mu_b",
    "ng_b",
    "lhs",
    "rhs",
    "margin",
    "cutoff",
    "leakage",
    "error",
)
ANALYZE_COLUMNS = (
    "family",
    "cutoff",
    "sqrt_det_v",
    "rs",
    "eb",
    "ne",
    "ne_weak",
    "pg",
    "entropy",
    "purity",
    "ng_fidelity",
    "ng_super",
    "gaussianity",
    "leakage",
)


class InputError(Exception):
    pass


@dataclass(frozen=True)
class Range:
    start: float
    stop: float
    step: float

    def __post_init__(self):
        if not self.step > 0:
            raise InputError(f"range step must be positive, got {self.step!r}")
        if self.stop < self.start:
            raise InputError(f"empty range {self.start!r}..{self.stop!r}")

    def values(self):
        """Inclusive grid start, start + step, ..., <= stop."""
        n = int(math.floor((self.stop - self.start) / self.step + 1e-9))
        return [round(self.start + k * self.step, 12) for k in range(n + 1)]

    @classmethod
    def parse(cls, text):
        """``start:stop:step`` or a single value."""
        parts = str(text).split(":")
        try:
            nums = [float(p) for p in parts]
        except ValueError:
            raise InputError(f"cannot parse range {text!r}") from None
        if len(nums) == 1:
            return cls(nums[0], nums[0], 1.0)
        if len(nums) != 3:
            raise InputError(f"range needs start:stop:step, got {text!r}")
        return cls(*nums)


DEFAULT_RANGES = {
    "alpha": Range(0.0, 3.0, 0.05),
    "r": Range(0.0, 1.5, 0.05),
    "nbar": Range(0.0, 3.0, 0.1),
    "b": Range(0.0, 5.0, 1.0),
    "nu": Range(0.5, 4.0, 0.05),
}


@dataclass(frozen=True)
class RunConfig:
    cutoff: Optional[int] = None
    tolerances: dict = field(default_factory=dict)
    ranges: dict = field(default_factory=dict)
    out: str = "out"
    svg: bool = False
    jobs: int = field(default_factory=lambda: os.cpu_count() or 1)
    alpha: float = 0.0
    strong: bool = False

    def __post_init__(self):
        if self.cutoff is not None and (int(self.cutoff) != self.cutoff or self.cutoff < 2):
            raise InputError(f"invalid cutoff {self.cutoff!r}")
        if int(self.jobs) < 1:
            raise InputError("jobs must be at least 1")
        known = {f.name for f in dataclasses.fields(config.Tolerances)}
        bad = set(self.tolerances) - known
        if bad:
            raise InputError(f"unknown tolerance(s): {sorted(bad)}")
        for v in self.tolerances.values():
            if not (isinstance(v, (int, float)) and v > 0):
                raise InputError(f"tolerances must be positive numbers, got {v!r}")
        for name, rng in self.ranges.items():
            if name not in DEFAULT_RANGES:
                raise InputError(f"unknown sweep range {name!r}")
            if not isinstance(rng, Range):
                raise InputError(f"range {name!r} is not a Range")

    def range(self, name):
        return self.ranges.get(name, DEFAULT_RANGES[name])

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise InputError("config must be a JSON object")
        version = data.get("schema_version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise InputError(f"unsupported config schema_version {version!r}")
        allowed = {"schema_version", "cutoff", "tolerances", "ranges", "out", "svg", "jobs", "alpha", "strong"}
        extra = set(data) - allowed
        if extra:
            raise InputError(f"unknown config key(s): {sorted(extra)}")
        ranges = {}
        for name, spec in dict(data.get("ranges", {})).items():
            if isinstance(spec, dict):
                try:
                    ranges[name] = Range(float(spec["start"]), float(spec["stop"]), float(spec["step"]))
                except (KeyError, TypeError, ValueError):
                    raise InputError(f"range {name!r} needs numeric start, stop and step") from None
            else:
                ranges[name] = Range.parse(spec)
        kwargs = {k: data[k] for k in ("cutoff", "out", "svg", "jobs", "alpha", "strong") if k in data}
        return cls(tolerances=dict(data.get("tolerances", {})), ranges=ranges, **kwargs)


# ----------------------------------------------------------------------------
# output helpers


def fmt(v):
    """9 significant digits, locale independent; blank for missing values."""
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    v = float(v) + 0.0  # no "-0"
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return format(v, ".9g")


def write_csv(path, columns, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([fmt(row.get(c)) for c in columns])


def _prepare_out(directory):
    try:
        os.makedirs(directory, exist_ok=True)
    except OSError as exc:
        raise InputError(f"cannot create output directory {directory!r}: {exc}") from None
    if not os.access(directory, os.W_OK):
        raise InputError(f"output directory {directory!r} is not writable")
    return directory


# ----------------------------------------------------------------------------
# verbs


def _load_state_spec(path):
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read state file {path!r}: {exc}") from None
    if isinstance(data, dict) and data.get("schema_version", SCHEMA_VERSION) != SCHEMA_VERSION:
        raise InputError(f"unsupported state schema_version {data.get('schema_version')!r}")
    try:
        return states.StateSpec.from_dict(data)
    except (ValueError, TypeError) as exc:
        raise InputError(str(exc)) from None


def cmd_analyze(args, cfg):
    spec = _load_state_spec(args.state)
    if cfg.cutoff is not None:
        spec = dataclasses.replace(spec, cutoff=cfg.cutoff)
    try:
        state = states.build(spec)
    except (ValueError, TypeError) as exc:
        raise InputError(str(exc)) from None
    if state.modes != 1:
        raise InputError("analyze reports single-mode bounds; use entangle for two-mode states")
    report, ms = bounds.bound_report(state)
    row = {
        "family": spec.family,
        "cutoff": spec.cutoff,
        "sqrt_det_v": report.sqrt_det_v,
        "rs": report.rs,
        "eb": report.eb,
        "ne": report.ne,
        "ne_weak": report.ne_weak,
        "pg": report.pg,
        "leakage": state.leakage,
        **dataclasses.asdict(ms),
    }
    out = _prepare_out(cfg.out)
    write_csv(os.path.join(out, "analyze.csv"), ANALYZE_COLUMNS, [row])
    for key in ANALYZE_COLUMNS:
        print(f"{key:>12}  {fmt(row[key])}")
    for name, margin in report.margins.items():
        print(f"{'margin_' + name:>12}  {fmt(margin)}")
    return EXIT_OK


def fig_row(alpha, state):
    """One row of a single-mode amplitude sweep: sqrt(det V), NE, PG, RS."""
    report, _ = bounds.bound_report(state)
    return {"alpha": alpha, "sqrt_det_v": report.sqrt_det_v, "ne": report.ne, "pg": report.pg, "rs": report.rs}


FIGURE_ESCALATION = 8


def _fitted(make, a, d):
    """Build at ``d``; if the tail check fails, retry once at a larger cutoff."""
    state = make(a, d)
    if fock.check_truncation(state).passes():
        return state
    bigger = make(a, d + FIGURE_ESCALATION)
    fock.require_truncation(bigger)
    log.info("alpha=%s escalated to cutoff %d", a, d + FIGURE_ESCALATION)
    return bigger


def _amplitude_sweep(cfg, make, name):
    d = cfg.cutoff or states.DEFAULT_CUTOFF
    rows = []
    for a in cfg.range("alpha").values():
        try:
            rows.append(fig_row(a, _fitted(make, a, d)))
        except NumericsError as exc:
            log.warning("alpha=%s failed: %s", a, exc)
            rows.append({"alpha": a, "sqrt_det_v": math.nan, "ne": math.nan, "pg": math.nan, "rs": bounds.RS})
    out = _prepare_out(cfg.out)
    write_csv(os.path.join(out, f"{name}.csv"), FIG_COLUMNS, rows)
    if cfg.svg:
        xs = [r["alpha"] for r in rows]
        series = {
            "sqrt(det V)": [r["sqrt_det_v"] for r in rows],
            "NE": [r["ne"] for r in rows],
            "PG": [r["pg"] for r in rows],
            "RS": [r["rs"] for r in rows],
        }
        svg.line_plot(xs, series, "|alpha|", "sqrt(det V)", os.path.join(out, f"{name}.svg"), dashed=("PG", "RS"))
    return EXIT_OK


def cmd_fig1(args, cfg):
    make = states.even_cat if args.kind == "even" else states.odd_cat
    return _amplitude_sweep(cfg, make, f"fig1_{args.kind}")


def cmd_fig2(args, cfg):
    return _amplitude_sweep(cfg, states.pacs, "fig2_pacs")


def cmd_region(args, cfg):
    nus = cfg.range("nu").values()
    if nus[0] < 0.5:
        raise InputError("symplectic eigenvalue grid must start at 1/2 or above")
    rows, masks = [], {}
    for b in cfg.range("b").values():
        mask = bounds.ne_region(b, nus)
        masks[b] = mask
        for i, nu_p in enumerate(nus):
            for j, nu_m in enumerate(nus):
                if nu_m <= nu_p:
                    rows.append({"b": b, "nu_plus": nu_p, "nu_minus": nu_m, "allowed": bool(mask[i, j])})
    out = _prepare_out(cfg.out)
    write_csv(os.path.join(out, "region.csv"), REGION_COLUMNS, rows)
    if cfg.svg:
        # each (nu_+, nu_-) cell is labelled with the largest B that still allows it
        labels = []
        for j in range(len(nus)):
            line = []
            for i in range(len(nus)):
                if j > i:
                    line.append("")
                    continue
                allowed = [b for b, m in masks.items() if m[i, j]]
                line.append(f"B <= {max(allowed):g}" if allowed else "excluded")
            labels.append(line)
        names = [f"B <= {b:g}" for b in masks] + ["excluded"]
        palette = svg.PALETTE + ("#bcbd22", "#e377c2")
        colors = {n: palette[k % len(palette)] for k, n in enumerate(names[:-1])}
        colors["excluded"] = "#dddddd"
        svg.grid_map(nus, nus, labels, colors, "nu_+", "nu_-", os.path.join(out, "region.svg"))
    return EXIT_OK


def _cell_row(cell):
    row = {"r": cell.r, "nbar": cell.nbar, "cutoff": cell.cutoff, "leakage": cell.leakage, "error": cell.error}
    if cell.failed:
        row.update(verdict="failed", branch="")
        return row
    ne, sd = cell.ne, cell.simon_duan
    row.update(
        verdict="detected" if ne.detected else "undetected",
        branch=ne.branch,
        simon_duan=sd.detected,
        nu_tilde_plus=ne.nu_tilde[0],
        nu_tilde_minus=ne.nu_tilde[1],
        mu_b=ne.mu_b,
        ng_b=ne.ng_b,
        lhs=ne.lhs,
        rhs=ne.rhs,
        margin=ne.margin,
    )
    if ne.g_squared_negative:
        row["branch"] = f"{ne.branch} (g-squared-negative)"
    return row


def cell_category(cell):
    if cell.failed:
        return "failed"
    if cell.simon_duan.detected:
        return "Simon-Duan"
    if cell.ne.branch == entanglement.UNPHYSICAL:
        return "unphysical purity"
    if cell.ne.detected:
        return "NE only"
    return "undetected"


def cmd_entangle(args, cfg):
    d = cfg.cutoff or states.DEFAULT_TWO_MODE_CUTOFF
    rs, ns = cfg.range("r").values(), cfg.range("nbar").values()
    cells = entanglement.criterion_sweep(cfg.alpha, rs, ns, cutoffs=(d, d + 4), strong=cfg.strong, jobs=cfg.jobs)
    rows = [_cell_row(c) for c in cells]
    for c in cells:
        if c.failed:
            log.warning("cell r=%s nbar=%s failed: %s", c.r, c.nbar, c.error)
    out = _prepare_out(cfg.out)
    stem = f"entangle_alpha{fmt(cfg.alpha)}"
    write_csv(os.path.join(out, stem + ".csv"), ENTANGLE_COLUMNS, rows)
    if cfg.svg:
        grid = [[cell_category(cells[i * len(ns) + j]) for i in range(len(rs))] for j in range(len(ns))]
        colors = {
            "Simon-Duan": "#9ecae1",
            "NE only": "#1f4e9c",
            "unphysical purity": "#d62728",
            "undetected": "#ffffff",
            "failed": "#bbbbbb",
        }
        svg.grid_map(rs, ns, grid, colors, "r", "nbar", os.path.join(out, stem + ".svg"))
    ok = sum(not c.failed for c in cells)
    print(f"{ok}/{len(cells)} cells evaluated, {sum(c.ne is not None and c.ne.detected for c in cells)} detected")
    return EXIT_OK if ok >= SUCCESS_FRACTION * len(cells) else EXIT_PARTIAL


# ----------------------------------------------------------------------------
# argument handling


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output directory (default: out)")
    common.add_argument("--cutoff", type=int, help="Fock cutoff per mode")
    common.add_argument("--svg", action="store_true", default=None, help="also write an SVG figure")
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--jobs", type=int, help="worker processes for sweeps")

    p = argparse.ArgumentParser(prog="ne-uncertainty", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="verb", required=True)

    a = sub.add_parser("analyze", parents=[common], help="bounds and measures of one state file")
    a.add_argument("state", help="JSON state file")
    a.set_defaults(func=cmd_analyze)

    f1 = sub.add_parser("fig1", parents=[common], help="cat-state amplitude sweep")
    f1.add_argument("kind", choices=("even", "odd"))
    f1.add_argument("--alpha", dest="alpha_range", help="start:stop:step")
    f1.set_defaults(func=cmd_fig1)

    f2 = sub.add_parser("fig2", parents=[common], help="photon-added coherent state sweep")
    f2.add_argument("--alpha", dest="alpha_range", help="start:stop:step")
    f2.set_defaults(func=cmd_fig2)

    rg = sub.add_parser("region", parents=[common], help="allowed symplectic eigenvalue region per B")
    rg.add_argument("--b", dest="b_range", help="start:stop:step")
    rg.add_argument("--nu", dest="nu_range", help="start:stop:step")
    rg.set_defaults(func=cmd_region)

    e = sub.add_parser("entangle", parents=[common], help="entanglement map over (r, nbar)")
    e.add_argument("--alpha", type=float, help="odd-cat amplitude")
    e.add_argument("--r", dest="r_range", help="start:stop:step")
    e.add_argument("--nbar", dest="nbar_range", help="start:stop:step")
    e.add_argument("--strong", action="store_true", default=None, help="also evaluate the entropy-based test")
    e.set_defaults(func=cmd_entangle)
    return p


def _run_config(args):
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                cfg = RunConfig.from_dict(json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config {args.config!r}: {exc}") from None
    else:
        cfg = RunConfig()
    changes = {}
    for key in ("out", "cutoff", "svg", "jobs", "strong"):
        val = getattr(args, key, None)
        if val is not None:
            changes[key] = val
    if isinstance(getattr(args, "alpha", None), float):
        changes["alpha"] = args.alpha
    ranges = dict(cfg.ranges)
    for name in ("alpha", "r", "nbar", "b", "nu"):
        text = getattr(args, f"{name}_range", None)
        if text is not None:
            ranges[name] = Range.parse(text)
    return dataclasses.replace(cfg, ranges=ranges, **changes)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = _run_config(args)
        with config.override(**cfg.tolerances):
            return args.func(args, cfg)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except TruncationError as exc:
        print(f"truncation error: {exc} (leakage {exc.leakage:.3e})", file=sys.stderr)
        return EXIT_NUMERIC
    except NumericsError as exc:
        print(f"numeric error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
