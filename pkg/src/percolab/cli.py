"""Command-line entry point: ``percolab <command> [options]``.

Every command writes ``<out>/<command>.json`` (a result document with
provenance) plus command-specific files.  Exit codes are listed in ``EXIT``.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .graphgen import CombinatorialMap, Graph, GraphFormatError, build_grid, build_tiling, build_tree, dual, from_text, to_text
from .oracle import OracleCapError, corpus, verify_bk, verify_entrywise_inequalities, verify_inverse_bk, exact_matrices
from .stats import FitWindowError

EXIT = {
    "ok": 0,
    "invariant": 1,
    "usage": 2,
    "oracle_cap": 3,
    "underpowered": 4,
    "graph": 5,
    "estimate": 6,
}

OUT_ENV = "PERCOLAB_OUT"


class CliError(Exception):
    def __init__(self, code: str, msg: str):
        super().__init__(msg)
        self.code = code


@dataclass
class ExperimentSpec:
    command: str
    graph: str | None = None
    family: list = field(default_factory=list)
    p: list = field(default_factory=list)
    q: list = field(default_factory=list)
    h: list = field(default_factory=list)
    n: int = 0
    m: int = 0
    samples: int = 10_000
    seed: int = 0
    workers: int = 1
    out: str = "."
    format: str = "json"
    extra: dict = field(default_factory=dict)

    def digest(self) -> str:
        d = asdict(self)
        d.pop("workers")  # results do not depend on it
        d.pop("out")
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()


# ------------------------------------------------------------------ graphs


def parse_graph(text: str):
    """``tree:k:depth``, ``grid:rows[:cols]``, ``tiling:p:q:layers``, ``dual:p:q:layers`` or ``file:path``."""
    kind, _, rest = text.partition(":")
    parts = [x for x in rest.split(":") if x]
    try:
        if kind == "tree":
            return build_tree(int(parts[0]), int(parts[1]))
        if kind == "grid":
            return build_grid(int(parts[0]), int(parts[1]) if len(parts) > 1 else None)
        if kind == "tiling":
            return build_tiling(int(parts[0]), int(parts[1]), int(parts[2]))
        if kind == "dual":
            return dual(build_tiling(int(parts[0]), int(parts[1]), int(parts[2])))
        if kind == "file":
            return from_text(Path(rest).read_text())
    except GraphFormatError:
        raise
    except (IndexError, ValueError) as exc:
        raise CliError("usage", f"bad graph spec {text!r}: {exc}") from exc
    raise CliError("usage", f"unknown graph family {kind!r}")


def _graph(obj) -> Graph:
    return obj.graph if isinstance(obj, CombinatorialMap) else obj


def _floats(s) -> list[float]:
    if s is None:
        return []
    if isinstance(s, (list, tuple)):
        return [float(x) for x in s]
    return [float(x) for x in str(s).replace(",", " ").split()]


def read_config(path) -> dict:
    """Plain ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliError("usage", f"config line without '=': {line!r}")
        k, v = (x.strip() for x in line.split("=", 1))
        out[k.replace("-", "_")] = v
    return out


# --------------------------------------------------------------- commands


def _jsonable(o):
    if isinstance(o, Fraction):
        return str(o)
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if hasattr(o, "to_dict"):
        return o.to_dict()
    raise TypeError(f"not serializable: {type(o)}")


def _write_series_csv(path: Path, header: list[str], rows) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in r])


def cmd_gen(spec: ExperimentSpec, out: Path) -> tuple[dict, bool]:
    fam = spec.family
    if not fam:
        raise CliError("usage", "gen needs a family: tree K DEPTH | grid R [C] | tiling P Q L | dual P Q L")
    obj = parse_graph(":".join(str(x) for x in fam))
    text = to_text(obj)
    (out / "graph.txt").write_text(text)
    g = _graph(obj)
    res = {"family_tag": g.family_tag, "vertices": g.vertex_count, "edges": g.edge_count,
           "boundary": int(g.boundary.sum()), "digest": obj.digest}
    ok = True
    if isinstance(obj, CombinatorialMap):
        res["euler_characteristic"] = obj.euler_characteristic()
        ok = res["euler_characteristic"] == 2
    return res, ok


def cmd_sample(spec: ExperimentSpec, out: Path) -> tuple[dict, bool]:
    from .percengine import sample_clusters, write_jsonl

    g = _graph(parse_graph(spec.graph))
    root = int(spec.extra.get("root", 0))
    rows, summary = [], []
    for p in spec.p or [0.5]:
        cs = sample_clusters(g, p, root, spec.samples, spec.seed, workers=spec.workers)
        for i in range(cs.n):
            rows.append({"p": p, "sample": i, "volume": cs.volume[i], "rad_int": cs.rad_int[i],
                         "rad_ext": cs.rad_ext[i], "touches_boundary": bool(cs.touches[i])})
        ok = bool(np.all(cs.rad_ext <= cs.rad_int))
        summary.append({"p": p, "mean_volume": float(cs.volume.mean()), "rad_ext_le_rad_int": ok})
    write_jsonl(out / "samples.jsonl", rows, {"graph": g.digest, "seed": spec.seed})
    if spec.format == "csv":
        _write_series_csv(out / "sample.csv", ["p", "mean_volume"], [(s["p"], s["mean_volume"]) for s in summary])
    return {"root": root, "summary": summary}, all(s["rad_ext_le_rad_int"] for s in summary)


def cmd_matrix(spec: ExperimentSpec, out: Path) -> tuple[dict, bool]:
    from .operators import build_matrix, operator_norm, save_matrix, to_csv, triangle_diagram

    g = _graph(parse_graph(spec.graph))
    kind = spec.extra.get("kind", "T")
    source = spec.extra.get("source", "oracle")
    margin = int(spec.extra.get("margin", 0))
    p = (spec.p or [0.5])[0]
    M = build_matrix(g, p, kind, spec.n, spec.m, source=source, samples=spec.samples, seed=spec.seed,
                     margin=margin, workers=spec.workers)
    save_matrix(M, out / "matrix.bin")
    if spec.format == "csv":
        to_csv(M, out / "matrix.csv")
    norms = [operator_norm(M, q) for q in (spec.q or [1.0, 2.0])]
    tri = triangle_diagram(M)
    ok = all(r.converged for r in norms) and tri.gap >= -1e-9
    ok = ok and all(r.floor * (1 - 1e-9) <= r.value <= r.ceiling * (1 + 1e-9) for r in norms)
    return {"header": M.header(), "norms": [r.to_dict() for r in norms],
            "triangle": {"value": tri.value, "norm2_cubed": tri.norm2_cubed, "gap": tri.gap}}, ok


def cmd_oracle(spec: ExperimentSpec, out: Path) -> tuple[dict, bool]:
    ps = [Fraction(str(p)) for p in (spec.p or [0.2, 0.5, 0.8])]
    if spec.graph:
        graphs = [(spec.graph, _graph(parse_graph(spec.graph)))]
    else:
        graphs = corpus(int(spec.extra.get("max_edges", 12)))
    ell_check = str(spec.extra.get("inverse_bk", "no")).lower() in ("1", "yes", "true")
    rows, ok = [], True
    for name, g in graphs:
        bk = verify_bk(g, ps)
        mats = exact_matrices(g)
        ent = [verify_entrywise_inequalities(g, p, n, m, mats) for p in ps for n in range(3) for m in range(3)]
        worst_ext = min(r.slack_extrinsic for r in ent)
        worst_int = min(r.slack_intrinsic for r in ent)
        row = {"graph": name, "edges": g.edge_count, "digest": g.digest, "bk_min_slack": bk.min_slack,
               "entrywise_min_slack_extrinsic": worst_ext, "entrywise_min_slack_intrinsic": worst_int}
        ok &= bk.ok and worst_ext >= 0 and worst_int >= 0
        if ell_check and g.edge_count <= 14:
            far = int(np.argmax(g.distances_from(0)))
            mid = g.vertex_count // 2
            reps = []
            for verts in ((0, far), (0, mid, far)):
                if len(set(verts)) == len(verts):
                    r = verify_inverse_bk(g, 0.5, [0.5] * len(verts), verts)
                    reps.append(r.to_dict())
                    ok &= r.ok
            row["inverse_bk"] = reps
        rows.append(row)
    golden = out / "oracle_golden.json"
    golden.write_text(json.dumps({"version": __version__, "rows": rows}, default=_jsonable, sort_keys=True, indent=1))
    return {"graphs": len(rows), "rows": rows}, bool(ok)


def cmd_exponent(spec: ExperimentSpec, out: Path) -> tuple[dict, bool]:
    from .estimators import InfiniteTree, center, tail_exponents

    gspec = spec.graph or "tree:3:14"
    if gspec.startswith("infinite-tree:"):
        g = InfiniteTree(int(gspec.split(":")[1]))
        v = 0
    else:
        g = _graph(parse_graph(gspec))
        v = int(spec.extra.get("root", center(g)))
    window = spec.extra.get("window")
    if window is not None:
        lo, hi = (float(x) for x in str(window).replace(",", " ").split())
        window = (lo, hi)
    n_max = spec.n or None
    if n_max is None and isinstance(g, InfiniteTree):
        n_max = int(window[1]) if window is not None else 256
    p = (spec.p or [0.5])[0]
    r = tail_exponents(g, p, v, spec.samples, n_max=n_max, window=window, seed=spec.seed, workers=spec.workers)
    if spec.format == "csv":
        _write_series_csv(out / "exponent.csv", ["n", "volume", "volume_err", "rad_int", "rad_int_err", "rad_ext",
                                                 "rad_ext_err"],
                          zip(r.grid, r.volume[0], r.volume[1], r.rad_int[0], r.rad_int[1], r.rad_ext[0], r.rad_ext[1]))
        (out / "exponent.gp").write_text(
            "set logscale xy\nset datafile separator ','\n"
            "plot 'exponent.csv' using 1:2 title 'volume' with points, "
            "'' using 1:4 title 'rad_int' with points, '' using 1:6 title 'rad_ext' with points\n")
    mono = all(np.all(np.diff(s[0]) <= 0) for s in (r.volume, r.rad_int, r.rad_ext))
    return r.to_dict(), bool(mono)


def cmd_duality(spec: ExperimentSpec, out: Path) -> tuple[dict, bool]:
    from .estimators import pu_duality, pu_geometry

    obj = parse_graph(spec.graph or "tiling:3:7:7")
    if not isinstance(obj, CombinatorialMap):
        raise CliError("usage", "duality needs a map (tiling:... or dual:...)")
    grid = spec.p or list(np.linspace(0.52, 0.54, 5))
    res = pu_duality(obj, grid, samples=spec.samples, seed=spec.seed, workers=spec.workers,
                     scan_samples=int(spec.extra.get("scan_samples", 100)))
    doc = {"duality": res.to_dict()}
    if str(spec.extra.get("geometry", "no")).lower() in ("1", "yes", "true"):
        geo = pu_geometry(obj, res.pu_transported, samples=spec.samples, seed=spec.seed, workers=spec.workers)
        doc["geometry"] = geo.to_dict()
        ok = geo.sandwich["all_distinct"] and geo.sandwich["uncensored"] > 0 and geo.sandwich["c"] > 0
    else:
        ok = True
    return doc, bool(ok)


def cmd_sweep(spec: ExperimentSpec, out: Path) -> tuple[dict, bool]:
    """Cluster summaries along a p grid (shared uniforms, so curves are monotone in p)."""
    from .percengine import sample_clusters
    from .stats import survival

    g = _graph(parse_graph(spec.graph or "tree:3:10"))
    root = int(spec.extra.get("root", 0))
    ns = np.arange(1, (spec.n or 5) + 1)
    rows = []
    prev = None
    mono = True
    for p in spec.p or list(np.linspace(0.1, 0.9, 9)):
        cs = sample_clusters(g, p, root, spec.samples, spec.seed, workers=spec.workers)
        sv, _ = survival(cs.rad_ext, ns)
        if prev is not None:
            mono &= bool(np.all(sv >= prev - 1e-15))
        prev = sv
        rows.append([p, float(cs.volume.mean())] + sv.tolist())
    header = ["p", "mean_volume"] + [f"P(rad_ext>={n})" for n in ns]
    _write_series_csv(out / "sweep.csv", header, rows)
    (out / "sweep.gp").write_text("set datafile separator ','\nset key autotitle columnhead\n"
                                  "plot for [c=3:%d] 'sweep.csv' using 1:c with linespoints\n" % (len(header)))
    return {"header": header, "rows": rows, "monotone_in_p": mono}, mono


COMMANDS = {
    "gen": cmd_gen,
    "sample": cmd_sample,
    "matrix": cmd_matrix,
    "oracle": cmd_oracle,
    "exponent": cmd_exponent,
    "duality": cmd_duality,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="percolab", description="Bond percolation laboratory")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("family", nargs="*", help="graph family for 'gen', e.g. 'tree 3 12'")
    ap.add_argument("--graph", help="tree:K:D | grid:R[:C] | tiling:P:Q:L | dual:P:Q:L | file:PATH "
                                    "(exponent also takes infinite-tree:K)")
    ap.add_argument("--p", help="probability or comma list")
    ap.add_argument("--q", help="norm exponent(s), comma list")
    ap.add_argument("--h", help="ghost intensities, comma list")
    ap.add_argument("--n", type=int, default=0)
    ap.add_argument("--m", type=int, default=0)
    ap.add_argument("--samples", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default=None, help=f"output directory (default ${OUT_ENV} or .)")
    ap.add_argument("--format", choices=("json", "csv"), default="json")
    ap.add_argument("--config", help="key = value file; its entries override flags")
    ap.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                    help="command-specific option (kind, source, window, root, ...)")
    return ap


_SPEC_KEYS = {"graph", "p", "q", "h", "n", "m", "samples", "seed", "workers", "out", "format"}


def spec_from_args(args: argparse.Namespace) -> ExperimentSpec:
    raw = {k: getattr(args, k) for k in _SPEC_KEYS}
    extra = {}
    for item in args.set:
        if "=" not in item:
            raise CliError("usage", f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        extra[k.strip()] = v.strip()
    if args.config:
        for k, v in read_config(args.config).items():
            if k in _SPEC_KEYS:
                raw[k] = v
            else:
                extra[k] = v
    try:
        spec = ExperimentSpec(
            command=args.command,
            graph=raw["graph"],
            family=list(args.family),
            p=_floats(raw["p"]), q=[math.inf if str(x) == "inf" else x for x in _floats(raw["q"])],
            h=_floats(raw["h"]),
            n=int(raw["n"]), m=int(raw["m"]), samples=int(raw["samples"]), seed=int(raw["seed"]),
            workers=int(raw["workers"]),
            out=raw["out"] or os.environ.get(OUT_ENV, "."),
            format=str(raw["format"]), extra=extra,
        )
    except ValueError as exc:
        raise CliError("usage", str(exc)) from exc
    if spec.format not in ("json", "csv"):
        raise CliError("usage", "format must be json or csv")
    if any(not 0 <= p <= 1 for p in spec.p):
        raise CliError("usage", "probabilities must lie in [0, 1]")
    if spec.samples < 1:
        raise CliError("usage", "samples must be positive")
    return spec


def run(spec: ExperimentSpec) -> int:
    out = Path(spec.out)
    out.mkdir(parents=True, exist_ok=True)
    result, ok = COMMANDS[spec.command](spec, out)
    graph_hash = None
    if spec.graph and not spec.graph.startswith("infinite-tree:"):
        graph_hash = parse_graph(spec.graph).digest
    doc = {
        "command": spec.command,
        "ok": bool(ok),
        "provenance": {
            "spec": {k: v for k, v in asdict(spec).items() if k not in ("out", "workers")},
            "spec_hash": spec.digest(),
            "graph_hash": graph_hash,
            "seed": spec.seed,
            "version": __version__,
        },
        "result": result,
    }
    (out / f"{spec.command}.json").write_text(json.dumps(doc, default=_jsonable, sort_keys=True, indent=1))
    return EXIT["ok"] if ok else EXIT["invariant"]


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else EXIT["ok"]
    try:
        spec = spec_from_args(args)
        return run(spec)
    except CliError as exc:
        print(f"percolab: {exc}", file=sys.stderr)
        return EXIT[exc.code]
    except OracleCapError as exc:
        print(f"percolab: {exc}", file=sys.stderr)
        return EXIT["oracle_cap"]
    except FitWindowError as exc:
        print(f"percolab: fit refused: {exc}", file=sys.stderr)
        return EXIT["underpowered"]
    except GraphFormatError as exc:
        print(f"percolab: {exc}", file=sys.stderr)
        return EXIT["graph"]
    except Exception as exc:  # estimator refusals (no crossing, rare events)
        from .estimators import PcEstimateError, RareEventError

        if isinstance(exc, (PcEstimateError, RareEventError)):
            print(f"percolab: {exc}", file=sys.stderr)
            return EXIT["estimate"] if isinstance(exc, PcEstimateError) else EXIT["underpowered"]
        if isinstance(exc, ValueError):
            print(f"percolab: {exc}", file=sys.stderr)
            return EXIT["usage"]
        raise
