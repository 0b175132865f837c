"""File formats: instance and solution JSON, sweep CSV, cut logs, LP text."""

from __future__ import annotations

import csv
import io as _io
import json
import os
import re
import tempfile
from pathlib import Path

import jsonschema

from .engine import MilpModel
from .formulation import NetworkSolution
from .instance import CandidateArc, Instance, Node, Params, require_valid

INSTANCE_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["name", "params", "nodes", "arcs"],
    "properties": {
        "name": {"type": "string"},
        "params": {
            "type": "object",
            "additionalProperties": False,
            "required": ["n_d", "budget_miles"],
            "properties": {
                "n_d": {"type": "integer", "minimum": 1},
                "budget_miles": {"type": "number", "minimum": 0},
                "loading_time_hours": {"type": "number", "exclusiveMinimum": 0},
                "headway_seconds": {"type": "number", "exclusiveMinimum": 0},
                "p_max": {"type": "integer", "minimum": 0},
            },
        },
        "nodes": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["id", "kind", "demand"],
                "properties": {
                    "id": {"type": "string", "minLength": 1},
                    "kind": {"enum": ["depot", "microhub"]},
                    "demand": {"type": "integer", "minimum": 0},
                    "x": {"type": "number"},
                    "y": {"type": "number"},
                },
            },
        },
        "arcs": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["a", "b", "dist"],
                "properties": {
                    "a": {"type": "string"},
                    "b": {"type": "string"},
                    "dist": {"type": "number", "exclusiveMinimum": 0},
                },
            },
        },
    },
}


def atomic_write(path, text: str) -> None:
    """Write via a temp file in the target directory, then rename over it."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def instance_to_json(instance: Instance) -> dict:
    p = instance.params
    params = {"n_d": p.n_d, "budget_miles": p.budget_miles}
    if p.loading_time_hours is not None and p.headway_seconds is not None:
        params["loading_time_hours"] = p.loading_time_hours
        params["headway_seconds"] = p.headway_seconds
    else:
        params["p_max"] = p.p_max
    nodes = []
    for n in instance.nodes:
        d = {"id": n.id, "kind": n.kind, "demand": int(n.demand)}
        if n.position is not None:
            d["x"], d["y"] = n.position
        nodes.append(d)
    arcs = [{"a": a.a, "b": a.b, "dist": a.distance} for a in instance.arcs]
    return {"name": instance.name, "params": params, "nodes": nodes, "arcs": arcs}


def instance_from_json(data: dict) -> Instance:
    jsonschema.validate(data, INSTANCE_SCHEMA)
    p = data["params"]
    params = Params(
        n_d=p["n_d"],
        budget_miles=float(p["budget_miles"]),
        loading_time_hours=p.get("loading_time_hours"),
        headway_seconds=p.get("headway_seconds"),
        p_max=p.get("p_max"),
    )
    nodes = tuple(
        Node(n["id"], n["kind"], n["demand"], (n["x"], n["y"]) if "x" in n and "y" in n else None)
        for n in data["nodes"]
    )
    arcs = tuple(CandidateArc(a["a"], a["b"], float(a["dist"])) for a in data["arcs"])
    inst = Instance(data["name"], nodes, arcs, params)
    require_valid(inst)
    return inst


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def read_instance(path) -> Instance:
    with open(path, encoding="utf-8") as fh:
        return instance_from_json(json.load(fh))


def write_instance(instance: Instance, path) -> None:
    atomic_write(path, dumps(instance_to_json(instance)))


# ---------------------------------------------------------------------------
# solutions


def solution_to_json(instance: Instance, solution: NetworkSolution | None, *, method: str, status: str,
                     nodes: int = 0, cuts_added: int = 0, wall_seconds: float = 0.0,
                     cuts=None, percent: float | None = None) -> dict:
    trees = []
    if solution is not None:
        for h, arcs in solution.trees().items():
            trees.append({"depot": h, "arcs": [list(a) for a in arcs],
                          "demand": int(solution.depot_demand.get(h, sum(instance.demand[j] for _, j in arcs)))})
    out = {
        "instance": instance_to_json(instance),
        "objective": None if solution is None else int(solution.objective),
        "percent_served": percent,
        "trees": trees,
    }
    if cuts is not None:
        out["cuts"] = [c.to_json() for c in cuts]
    out["solver"] = {"method": method, "nodes": nodes, "cuts_added": cuts_added,
                     "wall_seconds": round(wall_seconds, 6), "status": status}
    return out


def solution_from_json(data: dict) -> tuple[Instance, NetworkSolution | None, dict]:
    allowed = {"instance", "objective", "percent_served", "trees", "cuts", "solver"}
    unknown = set(data) - allowed
    if unknown:
        raise ValueError(f"unknown solution fields: {sorted(unknown)}")
    instance = instance_from_json(data["instance"])
    if data.get("objective") is None:
        return instance, None, data.get("solver", {})
    depots, arcs, demand = [], [], {}
    for tree in data["trees"]:
        depots.append(tree["depot"])
        arcs.extend(tuple(a) for a in tree["arcs"])
        demand[tree["depot"]] = int(tree["demand"])
    served = sorted(j for _, j in arcs)
    sol = NetworkSolution(sorted(depots), served, sorted(arcs), demand, int(data["objective"]))
    return instance, sol, data.get("solver", {})


def read_solution(path):
    with open(path, encoding="utf-8") as fh:
        return solution_from_json(json.load(fh))


def cut_log_lines(cuts) -> str:
    """JSON-lines cut log: kind, node set and iteration per generated row."""
    return "".join(json.dumps({"kind": c.kind, "nodes": list(c.nodes), "iteration": c.iteration}) + "\n"
                   for c in cuts)


def solution_geojson(instance: Instance, solution: NetworkSolution) -> dict:
    """Nodes and chosen arcs as GeoJSON features (planar miles as coordinates)."""
    pos = {n.id: n.position for n in instance.nodes}
    if any(p is None for p in pos.values()):
        raise ValueError("GeoJSON export needs coordinates on every node")
    feats = []
    served = set(solution.served) | set(solution.depots)
    for n in instance.nodes:
        feats.append({"type": "Feature", "geometry": {"type": "Point", "coordinates": list(n.position)},
                      "properties": {"id": n.id, "kind": n.kind, "demand": n.demand, "served": n.id in served}})
    for i, j in solution.arcs:
        feats.append({"type": "Feature",
                      "geometry": {"type": "LineString", "coordinates": [list(pos[i]), list(pos[j])]},
                      "properties": {"tail": i, "head": j, "miles": instance.distance[(i, j)]}})
    return {"type": "FeatureCollection", "features": feats}


# ---------------------------------------------------------------------------
# sweeps

SWEEP_COLUMNS = ["budget", "objective", "percent_served", "trucks_saved", "truck_miles_saved",
                 "co2_truck_g", "co2_van_g", "cost_per_package", "wall_seconds", "method", "status"]


def parse_budgets(spec: str) -> list[float]:
    """``start:stop:step`` in miles; ``stop`` is included when the steps land on it."""
    try:
        start, stop, step = (float(x) for x in spec.split(":"))
    except ValueError:
        raise ValueError(f"budget spec must look like start:stop:step, got {spec!r}") from None
    if step <= 0 or stop < start:
        raise ValueError("budget spec needs step > 0 and stop >= start")
    out = []
    k = 0
    while True:
        b = start + k * step
        if b > stop + 1e-9 * max(1.0, abs(stop)):
            break
        out.append(round(b, 9))
        k += 1
    return out


def sweep_csv(rows: list[dict]) -> str:
    buf = _io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in sorted(rows, key=lambda r: (r["budget"], r["method"])):
        writer.writerow({k: ("" if row.get(k) is None else row[k]) for k in SWEEP_COLUMNS})
    return buf.getvalue()


# ---------------------------------------------------------------------------
# LP text adapter

_NAME = re.compile(r"^[A-Za-z_(][A-Za-z0-9_(),.\-]*$")


def _fmt(v: float) -> str:
    return repr(float(v)) if v != int(v) else str(int(v))


def _check_name(name: str) -> str:
    if not _NAME.match(name) or len(name) > 255:
        raise ValueError(f"variable name {name!r} cannot be written in LP format")
    return name


def _expr(pairs) -> str:
    parts = []
    for name, c in pairs:
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        term = name if mag == 1 else f"{_fmt(mag)} {name}"
        parts.append(f"{sign} {term}")
    if not parts:
        return "0"
    text = " ".join(parts)
    return text[2:] if text.startswith("+ ") else text


def export_lp(model: MilpModel) -> str:
    """CPLEX-style LP text for ``model`` (maximisation)."""
    names = [_check_name(n) for n in model.names]
    lines = [f"\\ {model.name}", "Maximize", " obj: " + _expr((names[j], c) for j, c in enumerate(model.obj) if c),
             "Subject To"]
    rel = {"<=": "<=", ">=": ">=", "==": "="}
    for k, con in enumerate(model.constraints):
        cname = con.name if _NAME.match(con.name or "") else f"c{k}"
        cname = re.sub(r"[^A-Za-z0-9_.]", "_", cname)
        lines.append(f" {cname}_{k}: {_expr((names[j], c) for j, c in sorted(con.coefs.items()))} "
                     f"{rel[con.sense]} {_fmt(con.rhs)}")
    lines.append("Bounds")
    for j, n in enumerate(names):
        if not model.binary[j]:
            lines.append(f" {_fmt(model.lb[j])} <= {n} <= {_fmt(model.ub[j])}")
    bins = [n for j, n in enumerate(names) if model.binary[j]]
    if bins:
        lines.append("Binaries")
        for k in range(0, len(bins), 8):
            lines.append(" " + " ".join(bins[k:k + 8]))
    lines.append("End")
    return "\n".join(lines) + "\n"


def solution_text(model: MilpModel, values) -> str:
    """``name value`` lines, the format ``import_solution`` reads."""
    return "".join(f"{n} {float(v)!r}\n" for n, v in zip(model.names, values))


class SolutionParseError(ValueError):
    pass


def import_solution(text: str, model: MilpModel | None = None, tol: float = 1e-6) -> dict[str, float]:
    """Parse ``name value`` lines (``#`` comments allowed).

    With ``model`` given, names must exist and the values must satisfy every
    bound and row of the model within ``tol``.
    """
    values: dict[str, float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise SolutionParseError(f"line {lineno}: expected 'name value', got {raw!r}")
        name, val = parts
        try:
            values[name] = float(val)
        except ValueError:
            raise SolutionParseError(f"line {lineno}: bad value {val!r} for {name}") from None
        if model is not None and not model.has_var(name):
            raise SolutionParseError(f"line {lineno}: unknown variable {name}")
    if model is not None:
        vec = [values.get(n, 0.0) for n in model.names]
        problems = model.violations(vec, tol)
        if problems:
            raise SolutionParseError("solution violates the model: " + "; ".join(problems[:5]))
    return values

