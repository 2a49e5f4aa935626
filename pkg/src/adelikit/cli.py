"""Batch command-line frontend.

Every command reads one JSON job file and writes one JSON result::

    adelikit norm job.json -o result.json --places auto
    adelikit flat-section hyper.json --order 16

Files carry ``"schema": "adelikit/1"``.  Output is written atomically with
sorted keys, so identical jobs give byte-identical files.  Exit codes: 0 on
success, 2 for domain errors and schema violations (an error record is still
written), 3 when a search budget runs out.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import random
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any, Callable, Sequence

import jsonschema

from adelikit import __version__
from adelikit.adelic_norms import brute_force_norm, is_certified, norm_profile, quotient_norm
from adelikit.exact_arith import (
    BudgetExceeded,
    DomainError,
    Place,
    finite_place,
    format_place,
    format_rational,
    parse_place,
    parse_rational,
    primes_up_to,
)
from adelikit.gfunctions import (
    GSystem,
    LogConnection,
    evaluate_relation,
    flat_section,
    radius_profile,
    relevant_places,
    truncated_height,
)
from adelikit.monodromy_weight import (
    NilpotentOperator,
    StrataData,
    check_filtration,
    closed_form_filtration,
    jump_threshold,
    nilpotency_order,
    steenbrink_e1,
    weight_filtration,
)
from adelikit.polynomials import (
    DEGLEX,
    DEGREVLEX,
    GroebnerBasis,
    Poly,
    QuotientRing,
    groebner_basis,
    normal_form,
    poly_from_string,
)
from adelikit.power_series import FaaDiBruno, TruncatedSeries, compose, invert, monomials_below
from adelikit.tube_engine import (
    AdelicTube,
    build_chart,
    flatten,
    parameterize_tube,
    refine_tube,
    solve_tube_system,
    tube_membership,
    verify_bounds,
)

SCHEMA = "adelikit/1"

COMMANDS = (
    "norm",
    "groebner",
    "series",
    "solve-tube",
    "flatten",
    "tube-member",
    "refine-tube",
    "flat-section",
    "radius",
    "relevant",
    "height",
    "relation",
    "weight-filtration",
    "steenbrink",
    "threshold",
)


class SchemaViolation(DomainError):
    def __init__(self, message: str, path: str) -> None:
        super().__init__(message)
        self.path = path


# ---------------------------------------------------------------------------
# Input schemas

_STR = {"type": "string"}
_RAT = {"type": ["string", "integer"]}
_STRS = {"type": "array", "items": _STR}
_NAMES = {"type": "array", "items": _STR, "uniqueItems": True}
_MATRIX = {"type": "array", "items": {"type": "array", "items": _RAT}}
_RING = {"vars": _NAMES, "ideal": _STRS}
_CONNECTION = {
    "type": "object",
    "required": ["dim", "entries"],
    "properties": {
        "dim": {"type": "integer", "minimum": 1},
        "entries": {"type": "array", "items": {"type": "array", "items": _STR, "minItems": 2, "maxItems": 2}},
    },
    "additionalProperties": False,
}
_GSOURCE = {
    "connection": _CONNECTION,
    "v0": {"type": "array", "items": _RAT},
    "coefficients": {"type": "array", "items": {"type": "array", "items": _RAT}},
    "rescale": _RAT,
}
_TUBE = {
    "type": "object",
    "required": ["names", "ys", "rho", "alpha"],
    "properties": {
        "names": _NAMES,
        "ys": _STRS,
        "rho": {"type": "integer"},
        "alpha": {"type": "integer", "minimum": 2},
        "ideal": _STRS,
    },
    "additionalProperties": False,
}


def _obj(required: Sequence[str], props: dict[str, Any]) -> dict[str, Any]:
    props = {"schema": {"const": SCHEMA}, "comment": _STR, **props}
    return {"type": "object", "required": ["schema", *required], "properties": props, "additionalProperties": False}


INPUT_SCHEMAS: dict[str, dict[str, Any]] = {
    "norm": _obj(
        ["vars", "ideal", "f"],
        {**_RING, "f": _STR, "oracle": {
            "type": "object",
            "properties": {
                "deg_bound": {"type": "integer", "minimum": 0},
                "height_bound": {"type": "integer", "minimum": 1},
                "random_good_primes": {"type": "integer", "minimum": 0},
            },
            "additionalProperties": False,
        }},
    ),
    "groebner": _obj(["vars", "gens"], {"vars": _NAMES, "gens": _STRS, "monomial_order": {"enum": ["degrevlex", "deglex"]}}),
    "series": _obj(
        ["op", "series_vars"],
        {
            "op": {"enum": ["compose", "invert", "faa_di_bruno"]},
            "series_vars": _NAMES,
            "outer": _STR,
            "outer_vars": _NAMES,
            "inner": _STRS,
            "series": _STR,
            "multi_index": {"type": "array", "items": {"type": "integer", "minimum": 0}},
        },
    ),
    "solve-tube": _obj(
        [],
        {
            "B": _STRS,
            "B_vars": _NAMES,
            "C": _STRS,
            "u_vars": _NAMES,
            "e": {"type": "array", "items": _RAT},
            "minor_rows": {"type": "array", "items": {"type": "integer", "minimum": 0}},
            "method": {"enum": ["substitution", "faa_di_bruno"]},
            "chart": {
                "type": "object",
                "required": ["vars", "ideal", "etale", "p"],
                "properties": {**_RING, "etale": _STRS, "p": {"type": "integer", "minimum": 1}},
                "additionalProperties": False,
            },
        },
    ),
    "flatten": _obj(["vars", "ideal", "etale", "p", "a"], {**_RING, "etale": _STRS, "p": {"type": "integer", "minimum": 1}, "a": _STR}),
    "tube-member": _obj(["tube", "points", "place"], {"tube": _TUBE, "points": {"type": "array", "items": {"type": "array", "items": _RAT}}, "place": _STR}),
    "refine-tube": _obj(
        ["T", "Tprime", "h", "g"],
        {"T": _TUBE, "Tprime": _TUBE, "h": {"type": "array", "items": _STRS}, "g": _STRS, "grid_radius": {"type": "integer", "minimum": 1}},
    ),
    "flat-section": _obj(["connection", "v0"], {"connection": _CONNECTION, "v0": {"type": "array", "items": _RAT}, "extension": {"type": "array", "items": _STRS}}),
    "radius": _obj([], dict(_GSOURCE)),
    "relevant": _obj(["xi"], {**_GSOURCE, "xi": _RAT}),
    "height": _obj(["N"], {**_GSOURCE, "N": {"type": "integer", "minimum": 8}}),
    "relation": _obj(["P", "vars", "xi", "place"], {**_GSOURCE, "P": _STR, "vars": _NAMES, "xi": _RAT, "place": _STR}),
    "weight-filtration": _obj(["N"], {"N": _MATRIX, "w": {"type": "integer", "minimum": 0}}),
    "steenbrink": _obj(
        ["components"],
        {
            "components": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["h0", "h1", "h2"],
                    "properties": {k: {"type": "integer", "minimum": 0} for k in ("h0", "h1", "h2")},
                    "additionalProperties": False,
                },
            },
            "double_curves": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["h0", "h1"],
                    "properties": {k: {"type": "integer", "minimum": 0} for k in ("h0", "h1")},
                    "additionalProperties": False,
                },
            },
            "triple_points": {"type": "integer", "minimum": 0},
            "d1": {"type": "array", "items": {
                "type": "object",
                "required": ["source", "matrix"],
                "properties": {"source": {"type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2}, "matrix": _MATRIX},
                "additionalProperties": False,
            }},
        },
    ),
    "threshold": _obj(["k"], {"k": {"type": "integer"}, "dim_im_N": {"type": "integer"}, "family": {"enum": ["generic", "K3"]}}),
}

OUTPUT_SCHEMA: dict[str, Any] = {
    "type": "object",
    "required": ["schema", "command", "status"],
    "properties": {
        "schema": {"const": SCHEMA},
        "command": {"enum": list(COMMANDS)},
        "status": {"enum": ["ok", "error"]},
        "flags": {"type": "object"},
        "result": {"type": "object"},
        "error": {
            "type": "object",
            "required": ["kind", "message"],
            "properties": {"kind": _STR, "message": _STR, "path": _STR},
        },
    },
    "additionalProperties": False,
}


def validate_input(command: str, data: Any) -> None:
    validator = jsonschema.Draft202012Validator(INPUT_SCHEMAS[command])
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        path = "/" + "/".join(str(x) for x in err.absolute_path)
        raise SchemaViolation(f"{path}: {err.message}", path)


# ---------------------------------------------------------------------------
# Conversions


def _rat(x: Any) -> Fraction:
    return parse_rational(str(x))


def _fmt_float(x: float) -> str | float:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    # adding 0.0 turns -0.0 into 0.0
    return float(f"{x:.12g}") + 0.0


def _poly(text: str, names: Sequence[str]) -> Poly:
    return poly_from_string(text, names)


def _ideal(vars_: Sequence[str], gens: Sequence[str], order=DEGREVLEX) -> GroebnerBasis:
    polys = [_poly(g, vars_) for g in gens]
    if not polys:
        return GroebnerBasis.zero_ideal(len(vars_), order, tuple(vars_))
    return groebner_basis(polys, order, tuple(vars_))


def _series_out(S: TruncatedSeries, names: Sequence[str] | None) -> list[dict[str, Any]]:
    out = []
    for J in monomials_below(S.nvars, S.order):
        c = S.coefficient_rep(J)
        if c.terms:
            val = format_rational(c.constant_term()) if c.is_constant() else c.to_str(names)
            out.append({"exponent": list(J), "coefficient": val})
    return out


def _places(flag: str | None, default: Callable[[], list[Place]]) -> list[Place]:
    if flag is None or flag == "auto":
        return default()
    out = []
    for part in flag.split(","):
        part = part.strip()
        if not part:
            continue
        out.append(parse_place(part if part.startswith("p:") or part == "inf" else f"p:{part}"))
    return out


def _map(fn: Callable[[Any], Any], items: Sequence[Any], threads: int) -> list[Any]:
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _gsystem(data: dict[str, Any], order: int) -> GSystem:
    if "coefficients" in data:
        G = GSystem.from_coefficients([[_rat(x) for x in row] for row in data["coefficients"]])
    elif "connection" in data and "v0" in data:
        G = flat_section(_connection(data["connection"]), [_rat(x) for x in data["v0"]], order)
    else:
        raise SchemaViolation("a system needs either 'coefficients' or 'connection' with 'v0'", "/")
    if "rescale" in data:
        G = G.rescale(_rat(data["rescale"]))
    return G


def _connection(data: dict[str, Any]) -> LogConnection:
    m = data["dim"]
    entries = data["entries"]
    if len(entries) != m * m:
        raise SchemaViolation(f"/connection/entries: expected {m * m} entries, got {len(entries)}", "/connection/entries")
    rows = []
    for i in range(m):
        row = []
        for j in range(m):
            num, den = entries[i * m + j]
            row.append((_poly(num, ["s"]), _poly(den, ["s"])))
        rows.append(row)
    return LogConnection(rows)


def _tube(data: dict[str, Any]) -> AdelicTube:
    names = tuple(data["names"])
    ideal = _ideal(names, data["ideal"]) if data.get("ideal") else None
    return AdelicTube(names, tuple(_poly(y, names) for y in data["ys"]), int(data["rho"]), int(data["alpha"]), ideal)


def _chart(data: dict[str, Any]):
    vars_ = data["vars"]
    gb = _ideal(vars_, data["ideal"])
    return build_chart(gb, [_poly(f, vars_) for f in data["etale"]], data["p"])


# ---------------------------------------------------------------------------
# Commands


def cmd_norm(data: dict[str, Any], args: argparse.Namespace) -> dict[str, Any]:
    vars_ = data["vars"]
    gb = _ideal(vars_, data["ideal"])
    f = normal_form(_poly(data["f"], vars_), gb)
    prof = norm_profile(f)
    places = _places(args.places, lambda: sorted(prof.bad_places))
    if any(v.prime is None for v in places):
        raise DomainError("quotient norms are reported at finite places only")

    def one(v: Place) -> dict[str, Any]:
        val, cert = quotient_norm(f, v)
        return {"place": format_place(v), "value": format_rational(val), "certified": cert}

    result: dict[str, Any] = {
        "normal_form": f.rep.to_str(vars_),
        "bad": [format_place(v) for v in sorted(prof.bad_places)],
        "values": _map(one, places, args.threads),
    }
    oracle = data.get("oracle")
    if oracle is not None:
        deg = oracle.get("deg_bound", 2)
        height = oracle.get("height_bound", 16)
        check = [v for v in places if is_certified(gb, v)]
        rng = random.Random(args.seed)
        pool = [p for p in primes_up_to(200) if finite_place(p) not in prof.bad_places]
        check += [finite_place(p) for p in sorted(rng.sample(pool, min(oracle.get("random_good_primes", 0), len(pool))))]
        budget = args.budget if args.budget is not None else 600

        def by_oracle(v: Place) -> dict[str, Any]:
            val = brute_force_norm(f, v, deg, height, budget=budget, start=_poly(data["f"], vars_))
            return {"place": format_place(v), "value": format_rational(val), "agrees": val == f.rep.gauss_norm(v)}

        result["oracle"] = _map(by_oracle, check, args.threads)
    return result


def cmd_groebner(data: dict[str, Any], args: argparse.Namespace) -> dict[str, Any]:
    order = DEGLEX if data.get("monomial_order") == "deglex" else DEGREVLEX
    gb = groebner_basis([_poly(g, data["vars"]) for g in data["gens"]], order, tuple(data["vars"]))
    return {
        "basis": [g.to_str(data["vars"], order) for g in gb.generators],
        "leading_monomials": [list(m) for m in gb.leads],
        "unit_ideal": gb.is_unit_ideal(),
    }


def cmd_series(data: dict[str, Any], args: argparse.Namespace) -> dict[str, Any]:
    Q = QuotientRing.rationals()
    names = data["series_vars"]
    order = args.order
    op = data["op"]
    if op == "invert":
        if "series" not in data:
            raise SchemaViolation("/series: required for op 'invert'", "/series")
        f = TruncatedSeries.from_poly(Q, _poly(data["series"], names), order)
        return {"series": _series_out(invert(f, order), names)}
    for key in ("outer", "outer_vars", "inner"):
        if key not in data:
            raise SchemaViolation(f"/{key}: required for op {op!r}", f"/{key}")
    B = _poly(data["outer"], data["outer_vars"])
    A = [TruncatedSeries.from_poly(Q, _poly(a, names), order) for a in data["inner"]]
    if op == "compose":
        return {"series": _series_out(compose(B, A, order), names)}
    J = tuple(data.get("multi_index", [0] * len(names)))
    fdb = FaaDiBruno(B, A)
    return {
        "derivative": format_rational(fdb.derivative_at_zero(J).constant_term()),
        "coefficient": format_rational(fdb.coefficient(J).constant_term()),
    }


def cmd_solve_tube(data: dict[str, Any], args: argparse.Namespace) -> dict[str, Any]:
    order = args.order
    if "chart" in data:
        chart = _chart(data["chart"])
        sol = parameterize_tube(chart, order, data.get("minor_rows"))
        names = list(sol.ring.gb.vars)
    else:
        for key in ("B", "B_vars", "C", "u_vars", "e"):
            if key not in data:
                raise SchemaViolation(f"/{key}: required without 'chart'", f"/{key}")
        Q = QuotientRing.rationals()
        B = [_poly(b, data["B_vars"]) for b in data["B"]]
        C = [TruncatedSeries.from_poly(Q, _poly(c, data["u_vars"]), order) for c in data["C"]]
        e = [Q.const(_rat(x)) for x in data["e"]]
        sol = solve_tube_system(B, C, e, data.get("minor_rows"), order, data.get("method", "substitution"))
        names = None
    result: dict[str, Any] = {
        "components": [_series_out(c, names) for c in sol.components],
        "minor_rows": list(sol.minor_rows),
        "residuals": sol.residuals,
        "data_primes": sorted(sol.data_primes),
    }
    if order >= 6:
        rep = verify_bounds(sol)
        result["bounds"] = {
            "alpha": rep.alpha,
            "beta": rep.beta,
            "alpha_apriori": rep.alpha_apriori,
            "beta_apriori": rep.beta_apriori,
            "tau": {format_place(v): format_rational(t) for v, t in sorted(rep.tau.items())},
            "bad": [format_place(v) for v in rep.bad_places],
        }
    return result


def cmd_flatten(data: dict[str, Any], args: argparse.Namespace) -> dict[str, Any]:
    chart = _chart(data)
    sol = parameterize_tube(chart, args.order)
    a = _poly(data["a"], data["vars"])
    flat = flatten(a, chart, args.order, sol)
    return {"series": _series_out(flat, list(sol.ring.gb.vars)), "ring_E": [g.to_str(sol.ring.gb.vars) for g in sol.ring.gb.generators]}


def cmd_tube_member(data: dict[str, Any], args: argparse.Namespace) -> dict[str, Any]:
    tube = _tube(data["tube"])
    v = parse_place(data["place"])
    pts = [[_rat(x) for x in pt] for pt in data["points"]]
    return {"inside": _map(lambda pt: tube_membership(pt, tube, v), pts, args.threads)}


def cmd_refine_tube(data: dict[str, Any], args: argparse.Namespace) -> dict[str, Any]:
    T, Tp = _tube(data["T"]), _tube(data["Tprime"])
    names = Tp.names
    h = [[_poly(x, names) for x in row] for row in data["h"]]
    g = [_poly(x, names) for x in data["g"]]
    res = refine_tube(T, Tp, h, g, grid_radius=data.get("grid_radius", 3))
    return {
        "rho": res.tube.rho,
        "alpha": res.tube.alpha,
        "tau0": res.tau0,
        "checked_primes": list(res.checked_primes),
        "grid_points": {str(p): n for p, n in sorted(res.grid_points.items())},
    }


def cmd_flat_section(data: dict[str, Any], args: argparse.Namespace) -> dict[str, Any]:
    conn = _connection(data["connection"])
    ext = None
    if "extension" in data:
        ext = [[_rat(x) for x in row] for row in data["extension"]]
    G = flat_section(conn, [_rat(x) for x in data["v0"]], args.order, ext)
    return {
        "residue": [[format_rational(x) for x in row] for row in conn.residue()],
        "components": [[format_rational(c) for c in row] for row in G.coeffs],
    }


def _g_order(args: argparse.Namespace) -> int:
    return max(args.order, args.window + 1)


def cmd_radius(data: dict[str, Any], args: argparse.Namespace) -> dict[str, Any]:
    G = _gsystem(data, _g_order(args))
    from adelikit.gfunctions import auto_places

    places = _places(args.places, lambda: auto_places(G, args.window))
    profs = _map(lambda v: radius_profile(G, [v], args.window), places, args.threads)
    rows = []
    for v, prof in zip(places, profs):
        rows.append(
            {
                "place": format_place(v),
                "slope": _fmt_float(prof.slope[v]),
                "log_radius": _fmt_float(prof.log_radius(v)),
                "radius_lower": _fmt_float(prof.radius_lower(v)),
                "radius_upper": _fmt_float(prof.radius_upper(v)),
                "flagged": prof.slope[v] > 0,
            }
        )
    return {"window": args.window, "places": rows}


def cmd_relevant(data: dict[str, Any], args: argparse.Namespace) -> dict[str, Any]:
    G = _gsystem(data, _g_order(args))
    rel = relevant_places(_rat(data["xi"]), G, window=min(args.window, G.order - 1))
    return {"relevant": [format_place(v) for v in sorted(rel)]}


def cmd_height(data: dict[str, Any], args: argparse.Namespace) -> dict[str, Any]:
    G = _gsystem(data, max(args.order, data["N"] + 1))
    est = truncated_height(G, data["N"])
    return {
        "N": est.N,
        "sigma": _fmt_float(est.sigma),
        "history": {str(k): _fmt_float(x) for k, x in sorted(est.history.items())},
        "diverging": est.diverging,
    }


def cmd_relation(data: dict[str, Any], args: argparse.Namespace) -> dict[str, Any]:
    G = _gsystem(data, _g_order(args))
    P = _poly(data["P"], data["vars"])
    res = evaluate_relation(P, G, _rat(data["xi"]), parse_place(data["place"]), window=min(args.window, G.order - 1))
    return {
        "residual": format_rational(res.residual),
        "order": res.order,
        "tail_estimate": None if res.tail_estimate is None else _fmt_float(res.tail_estimate),
        "caveat": res.caveat,
        "homogeneous": res.homogeneous,
    }


def cmd_weight_filtration(data: dict[str, Any], args: argparse.Namespace) -> dict[str, Any]:
    N = NilpotentOperator([[_rat(x) for x in row] for row in data["N"]], data.get("w", 2))
    k = nilpotency_order(N)
    W = weight_filtration(N)
    out: dict[str, Any] = {
        "nilpotency_order": k,
        "graded_dims": list(W.graded_dims),
        "W": {str(r): [[format_rational(x) for x in b] for b in W[r].basis] for r in range(2 * N.w + 1)},
        "problems": check_filtration(N, W),
    }
    if k <= 3:
        out["matches_closed_form"] = closed_form_filtration(N).spaces == W.spaces
    return out


def cmd_steenbrink(data: dict[str, Any], args: argparse.Namespace) -> dict[str, Any]:
    strata = StrataData.from_json(data)
    d1 = None
    if "d1" in data:
        d1 = {tuple(item["source"]): [[_rat(x) for x in row] for row in item["matrix"]] for item in data["d1"]}
    e1 = steenbrink_e1(strata, d1)
    key = lambda pq: f"E^{pq[0]},{pq[1]}"  # noqa: E731
    out: dict[str, Any] = {
        "E1": {key(pq): n for pq, n in e1.dims.items()},
        "tags": {key(pq): t for pq, t in e1.tags.items()},
        "sequence": list(e1.as_tuple()),
    }
    if e1.e2 is not None:
        out["E2"] = {key(pq): n for pq, n in e1.e2.items()}
    return out


def cmd_threshold(data: dict[str, Any], args: argparse.Namespace) -> dict[str, Any]:
    return {"jump": jump_threshold(data["k"], data.get("dim_im_N"), data.get("family", "generic"))}


HANDLERS: dict[str, Callable[[dict[str, Any], argparse.Namespace], dict[str, Any]]] = {
    "norm": cmd_norm,
    "groebner": cmd_groebner,
    "series": cmd_series,
    "solve-tube": cmd_solve_tube,
    "flatten": cmd_flatten,
    "tube-member": cmd_tube_member,
    "refine-tube": cmd_refine_tube,
    "flat-section": cmd_flat_section,
    "radius": cmd_radius,
    "relevant": cmd_relevant,
    "height": cmd_height,
    "relation": cmd_relation,
    "weight-filtration": cmd_weight_filtration,
    "steenbrink": cmd_steenbrink,
    "threshold": cmd_threshold,
}


# ---------------------------------------------------------------------------
# Running jobs


def dumps(record: dict[str, Any]) -> str:
    return json.dumps(record, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _flags(args: argparse.Namespace) -> dict[str, Any]:
    # threads is left out on purpose: it must not change the output
    return {
        "order": args.order,
        "window": args.window,
        "places": args.places or "auto",
        "budget": args.budget,
        "seed": args.seed,
    }


def run_job(command: str, data: Any, args: argparse.Namespace) -> tuple[int, dict[str, Any]]:
    """Run one job; returns the exit code and the output record."""
    record: dict[str, Any] = {"schema": SCHEMA, "command": command, "flags": _flags(args)}
    try:
        validate_input(command, data)
        record["result"] = HANDLERS[command](data, args)
        record["status"] = "ok"
        code = 0
    except BudgetExceeded as exc:
        record["status"] = "error"
        record["error"] = {"kind": "BudgetExceeded", "message": str(exc)}
        code = 3
    except SchemaViolation as exc:
        record["status"] = "error"
        record["error"] = {"kind": "SchemaViolation", "message": str(exc), "path": exc.path}
        code = 2
    except DomainError as exc:
        record["status"] = "error"
        record["error"] = {"kind": type(exc).__name__, "message": str(exc)}
        code = 2
    jsonschema.validate(record, OUTPUT_SCHEMA)
    return code, record


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="adelikit", description="Exact adelic norms, tubes and G-function tools.")
    parser.add_argument("--version", action="version", version=f"adelikit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--order", type=int, default=10, help="truncation order of series (default 10)")
        p.add_argument("--window", type=int, default=64, help="coefficient window for radius profiles (default 64)")
        p.add_argument("--places", default=None, help="comma separated places such as 2,3,inf, or 'auto'")
        p.add_argument("--budget", type=int, default=None, help="column budget of the brute-force norm oracle")
        p.add_argument("--seed", type=int, default=0, help="seed for randomized spot checks")
        p.add_argument("--threads", type=int, default=1, help="worker threads; never changes the output")

    for name in COMMANDS:
        p = sub.add_parser(name, help=f"run a {name} job")
        p.add_argument("input", type=Path, help="job file (JSON)")
        p.add_argument("-o", "--output", type=Path, default=None, help="result file; stdout when omitted")
        common(p)

    p = sub.add_parser("corpus", help="run the bundled example corpus")
    p.add_argument("--out", type=Path, default=None, help="directory for the outputs")
    p.add_argument("--check", action="store_true", help="compare against the bundled golden outputs")
    p.add_argument("--threads", type=int, default=1)
    return parser


def corpus_dir() -> Path:
    return Path(str(resources.files("adelikit") / "corpus"))


def load_manifest() -> list[dict[str, Any]]:
    with open(corpus_dir() / "manifest.json", encoding="utf-8") as fh:
        return json.load(fh)["jobs"]


def corpus_args(job: dict[str, Any], threads: int) -> list[str]:
    return [job["command"], str(corpus_dir() / "jobs" / job["input"]), *job.get("flags", []), "--threads", str(threads)]


def run_corpus(out_dir: Path | None, check: bool, threads: int) -> int:
    parser = build_parser()
    failures = 0
    for job in load_manifest():
        args = parser.parse_args(corpus_args(job, threads))
        text = run_args(args, write=False)[1]
        name = job["name"]
        if out_dir is not None:
            write_atomic(out_dir / f"{name}.json", text)
        if check:
            golden = (corpus_dir() / "golden" / f"{name}.json").read_text(encoding="utf-8")
            same = golden == text
            failures += not same
            print(f"{'same' if same else 'DIFFERS'}  {name}")
    return 1 if failures else 0


def run_args(args: argparse.Namespace, write: bool = True) -> tuple[int, str]:
    try:
        with open(args.input, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        record = {
            "schema": SCHEMA,
            "command": args.command,
            "status": "error",
            "flags": _flags(args),
            "error": {"kind": "InputError", "message": str(exc)},
        }
        code, text = 2, dumps(record)
    else:
        code, record = run_job(args.command, data, args)
        text = dumps(record)
    if write:
        if args.output is None:
            sys.stdout.write(text)
        else:
            write_atomic(args.output, text)
        if code:
            sys.stderr.write(f"adelikit: {record['error']['kind']}: {record['error']['message']}\n")
    return code, text


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "corpus":
        return run_corpus(args.out, args.check, args.threads)
    return run_args(args)[0]


if __name__ == "__main__":
    raise SystemExit(main())
