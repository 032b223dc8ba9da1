"""Command-line campaigns with deterministic JSON reports.

Exit codes: 0 all checks passed, 1 a check failed, 2 usage or
configuration error, 3 capacity exceeded.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import jets
from .errors import (BadCharacteristic, BadSize, CapacityExceeded,
                     DegenerateForm, ModvoaError, UnsupportedFamily)
from .liealg import LieAlgebraSpec, build_classical, validate_spec
from .report import Report
from .sugawara import (build_family, casimir_vector, predicted_centre_dimensions,
                       verify_family)
from .vacuum import VacuumModule, pbw_basis, resolve_workers

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CAPACITY = 0, 1, 2, 3

DEFAULTS = {
    "family": "sl", "size": 2, "char": 5, "level": None, "trunc": 1,
    "weight_cap": None, "degree_cap": 4, "seed": 0, "workers": None,
    "trials": None, "points": 20, "points_file": None, "golden": None,
    "out": None, "timings": False,
}

BORCHERDS_DRAW = ("level uniform in [-3, 3] unless given; per state: weight "
                  "uniform in [0, cap], one or two PBW basis monomials of that "
                  "weight, coefficients uniform in [1, 4]; m, n, k uniform in "
                  "[-2, 2]; Python random.Random(seed)")


# -- helpers -----------------------------------------------------------------

def parse_level(text, field):
    if text is None:
        return None
    if isinstance(text, int):
        return field(text)
    return field(Fraction(str(text)))


def random_state(module: VacuumModule, rng: random.Random, cap: int):
    w = rng.randint(0, cap)
    basis = pbw_basis(module.dim, w)
    terms = {}
    for _ in range(rng.randint(1, 2)):
        mono = rng.choice(basis)
        terms[mono] = terms.get(mono, 0) + rng.randint(1, 4)
    from .vacuum import VState
    return VState(module, terms)


# -- campaigns ---------------------------------------------------------------

def run_validate(spec: LieAlgebraSpec) -> Report:
    rep = validate_spec(spec)
    rep.command = "validate"
    return rep


def run_borcherds(spec: LieAlgebraSpec, trials: int = 100, seed: int = 0,
                  weight_cap: int = 4, level=None) -> Report:
    """Random Borcherds-identity instances; stops at the first counterexample."""
    rng = random.Random(seed)
    lvl = spec.field(rng.randint(-3, 3)) if level is None else level
    module = VacuumModule(spec, lvl, weight_cap=None)
    rep = Report("borcherds", {
        "family": spec.family, "size": spec.N, "characteristic": spec.p,
        "level": lvl, "trials": trials, "seed": seed,
        "weight_cap": weight_cap, "draw": BORCHERDS_DRAW})
    witness = None
    done = 0
    for t in range(trials):
        a, b, c = (random_state(module, rng, weight_cap) for _ in range(3))
        m, n, k = (rng.randint(-2, 2) for _ in range(3))
        res = module.borcherds_residual(a, b, c, m, n, k)
        done += 1
        if res:
            witness = {"trial": t, "a": a, "b": b, "c": c,
                       "m": m, "n": n, "k": k, "residual": res}
            break
    rep.check("borcherds_identity", witness is None, witness=witness,
              instances=done)
    return rep


def run_centre(spec: LieAlgebraSpec, weight_cap: int, level=None,
               workers=None) -> Report:
    lvl = spec.critical_level() if level is None else level
    module = VacuumModule(spec, lvl, weight_cap=max(weight_cap, 1))
    rep = Report("centre", {
        "family": spec.family, "size": spec.N, "characteristic": spec.p,
        "level": lvl, "critical": module.critical, "weight_cap": weight_cap,
        "finiteness": "x_n lowers weight by n, so modes n > w kill weight-w "
                      "states; only 0 <= n <= w are checked"})
    observed = module.centre_dimension(weight_cap, workers)
    predicted = predicted_centre_dimensions(spec, spec.p, weight_cap)
    rep.tables["centre_dimension"] = observed
    rep.tables["predicted"] = predicted
    rep.tables["generator_degrees"] = list(spec.degrees)
    rows = [[w, observed[w], predicted[w]] for w in range(weight_cap + 1)]
    rep.tables["by_weight"] = rows
    bad = [r for r in rows if r[1] != r[2]]
    rep.check("centre_matches_prediction", not bad,
              witness=bad[0] if bad else None)
    return rep


def run_jets(spec: LieAlgebraSpec, m: int, degree_cap: int, seed: int = 0,
             trials: int = 50, points: int = 20, point_list=None) -> Report:
    rng = random.Random(seed)
    p = spec.p
    rep = Report("jets", {
        "family": spec.family, "size": spec.N, "characteristic": p,
        "truncation": m, "degree_cap": degree_cap, "seed": seed,
        "rewriteders_trials": trials, "points": points,
        "trace_dictionary": [[{spec.names[c]: v for c, v in sorted(z.items())}
                              for z in row]
                             for row in jets.trace_dictionary(spec)]})
    lie = jets.invariant_ring_dimensions(spec, m, degree_cap, "lie")
    pred = jets.predicted_jet_dimensions(spec, m, degree_cap, "lie")
    rep.tables["lie"] = lie
    rep.tables["predicted_lie"] = pred
    rep.check("lie_matches_prediction", lie == pred)
    if p:
        grp = jets.invariant_ring_dimensions(spec, m, degree_cap, "group")
        rep.tables["group"] = grp
        below = min(degree_cap + 1, p)
        # p-th powers are Lie-invariant but not group-fixed from degree p on
        rep.check("group_equals_lie_below_p", grp[:below] == lie[:below],
                  degrees=below)
        pq = jets.invariant_ring_dimensions(spec, m, degree_cap, "pquot")
        ppq = jets.predicted_jet_dimensions(spec, m, degree_cap, "pquot")
        rep.tables["pquot"] = pq
        rep.tables["predicted_pquot"] = ppq
        rep.check("restricted_quotient_matches_prediction", pq == ppq)
    else:
        grp = jets.invariant_ring_dimensions(spec, m, degree_cap, "group-formal")
        rep.tables["group_formal"] = grp
        rep.check("group_formal_equals_lie", grp == lie)
    # rewriting partials of derivatives
    bad = None
    for t in range(trials):
        P = jets.random_diffpoly(spec, spec.dim, 1, 3, 4, rng)
        for mm in range(4):
            for s in range(mm + 2):
                for i in range(spec.dim):
                    if jets.rewriteders_residual(spec, P, i, s, mm):
                        bad = bad or {"trial": t, "P": P, "i": i, "s": s, "m": mm}
    rep.check("rewriteders_residual_zero", bad is None, witness=bad)
    ok, wit = jets.jacobian_block_structure(spec, m)
    rep.check("jacobian_block_structure", ok, witness=wit)
    full = (m + 1) * spec.rank
    pts = point_list if point_list is not None else \
        jets.sample_regular_points(spec, m, points, rng)
    ranks = [jets.jacobian_rank(spec, m, pt) for pt in pts]
    rep.tables["jacobian_ranks"] = ranks
    low = [k for k, r in enumerate(ranks) if r != full]
    rep.check("jacobian_full_rank_at_regular_points", not low, expected=full,
              witness={"point": sorted([list(k) + [v] for k, v in pts[low[0]].items()])}
              if low else None)
    rep.check("jacobian_rank_zero_at_origin", jets.jacobian_rank(spec, m, {}) == 0
              if all(d > 1 for d in spec.degrees) else True,
              applicable=all(d > 1 for d in spec.degrees))
    return rep


def run_sugawara(family: str, N: int, p: int, level=None, jmax: int = 2) -> Report:
    fam = build_family(family, N, p)
    rep = verify_family(fam, jmax)
    rep.command = "sugawara"
    rep.tables["family"] = fam.to_document()
    if p:
        pre = verify_family(fam.preimage, jmax)
        for c in pre.checks:
            rep.check("char0_" + c.name, c.passed, witness=c.witness, **c.detail)
        if family != "gl":
            direct = casimir_vector(fam.spec, module=fam.module)
            rep.check("casimir_direct_equals_reduced", direct == fam.vectors[0])
    if level is not None and fam.spec.field.norm(level - fam.level):
        # the same vectors at a non-critical level are expected not to be central
        module = VacuumModule(fam.spec, level)
        from .vacuum import VState
        central = []
        for v in fam.vectors:
            w = module.central_witness(VState(module, v.terms))
            central.append(w is None)
        rep.params["probe_level"] = level
        rep.tables["central_at_probe_level"] = central
        rep.params["expected_fail"] = not all(central[i] for i in range(len(central))
                                              if fam.degrees[i] > 1)
        rep.check("noncritical_probe_not_central", rep.params["expected_fail"],
                  status="expected-fail")
    return rep


# -- CLI ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="modvoa", description=__doc__.splitlines()[0])
    ap.add_argument("command",
                    choices=["validate", "borcherds", "centre", "jets", "sugawara"])
    ap.add_argument("--family", choices=["gl", "sl", "sp", "so"])
    ap.add_argument("--size", type=int)
    ap.add_argument("--char", type=int, help="prime, or 0 for the rationals")
    ap.add_argument("--level", help="integer or fraction; default critical")
    ap.add_argument("--trunc", type=int, help="jet truncation m")
    ap.add_argument("--weight-cap", type=int, dest="weight_cap")
    ap.add_argument("--degree-cap", type=int, dest="degree_cap")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--workers", type=int)
    ap.add_argument("--trials", type=int)
    ap.add_argument("--points", type=int)
    ap.add_argument("--points-file", dest="points_file",
                    help="JSON list of points, each a list of [index, depth, value]")
    ap.add_argument("--config", help="JSON file whose keys override flags")
    ap.add_argument("--golden", help="compare the report with this file")
    ap.add_argument("--out", help="write the report here")
    ap.add_argument("--timings", action="store_true",
                    help="add wall-clock timings (makes output non-reproducible)")
    return ap


def resolve_params(args: argparse.Namespace) -> dict:
    params = dict(DEFAULTS)
    for k, v in vars(args).items():
        if v is not None and k in params and v is not False:
            params[k] = v
    if args.config:
        with open(args.config) as fh:
            cfg = json.load(fh)
        unknown = set(cfg) - set(DEFAULTS)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        params.update(cfg)
    params["command"] = args.command
    return params


def run_command(params: dict) -> Report:
    cmd = params["command"]
    family, N, p = params["family"], params["size"], params["char"]
    spec = build_classical(family, N, p)
    level = parse_level(params["level"], spec.field)
    if cmd == "validate":
        return run_validate(spec)
    if cmd == "borcherds":
        trials = 100 if params["trials"] is None else params["trials"]
        cap = params["weight_cap"] if params["weight_cap"] is not None else 4
        return run_borcherds(spec, trials, params["seed"], cap, level)
    if cmd == "centre":
        cap = params["weight_cap"] if params["weight_cap"] is not None else 3
        return run_centre(spec, cap, level, resolve_workers(params["workers"]))
    if cmd == "jets":
        trials = 50 if params["trials"] is None else params["trials"]
        pts = None
        if params["points_file"]:
            with open(params["points_file"]) as fh:
                raw = json.load(fh)
            pts = [{(c, j): spec.field(Fraction(str(v))) for c, j, v in pt}
                   for pt in raw]
        return run_jets(spec, params["trunc"], params["degree_cap"],
                        params["seed"], trials, params["points"], pts)
    if cmd == "sugawara":
        return run_sugawara(family, N, p, level)
    raise ValueError(f"unknown command {cmd}")


def _output_path(params) -> Path | None:
    if params["out"]:
        out = Path(params["out"])
        base = os.environ.get("MODVOA_OUT_DIR")
        return out if out.is_absolute() or not base else Path(base) / out
    base = os.environ.get("MODVOA_OUT_DIR")
    if base:
        name = f"{params['command']}-{params['family']}{params['size']}-p{params['char']}.json"
        return Path(base) / name
    return None


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        params = resolve_params(args)
        start = time.perf_counter()
        rep = run_command(params)
        if params["timings"]:
            rep.timings = {"total": int((time.perf_counter() - start) * 1000)}
    except CapacityExceeded as exc:
        print(f"capacity exceeded: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (BadCharacteristic, BadSize, UnsupportedFamily, DegenerateForm,
            ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ModvoaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if params["golden"]:
        golden = Path(params["golden"]).read_text()
        rep.check("golden_match", golden == rep.render())
    text = rep.render()
    sys.stdout.write(text)
    path = _output_path(params)
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    return EXIT_OK if rep.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
