"""Command-line front end.

Every subcommand reads JSON inputs, writes a JSON report (stdout or ``--out``)
and optionally a CSV trace. Exit codes: 0 all checks passed, 2 unreadable
input, 3 invalid input, 4 a requested check failed.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import formats
from .concepts import counting_valuation, enumerate_concepts
from .counterexample import BUILTIN, blowup_demo, fubini_identity_check, tabulated_density
from .entropy import dependency_lattice, functional_closure, shannon_check
from .errors import CheckFailure, LatdivError, ParseError, ValidationError
from .generators import random_distributive_lattice, random_refinement
from .lattice import (
    birkhoff_decompose,
    chain_irreducible_sequence,
    is_distributive,
    is_modular_lattice,
    join_irreducibles,
    maximal_chains,
)
from .martingale import density_martingale, doob_check, gamma_rows, random_martingale
from .measure import RefinementSequence, dyadic_partition, rn_approximate
from .valuation import as_valuation, chain_divergence, lattice_divergence

EXIT_OK, EXIT_PARSE, EXIT_VALIDATION, EXIT_CHECK = 0, 2, 3, 4

TRACE_HEADER = ["level", "D_restricted", "gap", "l1_to_final", "ymax_integral", "ymin_integral", "residual"]
DOOB_HEADER = ["path_id", "level_m", "level_n", "lambda", "lhs", "rhs", "residual", "pass", "check"]
BLOWUP_HEADER = ["delta", "N", "integral_sup", "closed_form_value", "rel_gap"]


def _emit(args, doc) -> None:
    text = formats.dumps(doc)
    if getattr(args, "out", None):
        formats.write_atomic(args.out, text)
    else:
        sys.stdout.write(text)


def _load(path: str | None, what: str):
    if path is None:
        raise ParseError(f"--{what} is required")
    return formats.load_json(path)


def cmd_lattice_check(args) -> int:
    if args.lattice:
        L = formats.parse("lattice", formats.lattice_from_json, _load(args.lattice, "lattice"))
    else:
        L = random_distributive_lattice(np.random.default_rng(args.seed))
    chains = maximal_chains(L)
    doc = {
        "elements": len(L),
        "bottom": L.bottom,
        "top": L.top,
        "distributive": is_distributive(L),
        "modular": is_modular_lattice(L),
        "join_irreducibles": [{"element": j.element, "lower_cover": j.lower_cover} for j in join_irreducibles(L)],
        "maximal_chains": len(chains),
    }
    ok = True
    if doc["distributive"]:
        b = birkhoff_decompose(L)
        doc["birkhoff"] = {"irreducibles": list(b.irreducibles), "order": [list(p) for p in b.order],
                           "downsets": {k: sorted(v) for k, v in b.downsets.items()}, "isomorphic": b.isomorphic}
        ok = b.isomorphic
        rank = len(b.irreducibles)
        seqs = []
        for c in chains[: args.max_chains]:
            d = chain_irreducible_sequence(L, c.chain)
            ok &= len(d.chain) - 1 == rank and sorted(d.irreducible_sequence) == sorted(b.irreducibles)
            seqs.append({"chain": list(d.chain), "irreducibles": list(d.irreducible_sequence),
                         "lower_covers": list(d.lower_covers)})
        doc["chain_sequences"] = seqs
    if not args.lattice:
        doc["lattice"] = L.to_json()
    doc["ok"] = ok
    _emit(args, doc)
    return EXIT_OK if ok else EXIT_CHECK


def cmd_fca_concepts(args) -> int:
    ctx = formats.parse("context", formats.context_from_json, _load(args.context, "context"))
    cl = enumerate_concepts(ctx)
    mu, modular = counting_valuation(cl)
    doc = {
        "concepts": [{"extent": [g for g in ctx.objects if g in c.extent],
                      "intent": [m for m in ctx.attributes if m in c.intent]} for c in cl.concepts],
        "lattice": cl.lattice.to_json(),
        "counting_modular": modular,
        "distributive": is_distributive(cl.lattice),
    }
    _emit(args, doc)
    return EXIT_OK


def cmd_divergence(args) -> int:
    base = None
    L = None
    if args.lattice:
        L = formats.parse("lattice", formats.lattice_from_json, _load(args.lattice, "lattice"))
    mu_doc, nu_doc = _load(args.mu, "mu"), _load(args.nu, "nu")
    L, mu = formats.parse("valuation", formats.valuation_from_json, mu_doc, L, Path(args.mu).parent)
    L, nu = formats.parse("valuation", formats.valuation_from_json, nu_doc, L, Path(args.nu).parent)
    mu, nu = as_valuation(L, mu), as_valuation(L, nu)
    chain_values = [chain_divergence(L, mu, nu, c.chain) for c in maximal_chains(L)[: args.max_chains]]
    finite = [v for v in chain_values if not math.isinf(v)]
    spread = (max(finite) - min(finite)) if finite and len(finite) == len(chain_values) else 0.0
    if is_distributive(L):
        res = lattice_divergence(L, mu, nu)
        D, dominated, contrib = res.value, res.domination_ok, res.contributions
    else:
        D, dominated, contrib = chain_values[0], None, None
    ok = (all(math.isinf(v) for v in chain_values) or not any(math.isinf(v) for v in chain_values)) \
        and spread <= args.tol * (1.0 + (0.0 if math.isinf(D) else D))
    doc = {"D": D, "domination_ok": dominated, "distributive": is_distributive(L),
           "contributions": contrib, "chain_values": chain_values, "chain_spread": spread, "ok": ok}
    _emit(args, doc)
    return EXIT_OK if ok else EXIT_CHECK


def cmd_entropy_check(args) -> int:
    joint = formats.parse("joint", formats.joint_from_json, _load(args.joint, "joint"))
    rep = shannon_check(joint, tol=args.tol)
    dep = dependency_lattice(joint)
    doc = {
        "strictness": rep.strictness,
        "worst_monotonicity_slack": rep.worst_monotonicity_slack,
        "worst_submodularity_slack": rep.worst_submodularity_slack,
        "shannon_ok": rep.ok,
        "closures": {v: sorted(functional_closure(joint, [v])) for v in joint.variables},
        "dependency_lattice": dep.lattice.to_json(),
        "entropy": dep.entropy,
    }
    _emit(args, doc)
    return EXIT_OK if rep.ok else EXIT_CHECK


def _default_refinement(n: int, levels: int | None) -> RefinementSequence:
    depth = n.bit_length() - 1
    if 1 << depth != n:
        raise ValidationError(f"dyadic refinement needs 2**k atoms, got {n}; pass --refinement")
    levels = depth if levels is None else levels
    if not 1 <= levels <= depth:
        raise ValidationError(f"--levels must be between 1 and {depth}")
    return RefinementSequence(tuple(dyadic_partition(depth, j) for j in range(1, levels + 1)))


def cmd_rn_approx(args) -> int:
    mu = formats.parse("measure", formats.measure_from_json, _load(args.mu, "mu"))
    nu = formats.parse("measure", formats.measure_from_json, _load(args.nu, "nu"))
    if args.refinement:
        R = formats.parse("refinement", formats.refinement_from_json, _load(args.refinement, "refinement"), mu.n)
    else:
        R = _default_refinement(mu.n, args.levels)
    sets = formats.load_test_sets(_load(args.test_sets, "test-sets")) if args.test_sets else []
    density, rep = rn_approximate(mu, nu, R, sets, args.reference, tol=args.tol)
    rows = rep.rows()
    if args.trace:
        formats.write_atomic(args.trace, formats.csv_text(TRACE_HEADER, rows))
    doc = {
        "levels": rep.levels,
        "reference_divergence": rep.reference_divergence,
        "total_mass": rep.total_mass,
        "gaps_nonincreasing": rep.gaps_nonincreasing,
        "violations": [{"check": c.name, "m": c.m, "n": c.n, "lhs": c.lhs, "rhs": c.rhs} for c in rep.violations],
        "trace": rows,
        "setwise": {str(k): {"target": rep.setwise_target[k], "trace": v, "augmented_l1": rep.augmented_l1[k]}
                    for k, v in rep.setwise.items()},
        "blended": rep.blended,
        "density": density,
        "ok": rep.ok,
    }
    _emit(args, doc)
    return EXIT_OK if rep.ok else EXIT_CHECK


def cmd_doob(args) -> int:
    paths = []
    if args.mu:
        mu = formats.parse("measure", formats.measure_from_json, _load(args.mu, "mu"))
        nu = formats.parse("measure", formats.measure_from_json, _load(args.nu, "nu"))
        if args.refinement:
            R = formats.parse("refinement", formats.refinement_from_json, _load(args.refinement, "refinement"), mu.n)
        else:
            R = _default_refinement(mu.n, args.levels)
        paths.append(density_martingale(mu, nu, R))
    else:
        rng = np.random.default_rng(args.seed)
        for _ in range(args.paths):
            R = random_refinement(rng, args.atoms, args.levels or 4)
            paths.append(random_martingale(rng, R))
    lambdas = [float(x) for x in args.lambdas.split(",")]
    checks = set(args.checks.split(","))
    rows, failures = [], {}
    for pid, path in enumerate(paths):
        L = path.levels
        for r in doob_check(path, lambdas, tol=args.tol):
            if r.check in checks:
                rows.append({"path_id": pid, "level_m": 1, "level_n": L, "lambda": r.lam, "lhs": r.lhs,
                             "rhs": r.rhs, "residual": r.residual, "pass": r.passed, "check": r.check})
        if "gamma" in checks:
            for m, n, g_max, g_min, D in gamma_rows(path, tol=args.tol):
                for name, g in (("gamma_max", g_max), ("gamma_min", g_min)):
                    res = g - D
                    rows.append({"path_id": pid, "level_m": m, "level_n": n, "lambda": None, "lhs": g,
                                 "rhs": D, "residual": res, "pass": res <= args.tol * (1.0 + abs(D)),
                                 "check": name})
    for r in rows:
        if not r["pass"]:
            failures[r["check"]] = failures.get(r["check"], 0) + 1
    if args.trace:
        formats.write_atomic(args.trace, formats.csv_text(DOOB_HEADER, rows))
    doc = {"paths": len(paths), "rows": len(rows), "violations": failures, "ok": not failures}
    _emit(args, doc)
    return EXIT_OK if not failures else EXIT_CHECK


def parse_deltas(text: str) -> list[float]:
    """``"1e-2..1e-8"`` (every decade in between) or a comma list."""
    if ".." in text:
        a, b = (float(x) for x in text.split(".."))
        hi, lo = max(a, b), min(a, b)
        k0, k1 = round(-math.log10(hi)), round(-math.log10(lo))
        return [10.0 ** -k for k in range(k0, k1 + 1)]
    return [float(x) for x in text.split(",") if x.strip()]


def cmd_counterexample(args) -> int:
    if args.density in BUILTIN:
        spec = BUILTIN[args.density]
    else:
        doc = _load(args.density, "density")
        spec = formats.parse("density", lambda d: tabulated_density(Path(args.density).stem, d["x"], d["M"]), doc)
    deltas = parse_deltas(args.deltas)
    rows = blowup_demo(spec, deltas, args.N)
    table = [{"delta": r.delta, "N": r.N, "integral_sup": r.integral_sup,
              "closed_form_value": r.closed_form_value, "rel_gap": r.rel_gap} for r in rows]
    sups = [r.integral_sup for r in rows]
    increasing = all(b > a for a, b in zip(sups, sups[1:]))
    matched = all(r.rel_gap is None or r.rel_gap <= args.tol for r in rows)
    fubini = [fubini_identity_check(spec, d) for d in deltas if d < 1]
    ok = increasing and matched and all(f.relative_gap <= args.tol for f in fubini)
    if args.out:
        formats.write_atomic(args.out, formats.csv_text(BLOWUP_HEADER, table))
    else:
        sys.stdout.write(formats.csv_text(BLOWUP_HEADER, table))
    summary = {"density": spec.name, "mass": spec.mass, "strictly_increasing": increasing,
               "growth": sups[-1] - sups[0] if sups else 0.0, "closed_form_match": matched,
               "integral_full": [r.integral_full for r in rows],
               "fubini_gaps": [f.relative_gap for f in fubini], "ok": ok}
    sys.stderr.write(formats.dumps(summary))
    return EXIT_OK if ok else EXIT_CHECK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="latdiv", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, tol):
        sp.add_argument("--out", help="write the report here instead of stdout")
        sp.add_argument("--tol", type=float, default=tol, help=f"tolerance (default {tol})")
        sp.add_argument("--seed", type=int, default=0, help="seed for generated instances")

    sp = sub.add_parser("lattice-check", help="lattice laws, irreducibles, Birkhoff round trip")
    sp.add_argument("--lattice", help="lattice JSON; a random distributive lattice if omitted")
    sp.add_argument("--max-chains", type=int, default=1000)
    common(sp, 1e-9)
    sp.set_defaults(func=cmd_lattice_check)

    sp = sub.add_parser("fca-concepts", help="enumerate formal concepts")
    sp.add_argument("--context", required=True)
    common(sp, 1e-9)
    sp.set_defaults(func=cmd_fca_concepts)

    sp = sub.add_parser("divergence", help="information divergence of two valuations")
    sp.add_argument("--lattice")
    sp.add_argument("--mu", required=True)
    sp.add_argument("--nu", required=True)
    sp.add_argument("--max-chains", type=int, default=1000)
    common(sp, 1e-9)
    sp.set_defaults(func=cmd_divergence)

    sp = sub.add_parser("entropy-check", help="Shannon inequalities and dependency lattice")
    sp.add_argument("--joint", required=True)
    common(sp, 1e-9)
    sp.set_defaults(func=cmd_entropy_check)

    sp = sub.add_parser("rn-approx", help="projection densities along a refinement")
    sp.add_argument("--mu", required=True)
    sp.add_argument("--nu", required=True)
    sp.add_argument("--refinement")
    sp.add_argument("--levels", type=int)
    sp.add_argument("--test-sets")
    sp.add_argument("--reference", type=float, help="full D(mu||nu) to measure gaps against")
    sp.add_argument("--trace", help="CSV convergence trace")
    common(sp, 1e-9)
    sp.set_defaults(func=cmd_rn_approx)

    sp = sub.add_parser("doob", help="maximal inequalities on density or random martingales")
    sp.add_argument("--mu")
    sp.add_argument("--nu")
    sp.add_argument("--refinement")
    sp.add_argument("--levels", type=int)
    sp.add_argument("--paths", type=int, default=100)
    sp.add_argument("--atoms", type=int, default=8)
    sp.add_argument("--lambdas", default="0.5,1,2,4")
    sp.add_argument("--checks", default="maximal,minimal,gamma",
                    help="comma list from maximal, minimal, minimal_lower, gamma")
    sp.add_argument("--trace", help="CSV report")
    common(sp, 1e-9)
    sp.set_defaults(func=cmd_doob)

    sp = sub.add_parser("counterexample", help="blow-up of the running-average maximum")
    sp.add_argument("--density", default="canonical",
                    help="canonical, uniform, linear, or a JSON file with tabulated x and M")
    sp.add_argument("--deltas", default="1e-2..1e-8")
    sp.add_argument("--N", type=int, default=40000, help="length of the coarsening sequence")
    common(sp, 1e-3)
    sp.set_defaults(func=cmd_counterexample)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except ValidationError as e:
        print(f"invalid input: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except CheckFailure as e:
        print(f"check failed: {e}", file=sys.stderr)
        return EXIT_CHECK
    except LatdivError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
