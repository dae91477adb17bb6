"""Command-line front end: ``stabrank <family> <command> [flags]``.

Every command prints one JSON object (or writes it to ``--out``); sweeps can
also write CSV. Exit status: 0 success, 1 a checked assertion failed, 2 usage
error, 3 resource or numeric limit hit (partial results are still printed).
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import bounds, dense, experiments, gadget, lookup, measures, rank, stab
from .errors import BudgetExceeded, NumericError, ResourceLimitError
from .report import dumps, jsonable

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_LIMIT = 0, 1, 2, 3
SCHEMA = "stabrank.cli/1"


class UsageError(Exception):
    pass


def _dict_kind(name: str) -> str:
    kinds = {"stab": stab.FULL, "quadphase": stab.QUADRATIC}
    if name not in kinds:
        raise UsageError(f"--dict must be one of {sorted(kinds)}")
    return kinds[name]


def _state(args) -> dense.DenseState:
    if not args.state:
        raise UsageError("--state is required")
    try:
        return dense.load_state(args.state)
    except FileNotFoundError:
        raise UsageError(f"no such state file {args.state!r}") from None


def _need_seed(args) -> int:
    if args.seed is None:
        raise UsageError("this command is randomized; pass an explicit --seed")
    return args.seed


# -- handlers -------------------------------------------------------------------


def cmd_stab_dict(args) -> dict:
    d = stab.enumerate_dictionary(args.n, _dict_kind(args.dict))
    out = {"n": d.n, "kind": d.kind, "count": len(d)}
    if args.dump:
        stab.dump_dictionary(d, args.dump)
        out["dump"] = args.dump
    return out


def cmd_stab_count(args) -> dict:
    return {"n": args.n, "full": stab.stab_count(args.n), "quadratic_phase": 1 << (args.n * (args.n + 1) // 2)}


def _rank(args, delta: float) -> dict:
    psi = _state(args)
    d = stab.enumerate_dictionary(psi.n, _dict_kind(args.dict))
    cert = rank.approx_rank(psi, delta, d, args.mode, budget=args.budget, workers=args.workers)
    return {**cert.to_json(), "state": args.state, "dict": d.kind, "n": psi.n}


def cmd_rank_exact(args) -> dict:
    return _rank(args, 0.0)


def cmd_rank_approx(args) -> dict:
    if args.delta is None:
        raise UsageError("--delta is required")
    return _rank(args, args.delta)


def cmd_rank_threshold(args) -> dict:
    return experiments.approx_threshold(args.m, args.around, args.eps)


def cmd_rank_tpowers(args) -> dict:
    return experiments.exact_t_ranks(args.m, args.expected, workers=args.workers)


def cmd_measure_all(args) -> dict:
    psi = _state(args)
    d = stab.enumerate_dictionary(psi.n, _dict_kind(args.dict))
    rep = measures.measure_report(psi, d).to_json()
    rep["state"] = args.state
    return rep


def cmd_measure_fidelity(args) -> dict:
    psi = _state(args)
    return {"state": args.state, "fidelity": measures.stab_fidelity(psi, _dict_kind(args.dict))}


def cmd_measure_extent(args) -> dict:
    psi = _state(args)
    ext = measures.stab_extent(psi, _dict_kind(args.dict))
    return {"state": args.state, "extent": ext.value, "lower": ext.lower, "gap": ext.gap,
            "iterations": ext.iterations}


def cmd_measure_gowers(args) -> dict:
    psi = _state(args)
    return {"state": args.state, "gowers_u3": measures.gowers_u3(psi)}


def cmd_measure_fchi(args) -> dict:
    psi = _state(args)
    val = measures.f_chi_bound(psi, _dict_kind(args.dict))
    return {"state": args.state, "fchi_bound": val, "applicable": val is not None}


def cmd_measure_tpowers(args) -> dict:
    return experiments.t_power_measures(args.m)


def cmd_measure_suite(args) -> dict:
    return experiments.measures_suite(_need_seed(args))


def _circuit(args) -> gadget.CliffordTCircuit:
    try:
        return gadget.read_circuit(args.circuit)
    except FileNotFoundError:
        raise UsageError(f"no such circuit file {args.circuit!r}") from None


def cmd_gadget_verify(args) -> dict:
    c = _circuit(args)
    rep = gadget.verify_equivalence(c).to_json()
    st = gadget.outcome_stats(gadget.rewrite_gadgets(c))
    rep.update({
        "circuit": args.circuit,
        "n": c.n,
        "t_count": c.t_count,
        "max_uniform_deviation": max(st.max_deviation, st.max_conditional_deviation),
    })
    rep["ok"] = rep["ok"] and rep["max_uniform_deviation"] < gadget.UNIFORM_TOL
    return rep


def cmd_gadget_stats(args) -> dict:
    c = _circuit(args)
    st = gadget.outcome_stats(gadget.rewrite_gadgets(c))
    return {
        "circuit": args.circuit,
        "probabilities": {"".join(map(str, k)) or "()": v for k, v in st.probabilities.items()},
        "max_deviation": st.max_deviation,
        "max_conditional_deviation": st.max_conditional_deviation,
        "ok": st.uniform,
    }


def cmd_gadget_random(args) -> dict:
    return experiments.gadget_suite(args.trials, args.max_n, args.max_k, _need_seed(args))


def cmd_gadget_monotonicity(args) -> dict:
    return experiments.monotonicity_suite(args.trials, args.n, args.k, args.delta, _need_seed(args))


def _table_spec(args) -> lookup.LookupSpec:
    if args.table:
        n, b, data = lookup.read_table(args.table)
    else:
        if args.n is None or args.b is None:
            raise UsageError("pass --table or both --n and --b with --seed")
        rng = np.random.default_rng(_need_seed(args))
        n, b = args.n, args.b
        data = tuple(int(v) for v in rng.integers(0, 1 << b, 1 << n))
    return lookup.LookupSpec(n, b, data, args.lam)


def cmd_lookup_verify(args) -> dict:
    spec = _table_spec(args)
    rep = lookup.verify_lookup(spec).to_json()
    rep["uncompute_with_copy"] = lookup.verify_uncompute_with_copy(spec)
    circ = lookup.build_lookup(spec)
    rep.update({
        "n": spec.n, "b": spec.b, "lam": spec.lam,
        "output_qubits": list(circ.output), "garbage_qubits": list(circ.garbage), "flag": circ.flag,
        "gate_counts": circ.gate_counts(),
        "t_count_formula": lookup.t_count(spec), "t_count_built": lookup.built_t_count(circ),
    })
    rep["ok"] = rep["correct"] and rep["uncomputed"] and rep["superposition_ok"] and rep["uncompute_with_copy"]
    return rep


def cmd_lookup_tcount(args) -> dict:
    lookup.check_lambda(args.n, args.lam)
    return {"n": args.n, "b": args.b, "lam": args.lam,
            "t_count": lookup.t_count_formula(args.n, args.b, args.lam),
            "t_count_network": lookup.network_t_count(args.n, args.b, args.lam)}


def cmd_lookup_sweep(args) -> dict:
    rows = []
    for n in range(args.n_min, args.n_max + 1):
        b = n if args.b is None else args.b
        for r in lookup.lambda_sweep(n, b, counter=args.counter):
            rows.append({**r, "ratio": r["t_count"] / 2 ** (n / 2)})
    best = [lookup.best_lambda(n, n if args.b is None else args.b, counter=args.counter)
            for n in range(args.n_min, args.n_max + 1)]
    return {"counter": args.counter, "rows": rows, "best": best, "_csv": rows}


def cmd_lookup_suite(args) -> dict:
    return experiments.lookup_suite(args.tables, _need_seed(args), range(args.n_min, args.n_max + 1),
                                    args.b, args.const)


def cmd_bound_tail(args) -> dict:
    return bounds.haar_tail(args.n, args.M, args.delta).to_json()


def cmd_bound_threshold(args) -> dict:
    return bounds.haar_exists_threshold(args.delta)


def cmd_bound_inline(args) -> dict:
    return experiments.haar_tail_suite(range(args.n_min, args.n_max + 1), args.delta)


def cmd_bound_main(args) -> dict:
    rep = bounds.main_lower_bound(args.m, args.delta, args.c, args.C).to_json()
    rep["n"] = rep["flags"]["n"]
    rep["ok"] = rep["flags"]["bracket_upper"] and rep["flags"]["bracket_lower"]
    return rep


def cmd_bound_brackets(args) -> dict:
    return experiments.main_pipeline(args.m, args.delta, args.c, args.C, args.m_min, args.m_max)


def cmd_bound_tdesign(args) -> dict:
    return bounds.tdesign_tail(args.n, args.M, args.delta, args.t, args.epsilon).to_json()


def cmd_bound_polyrank(args) -> dict:
    return bounds.poly_rank_threshold(args.d, args.delta, args.n_max)


def cmd_bound_moment(args) -> dict:
    return {"n": args.n, "M": args.M, "t": args.t, "value": bounds.haar_moment(args.n, args.M, args.t),
            "float": float(bounds.haar_moment(args.n, args.M, args.t))}


def cmd_bound_gates(args) -> dict:
    reps = bounds.design_gate_formulas(args.n, args.t, args.epsilon, args.d, args.delta, args.C1, args.C)
    return {k: v.to_json() for k, v in reps.items()}


def cmd_haar_moments(args) -> dict:
    return experiments.haar_moment_suite(args.n, args.M, args.t, args.samples, _need_seed(args), args.workers)


def cmd_haar_tdesign(args) -> dict:
    rep = bounds.tdesign_tail_mc(args.n, args.M, args.delta, args.t, args.samples, _need_seed(args), args.workers)
    rep["ok"] = rep["consistent"]
    return rep


def cmd_haar_sample(args) -> dict:
    psi = dense.haar_sample(args.n, _need_seed(args), args.index)
    if args.state_out:
        dense.write_state_file(psi, args.state_out)
    return {"n": args.n, "seed": args.seed, "index": args.index, "norm": psi.norm, "state_out": args.state_out}


def cmd_demo_gap(args) -> dict:
    g = measures.gap_demo(args.n, args.delta, _need_seed(args), args.slack)
    rep = g.to_json()
    rep["ok"] = g.approx.rank == 1 and (args.delta == 0 or g.exact.rank >= 2)
    return rep


def cmd_demo_mod8(args) -> dict:
    return experiments.mod8_suite(args.n, args.pad_n, args.rank_n)


def cmd_demo_acceptance(args) -> dict:
    chosen = args.criteria or sorted(experiments.ACCEPTANCE)
    rows = []
    for k in chosen:
        name, fn = experiments.ACCEPTANCE[k]
        res = fn()
        rows.append({"criterion": k, "name": name, "ok": res["ok"], "seconds": res.get("seconds")})
    return {"rows": rows, "ok": all(r["ok"] for r in rows)}


# -- parser ---------------------------------------------------------------------


def _common(p: argparse.ArgumentParser, *names: str) -> None:
    if "state" in names:
        p.add_argument("--state", help="named state (T^m, 0^n, +^n) or state file")
    if "dict" in names:
        p.add_argument("--dict", default="stab", help="dictionary: stab or quadphase")
    if "mode" in names:
        p.add_argument("--mode", default=rank.EXHAUSTIVE, choices=[rank.EXHAUSTIVE, rank.HEURISTIC])
    if "seed" in names:
        p.add_argument("--seed", type=int, default=None)
    if "workers" in names:
        p.add_argument("--workers", type=int, default=1)
    if "samples" in names:
        p.add_argument("--samples", type=int, default=100_000)
    if "budget" in names:
        p.add_argument("--budget", type=int, default=rank.DEFAULT_BUDGET)


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="stabrank", description=__doc__.splitlines()[0])
    fams = top.add_subparsers(dest="family", required=True)

    def fam(name, help_):
        p = fams.add_parser(name, help=help_)
        return p.add_subparsers(dest="command", required=True)

    def cmd(sub, name, fn, help_, *common):
        p = sub.add_parser(name, help=help_)
        _common(p, *common)
        p.add_argument("--out", help="write the JSON report here instead of stdout")
        p.add_argument("--csv", help="also write sweep rows as CSV")
        p.set_defaults(handler=fn)
        return p

    s = fam("stab", "stabilizer dictionaries")
    p = cmd(s, "dict", cmd_stab_dict, "enumerate (and optionally dump) a dictionary", "dict")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--dump")
    p = cmd(s, "count", cmd_stab_count, "closed-form dictionary sizes")
    p.add_argument("--n", type=int, required=True)

    r = fam("rank", "stabilizer rank search")
    cmd(r, "exact", cmd_rank_exact, "exact rank", "state", "dict", "mode", "workers", "budget")
    p = cmd(r, "approx", cmd_rank_approx, "approximate rank", "state", "dict", "mode", "workers", "budget")
    p.add_argument("--delta", type=float)
    p = cmd(r, "threshold", cmd_rank_threshold, "chi_delta of T^m on both sides of a delta")
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--around", type=float, default=math.sin(math.pi / 8))
    p.add_argument("--eps", type=float, default=1e-6)
    p = cmd(r, "tpowers", cmd_rank_tpowers, "exact ranks of T^m", "workers")
    p.add_argument("--m", type=int, nargs="+", default=[1, 2])
    p.add_argument("--expected", type=int, nargs="+", default=[2, 2])

    m = fam("measure", "stabilizerness measures")
    cmd(m, "all", cmd_measure_all, "fidelity, extent, Gowers U3, f-chi bound", "state", "dict")
    cmd(m, "fidelity", cmd_measure_fidelity, "stabilizer fidelity", "state", "dict")
    cmd(m, "extent", cmd_measure_extent, "stabilizer extent", "state", "dict")
    cmd(m, "gowers", cmd_measure_gowers, "Gowers U3 norm", "state")
    cmd(m, "fchi", cmd_measure_fchi, "fidelity-rank lower bound", "state", "dict")
    p = cmd(m, "tpowers", cmd_measure_tpowers, "fidelity and f-chi bound of T^m")
    p.add_argument("--m", type=int, nargs="+", default=[1, 2, 3])
    cmd(m, "suite", cmd_measure_suite, "extent duality, Gowers checks, gap demo", "seed")

    g = fam("gadget", "T-gadget circuits")
    p = cmd(g, "verify", cmd_gadget_verify, "branch equivalence and uniformity for a circuit file")
    p.add_argument("--circuit", required=True)
    p = cmd(g, "stats", cmd_gadget_stats, "exact outcome distribution")
    p.add_argument("--circuit", required=True)
    p = cmd(g, "random", cmd_gadget_random, "gadget lemmas on random circuits", "seed")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--max-n", type=int, default=3)
    p.add_argument("--max-k", type=int, default=3)
    p = cmd(g, "monotonicity", cmd_gadget_monotonicity, "rank inequality on random circuits", "seed")
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--k", type=int, nargs="+", default=[0, 1, 2])
    p.add_argument("--delta", type=float, nargs="+", default=[0.0, 0.2])

    lk = fam("lookup", "SELECT-SWAP lookup oracle")
    p = cmd(lk, "verify", cmd_lookup_verify, "functional check of one table", "seed")
    p.add_argument("--table")
    p.add_argument("--n", type=int)
    p.add_argument("--b", type=int)
    p.add_argument("--lam", type=int, default=1)
    p = cmd(lk, "tcount", cmd_lookup_tcount, "T count for one configuration")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--b", type=int, required=True)
    p.add_argument("--lam", type=int, default=1)
    p = cmd(lk, "sweep", cmd_lookup_sweep, "T count over lambda (CSV rows)")
    p.add_argument("--n-min", type=int, default=8)
    p.add_argument("--n-max", type=int, default=20)
    p.add_argument("--b", type=int, default=1, help="output bits (default 1)")
    p.add_argument("--counter", choices=sorted(lookup.COUNTERS), default="formula")
    p = cmd(lk, "suite", cmd_lookup_suite, "functional tables plus scaling sweep", "seed")
    p.add_argument("--tables", type=int, default=20)
    p.add_argument("--n-min", type=int, default=8)
    p.add_argument("--n-max", type=int, default=20)
    p.add_argument("--b", type=int, default=1)
    p.add_argument("--const", type=float, default=experiments.LOOKUP_CONST)

    b = fam("bound", "closed-form bounds")
    p = cmd(b, "tail", cmd_bound_tail, "Haar tail bound")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--M", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p = cmd(b, "threshold", cmd_bound_threshold, "existence threshold n0 and M(n0)")
    p.add_argument("--delta", type=float, required=True)
    p = cmd(b, "inline", cmd_bound_inline, "inline estimate and thresholds over a grid")
    p.add_argument("--n-min", type=int, default=10)
    p.add_argument("--n-max", type=int, default=30)
    p.add_argument("--delta", type=float, nargs="+", default=[0.0, 0.5, 0.9])
    for name, fn, hlp in (("main", cmd_bound_main, "main lower bound"),
                          ("brackets", cmd_bound_brackets, "main bound plus bracket sweep")):
        p = cmd(b, name, fn, hlp)
        p.add_argument("--m", type=float, default=1000)
        p.add_argument("--delta", type=float, default=0.5)
        p.add_argument("--c", type=float, default=bounds.DEFAULT_CONSTANTS["c"])
        p.add_argument("--C", type=float, default=bounds.DEFAULT_CONSTANTS["C"])
        if name == "brackets":
            p.add_argument("--m-min", type=int, default=10)
            p.add_argument("--m-max", type=int, default=1_000_000)
    p = cmd(b, "tdesign", cmd_bound_tdesign, "t-design tail bound")
    for a, t_ in (("--n", int), ("--M", float), ("--delta", float), ("--t", int), ("--epsilon", float)):
        p.add_argument(a, type=t_, required=True)
    p = cmd(b, "polyrank", cmd_bound_polyrank, "locate n0(d) for the poly-rank parameters")
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--delta", type=float, default=0.5)
    p.add_argument("--n-max", type=int, default=400)
    p = cmd(b, "moment", cmd_bound_moment, "exact Haar moment")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--t", type=int, required=True)
    p = cmd(b, "gates", cmd_bound_gates, "design and circuit size formulas")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--delta", type=float, default=0.5)
    p.add_argument("--C1", type=float, default=bounds.DEFAULT_CONSTANTS["C1"])
    p.add_argument("--C", type=float, default=1.0)

    h = fam("haar", "Haar Monte Carlo")
    p = cmd(h, "moments", cmd_haar_moments, "moment law for stabilizer projectors", "seed", "samples", "workers")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--M", type=int, nargs="+", default=[1, 5])
    p.add_argument("--t", type=int, nargs="+", default=[1, 2, 3])
    p = cmd(h, "tdesign", cmd_haar_tdesign, "empirical tail vs the Markov bound", "seed", "samples", "workers")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--M", type=int, default=5)
    p.add_argument("--delta", type=float, default=0.5)
    p.add_argument("--t", type=int, default=2)
    p = cmd(h, "sample", cmd_haar_sample, "draw one Haar state", "seed")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--index", type=int, default=0)
    p.add_argument("--state-out")

    d = fam("demo", "composite demonstrations")
    p = cmd(d, "gap", cmd_demo_gap, "exact vs approximate rank gap", "seed")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--slack", type=float, default=1.0)
    p = cmd(d, "mod8", cmd_demo_mod8, "mod-8 decomposition and padding reduction")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--pad-n", type=int, default=4)
    p.add_argument("--rank-n", type=int, default=None)
    p = cmd(d, "acceptance", cmd_demo_acceptance, "run acceptance experiments")
    p.add_argument("--criteria", type=int, nargs="*")
    return top


def _write_csv(path: str, rows: Sequence[dict]) -> None:
    if not rows:
        Path(path).write_text("")
        return
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        for row in rows:
            w.writerow({k: jsonable(v) for k, v in row.items()})


def _emit(report: dict, args) -> None:
    text = dumps(report) + "\n"
    if getattr(args, "out", None):
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    head: dict[str, Any] = {"schema": SCHEMA, "command": f"{args.family} {args.command}"}
    try:
        body = args.handler(args)
    except (UsageError, ValueError, KeyError) as exc:
        print(f"stabrank: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BudgetExceeded as exc:
        _emit({**head, "error": str(exc), "best": None if exc.best is None else exc.best.to_json()}, args)
        return EXIT_LIMIT
    except (ResourceLimitError, NumericError) as exc:
        _emit({**head, "error": str(exc), "achieved": getattr(exc, "achieved", None)}, args)
        return EXIT_LIMIT
    rows = body.pop("_csv", None)
    report = {**head, **{k: v for k, v in body.items() if k != "schema"}}
    if "schema" in body:
        report["result_schema"] = body["schema"]
    if args.csv and rows is not None:
        _write_csv(args.csv, rows)
    _emit(report, args)
    return EXIT_FAIL if report.get("ok") is False else EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
