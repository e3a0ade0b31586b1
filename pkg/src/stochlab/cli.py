"""Command-line entry point: ``stochlab <group> <command> [flags]``.

Output is JSON with sorted keys (or two-column CSV with ``--format csv``).
Exit codes: 0 success, 1 domain error (JSON on stderr), 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import chains, conditioning, distributions, exact_core, martingales, monte_carlo, walks
from .errors import StochLabError
from .exact_core import format_rational

SEED_ENV = "STOCHLAB_SEED"


class UsageError(Exception):
    pass


def encode(v):
    """JSON-ready value: rationals as "p/q", ints as decimal strings, floats as repr."""
    if isinstance(v, bool) or v is None or isinstance(v, str):
        return v
    if isinstance(v, Fraction):
        return format_rational(v)
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, complex):
        return {"real": repr(v.real), "imag": repr(v.imag)}
    if isinstance(v, dict):
        return {str(k): encode(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, frozenset, set)):
        return [encode(x) for x in v]
    if hasattr(v, "to_json"):
        return v.to_json()
    if hasattr(v, "item"):  # numpy scalar
        return encode(v.item())
    raise TypeError(f"cannot encode {type(v).__name__}")


def _flatten(prefix: str, v, rows: list) -> None:
    if isinstance(v, dict):
        for k in sorted(v):
            _flatten(f"{prefix}.{k}" if prefix else str(k), v[k], rows)
    elif isinstance(v, list):
        for i, x in enumerate(v):
            _flatten(f"{prefix}.{i}" if prefix else str(i), x, rows)
    else:
        rows.append((prefix, "" if v is None else v))


def render(doc: dict, fmt: str) -> str:
    if fmt == "csv":
        rows: list = []
        _flatten("", doc, rows)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["key", "value"])
        w.writerows(rows)
        return buf.getvalue()
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _load_json(text: str):
    """Inline JSON, or the contents of a JSON file when ``text`` names one."""
    t = text.strip()
    if t[:1] in "[{\"" or t in ("true", "false", "null"):
        return json.loads(t)
    p = Path(text)
    if p.exists():
        return json.loads(p.read_text())
    return json.loads(t)


def _dist(text: str) -> distributions.Distribution:
    t = text.strip()
    if t[:1] != "{" and not Path(t).exists():
        named = {
            "rademacher": distributions.rademacher,
            "gaussian": lambda: distributions.Gaussian(0, 1),
            "exponential": lambda: distributions.Exponential(1),
            "uniform": lambda: distributions.ContinuousUniform(0, 1),
        }
        if t in named:
            return named[t]()
        raise ValueError(f"unknown distribution {t!r}; pass a JSON description")
    return distributions.from_json(_load_json(t))


def _rational(s: str) -> Fraction:
    return Fraction(s)


def _number(s: str):
    try:
        return Fraction(s)
    except ValueError:
        return float(s)


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is None:
        raise UsageError("--seed is required (or set STOCHLAB_SEED)")
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer") from None


def _stream(args) -> monte_carlo.SeededStream:
    return monte_carlo.SeededStream(_seed(args), getattr(args, "stream", 0))


def _matrix(args) -> chains.StochasticMatrix:
    return chains.StochasticMatrix.from_json(_load_json(args.matrix))


def _process(args) -> martingales.AdaptedProcess:
    return martingales.process_from_json(_load_json(args.process))


def _space(args) -> conditioning.FiniteProbSpace:
    return conditioning.FiniteProbSpace.from_json(_load_json(args.space))


# --- handlers ---------------------------------------------------------------

def h_binomial(a):
    return {"value": exact_core.binomial(a.n, a.k)}


def h_multinomial(a):
    return {"value": exact_core.multinomial(a.n, _load_json(a.parts))}


def h_sampling(a):
    w, wo = exact_core.sampling_counts(a.n, a.r)
    return {"with_replacement": w, "without_replacement": wo}


def h_occupancy(a):
    return {"value": exact_core.occupancy_count(a.r, a.n)}


def h_matching(a):
    return {"probability": exact_core.matching_probability(a.n)}


def h_stirling(a):
    lo, hi = exact_core.stirling_bounds(a.n)
    return {"lower": lo, "upper": hi, "lower_decimal": float(lo), "upper_decimal": float(hi)}


def h_paths(a):
    return {"count": walks.path_count(a.n, a.x)}


def h_ballot(a):
    return {"probability": walks.ballot_probability(a.p, a.q)}


def h_return(a):
    return {"U": walks.return_probability(a.nu)}


def h_first_return(a):
    return {"f": walks.first_return_probability(a.nu)}


def h_arcsine(a):
    return {"pmf": walks.arcsine_pmf(a.n)}


def h_no_zero(a):
    return {"probability": walks.no_zero_probability(a.n, a.positive)}


def h_position(a):
    return {"probability": walks.position_pmf(a.n, a.r, a.p)}


def h_reflection(a):
    touching, total = walks.reflection_count(a.a, a.alpha, a.b, a.beta)
    return {"touching": touching, "total": total}


def h_pmf(a):
    return {"value": _dist(a.dist).mass_or_density(_number(a.x))}


def h_cdf(a):
    d = _dist(a.dist)
    t = _number(a.t)
    return {"cdf": d.cdf(t), "jump": d.jump(t)}


def h_mean(a):
    return {"mean": _dist(a.dist).mean()}


def h_var(a):
    return {"variance": _dist(a.dist).variance()}


def h_cf(a):
    return {"cf": _dist(a.dist).char_fn(float(a.xi))}


def h_convolve(a):
    return {"distribution": distributions.convolve(_dist(a.dist), _dist(a.dist2)).to_json()}


def h_tails(a):
    tb = distributions.tail_bounds(_dist(a.dist), _number(a.a))
    return tb._asdict()


def h_atoms(a):
    space = _space(a)
    gens = [[space.outcomes[i] for i in g] for g in _load_json(a.generators)]
    return {"atoms": conditioning.atoms(space, gens).to_indices(space)}


def h_expect(a):
    space = _space(a)
    part = conditioning.Partition.from_indices(space, _load_json(a.partition))
    y = dict(zip(space.outcomes, (Fraction(v) for v in _load_json(a.y))))
    ce = conditioning.cond_expectation(y, part, space)
    report = conditioning.verify_projection(y, part, space)
    return {"expectation": [ce[o] for o in space.outcomes], "residuals": list(report.block_residuals)}


def h_bayes(a):
    return {"posterior": conditioning.bayes(_load_json(a.prior), _load_json(a.likelihood))}


def h_regress(a):
    pred = conditioning.best_affine_predictor(
        _load_json(a.cov_xy), _load_json(a.cov_y), a.mean_x, _load_json(a.mean_y)
    )
    return {"intercept": pred.intercept, "coefficients": list(pred.coefficients), "non_unique": pred.non_unique}


def h_mclassify(a):
    return {"classification": martingales.classify(_process(a))}


def h_doob(a):
    m, aa = martingales.doob_decomposition(_process(a))
    return {"M": m.to_json()["levels"], "A": aa.to_json()["levels"]}


def h_stop(a):
    x = _process(a)
    rule = _load_json(a.stop)
    if "constant" in rule:
        t = martingales.StoppingTime.constant(x.tree, int(rule["constant"]))
    elif "hit" in rule:
        t = martingales.StoppingTime.first_hit(x, rule["hit"])
    else:
        raise ValueError('stopping rule needs "constant" or "hit"')
    return {
        "expectation": martingales.optional_stopping(x, t),
        "initial": x.levels[0][0],
        "cap_mass": t.cap_mass(),
    }


def h_ruin(a):
    return {"probability": martingales.gambler_ruin(a.p, a.k, a.m)}


def h_upcross(a):
    seq = [Fraction(v) for v in _load_json(a.seq)]
    return {"count": martingales.upcrossings(seq, a.a, a.b)}


def h_inequalities(a):
    checks = martingales.inequality_report(
        _process(a), a.lam, a.p_exp, require_martingale=not a.allow_submartingale
    )
    return {"checks": [{"name": c.name, "lhs": c.lhs, "rhs": c.rhs, "holds": c.holds} for c in checks]}


def h_cclassify(a):
    return chains.classify(_matrix(a)).to_json()


def h_invariant(a):
    q = _matrix(a)
    res = chains.invariant_measure(q)
    if res.non_unique:
        return {"measures": [[m[s] for s in q.states] for m in res.measures], "non_unique": True}
    return {"mu": [res.mu[s] for s in q.states]}


def h_reversible(a):
    q = _matrix(a)
    mu = dict(zip(q.states, _load_json(a.mu)))
    res = chains.is_reversible(q, mu)
    return {"reversible": res.reversible, "violation": list(res.violation) if res.violation else None}


def h_hit(a):
    q = _matrix(a)
    res = chains.hitting_probability(q, _load_json(a.target), _load_json(a.forbidden))
    return {"probabilities": res.probabilities, "unreachable": sorted(res.unreachable)}


def h_return_time(a):
    q = _matrix(a)
    rt = chains.expected_return_time(q)
    return {"return_times": [rt[s] for s in q.states]}


def h_potential(a):
    pm = chains.potential_matrix(_matrix(a))
    return {"states": list(pm.states), "matrix": [list(r) for r in pm.matrix]}


def h_simulate(a):
    q = _matrix(a)
    stream = _stream(a)
    return {"trajectory": chains.simulate(q, a.start, a.steps, stream), "seed": stream.seed}


def h_zd(a):
    v = chains.zd_recurrence(a.d, a.checkpoints)
    return {"d": v.d, "verdict": "recurrent" if v.recurrent else "transient",
            "partial_sums": v.partial_sums, "tail_bound": v.tail_bound, "note": v.note}


def h_ehrenfest(a):
    return chains.ehrenfest(a.k).to_json()


def h_lln(a):
    return monte_carlo.lln_experiment(_dist(a.dist), a.n, _stream(a)).to_json()


def h_clt(a):
    return monte_carlo.clt_experiment(_dist(a.dist), a.n, a.replicas, _stream(a), a.ks_tol).to_json()


def h_gc(a):
    return monte_carlo.glivenko_cantelli(_dist(a.dist), a.n, _stream(a)).to_json()


def h_bc(a):
    return monte_carlo.borel_cantelli_demo(a.n_max, _stream(a)).to_json()


def h_series(a):
    desc = {"kind": a.kind, **_load_json(a.params)}
    return monte_carlo.random_signs_verdict(desc, a.K, _stream(a), a.seeds).to_json()


def h_three_series(a):
    return monte_carlo.three_series_check({"kind": a.family, "alpha": a.alpha}, a.k).to_json()


def h_mart_clt(a):
    return monte_carlo.martingale_clt_experiment(a.n, a.replicas, _stream(a), a.rule).to_json()


# --- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", help="write output here instead of stdout")

    parser = argparse.ArgumentParser(prog="stochlab", description=__doc__.splitlines()[0])
    groups = parser.add_subparsers(dest="group", required=True)

    def group(name, help_):
        g = groups.add_parser(name, help=help_)
        return g.add_subparsers(dest="command", required=True)

    def cmd(sub, name, handler, *args, seeded=False):
        p = sub.add_parser(name, parents=[common])
        for flags, kw in args:
            p.add_argument(*flags, **kw)
        if seeded:
            p.add_argument("--seed", type=int, default=None)
            p.add_argument("--stream", type=int, default=0)
        p.set_defaults(handler=handler)
        return p

    def opt(*flags, **kw):
        kw.setdefault("required", "default" not in kw and kw.get("action") is None)
        return flags, kw

    def intopt(*flags, **kw):
        return opt(*flags, type=int, **kw)

    dist = opt("--dist", help="JSON description, path to one, or a bare name like rademacher")

    c = group("combinatorics", "counting")
    cmd(c, "binomial", h_binomial, intopt("--n"), intopt("--k"))
    cmd(c, "multinomial", h_multinomial, intopt("--n"), opt("--parts", help="JSON list"))
    cmd(c, "sampling", h_sampling, intopt("--n"), intopt("--r"))
    cmd(c, "occupancy", h_occupancy, intopt("--r"), intopt("--n"))
    cmd(c, "matching", h_matching, intopt("--n"))
    cmd(c, "stirling", h_stirling, intopt("--n"))

    w = group("walks", "simple random walk")
    cmd(w, "paths", h_paths, intopt("--n"), intopt("--x"))
    cmd(w, "ballot", h_ballot, intopt("--p"), intopt("--q"))
    cmd(w, "return", h_return, intopt("--nu"))
    cmd(w, "first-return", h_first_return, intopt("--nu"))
    cmd(w, "arcsine", h_arcsine, intopt("--n"))
    cmd(w, "no-zero", h_no_zero, intopt("--n"), opt("--positive", action="store_true"))
    cmd(w, "position", h_position, intopt("--n"), intopt("--r"), opt("--p", type=_rational, default=Fraction(1, 2)))
    cmd(w, "reflection", h_reflection, intopt("--a"), intopt("--alpha"), intopt("--b"), intopt("--beta"))

    d = group("dist", "named distributions")
    cmd(d, "pmf", h_pmf, dist, opt("--x"))
    cmd(d, "cdf", h_cdf, dist, opt("--t"))
    cmd(d, "mean", h_mean, dist)
    cmd(d, "var", h_var, dist)
    cmd(d, "cf", h_cf, dist, opt("--xi"))
    cmd(d, "convolve", h_convolve, dist, opt("--dist2"))
    cmd(d, "tails", h_tails, dist, opt("--a"))

    k = group("cond", "conditional expectation on finite spaces")
    space = opt("--space", help="FiniteProbSpace JSON or file")
    cmd(k, "atoms", h_atoms, space, opt("--generators", help="JSON list of index lists"))
    cmd(k, "expect", h_expect, space, opt("--partition"), opt("--y", help="JSON list, one value per outcome"))
    cmd(k, "bayes", h_bayes, opt("--prior"), opt("--likelihood"))
    cmd(k, "regress", h_regress, opt("--cov-xy", dest="cov_xy"), opt("--cov-y", dest="cov_y"),
        opt("--mean-x", dest="mean_x", type=_rational), opt("--mean-y", dest="mean_y"))

    m = group("mart", "martingales on path trees")
    proc = opt("--process", help="process JSON or file")
    cmd(m, "classify", h_mclassify, proc)
    cmd(m, "doob", h_doob, proc)
    cmd(m, "stop", h_stop, proc, opt("--stop", help='{"hit": [-2, 2]} or {"constant": 3}'))
    cmd(m, "ruin", h_ruin, opt("--p", type=_rational), intopt("--k"), intopt("--m"))
    cmd(m, "upcross", h_upcross, opt("--seq"), opt("--a", type=_rational), opt("--b", type=_rational))
    cmd(m, "inequalities", h_inequalities, proc, opt("--lambda", dest="lam", type=_rational),
        opt("--p-exp", dest="p_exp", type=_rational, default=Fraction(2)),
        opt("--allow-submartingale", action="store_true"))

    ch = group("chains", "finite Markov chains")
    mat = opt("--matrix", help="matrix JSON or file")
    cmd(ch, "classify", h_cclassify, mat)
    cmd(ch, "invariant", h_invariant, mat)
    cmd(ch, "reversible", h_reversible, mat, opt("--mu", help="JSON list in state order"))
    cmd(ch, "hit", h_hit, mat, opt("--target", help="JSON list of states"),
        opt("--forbidden", default="[]"))
    cmd(ch, "return-time", h_return_time, mat)
    cmd(ch, "potential", h_potential, mat)
    cmd(ch, "simulate", h_simulate, mat, opt("--start"), intopt("--steps"), seeded=True)
    cmd(ch, "zd", h_zd, intopt("--d"), opt("--checkpoints", type=int, nargs="+",
                                          default=[10, 100, 1000, 10_000]))
    cmd(ch, "ehrenfest", h_ehrenfest, intopt("--k"))

    mc = group("mc", "Monte Carlo experiments")
    cmd(mc, "lln", h_lln, dist, intopt("--n"), seeded=True)
    cmd(mc, "clt", h_clt, dist, intopt("--n"), intopt("--replicas"),
        opt("--ks-tol", dest="ks_tol", type=float, default=None), seeded=True)
    cmd(mc, "gc", h_gc, dist, intopt("--n"), seeded=True)
    cmd(mc, "bc", h_bc, intopt("--n-max", dest="n_max"), seeded=True)
    cmd(mc, "series", h_series, opt("--kind", choices=sorted(monte_carlo.SEQUENCES)),
        opt("--params", help='JSON, e.g. {"alpha": 1}'), intopt("--K"),
        intopt("--seeds", default=20), seeded=True)
    cmd(mc, "three-series", h_three_series,
        opt("--family", choices=("rademacher_scale", "exponential_scale")),
        opt("--alpha", type=float), opt("--k", type=float))
    cmd(mc, "mart-clt", h_mart_clt, intopt("--n"), intopt("--replicas"),
        opt("--rule", choices=("sign", "identity"), default="sign"), seeded=True)
    return parser


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        doc = encode(args.handler(args))
    except UsageError as exc:
        parser.print_usage(stderr)
        stderr.write(f"stochlab: error: {exc}\n")
        return 2
    except (StochLabError, ValueError, KeyError, TypeError) as exc:
        code = exc.code if isinstance(exc, StochLabError) else type(exc).__name__
        stderr.write(json.dumps({"error": code, "message": str(exc)}, sort_keys=True) + "\n")
        return 1
    text = render(doc, args.format)
    if args.out:
        Path(args.out).write_text(text)
    else:
        stdout.write(text)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
