"""Command line entry point: verification suites, regime bounds and oracle comparisons.

Exit codes: 0 when no check fails, 1 when some check fails, 2 for
configuration or usage errors.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from . import __version__
from .errors import ClusterBoundsError, ConfigError, InvalidNError, UnknownSuiteError
from .model import Model, Volume, load_model, validate

SCHEMA_VERSION = 1
PASS, FAIL, SKIPPED, NOT_CERTIFIED = "PASS", "FAIL", "SKIPPED", "NOT_CERTIFIED"
SUITE_NAMES = ("combinatorics", "bkar", "propagator", "single-site", "gaussian", "polymer",
               "small-lambda", "oracle")
REGIME_NAMES = ("large-mass", "small-coupling", "large-lambda", "small-lambda")


@dataclass
class Check:
    id: str
    status: str
    lhs: float | None = None
    rhs: float | None = None
    margin: float | None = None
    runtime: float | None = None
    note: str = ""


@dataclass
class Context:
    model: Model
    seed: int
    samples: int
    size_cap: int


def default_model() -> Model:
    """Nearest-neighbour chain with J(0)=2, J(+-1)=0.5, lambda=1."""
    return Model.nearest_neighbor(1, 2.0, 0.5, 1.0)


def compare(check_id: str, lhs: float, rhs: float, *, certified: bool = True, slack: float = 0.0) -> Check:
    """PASS iff lhs <= rhs + slack; margin is (rhs - lhs) / |rhs|."""
    lhs, rhs = float(lhs), float(rhs)
    margin = (rhs - lhs) / abs(rhs) if rhs not in (0.0, math.inf) else (math.inf if rhs == math.inf else rhs - lhs)
    if not certified:
        return Check(check_id, NOT_CERTIFIED, lhs, rhs, margin)
    return Check(check_id, PASS if lhs <= rhs + slack else FAIL, lhs, rhs, margin)


def equal(check_id: str, a, b) -> Check:
    return Check(check_id, PASS if a == b else FAIL, float(a), float(b), 0.0 if a == b else None)


# -- suites -------------------------------------------------------------------------

Task = tuple[str, Callable[[], list[Check]]]


def suite_combinatorics(ctx: Context) -> list[Task]:
    from .combinatorics import kappa, trees, ursell

    def kappas():
        out = []
        expected = {1: 1, 2: 4, 3: 288, 4: 82944}
        for k, v in expected.items():
            out.append(equal(f"kappa.closed.{k}", kappa.kappa_closed_form(k), v))
            out.append(equal(f"kappa.recurrence.{k}", kappa.kappa_recurrence(k), v))
            out.append(equal(f"kappa.bruteforce.{k}", kappa.kappa_bruteforce(k), v))
        return out

    def ident():
        bad = [k for k in range(1, 31) if not kappa.combident_check(k)]
        return [Check("kappa.identity.k<=30", PASS if not bad else FAIL, float(len(bad)), 0.0)]

    def urs():
        count, fails = ursell.ursell_equivalence_exhaustive(6)
        c2, f2 = ursell.ursell_reduction_check_abstract(5)
        return [Check("ursell.chromatic.n6", PASS if not fails else FAIL, float(fails), 0.0, note=f"{count} graphs"),
                Check("ursell.reduction.p5", PASS if not f2 else FAIL, float(f2), 0.0, note=f"{c2} cases")]

    def tree_sums():
        out = []
        for m in range(2, 8):
            lhs, rhs, ok = trees.sumtreedegree_check(m)
            out.append(compare(f"trees.degree_factorials.m{m}", lhs, rhs))
        for beta in (0.25, 0.5, 1.0, 2.0):
            for size in (1, 2, 3):
                for k in (1, 2, 3, 4):
                    lhs, rhs, ok = trees.suminpoly_check(size, k, beta)
                    out.append(compare(f"trees.in_polymer.b{beta}.r{size}.k{k}", lhs, rhs))
        return out

    return [("kappa", kappas), ("identity", ident), ("ursell", urs), ("trees", tree_sums)]


def suite_bkar(ctx: Context) -> list[Task]:
    from .combinatorics import bkar

    def exact():
        rng = np.random.default_rng(ctx.seed)
        worst = 0
        for i in range(20):
            n = int(rng.integers(2, 4))
            res = bkar.bkar_verify(bkar.random_polynomial(rng, n), n)
            worst = max(worst, abs(res))
        return [Check("bkar.forest_formula.residual", PASS if worst == 0 else FAIL, float(worst), 0.0)]

    def graph_tree():
        rng = np.random.default_rng(ctx.seed + 1)
        worst = 0.0
        for _ in range(10):
            n = int(rng.integers(2, 4))
            V = {e: complex(rng.uniform(0, 1.5), rng.uniform(-1, 1)) for e in bkar.all_pairs(n)}
            worst = max(worst, bkar.graph_tree_identity_verify(V, n))
        return [compare("bkar.graph_vs_tree.residual", worst, 1e-8)]

    def inequality():
        rng = np.random.default_rng(ctx.seed + 2)
        checks, fails = 0, 0
        while checks < 100:
            n = int(rng.integers(2, 5))
            V = {e: complex(rng.uniform(0, 1)) for e in bkar.all_pairs(n)}
            U = [float(rng.uniform(0, 2)) for _ in range(n)]
            if not bkar.is_stable(V, U, n):
                continue
            checks += 1
            fails += not bkar.tree_inequality_check(V, U, n)[2]
        return [Check("bkar.tree_inequality.failures", PASS if not fails else FAIL, float(fails), 0.0,
                      note=f"{checks} instances")]

    return [("exact", exact), ("graph_tree", graph_tree), ("inequality", inequality)]


def suite_propagator(ctx: Context) -> list[Task]:
    from . import propagator as pg

    def run():
        m = ctx.model
        out = []
        for shape in ((4,) * m.dimension, (6,) * m.dimension):
            vol = Volume.box(shape[: m.dimension]) if m.dimension <= 3 else Volume.box((2,) * m.dimension)
            tag = "x".join(map(str, shape))
            jmat = pg.build_j_matrix(m, vol)
            out.append(compare(f"propagator.{tag}.min_eig", m.j0 - m.j_neq - 1e-10, pg.min_eigenvalue(jmat)))
            C = pg.covariance_direct(jmat)
            resid = float(np.max(np.abs(C @ jmat - np.eye(len(vol)))))
            out.append(compare(f"propagator.{tag}.inverse_residual", resid, 1e-10))
            rep = pg.verify_decay(pg.make_covariance(m, vol))
            out.append(compare(f"propagator.{tag}.decay_ratio", rep.max_ratio, 1 + 1e-9))
            Cn, err = pg.covariance_neumann(m, vol, 40)
            out.append(compare(f"propagator.{tag}.neumann", float(np.max(np.abs(Cn - C))), err + 1e-12))
        return out

    return [("propagator", run)]


def suite_single_site(ctx: Context) -> list[Task]:
    from . import single_site as ss

    def grid():
        out = []
        params = ss.default_grid()
        m = ctx.model
        params.append(ss.SingleSiteParams(m.j0, m.j_neq, m.lam))
        for i, p in enumerate(params):
            worst = min(min(r.gaussian_rhs, r.quartic_rhs) / r.moment
                        for r in (ss.moment_bound_row(p, k) for k in range(13)))
            out.append(compare(f"single_site.moments.p{i:02d}", 1.0, worst, slack=-1e-12))
            out.append(compare(f"single_site.normalization.p{i:02d}", ss.birnbaum_lower_bound(p),
                               ss.normalization(p)))
        ok_half = all(ss.gamma_half_check(k) for k in range(41))
        ok_quarter = all(ss.gamma_quarter_check(k) for k in range(41))
        out.append(Check("single_site.gamma_half.m<=40", PASS if ok_half else FAIL))
        out.append(Check("single_site.gamma_quarter.m<=40", PASS if ok_quarter else FAIL))
        return out

    return [("grid", grid)]


def suite_gaussian(ctx: Context) -> list[Task]:
    from . import gaussian as gs
    from .propagator import make_covariance

    def run():
        m = ctx.model
        vol = Volume.box((2,) * m.dimension) if m.dimension <= 2 else Volume.box((2, 2, 1))
        cov = make_covariance(m, vol.__class__(vol.sites[:2]))
        C = cov.matrix
        out = []
        worst = 0.0
        for xs, ys in (([0], [1]), ([0, 0], [1, 1]), ([0, 1], [0, 1]), ([0, 0, 1], [0, 1, 1])):
            P = gs.WeightedFieldPolynomial.from_sources([0.0, 0.0], xs, ys)
            q = gs.gaussian_expectation_quadrature(C, P).value
            worst = max(worst, abs(q - gs.wick_moment(C, xs, ys)))
        out.append(compare("gaussian.quadrature_vs_wick", worst, 1e-10))
        P = gs.WeightedFieldPolynomial.from_sources([m.lam / 4] * 2, [0, 1], [0, 1])
        q = gs.gaussian_expectation_quadrature(C, P)
        mc = gs.gaussian_expectation_weighted(C, P, seed=ctx.seed, count=min(ctx.samples, 10 ** 6))
        out.append(compare("gaussian.weighted_mc_vs_quadrature", abs(q.value - mc.value),
                           3 * mc.stderr + q.stderr))
        worst = 0.0
        for zs, ws in (([0], [0]), ([0, 1], [0, 0]), ([0, 0, 1], [1, 1, 0])):
            lhs, rhs, ok = gs.local_factorial_check(C / cov.k0, zs, ws, cov.k1)
            worst = max(worst, lhs / rhs)
        out.append(compare("gaussian.local_factorials", worst, 1.0))
        return out

    return [("gaussian", run)]


def suite_polymer(ctx: Context) -> list[Task]:
    from . import polymer as pm

    def regimes():
        out = []
        for regime in pm.REGIMES:
            for n in (2, 4):
                rep = pm.theorem_rhs(regime, ctx.model, n)
                worst = max(c.value / c.threshold for c in rep.conditions)
                out.append(Check(f"polymer.{regime.lower()}.n{n}",
                                 PASS if rep.satisfied else NOT_CERTIFIED, worst, 1.0, 1.0 - worst,
                                 note=f"rhs={rep.rhs:.6e}"))
        return out

    def pinned():
        rng = np.random.default_rng(ctx.seed)
        vol = Volume.chain(min(3, ctx.size_cap))
        polys = pm.enumerate_polymers(vol, len(vol))
        worst = 0.0
        exps = [pm.PinnedExpansion.build(polys, 4, pin=z) for z in vol.sites]
        for _ in range(50):
            vals = rng.exponential(size=len(polys))
            vals /= pm.polymer_norm(dict(zip(polys, vals)))
            for e in exps:
                worst = max(worst, e.partial_sums(vals)[-1])
        return [compare("polymer.pinned_sum.max", worst, 1.0)]

    return [("regimes", regimes), ("pinned", pinned)]


def suite_small_lambda(ctx: Context) -> list[Task]:
    from . import smalllambda as sl

    def ledger():
        L = sl.constant_ledger(ctx.model)
        vals = {"K1": math.log(L.k1), "K2": L.log_k2, "K3": L.log_k3, "K4": math.log(L.k4),
                "K5": math.log(L.k5), "K6": math.log(L.k6)}
        return [compare(f"small_lambda.ledger.{k}_at_least_one", 0.0, v) for k, v in vals.items()]

    def identity():
        res = sl.partition_identity_check(ctx.model, seed=ctx.seed, samples=ctx.samples)
        return [compare("small_lambda.partition_identity.quadrature", res.residual_quadrature,
                        res.rhs_error + 1e-10),
                compare("small_lambda.partition_identity.mc", res.residual_mc,
                        3 * res.lhs_mc.stderr + res.rhs_error)]

    def derivative():
        scaled, _ = sl.rescale_to_unit_k0(ctx.model)
        lam = min(scaled.lam, 4.0)
        scaled = scaled.with_lambda(lam)
        vol = Volume.chain(2)
        x, y = (0,), (1,)
        out = []
        for R, src, M in (([x], [], 0), ([x], [], 1), ([x, y], [], 0), ([x, y], [(x, False), (y, True)], 1)):
            r = sl.single_polymer_derivative_bound_check(scaled, R, src, 1.0, M, vol)
            out.append(compare(f"small_lambda.derivative_bound.R{len(R)}.I{len(src)}.M{M}",
                               r.lhs - r.lhs_error, r.rhs))
        return out

    return [("ledger", ledger), ("identity", identity), ("derivative", derivative)]


def suite_oracle(ctx: Context) -> list[Task]:
    from . import oracle as oc
    from .propagator import build_j_matrix, covariance_direct

    vol = Volume.chain(2)
    x, y = (0,), (1,)

    def gaussian():
        m0 = ctx.model.with_lambda(0.0)
        C = covariance_direct(build_j_matrix(m0, vol))
        two = oc.cumulant(m0, vol, [(x, False), (y, True)])
        four = oc.cumulant(m0, vol, [(x, False), (x, True), (y, False), (y, True)])
        return [Check("oracle.gaussian.two_point", PASS if two.value == C[0, 1] else FAIL,
                      abs(two.value - C[0, 1]), 0.0),
                Check("oracle.gaussian.four_point", PASS if four.value == 0 else FAIL, abs(four.value), 0.0)]

    def agreement():
        out = []
        m = ctx.model
        if not oc.hopping_applicable(m, vol):
            return [Check("oracle.mc_vs_hopping", SKIPPED, note="hopping ratio >= 0.9")]
        lists = [[(x, False), (y, True)], [(x, False), (x, True)],
                 [(x, False), (x, True), (y, False), (y, True)], [(x, False), (x, False), (y, True), (y, True)]]
        hop = oc.cumulants(m, vol, lists, method=oc.HOPPING_SERIES)
        mc = oc.cumulants(m, vol, lists, method=oc.MC_REWEIGHT, seed=ctx.seed, samples=ctx.samples)
        for i, (h, s) in enumerate(zip(hop, mc)):
            diff = abs(complex(h.value) - complex(s.value))
            out.append(compare(f"oracle.mc_vs_hopping.{i}", diff, 3 * math.hypot(h.stderr, s.stderr)))
        return out

    def derivative():
        m = ctx.model
        if not oc.hopping_applicable(m, vol):
            return [Check("oracle.lambda_derivative", SKIPPED, note="hopping ratio >= 0.9")]
        src = [(x, False), (x, False), (y, False), (x, True), (y, True), (y, True)]
        out = []
        for k in (0, 1):
            r = oc.lambda_derivative_check(m, vol, src, k)
            out.append(compare(f"oracle.lambda_derivative.n6.k{k}", r.relative, 1e-5))
        return out

    return [("gaussian", gaussian), ("agreement", agreement), ("derivative", derivative)]


SUITES = {
    "combinatorics": suite_combinatorics,
    "bkar": suite_bkar,
    "propagator": suite_propagator,
    "single-site": suite_single_site,
    "gaussian": suite_gaussian,
    "polymer": suite_polymer,
    "small-lambda": suite_small_lambda,
    "oracle": suite_oracle,
}


def run_suite(name: str, ctx: Context, jobs: int = 1, timings: bool = False) -> list[Check]:
    names = SUITE_NAMES if name == "all" else (name,)
    tasks: list[Task] = []
    for nm in names:
        if nm not in SUITES:
            raise UnknownSuiteError(f"unknown suite {nm!r}", suite=nm)
        tasks.extend(SUITES[nm](ctx))

    def timed(task: Task) -> list[Check]:
        t0 = time.perf_counter()
        try:
            checks = task[1]()
        except ClusterBoundsError as exc:
            checks = [Check(f"{task[0]}.error", FAIL, note=f"{exc.code}: {exc}")]
        if timings:
            dt = time.perf_counter() - t0
            for c in checks:
                c.runtime = dt / len(checks)
        return checks

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(timed, tasks))
    else:
        results = [timed(t) for t in tasks]
    checks = [c for r in results for c in r]
    ids = [c.id for c in checks]
    if len(set(ids)) != len(ids):
        raise RuntimeError("duplicate check ids")
    return sorted(checks, key=lambda c: c.id)


# -- rendering -------------------------------------------------------------------------

def _fmt(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.6e}"
    return str(v)


def render_text(title: str, checks: list[Check]) -> str:
    cols = ["id", "status", "lhs", "rhs", "margin", "note"]
    if any(c.runtime is not None for c in checks):
        cols.insert(5, "runtime")
    rows = [[_fmt(getattr(c, k)) for k in cols] for c in checks]
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h) for i, h in enumerate(cols)]
    lines = [title, "  ".join(h.ljust(w) for h, w in zip(cols, widths)).rstrip()]
    lines += ["  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip() for r in rows]
    counts = {s: sum(c.status == s for c in checks) for s in (PASS, FAIL, SKIPPED, NOT_CERTIFIED)}
    lines.append(" ".join(f"{k}={v}" for k, v in counts.items()))
    return "\n".join(lines) + "\n"


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    return v


def render_structured(kind: str, name: str, checks: list[Check], extra: dict | None = None) -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "version": __version__,
        "kind": kind,
        "name": name,
        "checks": [{k: _jsonable(v) for k, v in asdict(c).items()} for c in checks],
        "summary": {s: sum(c.status == s for c in checks) for s in (PASS, FAIL, SKIPPED, NOT_CERTIFIED)},
    }
    if extra:
        doc.update(extra)
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


# -- commands ---------------------------------------------------------------------------

def _load(path: str | None, required: bool) -> Model:
    if path is None:
        if required:
            raise ConfigError("--model is required for this command")
        return default_model()
    model = load_model(path)
    problems = validate(model)
    if problems:
        raise ConfigError("invalid model: " + "; ".join(f"{p.code} {p.detail}" for p in problems))
    return model


def cmd_verify(args) -> tuple[str, list[Check], dict]:
    if args.suite != "all" and args.suite not in SUITES:
        raise UnknownSuiteError(f"unknown suite {args.suite!r}")
    ctx = Context(_load(args.model, False), args.seed, args.samples, args.size_cap)
    return f"verify {args.suite}", run_suite(args.suite, ctx, args.jobs, args.timings), {}


def cmd_bounds(args) -> tuple[str, list[Check], dict]:
    from . import polymer as pm
    from . import smalllambda as sl

    model = _load(args.model, True)
    n = args.n
    if n < 2 or n % 2:
        raise InvalidNError("n must be even and at least 2", n=n)
    checks = []
    if args.regime == "small-lambda":
        N = args.N if args.N is not None else max(1, n // 2 - 1)
        rep = sl.theorem45_rhs(model, max(n, 2 * (N + 1)), N)
        ledger = sl.constant_ledger(model)
        ok = rep.certified
        checks.append(Check("condition.lambda_le_threshold", PASS if ok else NOT_CERTIFIED,
                            model.lam, rep.lambda_threshold))
        checks.append(Check(f"rhs.theorem4.n{rep.n}.N{N}", PASS if ok else NOT_CERTIFIED, None, rep.rhs4,
                            note=f"log_rhs={rep.log_rhs4:.6f}"))
        checks.append(Check("rhs.theorem5", PASS if ok else NOT_CERTIFIED, None, rep.rhs5,
                            note=f"log_rhs={rep.log_rhs5:.6f}"))
        return f"bounds {args.regime}", checks, {"ledger": {k: _jsonable(v) for k, v in ledger.as_dict().items()}}
    regime = {"large-mass": pm.LARGE_MASS, "small-coupling": pm.SMALL_COUPLING,
              "large-lambda": pm.LARGE_LAMBDA}[args.regime]
    rep = pm.theorem_rhs(regime, model, n)
    for c in rep.conditions:
        checks.append(Check(f"condition.{c.name}", PASS if c.ok else NOT_CERTIFIED, c.value, c.threshold,
                            (c.threshold - c.value) / c.threshold))
    checks.append(Check(f"rhs.n{n}", PASS if rep.satisfied else NOT_CERTIFIED, None, rep.rhs,
                        note=f"gamma={rep.gamma:.6e}"))
    return f"bounds {args.regime}", checks, {}


def _parse_volume(spec: str, dim: int) -> Volume:
    try:
        shape = tuple(int(s) for s in spec.lower().split("x"))
    except ValueError as exc:
        raise ConfigError(f"bad volume spec {spec!r}") from exc
    if len(shape) == 1 and dim > 1:
        shape = shape + (1,) * (dim - 1)
    if len(shape) != dim or min(shape) < 1:
        raise ConfigError(f"volume {spec!r} does not match dimension {dim}")
    return Volume.box(shape)


def cmd_oracle(args) -> tuple[str, list[Check], dict]:
    from . import oracle as oc
    from . import polymer as pm
    from . import smalllambda as sl

    model = _load(args.model, True)
    if args.lam is not None:
        model = model.with_lambda(args.lam)
    n = args.n
    if n < 2 or n % 2:
        raise InvalidNError("n must be even and at least 2", n=n)
    vol = _parse_volume(args.volume, model.dimension)
    l1 = oc.l1_cluster_sum(model, vol, n, seed=args.seed, samples=args.samples)
    checks = [Check("oracle.l1_sum", PASS, l1.value, None, None, note=f"{l1.method} err={l1.error:.3e}")]
    slack = 3 * l1.error
    if model.lam > 0:
        for regime in pm.REGIMES:
            rep = pm.theorem_rhs(regime, model, n)
            checks.append(compare(f"bound.{regime.lower()}", l1.value, rep.rhs,
                                  certified=rep.satisfied, slack=slack))
        if n >= 4:
            N = n // 2 - 1
            rep = sl.theorem45_rhs(model, n, N)
            checks.append(compare(f"bound.small_lambda.N{N}", l1.value, rep.rhs4,
                                  certified=rep.certified, slack=slack))
        else:
            rep = sl.theorem45_rhs(model, 4, 1)
            diff = oc.twopoint_difference_check(model, vol, seed=args.seed, samples=args.samples)
            checks.append(compare("bound.two_point_difference", diff.value, rep.rhs5,
                                  certified=rep.certified, slack=3 * diff.error))
    return f"oracle n={n} volume={args.volume}", checks, {}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", help="model config (JSON); default: nearest-neighbour chain "
                                        "J(0)=2, J(+-1)=0.5, lambda=1 where allowed")
    common.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    common.add_argument("--samples", type=int, default=10 ** 6, help="Monte Carlo samples (default 1e6)")
    common.add_argument("--size-cap", type=int, default=3, help="largest volume / polymer size (default 3)")
    common.add_argument("--format", choices=("text", "structured"), default="text",
                        help="stdout format (default text)")
    common.add_argument("--sidecar", help="also write the structured report to this path")
    common.add_argument("--jobs", type=int, default=1, help="concurrent checks (default 1)")
    common.add_argument("--timings", action="store_true",
                        help="include runtimes (makes reports non-reproducible)")

    parser = argparse.ArgumentParser(prog="clusterbounds", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    v = sub.add_parser("verify", parents=[common], help="run verification suites")
    v.add_argument("suite", help="one of: " + ", ".join(SUITE_NAMES + ("all",)))
    b = sub.add_parser("bounds", parents=[common], help="regime conditions and theorem bounds")
    b.add_argument("regime", choices=REGIME_NAMES)
    b.add_argument("--n", type=int, default=2, help="number of fields (even, default 2)")
    b.add_argument("--N", type=int, default=None, help="lambda order for small-lambda (default n/2-1)")
    o = sub.add_parser("oracle", parents=[common], help="oracle l1 sums against theorem bounds")
    o.add_argument("--volume", default="2", help="box shape such as 3 or 2x1 (default 2)")
    o.add_argument("--n", type=int, default=2, help="number of fields (even, default 2)")
    o.add_argument("--lambda", dest="lam", type=float, default=None, help="override lambda")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = {"verify": cmd_verify, "bounds": cmd_bounds, "oracle": cmd_oracle}[args.command]
    try:
        title, checks, extra = handler(args)
    except (ConfigError, UnknownSuiteError, InvalidNError) as exc:
        print(f"error {exc.code}: {exc}", file=sys.stderr)
        return 2
    structured = render_structured(args.command, title, checks, extra)
    sys.stdout.write(structured if args.format == "structured" else render_text(title, checks))
    if args.sidecar:
        with open(args.sidecar, "w", encoding="utf-8") as fh:
            fh.write(structured)
    return 1 if any(c.status == FAIL for c in checks) else 0


if __name__ == "__main__":
    sys.exit(main())
