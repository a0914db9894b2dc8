"""Experiment driver: verification suites, exponent tables, reductions, sweeps.

Subcommands:
  verify     run a named invariant suite, one pass/fail line per check
  exponents  tabulate numeric and closed-form tail exponents for a pair
  reduce     run the graph-to-submatrix reduction on a dump or fresh sample
  sweep      phase-diagram sweep over (alpha, beta) cells, CSV out

Every output row carries the seed and parameters needed to reproduce it in
isolation.  Asymptotic "much less than" comparisons are decided with an
explicit polylog slack factor (default log^3 n) recorded in the output.
"""

import argparse
import enum
import math
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy.optimize import brentq

from subred import clone, detect, kernel, oracle, pairs, reduction, sampler
from subred.pairs import (
    UNDER_P,
    UNDER_Q,
    BernoulliPair,
    ExponentQuery,
    GaussianPair,
    chernoff_exponent,
    pair_from_config,
    uc_membership,
)

__all__ = ["RegimeLabel", "regime_classify", "build_sweep_pair", "main"]


class RegimeLabel(enum.Enum):
    IMPOSSIBLE_UC_C = "impossible_uc_c"
    HARD_UC_A = "hard_uc_a"
    POLY_UC_B = "poly_uc_b"


def default_slack(n):
    return math.log(n) ** 3


def regime_classify(n, k, pair, slack=None, check_classes=True):
    """Place (n, k, pair) in the three-way phase diagram.

    Returns (label, boundary_flag); cells within the slack factor of a
    boundary carry the adjacent region's label and boundary_flag=True.
    """
    if slack is None:
        slack = default_slack(n)
    if check_classes:
        for cls in ("A", "B", "C"):
            rep = uc_membership(pair, cls, n)
            if not rep.satisfied:
                warnings.warn(
                    f"pair fails the finite-n class-{cls} check "
                    f"(witness {rep.witness:.3g}); regime label may not apply",
                    stacklevel=2)
    skl = pair.skl
    t_imp = min(1.0 / k, n * n / float(k) ** 4)
    t_easy = min(n * n / float(k) ** 4, 1.0)
    if skl * slack <= t_imp:
        return RegimeLabel.IMPOSSIBLE_UC_C, False
    if skl >= t_easy * slack:
        return RegimeLabel.POLY_UC_B, False
    if skl >= t_imp * slack and skl * slack <= t_easy:
        return RegimeLabel.HARD_UC_A, False
    if skl < t_imp:
        return RegimeLabel.IMPOSSIBLE_UC_C, True
    if skl > t_easy:
        return RegimeLabel.POLY_UC_B, True
    return RegimeLabel.HARD_UC_A, True


# ---------------------------------------------------------------------------
# sweep families


def _bernoulli_skl(p, q):
    return (p - q) * math.log(p * (1.0 - q) / (q * (1.0 - p)))


def build_sweep_pair(family, n, alpha, sp_ratio=2.0, gp_q_exponent_ratio=0.5):
    """Pair with symmetric KL divergence exactly n^(-alpha).

    D_bc shifts a unit Gaussian; D_sp solves Bern(c q, q) for q at fixed
    ratio c; D_gp fixes q = n^(-alpha * ratio) and solves the density gap,
    requiring the implied gap exponent to exceed the q exponent.
    """
    target = float(n) ** (-alpha)
    if family == "D_bc":
        return GaussianPair(mu=math.sqrt(target))
    if family == "D_sp":
        c = sp_ratio
        if c <= 1.0:
            raise ValueError("D_sp ratio must exceed 1")

        def f(q):
            return _bernoulli_skl(c * q, q) - target

        hi = 1.0 / c - 1e-12
        if f(hi) < 0.0:
            raise ValueError("target skl out of reach for D_sp")
        q = brentq(f, 1e-300, hi, xtol=1e-300, rtol=1e-14)
        return BernoulliPair(p_alt=c * q, p_null=q)
    if family == "D_gp":
        q = float(n) ** (-alpha * gp_q_exponent_ratio)
        if q >= 1.0:
            raise ValueError("D_gp needs n^(-alpha*ratio) < 1")

        def f(delta):
            return _bernoulli_skl(q + delta, q) - target

        hi = min(1.0 - q, q) - 1e-15
        if hi <= 0.0 or f(hi) < 0.0:
            raise ValueError(
                "target skl out of reach for D_gp under gap < q (gamma > alpha)")
        delta = brentq(f, 1e-300, hi, xtol=1e-300, rtol=1e-14)
        return BernoulliPair(p_alt=q + delta, p_null=q)
    raise ValueError(f"unknown family {family!r}")


SWEEP_HEADER = ("alpha,beta,regime,boundary_flag,skipped," + detect.CSV_HEADER)


def _sweep_cell(family, n, alpha, beta, trials, cell_seed, slack):
    k = math.ceil(n**beta)
    rows = []
    try:
        pair = build_sweep_pair(family, n, alpha)
    except ValueError:
        prefix = f"{alpha:.10g},{beta:.10g},,,"
        return [prefix + f"1,,{n},{k},,,,{trials},,,,,{cell_seed}"]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        label, boundary = regime_classify(n, k, pair, slack=slack)
    grid = pairs.PairGrid(d=n, pairs=pair)

    def null_sampler(rng):
        return sampler.sample_submatrix(n, None, grid, rng)

    def planted_sampler(rng):
        return sampler.sample_submatrix(n, k, grid, rng)

    detectors = [detect.SumTest(pair, n, k), detect.MaxTest(pair)]
    for det in detectors:
        est = detect.estimate_error(det, null_sampler, planted_sampler,
                                    trials, cell_seed)
        rows.append(
            f"{alpha:.10g},{beta:.10g},{label.value},{int(boundary)},0,"
            + detect.report_csv_row(det.name, n, k, pair, est))
    return rows


def cmd_sweep(args):
    alphas = [float(a) for a in args.alpha.split(",") if a]
    betas = [float(b) for b in args.beta.split(",") if b]
    if not alphas or not betas:
        raise SystemExit("alpha and beta grids must be nonempty")
    if any(not 0.0 < b < 1.0 for b in betas):
        raise SystemExit("beta values must lie in (0, 1)")
    if any(a <= 0.0 for a in alphas):
        raise SystemExit("alpha values must be positive")
    n = args.n
    if args.pow2:
        n = 2 ** round(math.log2(n))
    slack = args.slack if args.slack is not None else default_slack(n)
    jobs = []
    for ai, alpha in enumerate(alphas):
        for bi, beta in enumerate(betas):
            cell_seed = int(np.random.SeedSequence(
                (args.seed, ai, bi)).generate_state(1)[0])
            jobs.append((ai, bi, alpha, beta, cell_seed))
    results = {}
    with ThreadPoolExecutor(max_workers=args.jobs) as pool:
        futures = {
            pool.submit(_sweep_cell, args.family, n, alpha, beta,
                        args.trials, cell_seed, slack): (ai, bi)
            for ai, bi, alpha, beta, cell_seed in jobs}
        for fut, key in futures.items():
            results[key] = fut.result()
    lines = [SWEEP_HEADER, f"# n={n} family={args.family} seed={args.seed} "
                           f"trials={args.trials} slack={slack:.10g}"]
    for key in sorted(results):
        lines.extend(results[key])
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------------------
# reduce


def cmd_reduce(args):
    with open(args.config) as fh:
        cfg = reduction.reduction_config_from_text(fh.read())
    rng = sampler.derived_rng(args.seed, 0)
    if args.input:
        graph = sampler.load_sample(args.input)
        if not isinstance(graph, sampler.GraphSample):
            raise SystemExit("input dump must hold a graph")
    elif args.sample == "null":
        graph = sampler.sample_er(cfg.n, cfg.q, rng)
    elif args.sample == "planted":
        graph = sampler.sample_pds(cfg.n, cfg.k, cfg.p, cfg.q, rng)
    else:
        raise SystemExit("provide --input FILE or --sample {null,planted}")
    out = reduction.to_submatrix(graph, cfg, rng)
    sampler.dump_sample(out, args.out)
    delta = reduction.config_delta(cfg, method="exact")
    guarantee = reduction.tv_guarantee(cfg, delta)
    report = [
        f"dimension={out.d}",
        f"kernel_delta={delta.delta:.10g}",
        f"bound_null={guarantee.bound_null:.10g}",
        f"bound_planted={guarantee.bound_planted:.10g}",
        f"kernel_term={guarantee.kernel_term:.10g}",
        f"embed_term={guarantee.embed_term:.10g}",
        f"binom_terms={guarantee.binom_terms[0]:.10g},"
        f"{guarantee.binom_terms[1]:.10g}",
        f"seed={args.seed}",
    ]
    with open(args.out + ".report.txt", "w") as fh:
        fh.write("\n".join(report) + "\n")
    print("\n".join(report))
    return 0


# ---------------------------------------------------------------------------
# exponents table


def cmd_exponents(args):
    pair = pair_from_config(args.pair)
    lo = args.tau_min if args.tau_min is not None else -min(pair.kl_qp, 1.0)
    hi = args.tau_max if args.tau_max is not None else pair.kl_pq
    taus = np.linspace(lo, hi, args.points)
    lines = ["tau,e_p_numeric,e_p_closed,e_q_numeric,e_q_closed"]
    for tau in taus:
        row = [f"{tau:.10g}"]
        for side in (UNDER_P, UNDER_Q):
            q = ExponentQuery(side, float(tau))
            row.append(f"{chernoff_exponent(pair, q, method='numeric'):.10g}")
            row.append(f"{chernoff_exponent(pair, q, method='closed'):.10g}")
        lines.append(",".join(row))
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------------------
# verify suites


def _suite_exponents():
    checks = []
    rng = np.random.default_rng(7)
    grid = [GaussianPair(0.7), GaussianPair(0.2),
            BernoulliPair(0.6, 0.3), BernoulliPair(0.9, 0.1)]
    for pair in grid:
        worst_shift = 0.0
        for lam in np.linspace(-3.0, 3.0, 100):
            diff = abs(pair.log_mgf(UNDER_P, lam)
                       - pair.log_mgf(UNDER_Q, lam + 1.0))
            worst_shift = max(worst_shift, diff)
        checks.append((f"mgf-shift {pair}", worst_shift <= 1e-10,
                       f"max |psi_P(l) - psi_Q(l+1)| = {worst_shift:.3g}"))
        worst_leg = 0.0
        worst_closed = 0.0
        lo, hi = -pair.kl_qp, pair.kl_pq
        for _ in range(50):
            tau = lo + (hi - lo) * rng.random()
            ep_n = chernoff_exponent(pair, ExponentQuery(UNDER_P, tau),
                                     method="numeric")
            eq_n = chernoff_exponent(pair, ExponentQuery(UNDER_Q, tau),
                                     method="numeric")
            ep_c = chernoff_exponent(pair, ExponentQuery(UNDER_P, tau),
                                     method="closed")
            eq_c = chernoff_exponent(pair, ExponentQuery(UNDER_Q, tau),
                                     method="closed")
            worst_leg = max(worst_leg, abs(ep_c + tau - eq_c))
            worst_closed = max(worst_closed, abs(ep_n - ep_c), abs(eq_n - eq_c))
        checks.append((f"legendre-shift {pair}", worst_leg <= 1e-8,
                       f"max |E_P(t)+t-E_Q(t)| = {worst_leg:.3g}"))
        checks.append((f"legendre-numeric {pair}", worst_closed <= 1e-6,
                       f"max |numeric-closed| = {worst_closed:.3g}"))
        taus = np.linspace(lo, hi, 41)
        evals = [chernoff_exponent(pair, ExponentQuery(UNDER_Q, t))
                 for t in taus]
        second = np.diff(evals, 2)
        checks.append((f"convexity {pair}", second.min() >= -1e-8,
                       f"min second difference = {second.min():.3g}"))
        at_min = chernoff_exponent(pair, ExponentQuery(UNDER_Q, -pair.kl_qp))
        at_minp = chernoff_exponent(pair, ExponentQuery(UNDER_P, pair.kl_pq))
        checks.append((f"exponent-minima {pair}",
                       at_min <= 1e-8 and at_minp <= 1e-8,
                       f"E_Q(-kl_qp)={at_min:.3g} E_P(kl_pq)={at_minp:.3g}"))
    return checks


def _suite_kernel():
    checks = []
    for p_src in (0.5, 0.75, 1.0):
        for q_src in (0.1, 0.25, 0.4):
            # the target's one-atom sits just outside the window, so the
            # exact tails (and the slack they certify) stay far above the
            # rounding floor of the analytic law
            target = BernoulliPair(1e-5, 1e-5 * (q_src / p_src) ** 2)
            for ell in (1, 2):
                spec = kernel.KernelSpec(p_src=p_src, q_src=q_src,
                                         targets=(target,) * ell,
                                         iterations=200)
                tp = kernel.tail_probs(spec)
                bound = kernel.delta_bound(spec, tp.tail_p, tp.tail_q)
                ok = True
                worst = 0.0
                for which in ("p", "q"):
                    law = kernel.exact_input_mixture_law(spec, which)
                    targ = kernel.target_product_law(spec, which)
                    tv = oracle.tv_exact(law, targ)
                    worst = max(worst, tv - bound.delta)
                    ok = ok and tv <= bound.delta
                checks.append(
                    (f"mixture-tv p={p_src} q={q_src} ell={ell}", ok,
                     f"max(tv - delta) = {worst:.3g}"))
    ident = kernel.KernelSpec(p_src=0.5, q_src=0.25,
                              targets=(BernoulliPair(0.5, 0.25),),
                              iterations=64)
    law1 = kernel.exact_output_law(ident, 1).as_dict()
    fallback = (1.0 - ident.q_src * (ident.p_src - ident.q_src)
                / (ident.p_src * (1.0 - ident.q_src))) ** ident.iterations
    ok = abs(law1.get((1,), 0.0) - (1.0 - fallback)) <= 1e-12
    checks.append(("identity-case accepted law", ok,
                   f"P[output=1 | B=1] = {law1.get((1,), 0.0):.12g}"))
    return checks


def _suite_clone():
    checks = []
    cases = [(2, 0.8, 0.2, 0.8, 0.6), (2, 1.0, 0.25, 1.0, 0.5),
             (2, 0.9, 0.1, 0.9, 0.7), (1, 0.7, 0.3, 0.7, 0.3),
             (3, 1.0, 0.512, 1.0, 0.8)]
    for t, p, q, big_p, big_q in cases:
        try:
            channel = clone.make_channel(t, p, q, big_p, big_q)
            ws = np.arange(t + 1)
            prod_p = big_p**ws * (1 - big_p) ** (t - ws)
            prod_q = big_q**ws * (1 - big_q) ** (t - ws)
            err = max(
                np.abs((1 - p) * channel.r0_vec + p * channel.r1_vec
                       - prod_p).max(),
                np.abs((1 - q) * channel.r0_vec + q * channel.r1_vec
                       - prod_q).max())
            checks.append((f"mixing t={t} p={p} q={q}", err <= 1e-12,
                           f"max identity error = {err:.3g}"))
        except (ValueError, AssertionError) as exc:
            checks.append((f"mixing t={t} p={p} q={q}", False, str(exc)))
    return checks


def _suite_diagonal():
    checks = []
    cases = [(6, 1, 24, 0.9, 0.6), (8, 2, 40, 0.8, 0.5), (10, 2, 48, 1.0, 0.5),
             (12, 2, 64, 0.95, 0.9), (6, 2, 36, 0.7, 0.35)]
    for n, k, cap_n, big_p, big_q in cases:
        eps = cap_n / n - big_p / big_q
        joint, total = oracle.diag_support_law(n, k, cap_n, big_p, big_q)
        null_target = oracle.FiniteLaw.from_dict(
            {m: pm for m, pm in enumerate(sampler.binomial_pmf(cap_n, big_q))
             if pm > 0})
        pk = sampler.binomial_pmf(k, big_p)
        pn = sampler.binomial_pmf(cap_n - k, big_q)
        joint_target = oracle.FiniteLaw.from_dict(
            {(a, m): pk[a] * pn[m] for a in range(k + 1)
             for m in range(cap_n - k + 1) if pk[a] * pn[m] > 0})
        tv_null = oracle.tv_exact(total, null_target)
        tv_joint = oracle.tv_exact(joint, joint_target)
        ok = (tv_null <= oracle.diag_bound(n, cap_n, big_q, eps)
              and tv_joint <= oracle.diag_planted_bound(n, k, cap_n, big_q, eps))
        checks.append((f"diag n={n} k={k} N={cap_n}", ok,
                       f"tv_null={tv_null:.3g} tv_joint={tv_joint:.3g}"))
    return checks


def _suite_it_bound():
    checks = []
    for p_alt, p_null in [(0.3, 0.2), (0.6, 0.3), (0.8, 0.5)]:
        pair = BernoulliPair(p_alt, p_null)
        exact = oracle.chi2_mixture_exact(3, 2, pair.chi2())
        brute = oracle.chi2_matrix_bruteforce(3, 2, pair)
        checks.append((f"mixture-oracle {pair}", abs(exact - brute) <= 1e-10,
                       f"|exact - brute| = {abs(exact - brute):.3g}"))
    for n in (10, 100, 10_000):
        total = oracle.hypergeometric_pmf(n, min(7, n // 2)).sum()
        checks.append((f"hypergeom-sum n={n}", abs(total - 1.0) <= 1e-12,
                       f"sum = {total:.15g}"))
    pair = BernoulliPair(0.6, 0.3)
    lhs = oracle.chi2_vector_bruteforce(8, 2, pair)
    rhs = oracle.vector_embedding_bound(8, 2, pair.chi2())
    checks.append(("vector-embedding (8,2)", lhs <= rhs,
                   f"lhs={lhs:.6g} rhs={rhs:.6g}"))
    return checks


_SUITES = {
    "exponents": _suite_exponents,
    "kernel": _suite_kernel,
    "clone": _suite_clone,
    "diagonal": _suite_diagonal,
    "it-bound": _suite_it_bound,
}


def cmd_verify(args):
    if args.suite not in _SUITES:
        raise SystemExit(
            f"unknown suite {args.suite!r}; choose from {sorted(_SUITES)}")
    failures = 0
    for name, ok, detail in _SUITES[args.suite]():
        print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
        failures += 0 if ok else 1
    print(f"{args.suite}: {failures} failure(s)")
    return 1 if failures else 0


# ---------------------------------------------------------------------------


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="subred",
        description="planted-submatrix reductions and detection experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p_verify = sub.add_parser("verify", help="run an invariant suite")
    p_verify.add_argument("suite", choices=sorted(_SUITES))
    p_verify.set_defaults(func=cmd_verify)

    p_sweep = sub.add_parser("sweep", help="phase-diagram sweep")
    p_sweep.add_argument("--family", required=True,
                         choices=["D_bc", "D_sp", "D_gp"])
    p_sweep.add_argument("--alpha", required=True,
                         help="comma-separated alpha grid")
    p_sweep.add_argument("--beta", required=True,
                         help="comma-separated beta grid")
    p_sweep.add_argument("--n", type=int, required=True)
    p_sweep.add_argument("--trials", type=int, default=100)
    p_sweep.add_argument("--seed", type=int, default=0)
    p_sweep.add_argument("--slack", type=float, default=None,
                         help="polylog slack factor (default log^3 n)")
    p_sweep.add_argument("--jobs", type=int, default=1)
    p_sweep.add_argument("--pow2", action="store_true",
                         help="round n to the nearest power of two")
    p_sweep.add_argument("--out", default=None)
    p_sweep.set_defaults(func=cmd_sweep)

    p_reduce = sub.add_parser("reduce", help="run the reduction")
    p_reduce.add_argument("--config", required=True)
    p_reduce.add_argument("--input", default=None,
                          help="graph dump to reduce")
    p_reduce.add_argument("--sample", choices=["null", "planted"],
                          default=None, help="sample the input instead")
    p_reduce.add_argument("--seed", type=int, default=0)
    p_reduce.add_argument("--out", required=True)
    p_reduce.set_defaults(func=cmd_reduce)

    p_exp = sub.add_parser("exponents", help="exponent table for a pair")
    p_exp.add_argument("--pair", required=True,
                       help="e.g. 'family=gaussian mu=0.5'")
    p_exp.add_argument("--tau-min", type=float, default=None)
    p_exp.add_argument("--tau-max", type=float, default=None)
    p_exp.add_argument("--points", type=int, default=9)
    p_exp.add_argument("--out", default=None)
    p_exp.set_defaults(func=cmd_exponents)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
