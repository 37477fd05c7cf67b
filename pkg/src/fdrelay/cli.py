"""Command-line interface.

Verbs: ``sweep`` (figure-family CSV), and the single-point reports
``beamform``, ``alpha``, ``outage``, ``throughput``. Output of the single
verbs is machine-readable ``key=value`` lines. All dBm flags are converted to
watts here, at the boundary; the library is SI-units only.
"""
from __future__ import annotations

import argparse
import sys

from .beamforming import (Scheme, SchemeInfeasibleError, end_to_end_sinr,
                          mrc_mrt_pair, rzf_pair, tzf_pair)
from .channel import draw_channel
from .config import (CONFIG_KEYS, config_from_key_values, parse_config_file)
from .montecarlo import estimate_outage, estimate_throughput
from .outage import OutageQuery, has_exact_outage, outage_exact
from .rng import RngStream
from .sdr import optimum_transmit
from .sweeps import DEFAULT_GRIDS, Engine, FigureFamily, SweepSpec, run_sweep
from .timesplit import (JointMethod, coefficients_for, joint_optimum,
                        optimal_alpha_mrc, optimal_alpha_rzf,
                        optimal_alpha_tzf)

_SCHEMES = {s.value: s for s in Scheme}
_FAMILIES = {f.value: f for f in FigureFamily}


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key = value config file")
    parser.add_argument("--seed", type=int, default=1)
    for key in CONFIG_KEYS:
        flag = "--" + key.replace("_", "-")
        parser.add_argument(flag, type=float, default=None, dest=key)


def _build_cfg(args):
    values = parse_config_file(args.config) if args.config else {}
    for key in CONFIG_KEYS:
        override = getattr(args, key, None)
        if override is not None:
            values[key] = override
    return config_from_key_values(values)


def _emit(pairs) -> None:
    for key, value in pairs:
        print(f"{key}={value}")


def _fmt(v: float) -> str:
    return format(float(v), ".10g")


def cmd_sweep(args) -> int:
    cfg = _build_cfg(args)
    family = _FAMILIES[args.family]
    schemes = tuple(_SCHEMES[s] for s in args.scheme) if args.scheme else \
        (Scheme.OPTIMUM, Scheme.TZF, Scheme.RZF, Scheme.MRC_MRT)
    grid = tuple(args.grid) if args.grid else DEFAULT_GRIDS[family]
    spec = SweepSpec(figure_family=family, grid=grid, schemes=schemes,
                     engine=Engine(args.engine), n_trials=args.trials,
                     seed=args.seed, out_path=args.out, alpha=args.alpha,
                     include_asymptotic=args.asymptotic, workers=args.workers)
    try:
        path = run_sweep(spec, cfg)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {path}")
    return 0


def cmd_beamform(args) -> int:
    cfg = _build_cfg(args)
    ch = draw_channel(cfg, RngStream(args.seed, args.draw))
    scheme = _SCHEMES[args.scheme]
    if scheme is Scheme.OPTIMUM:
        sol = optimum_transmit(ch, cfg, args.alpha)
        from .beamforming import optimum_receive
        w_t = sol.recovered_w_t
        w_r = optimum_receive(w_t, ch, cfg, args.alpha)
        pairs = [("scheme", scheme.value), ("rank_flag", sol.rank_flag),
                 ("t_star", _fmt(sol.t_star))]
    else:
        pair = {Scheme.TZF: lambda: tzf_pair(ch, cfg),
                Scheme.RZF: lambda: rzf_pair(ch, cfg),
                Scheme.MRC_MRT: lambda: mrc_mrt_pair(ch)}[scheme]()
        w_r, w_t = pair.w_r, pair.w_t
        pairs = [("scheme", scheme.value)]
    from .beamforming import BeamformerPair
    sinr = end_to_end_sinr(BeamformerPair(w_r=w_r, w_t=w_t, scheme=scheme),
                           ch, cfg, args.alpha)
    pairs += [("alpha", _fmt(args.alpha)),
              ("first_hop_sinr", _fmt(sinr.first_hop)),
              ("second_hop_snr", _fmt(sinr.second_hop)),
              ("end_to_end_sinr", _fmt(sinr.end_to_end)),
              ("w_r", " ".join(f"{c.real:.10g}{c.imag:+.10g}j" for c in w_r)),
              ("w_t", " ".join(f"{c.real:.10g}{c.imag:+.10g}j" for c in w_t))]
    _emit(pairs)
    return 0


def cmd_alpha(args) -> int:
    cfg = _build_cfg(args)
    ch = draw_channel(cfg, RngStream(args.seed, args.draw))
    scheme = _SCHEMES[args.scheme]
    if args.power_split == "opa":
        from .config import dbm_to_watts
        from .timesplit import optimize_power_split
        p_max = dbm_to_watts(args.p_max_dbm)
        res = optimize_power_split(ch, cfg, p_max=p_max, scheme=scheme)
        _emit([("scheme", scheme.value), ("alpha_star", _fmt(res.alpha)),
               ("p_e", _fmt(res.p_e)), ("p_i", _fmt(res.p_i)),
               ("rate", _fmt(res.rate)), ("provenance", "opa-grid-search")])
        return 0
    if scheme is Scheme.OPTIMUM:
        res = joint_optimum(ch, cfg, JointMethod(args.method))
        _emit([("scheme", scheme.value), ("alpha_star", _fmt(res.alpha)),
               ("rate", _fmt(res.rate)), ("provenance", "joint-" + args.method)])
        return 0
    co = coefficients_for(scheme, ch, cfg)
    res = {Scheme.TZF: optimal_alpha_tzf, Scheme.RZF: optimal_alpha_rzf,
           Scheme.MRC_MRT: optimal_alpha_mrc}[scheme](co)
    _emit([("scheme", scheme.value), ("alpha_star", _fmt(res.alpha_star)),
           ("rate", _fmt(res.rate_at_star)), ("branch", res.branch.value),
           ("provenance", "closed-form")])
    return 0


def cmd_outage(args) -> int:
    cfg = _build_cfg(args)
    scheme = _SCHEMES[args.scheme]
    gamma = cfg.gamma_th if args.gamma_th is None else args.gamma_th
    pairs = [("scheme", scheme.value), ("alpha", _fmt(args.alpha)),
             ("gamma_th", _fmt(gamma))]
    if args.engine in ("analytic", "both"):
        if has_exact_outage(scheme, cfg) or gamma == 0.0:
            q = OutageQuery(scheme=scheme, cfg=cfg, alpha=args.alpha, gamma_th=gamma)
            value = 0.0 if gamma == 0.0 else outage_exact(q)
            pairs.append(("outage_analytic", _fmt(value)))
        else:
            print(f"warning: no closed-form outage for {scheme.value} at "
                  f"m_r={cfg.m_r}, m_t={cfg.m_t}", file=sys.stderr)
    if args.engine in ("mc", "both"):
        est = estimate_outage(scheme, cfg, args.alpha, gamma, args.trials, args.seed)
        pairs += [("outage_mc", _fmt(est.mean)), ("ci95", _fmt(est.ci_halfwidth_95))]
    _emit(pairs)
    return 0


def cmd_throughput(args) -> int:
    cfg = _build_cfg(args)
    scheme = _SCHEMES[args.scheme]
    pairs = [("scheme", scheme.value), ("alpha", _fmt(args.alpha)),
             ("metric", args.metric)]
    if args.metric == "instantaneous":
        est = estimate_throughput(scheme, cfg, args.alpha, args.trials, args.seed)
    else:
        from .montecarlo import estimate_delay_throughput
        est = estimate_delay_throughput(scheme, cfg, args.alpha, args.trials, args.seed)
    pairs += [("value_mc", _fmt(est.mean)), ("ci95", _fmt(est.ci_halfwidth_95)),
              ("trials", str(est.n_trials))]
    _emit(pairs)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fdrelay",
        description="Wireless-powered full-duplex MIMO relay toolbox")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("sweep", help="figure-family CSV sweep")
    _add_common(p)
    p.add_argument("--family", required=True, choices=sorted(_FAMILIES))
    p.add_argument("--scheme", action="append", choices=sorted(_SCHEMES),
                   help="repeatable; default: all schemes")
    p.add_argument("--engine", default="both", choices=("analytic", "mc", "both"))
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--out", default="sweep.csv")
    p.add_argument("--alpha", type=float, default=0.5,
                   help="fixed time split for outage sweeps")
    p.add_argument("--grid", type=float, nargs="+", default=None)
    p.add_argument("--asymptotic", action="store_true",
                   help="add asymptotic rows to outage sweeps")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("beamform", help="beamformer pair + SINR on a seeded draw")
    _add_common(p)
    p.add_argument("--scheme", required=True, choices=sorted(_SCHEMES))
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--draw", type=int, default=0, help="trial index of the draw")
    p.set_defaults(fn=cmd_beamform)

    p = sub.add_parser("alpha", help="optimal time split on a seeded draw")
    _add_common(p)
    p.add_argument("--scheme", required=True, choices=sorted(_SCHEMES))
    p.add_argument("--draw", type=int, default=0)
    p.add_argument("--method", default="alternating",
                   choices=("alternating", "line-search"),
                   help="joint method for the optimum scheme")
    p.add_argument("--power-split", default="epa", choices=("epa", "opa"),
                   dest="power_split",
                   help="opa: grid-search the harvesting-phase power too")
    p.add_argument("--p-max-dbm", type=float, default=26.0, dest="p_max_dbm",
                   help="per-phase power cap for the opa search")
    p.set_defaults(fn=cmd_alpha)

    p = sub.add_parser("outage", help="outage probability at one operating point")
    _add_common(p)
    p.add_argument("--scheme", required=True, choices=sorted(_SCHEMES))
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--gamma-th", type=float, default=None, dest="gamma_th")
    p.add_argument("--engine", default="both", choices=("analytic", "mc", "both"))
    p.add_argument("--trials", type=int, default=100_000)
    p.set_defaults(fn=cmd_outage)

    p = sub.add_parser("throughput", help="instantaneous or delay-constrained mean")
    _add_common(p)
    p.add_argument("--scheme", required=True, choices=sorted(_SCHEMES))
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--metric", default="delay", choices=("instantaneous", "delay"))
    p.add_argument("--trials", type=int, default=100_000)
    p.set_defaults(fn=cmd_throughput)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (SchemeInfeasibleError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
