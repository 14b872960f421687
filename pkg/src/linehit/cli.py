"""Command-line entry point: ``linehit {continuum,hit,series,edge,lab} ...``."""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import continuum as cont
from .errors import LineHitError
from .report import fmt


def _floats(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t]


def _complexes(text: str) -> list[complex]:
    return [complex(t.strip().replace("i", "j")) for t in text.split(",") if t.strip()]


def _writer(out):
    return csv.writer(out, lineterminator="\n")


# --- continuum -------------------------------------------------------------------

def cmd_continuum(args, out) -> int:
    w = _writer(out)
    w.writerow(["kernel", "n", "x", "s", "side", "value"])
    xs = _complexes(args.x)
    ss = _floats(args.s)
    k = args.kernel
    for x in xs:
        for s in ss:
            side = args.side
            if k == "hminus":
                v, side = cont.h_minus(x.real, s), ""
            elif k == "hseg-ext":
                v, side = cont.h_segment_exterior(args.n - 0.5, x.real, s), ""
            elif k == "hseg-int":
                v, side = cont.h_segment_interior(args.n - 0.5, x.real, s, printed=args.printed), ""
            elif k == "slit":
                v = cont.slit_plane_kernel(x, s, side)
            elif k == "aniso":
                a, b, c = _floats(args.qmat)
                v = cont.anisotropic_kernel(cont.AnisotropicMap([[a, b], [b, c]]), x, s, side)
            else:  # q
                v, side = cont.q_continuum(args.n - 0.5, x.real, s), ""
            xr = fmt(x.real) if x.imag == 0 else f"{fmt(x.real)}{'+' if x.imag >= 0 else '-'}{fmt(abs(x.imag))}i"
            w.writerow([k, args.n, xr, fmt(s), side, fmt(float(v))])
    return 0


# --- hit -------------------------------------------------------------------------

def cmd_hit(args, out) -> int:
    from .montecarlo import McConfig, hit_segment_mc
    from .oracle import as_point, hit_segment
    from .walk_model import load_law

    law = load_law(args.walk)
    x = as_point(args.x)
    if args.method == "mc":
        cfg = McConfig(args.samples, seed=args.seed, step_cap=args.cap)
        dist = hit_segment_mc(law, args.n, x, cfg, radius=args.radius)
    else:
        dist = hit_segment(law, args.n, x, method=args.method)
    w = _writer(out)
    w.writerow(["s", "prob", "stderr", "deficit", "method"])
    for i, (s, p) in enumerate(zip(dist.sites, dist.probs)):
        se = "" if dist.stderr is None else fmt(dist.stderr[i])
        w.writerow([int(s), fmt(p), se, fmt(dist.deficit), dist.method])
    return 0


# --- series ----------------------------------------------------------------------

def cmd_series(args, out) -> int:
    from .oracle import hit_segment
    from .series import build_Q, bound_probe, eta_resolvent_check, reconstruct_segment_hit
    from .walk_model import load_law

    law = load_law(args.walk)
    n = args.n
    w = _writer(out)
    w.writerow(["probe", "n", "x", "y_or_s", "lhs", "rhs", "ratio"])
    status = 0
    if args.probe == "qqq":
        xs = [int(v) for v in _floats(args.x)] if args.x else [2 * n]
        ops = build_Q(law, n, args.D or max(64 * n, 4 * max(abs(v) for v in xs)))
        for x in xs:
            rec = reconstruct_segment_hit(law, n, x, ops=ops if x > 0 else None)
            ref = hit_segment(law, n, x)
            for s, a, b in zip(rec.sites, rec.probs, ref.probs):
                w.writerow(["qqq", n, x, int(s), fmt(a), fmt(b), fmt(a / b)])
            bad = np.abs(ref.probs - rec.probs).max() > max(2 * rec.deficit, 1e-3)
            if bad or (args.budget is not None and rec.deficit > args.budget):
                status = 1
            print(f"# x={x} trunc_err={rec.deficit:.6g}", file=sys.stderr)
    elif args.probe == "lala":
        chk = eta_resolvent_check(law, n, D=args.D)
        for i, x in enumerate(chk.xs):
            for j, y in enumerate(chk.ys):
                a, b = chk.lhs[i, j], chk.rhs[i, j]
                w.writerow(["lala", n, int(x), int(y), fmt(a), fmt(b), fmt(a / b if b else float("nan"))])
        budget = chk.budget if args.budget is None else args.budget
        print(f"# residual={chk.residual:.3e} budget={budget:.3e}", file=sys.stderr)
        status = 0 if chk.residual <= 3 * budget else 1
    else:
        rep = bound_probe(args.probe, law, n, D=args.D)
        out.write(rep.probe_csv().split("\n", 1)[1])
        print("# " + json.dumps(rep.summary), file=sys.stderr)
    return status


# --- edge ------------------------------------------------------------------------

def cmd_edge(args, out) -> int:
    from .edge import compute_mu, compute_nu
    from .walk_model import load_law

    law = load_law(args.walk)
    fn = compute_mu if args.fn == "mu" else compute_nu
    tab = fn(law, args.M, args.tol)
    defect = tab.extra["defect"]
    w = _writer(out)
    w.writerow(["j", "value", "residual"])
    for j, v in zip(tab.args, tab.values):
        r = fmt(defect[j]) if 0 <= j < defect.size else "nan"
        w.writerow([int(j), fmt(v), r])
    return 0


# --- lab -------------------------------------------------------------------------

def cmd_lab(args, out) -> int:
    from .errors import ConfigError
    from .lab import CLAIMS, bundled_config_path, load_config, run

    cfg = load_config(args.config or bundled_config_path())
    if args.claims is not None:
        cfg.claims = [c for c in args.claims.split(",") if c]
        bad = [c for c in cfg.claims if c not in CLAIMS]
        if bad:
            raise ConfigError(f"--claims: unknown entries {bad}; known: {list(CLAIMS)}")
    status, summary = run(cfg, args.out, jobs=args.jobs)
    json.dump(summary, out, indent=2, sort_keys=True)
    out.write("\n")
    return status


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="linehit", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    pc = sub.add_parser("continuum", help="evaluate Brownian hitting densities")
    pcs = pc.add_subparsers(dest="action", required=True)
    pe = pcs.add_parser("eval")
    pe.add_argument("--kernel", required=True, choices=["hminus", "hseg-ext", "hseg-int", "slit", "aniso", "q"])
    pe.add_argument("--n", type=int, default=1)
    pe.add_argument("--x", required=True, help="comma list; complex points as a+bi")
    pe.add_argument("--s", required=True, help="comma list (for q: the y argument)")
    pe.add_argument("--side", default=cont.ABOVE, choices=[cont.ABOVE, cont.BELOW])
    pe.add_argument("--qmat", default="1,0,1", help="s11,s12,s22 for --kernel aniso")
    pe.add_argument("--printed", action="store_true", help="interior density with n^2 in the numerator")
    pe.set_defaults(func=cmd_continuum)

    ph = sub.add_parser("hit", help="segment hitting distribution")
    ph.add_argument("--walk", default="srw")
    ph.add_argument("--n", type=int, required=True)
    ph.add_argument("--x", required=True)
    ph.add_argument("--method", default="pk", choices=["pk", "solve", "mc"])
    ph.add_argument("--samples", type=int, default=10**6)
    ph.add_argument("--seed", type=int, default=42)
    ph.add_argument("--cap", type=int, default=10**8)
    ph.add_argument("--radius", type=float, default=None,
                    help="complete walks leaving this disc with the exact law (mc only)")
    ph.set_defaults(func=cmd_hit)

    ps = sub.add_parser("series", help="excursion-operator identities and bound probes")
    ps.add_argument("--probe", required=True,
                    choices=["qqq", "lala", "I", "Iprime", "II", "III", "IV", "V", "VI", "lemma31", "pn"])
    ps.add_argument("--walk", default="srw")
    ps.add_argument("--n", type=int, required=True)
    ps.add_argument("--x", default=None, help="starts for qqq (comma list)")
    ps.add_argument("--D", type=int, default=None)
    ps.add_argument("--budget", type=float, default=None)
    ps.set_defaults(func=cmd_series)

    pd = sub.add_parser("edge", help="edge functions mu and nu")
    pd.add_argument("--fn", required=True, choices=["mu", "nu"])
    pd.add_argument("--walk", default="srw")
    pd.add_argument("--M", type=int, default=2000)
    pd.add_argument("--tol", type=float, default=1e-6)
    pd.set_defaults(func=cmd_edge)

    pl = sub.add_parser("lab", help="asymptotic verification suite")
    pls = pl.add_subparsers(dest="action", required=True)
    pr = pls.add_parser("run")
    pr.add_argument("--config", default=None, help="JSON config (default: bundled desk config)")
    pr.add_argument("--claims", default=None, help="comma list overriding the config")
    pr.add_argument("--out", default=None)
    pr.add_argument("--jobs", type=int, default=1)
    pr.set_defaults(func=cmd_lab)
    return p


def main(argv=None, out=None) -> int:
    args = build_parser().parse_args(argv)
    out = out or sys.stdout
    try:
        return args.func(args, out)
    except LineHitError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
