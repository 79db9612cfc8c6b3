"""Command-line front end.

    fphotelling solve --n 3 --lambda 4
    fphotelling threshold --n 3..10
    fphotelling verify --n 3 --lambda 4 --positions 0.25 0.5 0.75 --grid-oracle
    fphotelling simulate --n 3 --lambda 4 --positions 0.25 0.5 0.75 --samples 100000
    fphotelling efficiency --n 5 --metric pos --lambda lmin,lmax
    fphotelling curves --n 5 --alpha 0.1..10:50

Exit codes: 0 success or verified, 1 checked and failed, 2 usage error.
Tables go to stdout (or ``--out FILE``) as CSV with a header row; ``--json``
switches to a JSON document that embeds the run manifest.  With ``--out``
a ``FILE.manifest.json`` sidecar is written next to the output.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from datetime import datetime, timezone
from typing import Any, Sequence

import numpy as np

from . import __version__
from .canonical import (
    LN2,
    NoCanonicalPair,
    canonical_pair,
    canonical_profile,
    lambda_max,
    lambda_min,
    lambda_min_linear,
    lambda_of_alpha,
    nash_equilibrium,
    reparam_forward,
    threshold,
)
from .deviate import DEFAULT_TOL, verify_equilibrium
from .efficiency import (
    UnsupportedN,
    c_free,
    expected_disconnected_fraction,
    faultfree_ne_profile,
    optimal_dc_profile,
)
from .faultline import GameConfig, Profile, monte_carlo_payoffs
from .payoff import expected_payoffs

SEED_ENV = "FPHOTELLING_SEED"
DEFAULT_SAMPLES = 100_000
DEFAULT_SEED = 42
PROFILE_KINDS = ("canonical", "opt-dc", "faultfree")
METRICS = ("cfree", "pos", "dcfrac")
Z_LIMIT = 4.0


class UsageError(Exception):
    pass


def fmt(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return "nan" if math.isnan(v) else format(float(v), ".12g")
    return str(v)


def jnum(v: Any) -> Any:
    """JSON-safe value rounded to 12 significant digits."""
    if v is None:
        return None
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return None if math.isnan(v) else float(format(float(v), ".12g"))
    if isinstance(v, (list, tuple, np.ndarray)):
        return [jnum(x) for x in v]
    if isinstance(v, dict):
        return {k: jnum(x) for k, x in v.items()}
    return v


# --- argument parsing helpers -----------------------------------------------


def parse_int_range(text: str) -> list[int]:
    """``"3"``, ``"3,5,8"`` or ``"3..10"`` (inclusive)."""
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            lo, hi = int(a), int(b)
            if hi < lo:
                raise ValueError
            return list(range(lo, hi + 1))
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"bad integer range {text!r}") from None


def parse_lambda_spec(text: str, n: int, default_points: int = 20) -> list[float]:
    """Comma-separated values, ``a..b`` or ``a..b:k`` ranges, and the tokens ``lmin``/``lmax``."""
    out: list[float] = []
    for tok in (t.strip() for t in text.split(",")):
        if not tok:
            continue
        if tok == "lmin":
            if n < 3:
                raise UsageError("lmin is defined for n >= 3")
            out.append(lambda_min(n))
        elif tok == "lmax":
            if n < 2:
                raise UsageError("lmax is defined for n >= 2")
            out.append(lambda_max(n))
        elif ".." in tok:
            rng, _, k = tok.partition(":")
            a, b = rng.split("..", 1)
            try:
                lo, hi = float(a), float(b)
                pts = int(k) if k else default_points
            except ValueError:
                raise UsageError(f"bad range {tok!r}") from None
            if pts < 1 or hi < lo:
                raise UsageError(f"bad range {tok!r}")
            out.extend(np.linspace(lo, hi, pts).tolist())
        else:
            try:
                out.append(float(tok))
            except ValueError:
                raise UsageError(f"bad lambda value {tok!r}") from None
    if not out:
        raise UsageError("empty lambda specification")
    if any(not (v > 0) or math.isinf(v) for v in out):
        raise UsageError("lambda values must be finite and > 0")
    return out


def _positions(args: argparse.Namespace) -> Profile:
    pos = args.positions
    if len(pos) != args.n:
        raise UsageError(f"expected {args.n} positions, got {len(pos)}")
    if any(not (0.0 <= p <= 1.0) for p in pos):
        raise UsageError("positions must lie in [0, 1]")
    return Profile(tuple(pos))


def _config(args: argparse.Namespace, allow_zero: bool = False) -> GameConfig:
    if args.n < 1:
        raise UsageError("--n must be >= 1")
    lam = args.lam
    if math.isnan(lam) or math.isinf(lam) or lam < 0 or (lam == 0 and not allow_zero):
        raise UsageError("--lambda must be finite and > 0")
    return GameConfig(args.n, lam)


# --- output -------------------------------------------------------------------


def manifest(command: str, params: dict[str, Any], timestamp: bool = False) -> dict[str, Any]:
    m = {"command": command, "params": jnum(params), "version": __version__}
    if timestamp:
        m["timestamp"] = datetime.now(timezone.utc).isoformat()
    return m


def csv_text(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def emit(args: argparse.Namespace, text: str, man: dict[str, Any]) -> None:
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
        with open(args.out + ".manifest.json", "w") as fh:
            json.dump({**man, "timestamp": datetime.now(timezone.utc).isoformat()}, fh, indent=2)
            fh.write("\n")
    else:
        sys.stdout.write(text)


def emit_json(args: argparse.Namespace, doc: dict[str, Any]) -> None:
    emit(args, json.dumps(doc, indent=2, sort_keys=True) + "\n", doc["manifest"])


# --- commands -------------------------------------------------------------------


def cmd_solve(args: argparse.Namespace) -> int:
    cfg = _config(args)
    eq = nash_equilibrium(cfg)
    diag: dict[str, Any] = {"H": None, "M": None, "alpha": None, "c": None, "lambda_min": None}
    if cfg.n >= 2 and cfg.lam > 2 * LN2:
        pair = canonical_pair(cfg)
        diag.update(H=pair.H, M=pair.M, alpha=pair.alpha, c=pair.c)
    if cfg.n >= 3:
        diag["lambda_min"] = lambda_min(cfg.n)
    params = {"n": cfg.n, "lambda": cfg.lam}
    man = manifest("solve", params)
    if args.json:
        emit_json(args, {
            "manifest": man,
            "n": cfg.n,
            "lambda": jnum(cfg.lam),
            "exists": eq is not None,
            "profile": jnum(list(eq)) if eq is not None else None,
            "diagnostics": jnum(diag),
        })
        return 0
    lines = [f"n={cfg.n} lambda={fmt(cfg.lam)}", f"exists={fmt(eq is not None)}"]
    lines.append("profile=" + (" ".join(fmt(p) for p in eq) if eq is not None else "NON-EXISTENT"))
    lines += [f"{k}={fmt(v)}" for k, v in diag.items()]
    emit(args, "\n".join(lines) + "\n", man)
    return 0


def cmd_threshold(args: argparse.Namespace) -> int:
    ns = parse_int_range(args.n)
    if any(n < 3 for n in ns):
        raise UsageError("threshold rows need n >= 3")
    th = threshold()
    header = ["n", "lambda_min_exact", "lambda_min_linear_approx", "alpha0", "beta0"]
    rows = [[n, th.lambda_min(n), lambda_min_linear(n), th.alpha0, th.beta0] for n in ns]
    man = manifest("threshold", {"n": ns})
    if args.json:
        emit_json(args, {"manifest": man, "columns": header, "rows": [jnum(r) for r in rows]})
    else:
        emit(args, csv_text(header, rows), man)
    return 0


def cmd_curves(args: argparse.Namespace) -> int:
    if args.n < 2:
        raise UsageError("--n must be >= 2")
    alphas = parse_lambda_spec(args.alpha, args.n, default_points=50)
    header = ["alpha", "c", "M", "H", "lambda"]
    rows = []
    for a in alphas:
        r = reparam_forward(a, args.n)
        rows.append([a, r.c, r.M, r.H, r.lam])
    man = manifest("curves", {"n": args.n, "alpha": alphas})
    if args.json:
        emit_json(args, {"manifest": man, "columns": header, "rows": [jnum(r) for r in rows]})
    else:
        emit(args, csv_text(header, rows), man)
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    cfg = _config(args, allow_zero=True)
    prof = _positions(args)
    check = verify_equilibrium(cfg, prof, tol=args.tol, grid_oracle=args.grid_oracle)
    header = ["player", "position", "current_payoff", "best_point", "best_payoff", "gain", "attained"]
    if args.grid_oracle:
        header += ["grid_best_point", "grid_gain"]
    rows = []
    for k, r in enumerate(check.reports):
        row = [r.player, prof[r.player], r.current_payoff, r.best_point, r.best_payoff, r.gain, r.attained]
        if args.grid_oracle:
            g = check.grid_reports[k]
            row += [g.best_point, g.gain]
        rows.append(row)
    ok = check.is_equilibrium and (check.grid_is_equilibrium is not False)
    params = {"n": cfg.n, "lambda": cfg.lam, "positions": list(prof), "tol": args.tol,
              "grid_oracle": args.grid_oracle}
    man = manifest("verify", params)
    if args.json:
        emit_json(args, {
            "manifest": man,
            "is_equilibrium": check.is_equilibrium,
            "grid_is_equilibrium": check.grid_is_equilibrium,
            "columns": header,
            "rows": [jnum(r) for r in rows],
        })
    else:
        text = csv_text(header, rows)
        verdict = f"# equilibrium={fmt(check.is_equilibrium)}"
        if args.grid_oracle:
            verdict += f" grid_equilibrium={fmt(check.grid_is_equilibrium)}"
        emit(args, text, man)
        print(verdict, file=sys.stderr)
    return 0 if ok else 1


def cmd_simulate(args: argparse.Namespace) -> int:
    cfg = _config(args)
    prof = _positions(args)
    if args.samples < 1:
        raise UsageError("--samples must be >= 1")
    closed = expected_payoffs(cfg, prof)
    est = monte_carlo_payoffs(prof, cfg.lam, args.samples, args.seed)
    header = ["player", "position", "closed_form", "mc_mean", "mc_stderr", "z_score"]
    rows = []
    worst = 0.0
    for i in range(cfg.n):
        se = None if est.stderr is None else float(est.stderr[i])
        z = None
        if se is not None and se > 0:
            z = (float(est.mean[i]) - float(closed[i])) / se
            worst = max(worst, abs(z))
        rows.append([i, prof[i], float(closed[i]), float(est.mean[i]), se, z])
    params = {"n": cfg.n, "lambda": cfg.lam, "positions": list(prof), "samples": args.samples,
              "seed": args.seed}
    man = manifest("simulate", params)
    if args.json:
        emit_json(args, {"manifest": man, "columns": header, "rows": [jnum(r) for r in rows],
                         "max_abs_z": jnum(worst)})
    else:
        emit(args, csv_text(header, rows), man)
    return 1 if worst > Z_LIMIT else 0


def _profile_for(kind: str, cfg: GameConfig) -> Profile | None:
    try:
        if kind == "canonical":
            if cfg.n == 1:
                return Profile((0.5,))
            return canonical_profile(cfg)
        if kind == "opt-dc":
            return optimal_dc_profile(cfg)
        return faultfree_ne_profile(cfg.n, cfg.lam)
    except (NoCanonicalPair, UnsupportedN):
        return None


def cmd_efficiency(args: argparse.Namespace) -> int:
    if args.n < 1:
        raise UsageError("--n must be >= 1")
    spec = ",".join(x for x in (args.lam_spec, args.lambda_points) if x)
    if not spec:
        raise UsageError("give --lambda and/or --lambda-points")
    lams = parse_lambda_spec(spec, args.n, args.points)
    kinds = [k.strip() for k in args.profiles.split(",") if k.strip()]
    bad = [k for k in kinds if k not in PROFILE_KINDS]
    if bad or not kinds:
        raise UsageError(f"unknown profile kind(s) {bad}; choose from {PROFILE_KINDS}")
    mc = args.mode == "monte-carlo"
    header = ["n", "lambda", "profile", "metric", "value", "stderr"]
    rows = []
    opt_cost = 1.0 / (4 * args.n)
    for lam in lams:
        cfg = GameConfig(args.n, lam)
        for kind in kinds:
            prof = _profile_for(kind, cfg)
            value = se = None
            if prof is not None:
                if args.metric == "cfree":
                    value = c_free(prof)
                elif args.metric == "pos":
                    value = c_free(prof) / opt_cost
                else:
                    est = expected_disconnected_fraction(
                        cfg, prof, "monte-carlo" if mc else "closed-form", args.samples, args.seed
                    )
                    value, se = est.value, est.stderr
            rows.append([args.n, lam, kind, args.metric, value, se])
    params = {"n": args.n, "lambda": lams, "profiles": kinds, "metric": args.metric,
              "mode": args.mode, "samples": args.samples if mc else None,
              "seed": args.seed if mc else None}
    man = manifest("efficiency", params)
    if args.json:
        emit_json(args, {"manifest": man, "columns": header, "rows": [jnum(r) for r in rows]})
    else:
        emit(args, csv_text(header, rows), man)
    return 0


def _default_seed() -> int:
    env = os.environ.get(SEED_ENV)
    if env is None:
        return DEFAULT_SEED
    try:
        return int(env)
    except ValueError:
        return DEFAULT_SEED


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fphotelling", description="Fault-prone Hotelling game toolkit.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--json", action="store_true", help="emit JSON instead of CSV/text")
        sp.add_argument("--out", metavar="FILE", help="write output to FILE plus FILE.manifest.json")

    sp = sub.add_parser("solve", help="equilibrium profile and diagnostics")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--lambda", dest="lam", type=float, required=True)
    common(sp)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("threshold", help="lambda_min(n) table")
    sp.add_argument("--n", required=True, help="n, list or range a..b")
    common(sp)
    sp.set_defaults(func=cmd_threshold)

    sp = sub.add_parser("curves", help="parametric (alpha -> c, M, H, lambda) curves")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--alpha", default="0.05..10:50", help="alpha values or range a..b[:k]")
    common(sp)
    sp.set_defaults(func=cmd_curves)

    sp = sub.add_parser("verify", help="check a profile for improving moves")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--lambda", dest="lam", type=float, required=True)
    sp.add_argument("--positions", type=float, nargs="+", required=True)
    sp.add_argument("--tol", type=float, default=DEFAULT_TOL)
    sp.add_argument("--grid-oracle", action="store_true")
    common(sp)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("simulate", help="Monte Carlo payoffs versus closed form")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--lambda", dest="lam", type=float, required=True)
    sp.add_argument("--positions", type=float, nargs="+", required=True)
    sp.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    sp.add_argument("--seed", type=int, default=_default_seed())
    common(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("efficiency", help="cost metrics over a range of lambda")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--lambda", dest="lam_spec", help="values, a..b[:k] ranges, lmin, lmax")
    sp.add_argument("--lambda-points", help="extra symbolic points, e.g. lmin,lmax")
    sp.add_argument("--points", type=int, default=20, help="points per a..b range")
    sp.add_argument("--profiles", default="canonical")
    sp.add_argument("--metric", choices=METRICS, default="cfree")
    sp.add_argument("--mode", choices=("closed-form", "monte-carlo"), default="closed-form")
    sp.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    sp.add_argument("--seed", type=int, default=_default_seed())
    common(sp)
    sp.set_defaults(func=cmd_efficiency)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "tol", 1.0) <= 0:
        parser.error("--tol must be > 0")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    return 2  # pragma: no cover


if __name__ == "__main__":
    sys.exit(main())
