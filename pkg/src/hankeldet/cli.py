"""hankeldet: Hankel determinants of zeta values, their asymptotics and the lattice gas behind them.

Every subcommand writes one or more tables as CSV (default) or JSON to stdout
or ``--out``.  Arbitrary-precision values are written as decimal
significand/exponent strings and doubles with 17 significant digits, so equal
inputs give byte-identical output.  Exit status: 0 success, 1 computation
failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from decimal import Decimal, InvalidOperation
from typing import Callable, Sequence

from . import acceptance
from . import arithmetic as ar
from . import asymptotics as asy
from . import coulomb_gas as cg
from . import equilibrium as eq
from .hankel import (
    HankelSpec,
    hankel,
    hankel_sequence,
    hankel_via_dirichlet,
    mzv_display,
    mzv_expansion,
    ratio_sequences,
)
from .precision import BigReal, get_zeta_cache, make_context, set_zeta_cache, zeta_int

__all__ = ["build_parser", "main", "parse_grid", "run"]

logger = logging.getLogger(__name__)

Tables = dict[str, list[dict]]


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------------------
# formatting
# ---------------------------------------------------------------------------


def _fmt(value, for_json: bool = False):
    if isinstance(value, BigReal):
        return value.to_string()
    if isinstance(value, bool):
        return value if for_json else str(value).lower()
    if isinstance(value, float):
        if not math.isfinite(value):
            return str(value)
        # JSON keeps numbers (shortest round-trip repr); CSV gets a fixed 17-digit form
        return value if for_json else format(value, ".16e")
    return value


def render(tables: Tables, fmt: str) -> str:
    if fmt == "json":
        payload = {name: [{k: _fmt(v, True) for k, v in row.items()} for row in rows] for name, rows in tables.items()}
        if len(payload) == 1:
            payload = next(iter(payload.values()))
        return json.dumps(payload, indent=2) + "\n"
    buf = io.StringIO()
    for rows in tables.values():
        if not rows:
            continue
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _fmt(v) for k, v in row.items()})
    return buf.getvalue()


def parse_grid(text: str) -> list[float]:
    """``a:b:step`` -> [a, a+step, ..., b] (inclusive), built in decimal arithmetic."""
    try:
        a, b, step = (Decimal(part) for part in text.split(":"))
    except (ValueError, InvalidOperation):
        raise UsageError(f"--grid expects a:b:step, got {text!r}") from None
    if step <= 0 or b < a:
        raise UsageError(f"--grid needs step > 0 and b >= a, got {text!r}")
    count = int((b - a) / step) + 1
    if count > 10**6:
        raise UsageError("--grid has more than 10^6 points")
    return [float(a + i * step) for i in range(count)]


def _digits(args) -> int:
    if args.digits == "auto":
        return 30
    try:
        d = int(args.digits)
    except ValueError:
        raise UsageError(f"--digits expects an integer or 'auto', got {args.digits!r}") from None
    if d < 10:
        raise UsageError("--digits must be >= 10")
    return d


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_zeta(args) -> Tables:
    digits = max(_digits(args), 30) if args.digits != "auto" else 50
    ctx = make_context(digits)
    top = args.nmax if args.nmax is not None else args.n
    if args.n < 2 or top < args.n:
        raise UsageError("zeta needs 2 <= --n <= --nmax")
    return {"zeta": [{"s": s, "digits": digits, "value": zeta_int(s, ctx)} for s in range(args.n, top + 1)]}


def cmd_hankel(args) -> Tables:
    res = hankel(HankelSpec(ar.get_series(args.series), args.n, args.r), _digits(args))
    return {"hankel": [res.record()]}


def cmd_hseq(args) -> Tables:
    seq = hankel_sequence(ar.get_series(args.series), args.r, args.nmax, _digits(args))
    return {"hseq": [res.record() for res in seq]}


def cmd_ratios(args) -> Tables:
    rows = ratio_sequences(args.nmax, _digits(args))
    return {"ratios": [{"n": row.n, "R0": row.R0, "R1": row.R1} for row in rows]}


def cmd_fit(args) -> Tables:
    lo = args.n if args.n is not None else max(1, args.nmax - 15)
    rows = [row for row in ratio_sequences(args.nmax, _digits(args)) if row.n >= lo]
    out = []
    for name, var, attr in (("R0", "inv_2n_plus_1", "R0"), ("R1", "inv_2n", "R1")):
        fit = asy.fit_inverse_series([(row.n, getattr(row, attr)) for row in rows], var, 5)
        for rec in fit.records():
            out.append(
                {
                    "sequence": name,
                    "variable": var,
                    "n_min": fit.window[0],
                    "n_max": fit.window[1],
                    "k": rec["k"],
                    "coefficient": rec["coefficient"],
                    "residual_norm": fit.residual_norm,
                }
            )
    return {"fit": out}


def cmd_scaling(args) -> Tables:
    digits = _digits(args)
    h0 = hankel_sequence(ar.ZETA, 0, args.nmax + 1, digits)
    h1 = hankel_sequence(ar.ZETA, 1, args.nmax, digits)
    sc = asy.scaling_constants(h0, h1)
    rows = []
    for kind, seq, est in ((0, h0, sc.A0_estimate), (1, h1, sc.A1_estimate)):
        for n, a_n in asy.amplitudes(seq, kind):
            rows.append({"kind": kind, "n": n, "A_n": float(a_n), "extrapolated": False})
        rows.append({"kind": kind, "n": "inf", "A_n": est, "extrapolated": sc.extrapolated})
    summary = {
        "A0": sc.A0_estimate,
        "A1": sc.A1_estimate,
        "A1_over_A0": sc.ratio_A1_over_A0,
        "exp_9_8_over_sqrt6": math.exp(9 / 8) / math.sqrt(6),
    }
    return {"amplitudes": rows, "summary": [summary]}


def cmd_hfun(args) -> Tables:
    return {"hfun": [{"n": e.n, "m": e.m, "h": e.value} for e in ar.h_table(args.n, args.mmax)]}


def cmd_dirichlet(args) -> Tables:
    digits = _digits(args)
    spec = HankelSpec(ar.get_series(args.series), args.n, args.r)
    ctx = make_context(max(digits, 30))
    partial, tail = hankel_via_dirichlet(spec, args.mmax, ctx)
    det = hankel(spec, digits).value
    gap = abs(float(det.value - partial.value))
    return {
        "dirichlet": [
            {
                "series": spec.series.name,
                "n": spec.n,
                "r": spec.r,
                "M": args.mmax,
                "partial": partial,
                "tail_bound": tail,
                "determinant": det,
                "inside": gap <= float(tail.value),
            }
        ]
    }


def cmd_mzv(args) -> Tables:
    det = float(hankel(HankelSpec(ar.ZETA, args.n, 0), 30).value)
    rows = []
    for label, comp in (
        ("symmetrized", mzv_expansion(args.n)),
        ("display_smallest_first", mzv_display(args.n, "smallest_first")),
        ("display_largest_first", mzv_display(args.n, "largest_first")),
    ):
        value, tail = comp.evaluate()
        rows.append(
            {
                "expansion": label,
                "n": args.n,
                "terms": len(comp.terms),
                "value": value,
                "tail": tail,
                "determinant": det,
                "deviation": value - det,
            }
        )
    return {"mzv": rows}


def cmd_selberg(args) -> Tables:
    ctx = make_context(max(_digits(args), 30))
    top = args.nmax if args.nmax is not None else args.n
    rows = []
    for n in range(args.n, top + 1):
        exact = asy.selberg_exact_log(n, ctx)
        asym = asy.selberg_asymptotic_log(n)
        rows.append(
            {
                "n": n,
                "log_value": exact,
                "barnes_log_value": asy.selberg_barnes_log(n, ctx),
                "asymptotic": asym,
                "difference": float(exact.value) - asym,
            }
        )
    return {"selberg": rows}


def cmd_density(args) -> Tables:
    return {"density": eq.density_table(parse_grid(args.grid))}


def cmd_potential(args) -> Tables:
    rows = []
    for x in parse_grid(args.grid):
        if x < 0:
            raise UsageError("potential grid must be nonnegative")
        closed = eq.log_potential_rho(x)
        quad, err = eq.log_potential_quadrature(eq.RHO, x)
        rows.append({"x": x, "closed_form": closed, "quadrature": quad, "error_estimate": err, "difference": closed - quad})
    return {"potential": rows}


def cmd_gas(args) -> Tables:
    c = cg.optimize(args.n, args.seed, args.budget)
    return {
        "configuration": [{"i": i, "m_i": m} for i, m in enumerate(c.m, start=1)],
        "summary": [{"n": args.n, "seed": args.seed, "phi": c.phi, "phi_predicted": cg.phi_predicted(args.n)}],
    }


def cmd_plancherel(args) -> Tables:
    res = cg.plancherel_Z(args.n, args.mmax)
    return {"plancherel": [{"n": res.n, "m_max": res.m_max, "Z": res.Z, "error_estimate": res.error_estimate}]}


def cmd_verify(args) -> Tables:
    results = acceptance.run_criteria(args.level)
    return {
        "verify": [
            {
                "criterion": r.number,
                "title": r.title,
                "passed": r.passed,
                "measured": r.measured,
                "expected": r.expected,
            }
            for r in results
        ]
    }


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return v


def _nonnegative(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer >= 0, got {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected an integer >= 0, got {text!r}")
    return v


_COMMANDS: dict[str, tuple[Callable, str, tuple[str, ...]]] = {
    "zeta": (cmd_zeta, "zeta(s) at integer arguments", ("n", "nmax", "digits")),
    "hankel": (cmd_hankel, "one certified Hankel determinant", ("series", "n", "r", "digits")),
    "hseq": (cmd_hseq, "H_1..H_nmax from one factorization", ("series", "r", "nmax", "digits")),
    "ratios": (cmd_ratios, "the ratio sequences R0 and R1", ("nmax", "digits")),
    "fit": (cmd_fit, "inverse-power fits of R0 and R1", ("n", "nmax", "digits")),
    "scaling": (cmd_scaling, "extrapolated scaling amplitudes", ("nmax", "digits")),
    "hfun": (cmd_hfun, "table of h_n(m)", ("n", "mmax")),
    "dirichlet": (cmd_dirichlet, "Dirichlet partial sum with tail bound", ("series", "n", "r", "mmax", "digits")),
    "mzv": (cmd_mzv, "multiple zeta value expansions of H_n", ("n",)),
    "selberg": (cmd_selberg, "log Selberg integral S_n(1,1,1)", ("n", "nmax", "digits")),
    "density": (cmd_density, "equilibrium densities on a grid", ("grid",)),
    "potential": (cmd_potential, "log potential of rho, closed form vs quadrature", ("grid",)),
    "gas": (cmd_gas, "optimized lattice configuration", ("n", "seed", "budget")),
    "plancherel": (cmd_plancherel, "truncated Plancherel sum Z_n", ("n", "mmax")),
    "verify": (cmd_verify, "run the acceptance criteria", ()),
}

_DEFAULTS = {
    "zeta": {"n": 2},
    "hankel": {"n": 2},
    "hseq": {"nmax": 10},
    "ratios": {"nmax": 35},
    "fit": {"nmax": 35},
    "scaling": {"nmax": 35},
    "hfun": {"n": 2, "mmax": 100},
    "dirichlet": {"n": 2, "mmax": 2000},
    "mzv": {"n": 2},
    "selberg": {"n": 1},
    "density": {"grid": "0:3:0.01"},
    "potential": {"grid": "0:3:0.01"},
    "gas": {"n": 20, "budget": 100000},
    "plancherel": {"n": 1, "mmax": 40},
}


def _add_flag(p: argparse.ArgumentParser, name: str, default) -> None:
    if name == "series":
        p.add_argument("--series", choices=["zeta", "moebius"], default="zeta")
    elif name == "n":
        p.add_argument("--n", type=_positive, default=default)
    elif name == "nmax":
        p.add_argument("--nmax", type=_positive, default=default)
    elif name == "r":
        p.add_argument("--r", type=_nonnegative, default=0)
    elif name == "digits":
        p.add_argument("--digits", default="auto", metavar="{N|auto}")
    elif name == "mmax":
        p.add_argument("--mmax", type=_positive, default=default)
    elif name == "grid":
        p.add_argument("--grid", default=default, metavar="a:b:step")
    elif name == "seed":
        p.add_argument("--seed", type=int, default=0)
    elif name == "budget":
        p.add_argument("--budget", type=_nonnegative, default=default)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hankeldet", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    for name, (_, help_text, flags) in _COMMANDS.items():
        p = sub.add_parser(name, help=help_text, description=help_text)
        for flag in flags:
            _add_flag(p, flag, _DEFAULTS.get(name, {}).get(flag))
        if name == "verify":
            p.add_argument("level", nargs="?", choices=["quick", "full"], default="quick")
        p.add_argument("--out", metavar="PATH")
        p.add_argument("--cache", metavar="PATH", help="zeta cache file (default: $HANKEL_CACHE)")
        p.add_argument("--format", choices=["csv", "json"], default="csv")
    return parser


def run(args: argparse.Namespace) -> int:
    cache_path = args.cache or os.environ.get("HANKEL_CACHE")
    set_zeta_cache(cache_path)
    if args.command == "verify" and cache_path:
        evicted = get_zeta_cache().audit()
        for s in evicted:
            print(f"zeta cache entry s={s} failed re-derivation and was evicted", file=sys.stderr)
    handler = _COMMANDS[args.command][0]
    try:
        tables = handler(args)
    except (UsageError, ValueError) as exc:
        print(f"hankeldet {args.command}: usage error: {exc}", file=sys.stderr)
        return 2
    except (ArithmeticError, RuntimeError) as exc:
        print(f"hankeldet {args.command}: computation failed: {exc}", file=sys.stderr)
        return 1
    text = render(tables, args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.command == "verify":
        failed = [row for row in tables["verify"] if not row["passed"]]
        for row in failed:
            print(f"criterion {row['criterion']} ({row['title']}) failed: {row['measured']}", file=sys.stderr)
        return 1 if failed else 0
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on unknown or malformed flags
    return run(args)


if __name__ == "__main__":
    sys.exit(main())
