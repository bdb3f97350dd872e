"""``alloc-design`` command-line interface."""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Any, Optional, Sequence

from . import __version__, data, reproduce
from .asymptotic import (
    MtdSpec,
    PitmanScenario,
    bahadur_allocation_closed_form,
    bahadur_allocation_numeric,
    general_bahadur_allocation,
    mtd_bahadur_allocation,
    mtd_neyman_allocation,
    neyman_allocation,
    pitman_limit,
)
from .exact import (
    Design,
    TestSpec,
    balanced,
    constant_rule,
    exact_mtd_error,
    exact_power,
    exact_type2_error,
    minimal_sample_size,
    monte_carlo_mtd_error,
    monte_carlo_power,
    monte_carlo_selection_error,
    optimal_allocation_exact,
    optimal_mtd_allocation_exact,
)
from .models import SuccessPair, bernoulli_pair, parse_model
from .numerics import DomainError, OptimizationError, SingularSystemError
from .svg import line_chart

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def format_value(v: Any, precision: int) -> str:
    """Fixed ``precision`` decimals; values below 1e-3 in scientific form."""
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if v != 0.0 and abs(v) < 1e-3:
            return f"{v:.{max(precision - 1, 0)}e}"
        return f"{v:.{precision}f}"
    return str(v)


def _csv_cell(text: str) -> str:
    if any(ch in text for ch in ',"\n'):
        return '"' + text.replace('"', '""') + '"'
    return text


def render_csv(command: str, rows: list[dict], precision: int) -> str:
    columns: list[str] = []
    for row in rows:
        for key in row:
            if key not in columns:
                columns.append(key)
    lines = [f"# alloc-design v{__version__} {command}", ",".join(columns)]
    for row in rows:
        lines.append(",".join(_csv_cell(format_value(row.get(c), precision)) for c in columns))
    return "\n".join(lines) + "\n"


def render_text(rows: list[dict], precision: int) -> str:
    if len(rows) == 1:
        row = rows[0]
        width = max(len(k) for k in row)
        return "".join(f"{k.ljust(width)}  {format_value(v, precision)}\n" for k, v in row.items())
    return render_csv("", rows, precision).split("\n", 1)[1]


def _json_safe(v: Any) -> Any:
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


def render_json(command: str, rows: list[dict]) -> str:
    doc = {
        "tool": "alloc-design",
        "version": __version__,
        "command": command,
        "rows": [{k: _json_safe(v) for k, v in row.items()} for row in rows],
    }
    return json.dumps(doc, indent=2) + "\n"


def _emit(args, rows: list[dict], text: Optional[str] = None) -> None:
    fmt = "json" if args.json else args.format or args.default_format
    if fmt == "json":
        out = render_json(args.command, rows)
    elif fmt == "csv":
        out = render_csv(args.command, rows, args.precision)
    else:
        out = text if text is not None else render_text(rows, args.precision)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)


def _write_svg(path: Optional[str], svg: str) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(svg)


# ---------------------------------------------------------------------------
# argument helpers
# ---------------------------------------------------------------------------

def _pair(args) -> SuccessPair:
    if args.pA is None or args.pB is None:
        raise UsageError("--pA and --pB are required")
    return SuccessPair(args.pA, args.pB)


def _models(args):
    if args.model_a or args.model_b:
        if not (args.model_a and args.model_b):
            raise UsageError("--model-a and --model-b must be given together")
        if args.pA is not None or args.pB is not None:
            raise UsageError("give either --pA/--pB or --model-a/--model-b")
        return (parse_model(args.model_a, args.gamma_param), parse_model(args.model_b, args.gamma_param))
    return None


def _design(args) -> Design:
    if args.n is None or args.NA is None:
        raise UsageError("--n and --NA are required")
    return Design.split(args.n, args.NA)


def _test(args) -> TestSpec:
    return TestSpec(args.K, args.sided)


def _add_pair(p, required=False):
    p.add_argument("--pA", type=float, required=required, help="success probability of arm A")
    p.add_argument("--pB", type=float, required=required, help="success probability of arm B")


def _add_models(p):
    p.add_argument("--model-a", dest="model_a", help="response model of arm A, e.g. poisson:lambda=2")
    p.add_argument("--model-b", dest="model_b", help="response model of arm B")
    p.add_argument("--gamma-param", choices=("scale", "rate"), default="scale",
                   help="meaning of the second gamma argument (default: scale)")


def _add_test(p):
    p.add_argument("--K", type=float, default=1.96, help="critical value (default 1.96)")
    p.add_argument("--sided", choices=("one", "two"), default="two")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_allocate(args) -> None:
    models = _models(args)
    rate = None
    if args.p0 is not None:
        spec = MtdSpec(*_pair_values(args), args.p0)
        if args.criterion == "neyman":
            nu = mtd_neyman_allocation(spec)
        elif args.criterion == "bahadur":
            r = mtd_bahadur_allocation(spec)
            nu, rate = r.nu_star, r.rate_at_min
        else:
            raise UsageError("bahadur-closed has no dose-finding counterpart; use bahadur")
    elif models is not None:
        if args.criterion == "neyman":
            nu = neyman_allocation(models)
        elif args.criterion == "bahadur":
            r = general_bahadur_allocation(models)
            nu, rate = r.nu_star, r.rate_at_min
        else:
            if not all(m.kind == "bernoulli" for m in models):
                raise UsageError("bahadur-closed applies to Bernoulli arms only")
            nu = bahadur_allocation_closed_form(SuccessPair(models[0].params["p"], models[1].params["p"]))
    else:
        pair = _pair(args)
        if args.criterion == "neyman":
            nu = neyman_allocation(pair)
        elif args.criterion == "bahadur":
            r = bahadur_allocation_numeric(pair)
            nu, rate = r.nu_star, r.rate_at_min
        else:
            nu = bahadur_allocation_closed_form(pair)
    row = {"criterion": args.criterion, "nu": nu}
    if rate is not None:
        row["rate"] = rate
    text = format_value(nu, args.precision)
    if rate is not None:
        text += " " + format_value(rate, args.precision)
    _emit(args, [row], text + "\n")


def _pair_values(args) -> tuple[float, float]:
    if args.pA is None or args.pB is None:
        raise UsageError("--pA and --pB are required")
    return args.pA, args.pB


def cmd_power(args) -> None:
    pair, design, test = _pair(args), _design(args), _test(args)
    row = {
        "p_A": pair.p_A, "p_B": pair.p_B, "n": design.n, "N_A": design.N_A,
        "K": test.K, "sided": test.sided,
        "power": exact_power(pair, design, test),
        "type2_error": exact_type2_error(pair, design, test),
    }
    _emit(args, [row])


def cmd_optimal_nu(args) -> None:
    pair, test = _pair(args), _test(args)
    if args.n is None:
        raise UsageError("--n is required")
    best, power, curve = optimal_allocation_exact(pair, args.n, test, min_arm=args.min_arm)
    if args.curve:
        rows = [{"N_A": k, "nu": k / args.n, "power": p} for k, p in curve.points]
        _emit(args, rows)
        return
    row = {
        "p_A": pair.p_A, "p_B": pair.p_B, "n": args.n, "N_A": best, "nu": best / args.n,
        "power": power, "type2_error": exact_type2_error(pair, Design.split(args.n, best), test),
    }
    _emit(args, [row])


def cmd_mtd(args) -> None:
    spec = MtdSpec(*_pair_values(args), args.p0)
    if args.n is None:
        raise UsageError("--n is required")
    if args.NA is not None:
        design = Design.split(args.n, args.NA)
        row = {"p_A": spec.p_A, "p_B": spec.p_B, "p0": spec.p0, "n": args.n, "N_A": args.NA,
               "error": exact_mtd_error(spec, design)}
    else:
        best, err, _ = optimal_mtd_allocation_exact(spec, args.n)
        row = {"p_A": spec.p_A, "p_B": spec.p_B, "p0": spec.p0, "n": args.n, "N_A": best,
               "nu": best / args.n, "error": err}
    _emit(args, [row])


def _rule(args, pair: SuccessPair):
    if args.rule == "balanced":
        return balanced
    if args.rule == "neyman":
        return constant_rule(neyman_allocation(pair))
    if args.rule == "bahadur":
        return constant_rule(bahadur_allocation_closed_form(pair))
    if args.nu is None:
        raise UsageError("--rule constant needs --nu")
    return constant_rule(args.nu)


def cmd_minimal_n(args) -> None:
    shrinking = args.k is not None
    if shrinking:
        if args.pA is not None or args.pB is not None:
            raise UsageError("--k replaces --pA/--pB")
        sc = PitmanScenario(args.delta_A, args.delta_B, args.p, args.alpha, args.beta)
        pair = sc.pair_at(args.k)
    else:
        pair = _pair(args)
    rule = _rule(args, pair)
    n = minimal_sample_size(pair, args.alpha, args.beta, rule, n_max=args.n_max,
                            stable_window=args.stable_window)
    row = {"p_A": pair.p_A, "p_B": pair.p_B, "alpha": args.alpha, "beta": args.beta,
           "rule": args.rule, "n": n, "found": n is not None}
    if shrinking:
        row["k"] = args.k
        row["n_over_k"] = None if n is None else n / args.k
        row["pitman_limit"] = pitman_limit(sc, rule(0))
    _emit(args, [row])


def cmd_table(args) -> None:
    rows = {"1": reproduce.table1, "2": reproduce.table2, "3": reproduce.table3}[args.which]()
    _emit(args, rows)


def _figure1(args) -> None:
    if args.grid_step is not None and args.grid_step not in data.FIGURE1_STEPS:
        raise UsageError(f"--grid-step must be one of {data.FIGURE1_STEPS}")
    step = args.grid_step or data.FIGURE1_STEPS[0]
    rows = reproduce.figure1(args.which, step, exhaustive=not args.no_max)
    _emit(args, rows)
    if args.svg:
        xs = [r["p_A"] for r in rows]
        if args.no_max:
            series = [(name, xs, [r[f"power_{name}"] for r in rows]) for name in ("neyman", "balanced", "bahadur")]
            ylabel = "power"
        else:
            series = [(name, xs, [r[f"deficit_{name}"] for r in rows]) for name in ("neyman", "balanced", "bahadur")]
            ylabel = "maximal power minus power"
        n = data.FIGURE1[args.which]
        _write_svg(args.svg, line_chart(series, f"n = {n}, p_B = p_A + {data.FIGURE1_SHIFT}, K = {data.FIGURE1_K}",
                                        "p_A", ylabel, markers=True))


def _figure3(args) -> None:
    fig = reproduce.figure3()
    n = fig.curve.n
    pair = SuccessPair(*data.FIGURE3_PAIR)
    test = TestSpec(data.FIGURE3_K, "two")
    rows = [{"record": "curve", "label": "", "N_A": k, "nu": k / n, "value": p}
            for k, p in fig.curve.points]
    for key in ("a", "b", "c", "rmse"):
        rows.append({"record": "fit", "label": key, "N_A": None, "nu": None, "value": getattr(fig.fit, key)})
    rows.append({"record": "fit", "label": "window", "N_A": None, "nu": fig.fit_window[0], "value": fig.fit_window[1]})
    for name, nu in fig.markers.items():
        design = Design.from_fraction(n, nu)
        rows.append({"record": "marker", "label": name, "N_A": design.N_A, "nu": nu,
                     "value": exact_power(pair, design, test)})
    rows.append({"record": "optimum", "label": "exhaustive", "N_A": fig.best_N_A, "nu": fig.best_N_A / n,
                 "value": fig.best_power})
    _emit(args, rows)
    if args.svg:
        lo, hi = fig.fit_window
        pts = [(k / n, p) for k, p in fig.curve.points if lo <= k / n <= hi]
        xs = [x for x, _ in pts]
        series = [("exact power", xs, [y for _, y in pts]), ("quadratic fit", xs, [fig.fit(x) for x in xs])]
        vlines = [(nu, name) for name, nu in fig.markers.items()]
        _write_svg(args.svg, line_chart(series, f"n = {n}, (p_A, p_B) = {data.FIGURE3_PAIR}, K = {data.FIGURE3_K}",
                                        "allocation fraction", "power", vlines))


def cmd_figure(args) -> None:
    if args.which == "3":
        if args.grid_step is not None:
            raise UsageError("--grid-step applies to figure 1a/1b only")
        _figure3(args)
    else:
        _figure1(args)


def cmd_simulate(args) -> None:
    design = _design(args)
    quantity = args.quantity
    models = _models(args)
    if quantity != "selection" and models is not None:
        raise UsageError(f"--quantity {quantity} needs --pA/--pB")
    row: dict = {"quantity": quantity, "n": design.n, "N_A": design.N_A, "reps": args.reps, "seed": args.seed}
    if quantity == "selection":
        if models is None:
            models = bernoulli_pair(_pair(args))
        est, se = monte_carlo_selection_error(models, design, args.reps, args.seed)
        row.update({"model_a": models[0].describe(), "model_b": models[1].describe()})
        exact = None
    elif quantity == "power":
        pair, test = _pair(args), _test(args)
        est, se = monte_carlo_power(pair, design, test, args.reps, args.seed)
        exact = exact_power(pair, design, test)
    else:
        if args.p0 is None:
            raise UsageError("--quantity mtd needs --p0")
        spec = MtdSpec(*_pair_values(args), args.p0)
        est, se = monte_carlo_mtd_error(spec, design, args.reps, args.seed)
        exact = exact_mtd_error(spec, design)
    row.update({"estimate": est, "se": se})
    if exact is not None:
        row["exact"] = exact
        row["z"] = (est - exact) / se if se > 0 else (0.0 if est == exact else math.inf)
    _emit(args, [row])


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "csv", "json"), help="output format")
    common.add_argument("--json", action="store_true", help="shorthand for --format json")
    common.add_argument("--precision", type=int, default=7, help="decimals in text/CSV output (default 7)")
    common.add_argument("--output", "-o", help="write the result to this file instead of stdout")

    parser = argparse.ArgumentParser(
        prog="alloc-design",
        description="Optimal allocation and exact Wald-test power for two-arm trials.",
    )
    parser.add_argument("--version", action="version", version=f"alloc-design {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("allocate", parents=[common], help="asymptotically optimal allocation fraction")
    _add_pair(p)
    _add_models(p)
    p.add_argument("--p0", type=float, help="target toxicity; switches to dose finding")
    p.add_argument("--criterion", choices=("neyman", "bahadur", "bahadur-closed"), default="bahadur")
    p.set_defaults(func=cmd_allocate, default_format="text")

    p = sub.add_parser("power", parents=[common], help="exact Wald-test power of one design")
    _add_pair(p, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--NA", type=int, required=True, help="size of arm A")
    _add_test(p)
    p.set_defaults(func=cmd_power, default_format="text")

    p = sub.add_parser("optimal-nu", parents=[common], help="exhaustive finite-n optimal allocation")
    _add_pair(p, required=True)
    p.add_argument("--n", type=int, required=True)
    _add_test(p)
    p.add_argument("--min-arm", type=int, default=2, help="smallest arm size scanned (default 2)")
    p.add_argument("--curve", action="store_true", help="emit the whole power curve")
    p.set_defaults(func=cmd_optimal_nu, default_format="text")

    p = sub.add_parser("mtd", parents=[common], help="exact probability of selecting the wrong dose")
    _add_pair(p, required=True)
    p.add_argument("--p0", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--NA", type=int, help="size of arm A; omit to search for the best size")
    p.set_defaults(func=cmd_mtd, default_format="text")

    p = sub.add_parser("minimal-n", parents=[common], help="smallest n reaching the target power")
    _add_pair(p)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--beta", type=float, default=0.8, help="target power")
    p.add_argument("--rule", choices=("balanced", "neyman", "bahadur", "constant"), default="balanced")
    p.add_argument("--nu", type=float, help="fraction for --rule constant")
    p.add_argument("--n-max", type=int, default=10_000)
    p.add_argument("--stable-window", type=int, default=1,
                   help="require the target for this many consecutive n")
    p.add_argument("--k", type=float, help="use the shrinking alternative p + delta/sqrt(k)")
    p.add_argument("--p", type=float, default=0.5, help="base probability for --k")
    p.add_argument("--delta-A", dest="delta_A", type=float, default=0.0)
    p.add_argument("--delta-B", dest="delta_B", type=float, default=1.0)
    p.set_defaults(func=cmd_minimal_n, default_format="text")

    p = sub.add_parser("table", parents=[common], help="recompute a published table")
    p.add_argument("which", choices=("1", "2", "3"))
    p.set_defaults(func=cmd_table, default_format="csv")

    p = sub.add_parser("figure", parents=[common], help="recompute the data behind a published figure")
    p.add_argument("which", choices=("1a", "1b", "3"))
    p.add_argument("--grid-step", type=float, help="p_A grid step for figure 1 (0.01, 0.025 or 0.05)")
    p.add_argument("--no-max", action="store_true",
                   help="figure 1: skip the exhaustive maximal-power baseline")
    p.add_argument("--svg", help="also write an SVG chart to this path")
    p.set_defaults(func=cmd_figure, default_format="csv")

    p = sub.add_parser("simulate", parents=[common], help="seeded Monte Carlo estimate")
    _add_pair(p)
    _add_models(p)
    p.add_argument("--quantity", choices=("selection", "power", "mtd"), default="selection")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--NA", type=int, required=True)
    p.add_argument("--p0", type=float)
    p.add_argument("--reps", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    _add_test(p)
    p.set_defaults(func=cmd_simulate, default_format="text")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.precision < 0:
        parser.error("--precision must be >= 0")
    try:
        args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except (OptimizationError, SingularSystemError) as exc:
        print(f"alloc-design: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DomainError, ValueError) as exc:
        print(f"alloc-design: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
