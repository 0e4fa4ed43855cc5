"""``slowmani`` command line.

Exit codes: 0 success, 1 usage, 2 problem-file error, 3 mathematical
failure, 4 numeric validation failure.
"""

import argparse
import csv
import json
import math
import os
import re
import sys


from . import problems
from .cascade import check_no_infra_slow, run_cascade
from .errors import MathError, NumericError, SpecError
from .frontend import Ansatz, load_problem
from .gspt import compute_n0, expand_fibre_bundle, expand_slow_manifold

EXIT_OK, EXIT_USAGE, EXIT_SPEC, EXIT_MATH, EXIT_VALIDATION = 0, 1, 2, 3, 4

COMMANDS = ("expand", "fibres", "cascade", "validate", "info")
VALUE_OPTIONS = {"--order", "--ansatz", "--format", "--output", "-o", "--param", "--eps",
                 "--grid", "--traj", "--dt", "--t-end", "--traj-out", "--depth", "--orders",
                 "--points"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# argument helpers

def parse_eps(text):
    """Float, also accepting a fractional exponent such as ``1e-1.5``."""
    text = text.strip()
    m = re.fullmatch(r"([0-9]*\.?[0-9]+)[eE]([+-]?[0-9]*\.?[0-9]+)", text)
    if m:
        value = float(m.group(1)) * 10.0 ** float(m.group(2))
    else:
        try:
            value = float(text)
        except ValueError:
            raise UsageError(f"bad epsilon value {text!r}") from None
    if not value > 0 or not math.isfinite(value):
        raise UsageError(f"epsilon must be positive, got {text!r}")
    return value


def parse_eps_list(text):
    return [parse_eps(t) for t in text.split(",") if t.strip()]


def parse_grid(text):
    box = []
    for part in text.split(","):
        bits = part.split(":")
        if len(bits) != 2:
            raise UsageError(f"grid interval {part!r} is not lo:hi")
        try:
            lo, hi = float(bits[0]), float(bits[1])
        except ValueError:
            raise UsageError(f"grid interval {part!r} is not numeric") from None
        if not lo < hi:
            raise UsageError(f"grid interval {part!r} is empty")
        box.append((lo, hi))
    return box


def parse_params(items):
    values = {}
    for item in items or ():
        name, sep, val = item.partition("=")
        if not sep or not name.strip():
            raise UsageError(f"--param expects name=value, got {item!r}")
        try:
            values[name.strip()] = float(val)
        except ValueError:
            raise UsageError(f"--param {name}: {val!r} is not a number") from None
    return values


def parse_ansatz(text):
    if text is None:
        return None, None
    if text == "zero":
        return Ansatz.ZERO, None
    kind, _, idx = text.partition(":")
    if kind != "graph" or not idx:
        raise UsageError(f"--ansatz expects 'zero' or 'graph:i[,j...]', got {text!r}")
    try:
        indices = tuple(int(i) - 1 for i in idx.split(","))
    except ValueError:
        raise UsageError(f"--ansatz graph indices must be integers, got {idx!r}") from None
    return Ansatz.GRAPH, indices


def parse_floats(text, what):
    try:
        return [float(t) for t in text.split(",")]
    except ValueError:
        raise UsageError(f"{what} expects comma-separated numbers, got {text!r}") from None


def _join_negative_values(argv):
    """Turn ``--grid -1:1`` into ``--grid=-1:1`` so argparse accepts it."""
    out = []
    i = 0
    while i < len(argv):
        a = argv[i]
        nxt = argv[i + 1] if i + 1 < len(argv) else None
        if a in VALUE_OPTIONS and nxt and nxt.startswith("-") and not nxt.startswith("--"):
            out.append(f"{a}={nxt}")
            i += 2
            continue
        out.append(a)
        i += 1
    return out


def build_parser():
    p = _Parser(prog="slowmani", description="Slow manifolds, fast fibres and timescale "
                "cascades of singularly perturbed systems.")
    sub = p.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True
    common = _Parser(add_help=False)
    common.add_argument("input", help="problem file (.gspt) or a bundled problem name")
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--output", "-o", help="write the result here instead of stdout")
    common.add_argument("--ansatz", help="'zero' or 'graph:i[,j...]' (1-based state indices)")
    helps = {
        "expand": "slow manifold and reduced field",
        "fibres": "fast fibre bundle along the slow manifold",
        "cascade": "nested slow / infra-slow levels",
        "validate": "numeric residual, hyperbolicity and trajectory checks",
        "info": "summary of a problem file",
    }
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common], help=helps[name])
        sp.add_argument("--order", type=int, default=None)
        if name == "cascade":
            sp.add_argument("--depth", type=int, default=None,
                            help="number of reduced fields (default: all declared levels)")
            sp.add_argument("--orders", help="per-level orders, e.g. 2,1")
        if name == "validate":
            sp.add_argument("--param", action="append", default=[], metavar="NAME=VALUE")
            sp.add_argument("--eps", default="1e-1.5,1e-2,1e-2.5,1e-3")
            sp.add_argument("--grid", help="chart box lo:hi[,lo:hi...]; default: the file's box")
            sp.add_argument("--points", type=int, default=11, help="grid points per axis")
            sp.add_argument("--traj", help="initial state x1,...,xn for an RK4 trajectory")
            sp.add_argument("--dt", type=float, default=0.01)
            sp.add_argument("--t-end", type=float, default=50.0)
            sp.add_argument("--traj-out", help="trajectory CSV path (default: <problem>-trajectory.csv)")
    return p


def resolve_input(path):
    if os.path.exists(path):
        return load_problem(path)
    stem = os.path.basename(path)
    stem = stem[:-5] if stem.endswith(".gspt") else stem
    if stem in problems.NAMES:
        return problems.load(stem)
    raise UsageError(f"no such problem file: {path}")


# result documents

def mat_strings(M):
    return [[str(e) for e in row] for row in M.tolist()]


def render_value(rows):
    if len(rows) == 1 and len(rows[0]) == 1:
        return rows[0][0]
    if all(len(r) == 1 for r in rows):
        return "[" + ", ".join(r[0] for r in rows) + "]"
    return "[" + ", ".join("[" + ", ".join(r) + "]" for r in rows) + "]"


def series_doc(series):
    return [mat_strings(c) for c in series.coeffs]


def render_text(doc):
    """Canonical text rendering; a function of the document alone."""
    lines = [f"problem {doc['problem']}", f"command {doc['command']}"]
    for key in ("order", "ansatz", "orders"):
        if key in doc.get("meta", {}):
            val = doc["meta"][key]
            lines.append(f"{key} {','.join(map(str, val)) if isinstance(val, list) else val}")
    for name, coeffs in doc.get("series", {}).items():
        for i, rows in enumerate(coeffs):
            if rows is None:
                continue
            lines.append(f"{name}{i} = {render_value(rows)}")
    for level in doc.get("levels", []):
        lines.append(f"level {level['index']} (dim {level['dim']}, chart "
                     f"{' '.join(level['chart'])})")
        if level["leading_order"] is None:
            lines.append("  infra-slow field ≡ 0 (equilibrium curve)")
            continue
        lines.append(f"  leading power eps^{level['leading_order']}")
        for i, rows in enumerate(level["reduced_field"]):
            lines.append(f"  r{level['leading_order'] + i} = {render_value(rows)}")
    if "j_sequence" in doc:
        lines.append("j-sequence " + ",".join(map(str, doc["j_sequence"])))
        lines.append("dim-sequence " + ",".join(map(str, doc["dim_sequence"])))
    if "checks" in doc:
        for c in doc["checks"]:
            lines.append(f"conjugacy residual level {c[0]} order {c[1]}: "
                         f"{'zero' if c[2] else 'NONZERO'}")
    if "two_path" in doc:
        tp = doc["two_path"]
        lines.append("two-path check: " + (tp["status"] if tp else "not applicable"))
        if tp:
            lines.append(f"  formula   = {render_value(tp['formula'])}")
            lines.append(f"  recursion = {render_value(tp['recursion'])}")
    for key, val in doc.get("info", {}).items():
        lines.append(f"{key}: {val}")
    for block in doc.get("reports", []):
        lines.append(f"{block['name']}: {block['status']}")
        for row in block["lines"]:
            lines.append(f"  {row}")
    return "\n".join(lines) + "\n"


def _spec_with_ansatz(spec, args):
    ansatz, indices = parse_ansatz(args.ansatz)
    if ansatz is None:
        return spec
    try:
        return spec.with_ansatz(ansatz, indices)
    except SpecError as exc:
        raise UsageError(str(exc)) from None


def _order(args, default=2, minimum=1):
    order = default if args.order is None else args.order
    if order < minimum:
        raise UsageError(f"--order must be at least {minimum}")
    return order


def cmd_expand(spec, args):
    spec = _spec_with_ansatz(spec, args)
    order = _order(args)
    slow = expand_slow_manifold(spec, order)
    return {
        "command": "expand", "problem": spec.name,
        "meta": {"order": order, "ansatz": slow.ansatz.value},
        "series": {"r": series_doc(slow.r), "phi": series_doc(slow.phi),
                   "Y": series_doc(slow.y), "X": series_doc(slow.x)},
    }


def cmd_fibres(spec, args):
    spec = _spec_with_ansatz(spec, args)
    order = _order(args, default=1, minimum=0)
    slow = expand_slow_manifold(spec, order)
    fib = expand_fibre_bundle(spec, slow, order)
    return {
        "command": "fibres", "problem": spec.name,
        "meta": {"order": order, "ansatz": slow.ansatz.value},
        "series": {"N": series_doc(fib.n_frame), "n": series_doc(fib.n_dyn),
                   "L": series_doc(fib.l)},
    }


def cmd_cascade(spec, args):
    depth = args.depth
    if depth is not None and depth < 1:
        raise UsageError("--depth must be at least 1")
    if depth is None:
        depth = len(spec.levels) + 1
    if args.orders:
        orders = tuple(int(v) for v in parse_floats(args.orders, "--orders"))
    else:
        orders = tuple(max(_order(args) - i, 1) for i in range(depth))
    if any(o < 1 for o in orders):
        raise UsageError("cascade orders must be at least 1")
    res = run_cascade(spec, orders, depth)
    levels = []
    for lvl in res.levels[1:]:
        chart = list(lvl.embedding_to_parent.frame.chart_vars)
        levels.append({
            "index": lvl.level_index, "dim": lvl.dim, "chart": chart,
            "leading_order": lvl.leading_order,
            "reduced_field": series_doc(lvl.reduced_field) if lvl.leading_order is not None else [],
        })
    tp = res.two_path
    two_path = None
    if tp is not None and tp.recursion is not None:
        two_path = {"status": "agree" if tp.agree else "DISAGREE",
                    "formula": mat_strings(tp.formula), "recursion": mat_strings(tp.recursion)}
    return {
        "command": "cascade", "problem": spec.name,
        "meta": {"orders": list(orders[:depth])},
        "levels": levels,
        "j_sequence": list(res.j_sequence),
        "dim_sequence": list(res.dim_sequence),
        "checks": [list(c) for c in res.conjugacy_checks],
        "two_path": two_path,
    }


def cmd_info(spec, args):
    frame = compute_n0(spec)
    info = {
        "state": " ".join(spec.state_vars),
        "parameters": " ".join(spec.params) or "-",
        "chart": " ".join(spec.chart_vars),
        "dimensions": f"n={spec.n} k={spec.k}",
        "eps-orders in F": str(len(spec.f_terms) - 1),
        "ansatz": spec.ansatz.value + (
            ":" + ",".join(str(i + 1) for i in spec.graph_slow_indices)
            if spec.ansatz is Ansatz.GRAPH else ""),
        "n0": render_value(mat_strings(frame.n0_dyn)),
        "levels": str(len(spec.levels)),
        "infra-slow classification": check_no_infra_slow(spec).value,
    }
    if spec.box:
        info["box"] = " x ".join(f"[{lo}, {hi}]" for lo, hi in spec.box)
    return {"command": "info", "problem": spec.name, "info": info}


def _binding(spec, args):
    from .numeric import Binding
    values = parse_params(args.param)
    for name, (inputs, fn) in problems.DERIVED_PARAMS.get(spec.name, {}).items():
        if name not in values and all(i in values for i in inputs):
            values[name] = fn(*(values[i] for i in inputs))
    missing = [p for p in spec.params if p not in values]
    if missing:
        raise UsageError(f"validate needs --param for: {', '.join(missing)}")
    return Binding(values)


def cmd_validate(spec, args):
    from .numeric import (hyperbolicity_probe, integrate_rk4, residual_order_fit,
                          validation_grid, vector_field)
    spec = _spec_with_ansatz(spec, args)
    order = _order(args)
    binding = _binding(spec, args)
    epsilons = parse_eps_list(args.eps)
    if not epsilons:
        raise UsageError("--eps needs at least one value")
    box = parse_grid(args.grid) if args.grid else None
    if box is not None and len(box) != spec.k:
        raise UsageError(f"--grid has {len(box)} intervals, the chart has dimension {spec.k}")
    if args.points < 2:
        raise UsageError("--points must be at least 2")
    slow = expand_slow_manifold(spec, order)
    grid = validation_grid(spec, slow, binding, box, args.points)
    if not grid:
        raise UsageError("the sampling grid is empty after removing points near poles")
    reports = []

    if len(epsilons) >= 3 and math.log10(max(epsilons) / min(epsilons)) >= 1.5 - 1e-9:
        rep = residual_order_fit(spec, slow, grid, epsilons, binding)
        rows = [f"eps={e:.6g} sup_residual={s:.6e}" for e, s in zip(rep.epsilons,
                                                                  rep.sup_residuals)]
        slope = "machine zero (exact)" if rep.exact else f"{rep.fitted_slope:.4f}"
        rows.append(f"fitted slope {slope}, required >= {rep.target - rep.tolerance:g}")
        reports.append({"name": "residual order", "status": "PASS" if rep.passed else "FAIL",
                        "lines": rows})
    else:
        reports.append({"name": "residual order", "status": "SKIPPED",
                        "lines": ["needs >= 3 eps values spanning >= 1.5 decades"]})

    hyp = hyperbolicity_probe(compute_n0(spec), grid, binding)
    reports.append({
        "name": "normal hyperbolicity", "status": "PASS" if hyp.passed else "FAIL",
        "lines": [f"{len(grid)} points, min |Re eig n0| = {hyp.min_abs_real_part:.6g}, "
                  f"{'attracting' if hyp.attracting else 'not attracting'}"],
    })

    if args.traj:
        x0 = parse_floats(args.traj, "--traj")
        if len(x0) != spec.n:
            raise UsageError(f"--traj has {len(x0)} values, the system has dimension {spec.n}")
        if not args.dt > 0 or not args.t_end > 0:
            raise UsageError("--dt and --t-end must be positive")
        eps = epsilons[0]
        steps = max(1, int(round(args.t_end / args.dt)))
        every = max(1, steps // 5000)
        t, X = integrate_rk4(vector_field(spec, binding.with_epsilon(eps)), x0, args.dt,
                             steps, every)
        out = args.traj_out or f"{spec.name.replace('/', '_')}-trajectory.csv"
        with open(out, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["t"] + list(spec.state_vars))
            for ti, xi in zip(t, X):
                w.writerow([repr(float(ti))] + [repr(float(v)) for v in xi])
        final = ", ".join(f"{v:.6g}" for v in X[-1])
        reports.append({"name": "trajectory", "status": "WRITTEN",
                        "lines": [f"eps={eps:g}, {steps} RK4 steps of {args.dt:g}, "
                                  f"{len(t)} rows -> {out}", f"final state ({final})"]})

    ok = all(r["status"] in ("PASS", "SKIPPED", "WRITTEN") for r in reports)
    return {"command": "validate", "problem": spec.name,
            "meta": {"order": order, "ansatz": slow.ansatz.value},
            "reports": reports, "passed": ok}


HANDLERS = {"expand": cmd_expand, "fibres": cmd_fibres, "cascade": cmd_cascade,
            "validate": cmd_validate, "info": cmd_info}


def emit(doc, args, stdout):
    text = json.dumps(doc, indent=2, ensure_ascii=False) + "\n" if args.format == "json" \
        else render_text(doc)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        stdout.write(text)


def main(argv=None, stdout=None, stderr=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(_join_negative_values(argv))
        spec = resolve_input(args.input)
        doc = HANDLERS[args.command](spec, args)
        emit(doc, args, stdout)
    except UsageError as exc:
        stderr.write(f"slowmani: usage error: {exc}\n")
        return EXIT_USAGE
    except SpecError as exc:
        where = getattr(exc, "path", None)
        stderr.write(f"slowmani: {type(exc).__name__}: {(where + ': ') if where else ''}{exc}\n")
        return EXIT_SPEC
    except MathError as exc:
        stderr.write(f"slowmani: {type(exc).__name__}: {exc}\n")
        return EXIT_MATH
    except NumericError as exc:
        stderr.write(f"slowmani: {type(exc).__name__}: {exc}\n")
        return EXIT_VALIDATION
    except OSError as exc:
        stderr.write(f"slowmani: {exc}\n")
        return EXIT_USAGE
    if doc.get("command") == "validate" and not doc["passed"]:
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
