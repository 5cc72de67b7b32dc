"""Command-line front end.

Exit codes: 0 on success (or a verified system), 1 when a check fails
(the witness is printed), 2 on usage errors, including refused budgets.
"""
from __future__ import annotations

import argparse
import io
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Iterable, Iterator, Sequence

from . import bounds, coding, constructions, exact, setsys
from .setsys import BlockFileError, BudgetExceeded

SWEEP_COLUMNS = (
    ("n", "d", "rate") + bounds.LOWER_NAMES + bounds.UPPER_NAMES + ("best_upper", "winner")
)
SWEEP_NMAX = 512


class UsageError(Exception):
    """Bad flags or inputs; reported with exit code 2."""


# ------------------------------------------------------------------ output


def _open_out(path: str | None):
    if path is None or path == "-":
        return _NoClose(sys.stdout)
    return open(path, "w", encoding="utf-8", newline="\n")


class _NoClose(io.TextIOBase):
    def __init__(self, stream):
        self._s = stream

    def write(self, text):
        return self._s.write(text)

    def flush(self):
        self._s.flush()

    def close(self):
        self.flush()


def _fmt_param(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return "[" + " ".join(_fmt_param(x) for x in v) + "]"
    return str(v)


def _fmt_params(params: dict) -> str:
    return " ".join(f"{k}={_fmt_param(v)}" for k, v in sorted(params.items()))


def _render(rows: Sequence[Sequence[str]], header: Sequence[str], fmt: str) -> str:
    if fmt == "csv":
        return "".join(",".join(r) + "\n" for r in [header, *rows])
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h)
              for i, h in enumerate(header)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip()]
    lines += ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows]
    return "\n".join(lines) + "\n"


# ------------------------------------------------------------------ bounds


def cmd_bounds_eval(args) -> int:
    n, d = args.n, args.d
    if not 3 <= d <= n:
        raise UsageError(f"need 3 <= d <= n, got n={n} d={d}")
    if d <= 5:
        print(f"warning: d={d} lies outside the sweep domain 5 < d <= n", file=sys.stderr)
    table = bounds.best_bounds_row(n, [d], strict=False)[0]
    rows = []
    for name in bounds.LOWER_NAMES + bounds.UPPER_NAMES:
        r = table.results[name]
        if r is None:
            rows.append([name, "upper", "", "n/a"])
        else:
            rows.append([name, r.kind, str(r.value), _fmt_params(r.params)])
    if d <= 5:
        try:
            value, _ = exact.min_se(n, d - 2, args.budget)
            rows.append(["exact", "exact", str(value), "branch and bound"])
        except BudgetExceeded as err:
            print(f"note: exact value skipped ({err})", file=sys.stderr)
    rows.append(["best_upper", "upper", str(table.best_upper), f"winner={table.winner}"])
    rows.append(["best_lower", "lower", str(table.best_lower), ""])
    with _open_out(args.out) as fh:
        fh.write(_render(rows, ("bound", "kind", "value", "params"), args.format))
    return 0


def _row_lines(n: int) -> list[str]:
    out = []
    for tb in bounds.best_bounds_row(n, range(6, n + 1)):
        cells = [str(tb.n), str(tb.d), f"{tb.rate:.6f}"]
        for name in bounds.LOWER_NAMES + bounds.UPPER_NAMES:
            r = tb.results[name]
            cells.append("" if r is None else str(r.value))
        cells += [str(tb.best_upper), tb.winner]
        out.append(",".join(cells) + "\n")
    return out


def _winner_lines(n: int) -> list[str]:
    return [f"{tb.n},{tb.d},{tb.winner}\n" for tb in bounds.best_bounds_row(n, range(6, n + 1))]


def _per_n(func, n_max: int, jobs: int) -> Iterator[str]:
    ns = range(6, n_max + 1)
    if jobs <= 1:
        for n in ns:
            yield from func(n)
        return
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        # map keeps submission order, so output does not depend on timing
        for lines in pool.map(func, ns):
            yield from lines


def sweep_lines(n_max: int, jobs: int = 1) -> Iterator[str]:
    """CSV lines for every 5 < d <= n <= n_max, in (n, d) order."""
    yield ",".join(SWEEP_COLUMNS) + "\n"
    yield from _per_n(_row_lines, n_max, jobs)


def _check_nmax(n_max: int, budget: int | None) -> None:
    if n_max < 6:
        raise UsageError(f"need n-max >= 6, got {n_max}")
    if n_max > SWEEP_NMAX and (budget is None or budget < n_max):
        raise UsageError(f"n-max above {SWEEP_NMAX} needs --budget >= n-max")


def cmd_bounds_sweep(args) -> int:
    _check_nmax(args.n_max, args.budget)
    with _open_out(args.out) as fh:
        for line in sweep_lines(args.n_max, args.jobs):
            fh.write(line)
    return 0


FIG1_SCRIPT = """\
# Winner map: one colored cell per (n, d).  Usage: python {script}
import csv
from collections import OrderedDict

import matplotlib.pyplot as plt

rows = list(csv.DictReader(open({csv!r}, encoding="utf-8")))
names = list(OrderedDict.fromkeys(r["winner"] for r in rows))
fig, ax = plt.subplots(figsize=(8, 6))
for i, name in enumerate(names):
    pts = [(int(r["n"]), 1 - (int(r["d"]) - 1) / int(r["n"])) for r in rows if r["winner"] == name]
    ax.scatter([p[0] for p in pts], [p[1] for p in pts], s=2, label=name, color=f"C{{i}}")
ax.set_xlabel("n")
ax.set_ylabel("rate (n - d + 1) / n")
ax.legend(markerscale=6)
fig.savefig({png!r}, dpi=150)
"""


def cmd_fig1(args) -> int:
    _check_nmax(args.n_max, args.budget)
    stem = args.out or "fig1"
    csv_path, script_path, png_path = stem + ".csv", stem + "_plot.py", stem + ".png"
    with open(csv_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("n,d,winner\n")
        for line in _per_n(_winner_lines, args.n_max, args.jobs):
            fh.write(line)
    with open(script_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(FIG1_SCRIPT.format(script=os.path.basename(script_path),
                                    csv=os.path.basename(csv_path),
                                    png=os.path.basename(png_path)))
    print(csv_path)
    print(script_path)
    return 0


# ------------------------------------------------------ systems and exact


def cmd_construct(args) -> int:
    m, n = args.method, args.n
    need = {"weighted": ("t", "l", "j"), "bin-parity": ("t", "l", "j"), "kuzjurin": ("k",),
            "recurrent": ("t",), "random": ("t", "p")}[m]
    missing = [f"--{x}" for x in need if getattr(args, x) is None]
    if missing:
        raise UsageError(f"method {m} needs {' '.join(missing)}")
    if m == "weighted":
        sys_ = constructions.construct_weighted_partition(n, args.t, args.l, args.j)
    elif m == "bin-parity":
        sys_ = constructions.construct_bin_parity(n, args.t, args.l, args.j)
    elif m == "kuzjurin":
        sys_ = constructions.construct_kuzjurin(n, args.k)
    elif m == "recurrent":
        sys_ = constructions.construct_recurrent_se(n, args.t)
    else:
        sys_ = constructions.construct_random_greedy(
            n, args.t, args.p, args.seed, args.budget or setsys.DEFAULT_BUDGET)
    path = args.out or f"{m}_n{n}.blocks"
    setsys.write_blocks(sys_, path)
    print(len(sys_))
    return 0


def cmd_verify(args) -> int:
    kind = args.kind
    sys_ = setsys.read_blocks(args.input, "se" if kind == "se" else kind, args.s)
    if kind == "se":
        check = setsys.is_se_system(sys_, args.budget)
    elif kind == "turan":
        check = setsys.is_turan_system(sys_, args.s if args.s is not None else sys_.t + 1,
                                       args.budget)
    else:
        check = setsys.is_covering_design(sys_, args.s if args.s is not None else sys_.t - 1,
                                          args.budget)
    if check:
        print("ok")
        return 0
    print("fail witness " + " ".join(map(str, check.witness)))
    return 1


def cmd_exact(args) -> int:
    budget = args.budget if args.budget is not None else exact.INCIDENCE_BUDGET
    n, t = args.n, args.t
    if args.kind == "se":
        value, sys_ = exact.min_se(n, t, budget)
        tag = f"se_n{n}_t{t}"
    else:
        if args.s is None:
            raise UsageError(f"--kind {args.kind} needs --s")
        if args.kind == "turan":
            value, sys_ = exact.min_turan(n, args.s, t, budget)
        else:
            value, sys_ = exact.min_covering(n, args.s, t, budget)
        tag = f"{args.kind}_n{n}_s{args.s}_t{t}"
    path = args.out or f"{tag}.blocks"
    setsys.write_blocks(sys_, path)
    print(value)
    return 0


# ------------------------------------------------------------------ coding


def _read_h(path: str) -> coding.ParityCheckMatrix:
    if path == "-":
        return coding.parse_matrix(sys.stdin.read())
    return coding.read_matrix(path)


def _write_h(h: coding.ParityCheckMatrix, path: str | None) -> None:
    if path is None or path == "-":
        buf = io.StringIO()
        buf.write(f"{h.q} {len(h.rows)} {h.n}\n")
        for r in h.rows:
            buf.write(" ".join(map(str, r)) + "\n")
        sys.stdout.write(buf.getvalue())
    else:
        coding.write_matrix(h, path)


def cmd_code_make_h(args) -> int:
    spec = coding.CodeSpec.rs(args.n, args.d, args.q)
    t = args.d - 2
    if args.se:
        sys_ = setsys.read_blocks(args.se, "se")
    elif t == 0:
        sys_ = setsys.SetSystem(args.n, 0, ((),), "se")
    elif t < args.n - 1:
        sys_ = constructions.construct_recurrent_se(args.n, t)
    else:
        raise UsageError(f"no default SE system for n={args.n} t={t}; pass --se")
    _write_h(coding.build_h_from_se(spec, sys_), args.out)
    return 0


def cmd_code_stopping(args) -> int:
    h = _read_h(args.input)
    s = coding.stopping_distance(h, budget=args.budget or coding.STOPPING_BUDGET)
    print("none" if s is None else s)
    return 0


def _positions(text: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise UsageError(f"erasures must be integers, got {text!r}") from None


def cmd_code_decode(args) -> int:
    h = _read_h(args.input)
    erased = _positions(args.erased)
    if any(not 1 <= j <= h.n for j in erased):
        raise UsageError(f"erased positions must lie in 1..{h.n}")
    res = coding.peel_decode(h, erased)
    if res.recovered:
        print("recovered")
        return 0
    print("stuck " + " ".join(map(str, sorted(res.residual))))
    return 1


def cmd_code_replace_rows(args) -> int:
    h = _read_h(args.input)
    spec = coding.CodeSpec.rs(h.n, args.d, h.q)
    _write_h(coding.replace_nonmin_rows(spec, h), args.out)
    return 0


# ------------------------------------------------------------------ parser


def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    def default(v):
        return argparse.SUPPRESS if suppress else v

    parser.add_argument("--format", choices=("table", "csv"), default=default("table"))
    parser.add_argument("--out", default=default(None), help="output path (default: stdout)")
    parser.add_argument("--seed", type=int, default=default(0))
    parser.add_argument("--budget", type=int, default=default(None),
                        help="override the enumeration or search budget")
    parser.add_argument("--jobs", type=int, default=default(1),
                        help="worker processes for sweeps")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="singlex", description=__doc__.splitlines()[0])
    _global_flags(p, suppress=False)
    sub = p.add_subparsers(dest="command", required=True)

    def cmd(parent, name, func, help_):
        sp = parent.add_parser(name, help=help_)
        _global_flags(sp, suppress=True)
        sp.set_defaults(func=func)
        return sp

    b = sub.add_parser("bounds", help="evaluate or sweep the bounds").add_subparsers(
        dest="action", required=True)
    sp = cmd(b, "eval", cmd_bounds_eval, "every bound at one (n, d)")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--d", type=int, required=True)
    sp = cmd(b, "sweep", cmd_bounds_sweep, "CSV over 5 < d <= n <= n-max")
    sp.add_argument("--n-max", type=int, default=SWEEP_NMAX)

    r = sub.add_parser("report", help="figure data").add_subparsers(dest="action", required=True)
    sp = cmd(r, "fig1", cmd_fig1, "winner map CSV plus a plotting script (--out is a stem)")
    sp.add_argument("--n-max", type=int, default=SWEEP_NMAX)

    sp = cmd(sub, "construct", cmd_construct, "write a constructed system as a block file")
    sp.add_argument("--method", required=True,
                    choices=("weighted", "bin-parity", "kuzjurin", "recurrent", "random"))
    sp.add_argument("--n", type=int, required=True)
    for name in ("t", "l", "j", "k"):
        sp.add_argument(f"--{name}", type=int)
    sp.add_argument("--p", type=float)

    sp = cmd(sub, "verify", cmd_verify, "check a block file exhaustively")
    sp.add_argument("--kind", required=True, choices=("se", "turan", "covering"))
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--s", type=int, help="Turán s or covered size")

    sp = cmd(sub, "exact", cmd_exact, "exact minimum by branch and bound")
    sp.add_argument("--kind", required=True, choices=("se", "turan", "covering"))
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--t", type=int, required=True)
    sp.add_argument("--s", type=int, help="Turán s, or block size for covering")

    c = sub.add_parser("code", help="Reed-Solomon parity-check tools").add_subparsers(
        dest="action", required=True)
    sp = cmd(c, "make-h", cmd_code_make_h, "parity-check matrix from an SE system")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--q", type=int)
    sp.add_argument("--se", help="block file with an (n, d-2) SE system")
    sp = cmd(c, "stopping", cmd_code_stopping, "stopping distance of a matrix file")
    sp.add_argument("--in", dest="input", default="-")
    sp = cmd(c, "decode", cmd_code_decode, "peel an erasure pattern")
    sp.add_argument("--in", dest="input", default="-")
    sp.add_argument("--erased", required=True, help="positions, e.g. 1,3,4")
    sp = cmd(c, "replace-rows", cmd_code_replace_rows, "swap heavy rows for minimum-weight ones")
    sp.add_argument("--in", dest="input", default="-")
    sp.add_argument("--d", type=int, required=True)
    return p


def main(argv: Iterable[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(None if argv is None else list(argv))
    try:
        return args.func(args)
    except (UsageError, ValueError, BudgetExceeded, BlockFileError, OSError) as err:
        if isinstance(err, BudgetExceeded):
            err = f"{err} (raise --budget to allow it)"
        print(f"{parser.prog}: error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
