"""Command-line entry point: ``bernwidth {rates,widths,verify,norm}``.

Exit codes: 0 success, 1 an invariant or slope check failed, 2 invalid or
inapplicable parameters.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import subprocess
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from . import asymptotics as asy
from . import fdwidths as fw
from ._core import BACKEND
from .catalog import catalog_function
from .indexgrid import dim_space
from .moduli import b_prime_norm, default_t_grid, h_prime_norm
from .verify import SUITES, VerifyOptions, loglog_slope, run_suite

EXIT_OK, EXIT_FAIL, EXIT_INVALID = 0, 1, 2
CSV_COLUMNS = ("n", "k", "regime", "upper", "lower", "certificate", "theory_exponent")


class UsageError(ValueError):
    """Parameters the harness refuses to run with (exit code 2)."""


@dataclass(frozen=True)
class ExperimentConfig:
    alpha: tuple[float, ...] = (1.0,)
    p: float = 2.0
    q: float = 2.0
    theta: float = 2.0
    n_min: int = 64
    n_max: int = 16384
    seed: int = 0
    trials: int = 100
    t_min: float = 2.0**-12
    t_max: float = 4.0
    t_ratio: float = math.sqrt(2.0)
    certificate: bool = False
    certificate_samples: int = 4
    slope_tol: float = 0.05
    out: str | None = None
    extra: dict = field(default_factory=dict, compare=False)

    def sweep(self) -> list[int]:
        ns, n = [], self.n_min
        while n <= self.n_max:
            ns.append(n)
            n *= 2
        return ns

    def validate(self) -> None:
        if not self.alpha or any(not a > 0 for a in self.alpha):
            raise UsageError("alpha must be a nonempty vector of positive reals")
        d = len(self.alpha)
        n0 = 2 * dim_space(d, asy.pipeline_degree(self.alpha), self.alpha, 0)
        if self.n_min < n0:
            raise UsageError(f"nmin = {self.n_min} is below n0 = {n0}")
        if self.n_max < 4 * self.n_min:
            raise UsageError("need nmax >= 4 * nmin for a slope fit (3 dyadic points)")

    def t_grid(self) -> np.ndarray:
        return default_t_grid(self.t_min, self.t_max, self.t_ratio)


@dataclass
class RateRecord:
    n: int
    k: int
    regime: str
    upper: float
    lower: float
    certificate: float | None
    theory_exponent: float

    def row(self) -> list[str]:
        cert = "" if self.certificate is None else repr(self.certificate)
        return [str(self.n), str(self.k), self.regime, repr(self.upper), repr(self.lower), cert,
                repr(self.theory_exponent)]


def build_tag() -> str:
    """git-describe of the source tree when available, else the package version."""
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            cwd=Path(__file__).resolve().parent, capture_output=True, text=True, timeout=5,
        )
        if out.returncode == 0 and out.stdout.strip():
            return f"{__version__}+{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _real(text: str) -> float:
    try:
        return float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from exc


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    """JSON file (if any) overridden by explicit flags."""
    base: dict = {}
    if getattr(args, "config", None):
        try:
            base = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
    names = {f.name for f in fields(ExperimentConfig)}
    unknown = set(base) - names
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    flags = {
        "alpha": args.alpha, "p": args.p, "q": args.q, "theta": args.theta,
        "n_min": args.nmin, "n_max": args.nmax, "seed": args.seed, "trials": args.trials,
        "out": args.out,
    }
    if getattr(args, "certificate", False):
        flags["certificate"] = True
    base.update({k: v for k, v in flags.items() if v is not None})
    if "alpha" in base:
        base["alpha"] = tuple(float(a) for a in base["alpha"])
    return ExperimentConfig(**base)


def sweep_records(cfg: ExperimentConfig) -> list[RateRecord]:
    reg = asy.classify(cfg.alpha, cfg.p, cfg.q)
    if not reg.applicable:
        raise asy.InapplicableRegime(f"inapplicable parameters; violated: {', '.join(reg.failed())}")
    records = []
    for n in cfg.sweep():
        tr = asy.upper_bound_trace(cfg.alpha, cfg.p, cfg.q, n)
        cert = None
        if cfg.certificate and len(cfg.alpha) <= 2 and n <= 32 and not math.isinf(cfg.theta):
            cert = asy.constructive_lower_certificate(
                cfg.alpha, cfg.p, cfg.theta, cfg.q, n, cfg.certificate_samples, cfg.seed, cfg.t_grid()
            )
        records.append(RateRecord(n, tr.k, reg.label, tr.value,
                                  asy.lower_bound_value(cfg.alpha, cfg.p, cfg.q, n), cert, reg.exponent))
    return records


def fit_summary(records: list[RateRecord], tol: float) -> dict:
    ns = [r.n for r in records]
    e = records[0].theory_exponent
    up = loglog_slope(ns, [r.upper for r in records])
    lo = loglog_slope(ns, [r.lower for r in records])
    return {
        "theory_slope": -e,
        "slope_upper": up,
        "slope_lower": lo,
        "upper_pass": abs(up + e) <= tol,
        "lower_pass": abs(lo + e) <= tol,
    }


def render_rates(cfg: ExperimentConfig, records: list[RateRecord], summary: dict) -> str:
    buf = io.StringIO()
    conf = {k: v for k, v in asdict(cfg).items() if k not in ("out", "extra")}
    buf.write(f"# config: {json.dumps(conf, sort_keys=True)}\n")
    buf.write(f"# build: {build_tag()} backend={BACKEND}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow(r.row())
    buf.write(
        "# fit: theory_slope={theory_slope:.6f} slope_upper={slope_upper:.6f} "
        "slope_lower={slope_lower:.6f}\n".format(**summary)
    )
    buf.write(
        f"# check (tol {cfg.slope_tol}): upper={'PASS' if summary['upper_pass'] else 'FAIL'} "
        f"lower={'PASS' if summary['lower_pass'] else 'FAIL'}\n"
    )
    return buf.getvalue()


def render_plot(records: list[RateRecord]) -> str:
    """(log2 n, log2 value) pairs, one block per series, blank line between blocks."""
    lines = []
    for series in ("upper", "lower", "certificate"):
        pts = [(r.n, getattr(r, series)) for r in records if getattr(r, series) is not None]
        if not pts:
            continue
        lines.append(f"# series {series}")
        lines += [f"{math.log2(n)!r} {math.log2(v)!r}" for n, v in pts if v > 0]
        lines.append("")
    return "\n".join(lines)


def cmd_rates(args) -> int:
    cfg = load_config(args)
    cfg.validate()
    records = sweep_records(cfg)
    summary = fit_summary(records, cfg.slope_tol)
    text = render_rates(cfg, records, summary)
    if cfg.out:
        out = Path(cfg.out)
        out.write_text(text)
        out.with_name(out.name + ".plot").write_text(render_plot(records))
        print(text.splitlines()[-2])
        print(text.splitlines()[-1])
    else:
        sys.stdout.write(text)
    return EXIT_OK if summary["upper_pass"] and summary["lower_pass"] else EXIT_FAIL


def cmd_widths(args) -> int:
    if args.rho is None:
        raise UsageError("--rho is required")
    p = 2.0 if args.p is None else args.p
    q = 2.0 if args.q is None else args.q
    n = args.n
    rho = np.asarray(args.rho, dtype=float)
    if not 1 <= n <= rho.size:
        raise UsageError(f"need 1 <= n <= {rho.size}")
    if not p >= 1 or not q >= 1:
        raise UsageError("p and q must be >= 1")
    try:
        body = fw.Ellipsoid(rho, p)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    print(f"rho = {', '.join(repr(float(r)) for r in body.semi_axes)}  p = {p}  q = {q}  n = {n}")
    if p < q:
        print(f"exact: {fw.width_ellipsoid_exact(rho, p, q, n)!r}")
    else:
        print("exact formula inapplicable (requires p<q)")
    if math.isinf(p) and q == 2:
        print(f"box upper bound: {fw.width_box_l2_upper(rho, n)!r}")
    trials = 100 if args.trials is None else args.trials
    seed = 0 if args.seed is None else args.seed
    print(f"oracle: {fw.width_oracle(body, q, n, trials=trials, seed=seed)!r} (trials={trials}, seed={seed})")
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.suite not in (*SUITES, "all"):
        raise UsageError(f"unknown suite {args.suite!r}; choose from {', '.join([*SUITES, 'all'])}")
    opts = VerifyOptions(seed=args.seed or 0, fault=args.inject_fault)
    results = run_suite(args.suite, opts)
    summary = {
        "suite": args.suite,
        "fault": opts.fault,
        "passed": all(r.passed for r in results),
        "checks": [r.as_dict() for r in results],
    }
    print(json.dumps(summary, indent=2))
    return EXIT_OK if summary["passed"] else EXIT_FAIL


def _norm_lines(kind: str, norms) -> list[str]:
    semis = ", ".join(f"{s:.6g}" for s in norms.seminorms)
    return [f"{kind}: lp = {norms.lp:.6g}", f"{kind}: seminorms = [{semis}]", f"{kind}: total = {norms.total:.6g}"]


def cmd_norm(args) -> int:
    if args.func is None:
        raise UsageError("--func is required")
    alpha = args.alpha or (1.0,)
    p = 2.0 if args.p is None else args.p
    try:
        f = catalog_function(args.func, len(alpha))
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from exc
    print(f"function {args.func}, alpha = {alpha}, p = {p}")
    for line in _norm_lines("H'", h_prime_norm(f, alpha, p)):
        print(line)
    if args.theta is not None:
        for line in _norm_lines(f"B'(theta={args.theta})", b_prime_norm(f, alpha, p, args.theta)):
            print(line)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bernwidth", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, *names):
        opts = {
            "config": dict(help="JSON config file; flags override its values"),
            "alpha": dict(type=_floats, help="smoothness vector a1,a2,..."),
            "p": dict(type=_real), "q": dict(type=_real), "theta": dict(type=_real),
            "nmin": dict(type=int), "nmax": dict(type=int),
            "trials": dict(type=int), "seed": dict(type=int), "out": dict(help="output path"),
        }
        for name in names:
            p.add_argument(f"--{name}", **opts[name])

    rates = sub.add_parser("rates", help="dyadic sweep of upper/lower rate values with slope fits")
    common(rates, "config", "alpha", "p", "q", "theta", "nmin", "nmax", "trials", "seed", "out")
    rates.add_argument("--certificate", action="store_true", help="add constructive certificates (n <= 32)")
    rates.set_defaults(run=cmd_rates)

    widths = sub.add_parser("widths", help="Bernstein widths of a diagonal ellipsoid")
    widths.add_argument("--rho", type=_floats, help="semi-axes r1,r2,...")
    widths.add_argument("--n", type=int, default=1)
    common(widths, "p", "q", "trials", "seed")
    widths.set_defaults(run=cmd_widths)

    ver = sub.add_parser("verify", help="run invariant suites")
    ver.add_argument("--suite", default="all")
    ver.add_argument("--inject-fault", type=_real, default=0.0, metavar="EPS",
                     help="perturb every projection by EPS (demonstrates check sensitivity)")
    common(ver, "seed")
    ver.set_defaults(run=cmd_verify)

    norm = sub.add_parser("norm", help="primed Nikolskii/Besov norms of a catalog function")
    norm.add_argument("--func")
    common(norm, "alpha", "p", "theta")
    norm.set_defaults(run=cmd_norm)
    return ap


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    try:
        return args.run(args)
    except (ValueError, TypeError) as exc:  # includes UsageError and InapplicableRegime
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
