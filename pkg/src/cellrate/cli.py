"""``cellrate`` command line: figure tables as CSV and a validation run."""

from __future__ import annotations

import argparse
import csv
import math
import sys
from pathlib import Path

import numpy as np

from . import multicell, singlecell
from .channel import RayleighPowerFading, UserLocation
from .errors import CellrateError, ScenarioError
from .montecarlo import SimConfig, simulate_single_cell
from .numerics import integrate
from .scenario import bundled_path, load_scenario
from .schedulers import Greedy, ProportionalFair, RoundRobin

NATS_TO_BITS = 1.0 / math.log(2.0)
EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if math.isinf(x):
        return "inf"
    return f"{float(x):.10g}"


def write_csv(path: Path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _span(text: str):
    try:
        lo, hi, n = text.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi:n, got {text!r}") from None
    if not (0 < lo < hi and n >= 2):
        raise argparse.ArgumentTypeError("need 0 < lo < hi and n >= 2")
    return np.linspace(lo, hi, n)


def _empirical_density(samples, grid):
    h = np.diff(grid)
    edges = np.concatenate([[grid[0]], 0.5 * (grid[1:] + grid[:-1]), [grid[-1]]])
    counts, _ = np.histogram(samples, bins=edges)
    return counts / (samples.size * np.diff(edges)) if h.size else counts


def _fig_pdf(sf, args, scheduler):
    an = singlecell.SingleCellAnalysis(sf.scenario, sf.fading, sf.rate_grid)
    pdf = singlecell.rate_pdf(scheduler, an, args.greedy_model)
    cfg = SimConfig(args.seed, args.drops, sf.scenario, sf.fading, scheduler)
    rates, _ = simulate_single_cell(cfg)
    emp = _empirical_density(rates, sf.rate_grid)
    rows = zip(pdf.grid, pdf.grid * NATS_TO_BITS, pdf.values, emp)
    return ["rate_nats", "rate_bits", "pdf_analytic", "pdf_empirical"], rows


def _fig3(sf, args):
    an = singlecell.SingleCellAnalysis(sf.scenario, sf.fading, sf.rate_grid)
    radii = np.linspace(0.0, sf.scenario.radius, 41)
    area = singlecell.area_fraction(radii, sf.scenario.radius)
    mc = singlecell.effective_coverage_cdf(Greedy(), an, radii, "mc", args.drops, args.seed)
    iid = singlecell.effective_coverage_cdf(Greedy(), an, radii, "iid")
    ring = singlecell.effective_coverage_cdf(Greedy(), an, radii, "ring")
    header = ["radius_m", "area_fraction", "greedy_served_mc", "greedy_served_iid", "greedy_served_ring"]
    return header, zip(radii, area, mc, iid, ring)


def _fig4(sf, args):
    sigmas = args.sigma_sweep if args.sigma_sweep is not None else np.linspace(20.0, 1000.0, 40)
    sc = sf.scenario
    rows = []
    for s in list(sigmas) + [math.inf]:
        dens = multicell.SchedulerDensity(s, sc.radius, sc.user_min_distance)
        r = multicell.cell_average_rate(sc, dens, sf.fading, interference_limited=args.interference_limited,
                                        tol=1e-4)
        rows.append((s, r, r * NATS_TO_BITS))
    return ["sigma_m", "avg_rate_nats", "avg_rate_bits"], rows


def _fig_sweep(sf, args, default_policy):
    mode = args.policy or default_policy
    ref_radius = args.ref_radius or (4000.0 if mode == "edge-scaled" else sf.scenario.radius)
    policy = multicell.PowerPolicy(mode, args.ref_power, ref_radius)
    radii = args.radii if args.radii is not None else np.linspace(250.0, 4000.0, 16)
    scheds = [RoundRobin(), ProportionalFair(), Greedy()]
    rows = multicell.tradeoff_sweep(radii, scheds, policy, sf.scenario, sf.fading,
                                    args.interference_limited, args.greedy_model)
    header = ["radius_m", "num_users", "power_w"]
    for s in scheds:
        n = s.name
        header += [f"{n}_sigma_m", f"{n}_multi_nats", f"{n}_single_nats", f"{n}_multi_bits", f"{n}_single_bits"]
    out = []
    k = len(scheds)
    for i in range(0, len(rows), k):
        chunk = rows[i:i + k]
        line = [chunk[0].radius_m, chunk[0].num_users, chunk[0].power_w]
        for r in chunk:
            line += [r.sigma_m, r.avg_rate_multi, r.avg_rate_single,
                     r.avg_rate_multi * NATS_TO_BITS, r.avg_rate_single * NATS_TO_BITS]
        out.append(line)
    return header, out


FIGURES = {
    1: lambda sf, a: _fig_pdf(sf, a, RoundRobin()),
    2: lambda sf, a: _fig_pdf(sf, a, Greedy()),
    3: _fig3,
    4: _fig4,
    5: lambda sf, a: _fig_sweep(sf, a, "fixed"),
    6: lambda sf, a: _fig_sweep(sf, a, "edge-scaled"),
}


def cmd_fig(args) -> int:
    sf = load_scenario(args.scenario)
    if args.seed is None:
        args.seed = sf.seed
    if args.drops is None:
        args.drops = sf.drops
    header, rows = FIGURES[args.figure](sf, args)
    out = Path(args.out) / f"fig{args.figure}.csv"
    write_csv(out, header, rows)
    print(out)
    return EXIT_OK


def validation_checks(sf):
    """Cheap invariant checks; yields ``(name, passed, detail)``."""
    sc, fad = sf.scenario, sf.fading
    grid = np.linspace(0.0, 15.0, 61)
    an = singlecell.SingleCellAnalysis(sc, fad, grid)
    rayleigh = isinstance(fad, RayleighPowerFading)

    wide = an.with_grid(np.linspace(0.0, singlecell._survival_rate_grid(an)[-1], 2001))
    for name, pdf in (("rr", singlecell.rr_rate_pdf(wide)), ("pf", singlecell.pf_rate_pdf(wide)),
                      ("greedy", singlecell.greedy_rate_pdf(wide))):
        m = pdf.total_mass
        yield f"{name} pdf mass", abs(m - 1) < 1e-4, f"{m:.9f}"
    if rayleigh:
        gen = singlecell.rr_rate_density(grid[1:], an)
        cf = singlecell.rr_rate_pdf_rayleigh(grid[1:], sc, mean_power=fad.mean)
        err = float(np.max(np.abs(gen / cf - 1)))
        yield "rr closed form vs quadrature", err < 1e-6, f"max rel {err:.2e}"
    worst, worst_eq = 0.0, 0.0
    for loc in (UserLocation(500.0, 0.0), UserLocation(300.0, 400.0), UserLocation(-650.0, 210.0)):
        p = multicell.InterferenceProfile.at(sc.replace(), _scaled(loc, sc), fad.mean)
        worst = max(worst, abs(p.coefficients.sum() - 1) / max(1.0, p.conditioning))
        if rayleigh:
            a = multicell.avg_rate_interference_limited(p)
            b = multicell.mean_rate_at(p, 0.0)
            worst_eq = max(worst_eq, abs(a / b - 1))
    yield "coefficient sums", worst < 1e-12, f"max |sum C - 1| / max|C| {worst:.2e}"
    if rayleigh:
        yield "interference-limited mean: closed form vs survival", worst_eq < 1e-6, f"max rel {worst_eq:.2e}"
    for s in (10.0, 100.0, 1000.0, math.inf):
        d = multicell.SchedulerDensity(s, sc.radius, sc.user_min_distance)
        m = integrate(lambda x: float(d.pdf(x)), d.d0, d.rho, points=[] if d.uniform else [s])
        yield f"scheduler density mass sigma={s:g}", abs(m - 1) < 1e-6, f"{m:.9f}"


def _scaled(loc, sc):
    k = sc.radius / 1000.0
    return UserLocation(loc.u * k, loc.v * k)


def cmd_validate(args) -> int:
    sf = load_scenario(args.scenario)
    ok = True
    for name, passed, detail in validation_checks(sf):
        ok &= bool(passed)
        print(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")
    return EXIT_OK if ok else EXIT_INPUT


class _Parser(argparse.ArgumentParser):
    # usage errors are input errors (exit 1), not argparse's default 2
    def error(self, message):
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="cellrate", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)
    f = sub.add_parser("fig", help="write the table behind one figure as CSV")
    f.add_argument("figure", type=int, choices=sorted(FIGURES))
    f.add_argument("scenario", nargs="?", default=None,
                   help="scenario file (default: bundled paper.scenario)")
    f.add_argument("--out", default=".", help="output directory")
    f.add_argument("--seed", type=int)
    f.add_argument("--drops", type=int)
    f.add_argument("--interference-limited", action="store_true")
    f.add_argument("--sigma-sweep", type=_span, metavar="LO:HI:N")
    f.add_argument("--radii", type=_span, metavar="LO:HI:N")
    f.add_argument("--policy", choices=["fixed", "edge-scaled"])
    f.add_argument("--ref-power", type=float, default=1.0)
    f.add_argument("--ref-radius", type=float)
    f.add_argument("--greedy-model", choices=list(singlecell.GREEDY_MODELS), default="iid")
    f.set_defaults(func=cmd_fig)
    v = sub.add_parser("validate", help="run the invariant checks on a scenario")
    v.add_argument("scenario", nargs="?", default=None)
    v.set_defaults(func=cmd_validate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.scenario is None:
        args.scenario = bundled_path()
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"cellrate: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CellrateError as exc:
        print(f"cellrate: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, TypeError, OSError) as exc:
        print(f"cellrate: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
