"""Command-line experiments: simulate, verify, simplex, limit, gas.

Exit codes: 0 on completion, 2 on bad flags or violated numeric bounds,
3 when a ``verify`` check is rejected at its significance level.
"""
from __future__ import annotations

import sys
from statistics import NormalDist

import click

from . import gas_sim, process_sim, simplex_geom
from .dist_core import poisson_limit_sweep
from .io import HISTOGRAM_CSV_SCHEMA, dumps_report, make_report, write_histogram_csv, write_rows_csv
from .stat_tests import CountHistogram

EXIT_CHECK_FAILED = 3
DEFAULT_ALPHA = 1e-3


def _floats(text: str, name: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise click.BadParameter(f"{text!r} is not a comma-separated list of numbers", param_hint=name)


def _ints(text: str, name: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise click.BadParameter(f"{text!r} is not a comma-separated list of integers", param_hint=name)


def _interval(text: str) -> tuple[float, float]:
    try:
        a, b = text.split(":")
        return float(a), float(b)
    except ValueError:
        raise click.BadParameter(f"{text!r} is not an interval a:b", param_hint="--interval")


def _region(text: str) -> gas_sim.Region:
    if text.count(":") != 1:
        raise click.BadParameter(f"{text!r} is not x0,y0,z0:x1,y1,z1", param_hint="--region")
    lo, hi = text.split(":")
    return gas_sim.Region(_floats(lo, "--region"), _floats(hi, "--region"))


def _emit(report: dict, out: str | None) -> None:
    text = dumps_report(report)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def _say(msg: str) -> None:
    click.echo(msg, err=True)


class _Preconditions:
    """Turn ValueError from the library into a usage error naming the bound."""

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc_type is not None and issubclass(exc_type, (ValueError, TypeError)):
            raise click.UsageError(str(exc)) from exc
        return False


def _z_crit(alpha: float) -> float:
    return NormalDist().inv_cdf(1.0 - alpha / 2.0)


@click.group()
@click.version_option(package_name="artifact", message="%(version)s")
def main():
    """Homogeneous Poisson process experiments."""


_seed = click.option("--seed", type=click.IntRange(min=0), required=True, help="Seed (mandatory, no hidden entropy).")
_rate = click.option("--rate", type=float, required=True, help="Events per unit time.")
_horizon = click.option("--horizon", type=float, required=True, help="Observation window length t.")
_replicas = click.option("--replicas", type=click.IntRange(min=1), default=100_000, show_default=True)
_method = click.option(
    "--method", type=click.Choice(process_sim.METHODS), default="interarrival", show_default=True
)
_alpha = click.option("--alpha", type=click.FloatRange(0, 1, min_open=True, max_open=True), default=DEFAULT_ALPHA,
                      show_default=True, help="Significance level for the verdict.")


@main.command()
@_rate
@_horizon
@_replicas
@_seed
@_method
@click.option("--out", type=click.Path(dir_okay=False), required=True, help="Histogram CSV (count,frequency).")
@click.option("--report", type=click.Path(dir_okay=False), help="Optional JSON summary.")
def simulate(rate, horizon, replicas, seed, method, out, report):
    """Replica counts over (0, horizon] as a histogram CSV."""
    with _Preconditions():
        cfg = process_sim.ProcessConfig(rate, horizon, seed, method)
        hist = CountHistogram.from_counts(process_sim.simulate_counts(cfg, replicas))
    write_histogram_csv(hist, out)
    params = dict(rate=rate, horizon=horizon, replicas=replicas, seed=seed, method=method)
    if report:
        with open(report, "w") as fh:
            fh.write(dumps_report(make_report("simulate", params, {"csv": out, "csv_schema": HISTOGRAM_CSV_SCHEMA,
                                                                   "total": hist.total})))
    _say(f"simulate: {hist.total} replicas, counts {hist.min}..{hist.max}, written to {out}")


@main.command()
@click.argument("check", type=click.Choice(["poisson", "uniformity", "rarity", "independence", "stationarity",
                                            "methods"]))
@_rate
@_horizon
@_replicas
@_seed
@_method
@_alpha
@click.option("--widths", default="0.5,0.05,0.005", show_default=True, help="Rarity bin widths, decreasing.")
@click.option("--interval", "intervals", multiple=True, help="Interval a:b (give two for independence/stationarity).")
@click.option("--count", type=click.IntRange(min=1), help="Conditioning total for uniformity (default round(mu)).")
@click.option("--bins", type=click.IntRange(min=2), default=20, show_default=True, help="Uniformity bins.")
@click.option("--out", type=click.Path(dir_okay=False), help="JSON report path (stdout if omitted).")
def verify(check, rate, horizon, replicas, seed, method, alpha, widths, intervals, count, bins, out):
    """Check a law or axiom; exit 3 when rejected at --alpha."""
    params = dict(check=check, rate=rate, horizon=horizon, replicas=replicas, seed=seed, method=method, alpha=alpha)
    with _Preconditions():
        cfg = process_sim.ProcessConfig(rate, horizon, seed, method)
        if check == "poisson":
            rep = process_sim.verify_poisson_law(cfg, replicas)
            result, passed = rep.to_dict(), not rep.gof.rejects(alpha)
            summary = f"chi2={rep.gof.statistic:.3f} dof={rep.gof.dof} p={rep.gof.p_value:.4g}"
        elif check == "uniformity":
            gof = process_sim.verify_conditional_uniformity(cfg, replicas, count, bins)
            result, passed = {"gof": gof.to_dict()}, not gof.rejects(alpha)
            params.update(count=count, bins=bins)
            summary = f"chi2={gof.statistic:.3f} dof={gof.dof} p={gof.p_value:.4g}"
        elif check == "rarity":
            ws = _floats(widths, "--widths")
            rows = process_sim.axiom_rarity_check(cfg, ws, replicas)
            z = _z_crit(alpha)
            ratios = [r.ratio for r in rows]
            decreasing = all(a is not None and b is not None and b < a for a, b in zip(ratios, ratios[1:]))
            within = all(r.z_score() is not None and r.z_score() <= z for r in rows)
            result = {"rows": [r.to_dict() for r in rows], "decreasing": decreasing, "z_critical": z}
            passed = decreasing and within
            params.update(widths=ws)
            summary = "ratios " + ", ".join("undefined" if r is None else f"{r:.4g}" for r in ratios)
        elif check in ("independence", "stationarity"):
            pair = [_interval(s) for s in intervals] or [(0.0, horizon / 3), (2 * horizon / 3, horizon)]
            params.update(intervals=pair)
            if check == "independence":
                res = process_sim.axiom_independence_check(cfg, pair, replicas)
                bound = _z_crit(alpha) * res.std_error
                passed = res.correlation is not None and abs(res.correlation) < bound
                result = {**res.to_dict(), "bound": bound}
                summary = f"corr={res.correlation} bound={bound:.4g}"
            else:
                gof = process_sim.axiom_stationarity_check(cfg, pair, replicas)
                result, passed = {"gof": gof.to_dict()}, not gof.rejects(alpha)
                summary = f"chi2={gof.statistic:.3f} dof={gof.dof} p={gof.p_value:.4g}"
        else:
            gof = process_sim.compare_methods(cfg, replicas)
            result, passed = {"gof": gof.to_dict()}, not gof.rejects(alpha)
            summary = f"chi2={gof.statistic:.3f} dof={gof.dof} p={gof.p_value:.4g}"
    _emit(make_report(f"verify.{check}", params, result, passed), out)
    _say(f"verify {check}: {'PASS' if passed else 'FAIL'} ({summary})")
    if not passed:
        sys.exit(EXIT_CHECK_FAILED)


@main.command()
@click.option("--dim", type=click.IntRange(min=1), required=True, help="Largest dimension x; rows for 1..x.")
@click.option("--extent", type=float, required=True, help="Extent t of the ordered region.")
@click.option("--mc-samples", type=click.IntRange(min=1000), default=1_000_000, show_default=True)
@click.option("--quad-steps", type=click.IntRange(min=10), default=10_000, show_default=True)
@_seed
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), help="Output path (stdout if omitted, json only).")
def simplex(dim, extent, mc_samples, quad_steps, seed, fmt, out):
    """Exact vs recursive vs Monte Carlo volume of 0 < t1 < ... < tx <= t."""
    rows = []
    with _Preconditions():
        for x in range(1, dim + 1):
            spec = simplex_geom.OrthantSpec(x, extent)
            est = simplex_geom.orthant_volume_mc(spec, mc_samples, seed)
            rows.append(
                dict(
                    dimension=x,
                    extent=extent,
                    exact=simplex_geom.orthant_volume_exact(spec),
                    recursive=simplex_geom.orthant_volume_recursive(spec, quad_steps),
                    mc=est.value,
                    mc_std_error=est.std_error,
                    mc_samples=est.samples,
                )
            )
    if fmt == "csv":
        if not out:
            raise click.UsageError("--format csv needs --out")
        write_rows_csv(rows, out)
    else:
        params = dict(dim=dim, extent=extent, mc_samples=mc_samples, quad_steps=quad_steps, seed=seed)
        _emit(make_report("simplex", params, {"rows": rows}), out)
    for r in rows:
        _say(f"x={r['dimension']}: exact={r['exact']:.10g} recursive={r['recursive']:.10g} "
             f"mc={r['mc']:.6g}±{r['mc_std_error']:.2g}")


@main.command()
@click.option("--mu", type=float, required=True, help="Fixed product n * p.")
@click.option("--n", "n_values", required=True, help="Comma-separated trial counts, e.g. 10,100,1000.")
@click.option("--out", type=click.Path(dir_okay=False), help="JSON output (stdout if omitted).")
def limit(mu, n_values, out):
    """Exact TV distance between Binomial(n, mu/n) and Poisson(mu)."""
    ns = _ints(n_values, "--n")
    with _Preconditions():
        sweep = poisson_limit_sweep(mu, ns)
    rows = [{"n": p.n, "tv": p.tv} for p in sweep]
    _emit(make_report("limit", {"mu": mu, "n": ns}, {"sweep": rows}), out)
    for r in rows:
        _say(f"n={r['n']}: tv={r['tv']:.6g}")


@main.group()
def gas():
    """Ideal-gas sub-volume experiments."""


_box = click.option("--box", default="10,10,10", show_default=True, help="Box extents Lx,Ly,Lz.")
_region_opt = click.option("--region", "regions", multiple=True, required=True,
                           help="Sub-box x0,y0,z0:x1,y1,z1 (repeatable).")


@gas.command("binomial")
@click.option("--n-particles", type=click.IntRange(min=0), required=True)
@_box
@_region_opt
@_replicas
@_seed
@_alpha
@click.option("--hist-out", type=click.Path(dir_okay=False), help="Region-count histogram CSV.")
@click.option("--out", type=click.Path(dir_okay=False))
def gas_binomial(n_particles, box, regions, replicas, seed, alpha, hist_out, out):
    """Region counts at fixed N against Binomial(N, v/V)."""
    with _Preconditions():
        cfg = gas_sim.GasConfig(gas_sim.Box(_floats(box, "--box")), n_particles=n_particles, seed=seed)
        if len(regions) != 1:
            raise ValueError("the binomial experiment takes exactly one --region")
        exp = gas_sim.conditional_binomial_experiment(cfg, _region(regions[0]), replicas)
    if hist_out:
        write_histogram_csv(exp.histogram, hist_out)
    params = dict(n_particles=n_particles, box=box, region=regions[0], replicas=replicas, seed=seed, alpha=alpha)
    result = {"law": {"n": exp.law.n, "p": exp.law.p}, "gof": exp.gof.to_dict()}
    _emit(make_report("gas.binomial", params, result, not exp.gof.rejects(alpha)), out)
    _say(f"gas binomial: p={exp.gof.p_value:.4g} against Binomial({exp.law.n}, {exp.law.p:.6g})")


@gas.command("multinomial")
@click.option("--n-particles", type=click.IntRange(min=0), required=True)
@_box
@_region_opt
@_replicas
@_seed
@_alpha
@click.option("--joint-out", type=click.Path(dir_okay=False), help="Joint histogram CSV.")
@click.option("--out", type=click.Path(dir_okay=False))
def gas_multinomial(n_particles, box, regions, replicas, seed, alpha, joint_out, out):
    """Joint counts in disjoint regions at fixed N against the multinomial law."""
    with _Preconditions():
        cfg = gas_sim.GasConfig(gas_sim.Box(_floats(box, "--box")), n_particles=n_particles, seed=seed)
        exp = gas_sim.multinomial_partition_experiment(cfg, [_region(r) for r in regions], replicas)
    k = len(regions)
    if joint_out:
        names = [f"x{i + 1}" for i in range(k)] + ["remainder", "frequency"]
        write_rows_csv([dict(zip(names, row)) for row in exp.joint_rows()], joint_out)
    params = dict(n_particles=n_particles, box=box, regions=list(regions), replicas=replicas, seed=seed, alpha=alpha)
    result = {
        "probs": list(exp.law.probs),
        "gof": exp.gof.to_dict(),
        "marginals": [g.to_dict() for _, g in exp.marginals],
    }
    passed = not exp.gof.rejects(alpha)
    _emit(make_report("gas.multinomial", params, result, passed), out)
    _say(f"gas multinomial: joint p={exp.gof.p_value:.4g} over {exp.gof.bins_used} cells")


@gas.command("thermo")
@click.option("--density", type=float, required=True)
@click.option("--v", "v", type=float, required=True, help="Sub-volume v.")
@click.option("--pairs", required=True, help="N:V pairs, e.g. 10:10,100:100,1000:1000.")
@click.option("--out", type=click.Path(dir_okay=False))
def gas_thermo(density, v, pairs, out):
    """Exact TV between Binomial(N, v/V) and Poisson(density * v) along N/V = density."""
    try:
        nv = [(int(a), float(b)) for a, b in (p.split(":") for p in pairs.split(","))]
    except ValueError:
        raise click.BadParameter(f"{pairs!r} is not a list of N:V pairs", param_hint="--pairs")
    with _Preconditions():
        sweep = gas_sim.thermodynamic_limit_sweep(density, v, nv)
    rows = [{"n": p.n, "volume": p.volume, "tv": p.tv} for p in sweep]
    _emit(make_report("gas.thermo", {"density": density, "v": v, "pairs": nv}, {"sweep": rows}), out)
    for r in rows:
        _say(f"N={r['n']} V={r['volume']:g}: tv={r['tv']:.6g}")


@gas.command("condition")
@click.option("--density", type=float, required=True)
@_box
@_region_opt
@_replicas
@_seed
@_alpha
@click.option("--total", type=click.IntRange(min=0), help="Conditioning total (default floor(density * V)).")
@click.option("--out", type=click.Path(dir_okay=False))
def gas_condition(density, box, regions, replicas, seed, alpha, total, out):
    """Fixed-density counts given the total vs fixed N = total (two-sample chi-square)."""
    with _Preconditions():
        cfg = gas_sim.GasConfig(gas_sim.Box(_floats(box, "--box")), density=density, seed=seed)
        if len(regions) != 1:
            raise ValueError("the conditioning experiment takes exactly one --region")
        gof, used = gas_sim.conditioning_equivalence(cfg, _region(regions[0]), replicas, total)
    params = dict(density=density, box=box, region=regions[0], replicas=replicas, seed=seed, alpha=alpha, total=total)
    _emit(make_report("gas.condition", params, {"gof": gof.to_dict(), "conditioned_replicas": used},
                      not gof.rejects(alpha)), out)
    _say(f"gas condition: p={gof.p_value:.4g} from {used} conditioned replicas")


if __name__ == "__main__":
    main()
