"""Command-line front end.  Every command writes a JSON report (stdout or --out)
and a one-line human summary per check on stderr; exit code 0 iff all pass."""

from __future__ import annotations

import hashlib
import json
import os
import sys
from dataclasses import asdict

import click
import numpy as np

from .coeff import Coeff

SCHEMA_VERSION = "1"
THREADS_ENV = "BVLOOPS_THREADS"


def _config_hash(payload: dict) -> str:
    return hashlib.sha256(json.dumps(payload, sort_keys=True, default=str).encode()).hexdigest()[:16]


def _emit(command: str, params: dict, reports: list, out: str | None) -> int:
    doc = {
        "schema-version": SCHEMA_VERSION,
        "command": command,
        "config": params,
        "config-hash": _config_hash({"command": command, **params}),
        "threads": int(os.environ.get(THREADS_ENV, "1")),
        "reports": [r.to_json() if hasattr(r, "to_json") else r for r in reports],
    }
    passed = all((r.passed if hasattr(r, "passed") else r.get("status") == "pass") for r in reports)
    doc["status"] = "pass" if passed else "fail"
    text = json.dumps(doc, indent=2, sort_keys=True, default=str)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        click.echo(text)
    for r in reports:
        d = r.to_json() if hasattr(r, "to_json") else r
        click.echo(f"[{d['status'].upper()}] {d['identity']} n={d['dimension']}", err=True)
    return 0 if passed else 1


def parse_range(text: str) -> list:
    """``"3..6"``, ``"4"`` or ``"3,5"``."""
    try:
        if ".." in text:
            a, b = text.split("..")
            vals = list(range(int(a), int(b) + 1))
        else:
            vals = [int(x) for x in text.split(",")]
    except ValueError:
        raise click.BadParameter(f"cannot parse dimension range {text!r}") from None
    if not vals:
        raise click.BadParameter("empty dimension range")
    return vals


def parse_seq(text: str | None) -> list | None:
    if text is None:
        return None
    try:
        return [Coeff.parse(x.strip()) for x in text.split(",") if x.strip()]
    except ValueError as e:
        raise click.BadParameter(str(e)) from None


@click.group()
def main():
    """Verification tools for BV/BF loop observables."""


@main.command("verify-master")
@click.option("--n", "n_range", default="3..6", show_default=True, help="dimension range, e.g. 3..6")
@click.option("--backend", type=click.Choice(["abstract", "gl2"]), default="abstract", show_default=True)
@click.option("--tol", type=float, default=1e-12, show_default=True)
@click.option("--max-n", type=int, default=8, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def verify_master_cmd(n_range, backend, tol, max_n, out):
    """Master equation, Delta S, superfield variations and the BRST tower."""
    from .reports import (brst_tower_check, verify_laplacian, verify_master,
                          verify_superfield_variations)

    dims = parse_range(n_range)
    for n in dims:
        if not 3 <= n <= max_n:
            raise click.BadParameter(f"dimension {n} outside 3..{max_n}", param_hint="--n")
    reports = []
    for n in dims:
        reports.append(verify_master(n, backend, tol))
        reports.append(verify_laplacian(n))
        reports.append(verify_superfield_variations(n))
        reports.append(brst_tower_check(n))
    sys.exit(_emit("verify-master", {"n": dims, "backend": backend, "tol": tol}, reports, out))


@main.command("expand")
@click.option("--family", type=click.Choice(["hhat", "hhat-odd", "htilde"]), required=True)
@click.option("--n", type=int, required=True)
@click.option("--K", "K", type=int, default=2, show_default=True)
@click.option("--lambda", "lam", default=None, help="comma-separated lambda_1, lambda_2, ...")
@click.option("--mu", default="auto", show_default=True, help="comma-separated mu_1, ... or 'auto'")
@click.option("--golden", type=click.Path(exists=True, dir_okay=False), default=None,
              help="compare against a stored snapshot")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def expand_cmd(family, n, K, lam, mu, golden, out):
    """Ghost-number-zero component expansion of an observable."""
    from .bv import BVContext
    from .loops import VanishingInteraction
    from .observables import build_observable, family_parameters

    if K < 0:
        raise click.BadParameter("K must be >= 0", param_hint="--K")
    lambdas = parse_seq(lam)
    mus = None if mu == "auto" else parse_seq(mu)
    try:
        series = build_observable(BVContext(n), family, K, lambdas, mus)
    except VanishingInteraction as e:
        raise click.UsageError(f"vanishing interaction: {e}") from None
    except ValueError as e:
        raise click.UsageError(str(e)) from None
    lam_used, mu_used = family_parameters(family, n, lambdas, mus)
    doc = {
        "schema-version": SCHEMA_VERSION,
        "command": "expand",
        "config": {"family": family, "n": n, "K": K, "lambda": lam, "mu": mu},
        "lambda": {str(k): str(v) for k, v in sorted(lam_used.items())},
        "mu": None if mu_used is None else {str(k): str(v) for k, v in sorted(mu_used.items())},
        "series": series.to_json(),
        "terms": len(series),
    }
    doc["config-hash"] = _config_hash(doc["config"])
    status = "pass"
    if golden:
        with open(golden) as fh:
            ref = json.load(fh)
        same = ref.get("series") == doc["series"]
        doc["golden-match"] = same
        status = "pass" if same else "fail"
    doc["status"] = status
    text = json.dumps(doc, indent=2, sort_keys=True)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        click.echo(text)
    click.echo(f"[{status.upper()}] expand {family} n={n} K={K}: {len(series)} terms", err=True)
    sys.exit(0 if status == "pass" else 1)


@main.command("closedness")
@click.option("--family", type=click.Choice(["hhat", "hhat-odd", "htilde", "h-even-part"]), required=True)
@click.option("--n", type=int, required=True)
@click.option("--K", "K", type=int, default=3, show_default=True)
@click.option("--lambda", "lam", default=None)
@click.option("--mu", default="auto", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def closedness_cmd(family, n, K, lam, mu, out):
    """(d + delta) of a family, with per-face attribution of any residual."""
    from .loops import VanishingInteraction
    from .reports import closedness_report

    if K < 1:
        raise click.BadParameter("K must be >= 1", param_hint="--K")
    try:
        rep = closedness_report(family, n, K, parse_seq(lam), None if mu == "auto" else parse_seq(mu))
    except VanishingInteraction as e:
        raise click.UsageError(f"vanishing interaction: {e}") from None
    except ValueError as e:
        raise click.UsageError(str(e)) from None
    sys.exit(_emit("closedness", {"family": family, "n": n, "K": K, "lambda": lam, "mu": mu},
                   [rep], out))


@main.command("theorem4")
@click.option("--parity", type=click.Choice(["odd", "even"]), required=True)
@click.option("--lambda", "lam", required=True)
@click.option("--mu", default=None)
@click.option("--length", type=int, default=None)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def theorem4_cmd(parity, lam, mu, length, out):
    """Forced mu for given lambda, and admissibility of a supplied mu."""
    from .reports import theorem4_report

    rep = theorem4_report(parity, parse_seq(lam), parse_seq(mu), length)
    sys.exit(_emit("theorem4", {"parity": parity, "lambda": lam, "mu": mu, "length": length},
                   [rep], out))


def _load_fixture(path):
    from .fixtures import FixtureError, parse_fixture

    with open(path) as fh:
        text = fh.read()
    try:
        return parse_fixture(text, path)
    except FixtureError as e:
        raise click.UsageError(str(e)) from None


@main.command("holonomy")
@click.option("--curve", "curve_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--fixture", "fixture_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--k", "kmax", type=int, default=1, show_default=True, help="iterated integrals h_1..h_k")
@click.option("--steps", type=int, default=None)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def holonomy_cmd(curve_path, fixture_path, kmax, steps, out):
    """Holonomy and iterated integrals of a fixture connection along a curve (n = 3)."""
    from .numeric import (DEFAULT, DataError, conventional_holonomy, holonomy,
                          iterated_integral, read_curve_csv)

    fx = _load_fixture(fixture_path)
    try:
        curve = read_curve_csv(curve_path)
        conn = fx.connection()
        for x in curve.points[:: max(1, curve.samples // 8)]:
            conn.validate(x)
        H = holonomy(curve, conn, steps)
        U = conventional_holonomy(curve, conn)
        audit = float(np.max(np.abs(H @ U - np.eye(conn.N))))
        values = {}
        if conn.B is not None and conn.n == 3:
            for k in range(1, kmax + 1):
                values[f"h{k}"] = iterated_integral(curve, conn, k)
    except DataError as e:
        raise click.UsageError(str(e)) from None
    ok = audit < 1e-8
    rep = {"identity": "holonomy", "dimension": conn.n, "status": "pass" if ok else "fail",
           "holonomy": H.tolist(), "trace": float(np.trace(H)),
           "convention-audit": audit, "iterated-integrals": values,
           "numeric-config": asdict(DEFAULT)}
    sys.exit(_emit("holonomy", {"curve": curve_path, "fixture": fixture_path, "k": kmax,
                                "steps": steps}, [rep], out))


@main.command("linking")
@click.option("--curve", "curve_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--eps", type=float, default=None, help="framing offset (default 0.05 x diameter)")
@click.option("--points", type=int, default=None)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def linking_cmd(curve_path, eps, points, out):
    """Gauss linking integral of a framed curve with its companion."""
    from .numeric import DataError, FramingError, linking_integral, read_curve_csv

    try:
        curve = read_curve_csv(curve_path)
        res = linking_integral(curve, eps, points)
    except (DataError, FramingError) as e:
        raise click.UsageError(str(e)) from None
    rep = {"identity": "linking-integral", "dimension": 3,
           "status": "pass" if abs(res.deviation) < 1e-3 else "fail",
           "value": res.value, "integer": res.integer, "deviation": res.deviation,
           "min-distance": res.min_distance}
    sys.exit(_emit("linking", {"curve": curve_path, "eps": eps, "points": points}, [rep], out))


if __name__ == "__main__":
    main()
