"""``qmreadout`` command line: fidelity curves, single runs, oracle checks, optimisation.

Exit status is 0 on success, 2 for invalid input and 3 when a run breaches
its acceptance threshold.  Without ``--out`` results go to
``$QMREADOUT_OUTPUT_DIR/<command>...`` when that variable is set and to
stdout otherwise.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import sys
from pathlib import Path

import click
import numpy as np

from . import optimize as opt
from .protocols import (
    SingleCellSpec,
    TwoCellSpec,
    selective_squeezing,
    single_cell_readout,
    two_cell_pipeline,
    two_cell_readout,
    uniform_squeezing,
)

OUTPUT_DIR_ENV = "QMREADOUT_OUTPUT_DIR"
EXIT_VALIDATION = 2
EXIT_THRESHOLD = 3
OPTIMIZE_THRESHOLD = 1e-6
CURVE_COLUMNS = ("A", "kappa_sq", "gain", "squeeze_V", "nbar", "fidelity", "classical_bound")
CURVE_SCHEMES = ("single", "double", "single-squeezed")


def load_schema(command: str) -> dict:
    """JSON schema shipped for ``command`` (e.g. ``"fidelity-curve"``)."""
    from importlib.resources import files

    name = command.replace("-", "_") + ".schema.json"
    return json.loads(files("qmreadout").joinpath("schemas", name).read_text(encoding="utf-8"))


def num(x) -> float | None:
    """Round to 12 significant digits; ``None`` passes through."""
    if x is None:
        return None
    v = float(format(float(x), ".12g"))
    return v + 0.0  # no negative zero


def fmt(x) -> str:
    return "" if x is None else format(num(x), ".12g")


def _array(a) -> list:
    a = np.asarray(a, dtype=float)
    if a.ndim == 1:
        return [num(v) for v in a]
    return [_array(row) for row in a]


def _json(doc) -> str:
    return json.dumps(doc, indent=2) + "\n"


def _emit(text: str, out: str | None, default_name: str) -> None:
    if out is None and os.environ.get(OUTPUT_DIR_ENV):
        out = str(Path(os.environ[OUTPUT_DIR_ENV]) / default_name)
    if out is None or out == "-":
        click.echo(text, nl=False)
        return
    try:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise click.UsageError(f"cannot write {out}: {exc}") from exc


def _check_loss(A: float) -> None:
    if not 0.0 <= A <= opt.A_MAX:
        raise click.BadParameter(f"loss must lie in [0, {opt.A_MAX}], got {A}", param_hint="--loss")


@click.group()
@click.version_option(package_name="artifact")
def main():
    """Gaussian simulation of single-passage quantum memory readout."""


# ---------------------------------------------------------------------------
# fidelity-curve


def curve_row(scheme: str, A: float) -> dict:
    if scheme == "single":
        o = opt.single_cell_lossy(A)
    elif scheme == "double":
        o = opt.two_cell_lossy(A)
    else:
        o = opt.selective_squeeze_lossy(A)
    return {
        "A": A,
        "kappa_sq": o.kappa_sq,
        "gain": o.amp_gain,
        "squeeze_V": o.squeeze_V,
        "nbar": o.nbar,
        "fidelity": o.fidelity,
        "classical_bound": opt.classical_benchmark(),
    }


def fidelity_curve(scheme: str, a_min: float, a_max: float, steps: int) -> list[dict]:
    if scheme not in CURVE_SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    if not (0.0 <= a_min < a_max <= opt.A_MAX):
        raise ValueError(f"need 0 <= a_min < a_max <= {opt.A_MAX}")
    if steps < 2:
        raise ValueError("steps must be >= 2")
    return [curve_row(scheme, float(A)) for A in np.linspace(a_min, a_max, steps)]


def render_curve(rows: list[dict], fmt_name: str, config: dict) -> str:
    if fmt_name == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CURVE_COLUMNS)
        for r in rows:
            w.writerow([fmt(r[c]) for c in CURVE_COLUMNS])
        return buf.getvalue()
    doc = {
        "command": "fidelity-curve",
        "config": config,
        "columns": list(CURVE_COLUMNS),
        "rows": [{c: num(r[c]) for c in CURVE_COLUMNS} for r in rows],
    }
    return _json(doc)


@main.command("fidelity-curve")
@click.option("--scheme", type=click.Choice(CURVE_SCHEMES), default="single", show_default=True)
@click.option("--a-min", type=float, default=0.0, show_default=True)
@click.option("--a-max", type=float, default=0.95, show_default=True)
@click.option("--steps", type=int, default=200, show_default=True)
@click.option("--format", "fmt_name", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
@click.option("--out", type=str, default=None, help="Output file ('-' for stdout).")
def cmd_fidelity_curve(scheme, a_min, a_max, steps, fmt_name, out):
    """Optimal fidelity against wall loss A (closed forms)."""
    try:
        rows = fidelity_curve(scheme, a_min, a_max, steps)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc
    config = {"scheme": scheme, "a_min": num(a_min), "a_max": num(a_max), "steps": steps}
    _emit(render_curve(rows, fmt_name, config), out, f"fidelity_curve_{scheme}.{fmt_name}")


# ---------------------------------------------------------------------------
# run


def _state_doc(state) -> dict:
    return {"labels": list(state.labels), "mean": _array(state.mean), "cov": _array(state.cov)}


def run_report(scheme: str, kappa: float | None, A: float, mean, kappa2: float | None = None,
               amp: float | None = None, squeeze_uniform: float | None = None,
               squeeze_selective: float | None = None) -> dict:
    if not 0.0 <= A < 1.0:
        raise ValueError(f"loss coefficient must lie in [0, 1), got {A}")
    mean = np.asarray(mean, dtype=float)
    if scheme == "single":
        if squeeze_uniform is not None and squeeze_selective is not None:
            raise ValueError("choose one squeezing scheme")
        squeeze = None
        if squeeze_uniform is not None:
            squeeze = uniform_squeezing(squeeze_uniform)
        elif squeeze_selective is not None:
            squeeze = selective_squeezing(squeeze_selective)
        k = math.sqrt(2.0 / (1.0 - A)) if kappa is None else kappa
        spec = SingleCellSpec(k, A, squeeze, amp)
        res = single_cell_readout(spec, atomic_mean=mean)
        params = {"kappa": num(k), "loss": num(A), "mean": _array(mean), "amp_gain": num(amp),
                  "squeeze_uniform_r": num(squeeze_uniform), "squeeze_selective_V": num(squeeze_selective)}
    elif scheme == "double":
        if amp is not None or squeeze_uniform is not None or squeeze_selective is not None:
            raise ValueError("the two-cell scheme takes no amplifier or squeezing")
        base = TwoCellSpec.unit_gain(A)
        spec = TwoCellSpec(base.kappa1 if kappa is None else kappa, base.kappa2 if kappa2 is None else kappa2, A)
        res = two_cell_readout(spec, atomic_mean=mean)
        params = {"kappa": num(spec.kappa1), "kappa2": num(spec.kappa2), "loss": num(A), "mean": _array(mean)}
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    return {
        "command": "run",
        "scheme": scheme,
        "params": params,
        "output": _state_doc(res.output),
        "aux": _state_doc(res.aux),
        "memory": _state_doc(res.memory),
        "nbar": num(res.nbar),
        "fidelity": num(res.fidelity),
        "gain": _array(res.gain),
    }


@main.command("run")
@click.option("--scheme", type=click.Choice(["single", "double"]), default="single", show_default=True)
@click.option("--kappa", type=float, default=None, help="Coupling (first cell for double); unit gain if omitted.")
@click.option("--kappa2", type=float, default=None, help="Second-cell coupling (double only).")
@click.option("--loss", type=float, default=0.0, show_default=True)
@click.option("--mean", type=(float, float), default=(0.0, 0.0), show_default=True,
              help="Atomic input mean (x, p).")
@click.option("--amp", type=float, default=None, help="Amplifier gain on the readout arm.")
@click.option("--squeeze-uniform", type=float, default=None, help="Squeeze every light x by r.")
@click.option("--squeeze-selective", type=float, default=None,
              help="x_L, x_M variance V; p~ modes at zero variance.")
@click.option("--out", type=str, default=None)
def cmd_run(scheme, kappa, kappa2, loss, mean, amp, squeeze_uniform, squeeze_selective, out):
    """One readout: output, anti-clone and memory states, noise, fidelity, gain."""
    try:
        doc = run_report(scheme, kappa, loss, mean, kappa2, amp, squeeze_uniform, squeeze_selective)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc
    _emit(_json(doc), out, f"run_{scheme}.json")


# ---------------------------------------------------------------------------
# oracle-check


def _int_list(ctx, param, value):
    if value is None:
        return None
    try:
        Ns = [int(v) for v in value.split(",") if v.strip()]
    except ValueError as exc:
        raise click.BadParameter("expected comma-separated integers") from exc
    if not Ns or any(n < 1 for n in Ns) or any(b <= a for a, b in zip(Ns, Ns[1:])):
        raise click.BadParameter("slice counts must be positive and increasing")
    return Ns


def oracle_doc(report, timing: bool = False) -> dict:
    rows = []
    for r in report.rows:
        row = {"N": r.N, "deviation": num(r.deviation), "leakage": num(r.leakage),
               "symplectic_residual": num(r.symplectic_residual)}
        if timing:
            row["seconds"] = num(r.seconds)
        rows.append(row)
    order = None if math.isnan(report.order) else num(report.order)
    return {
        "command": "oracle-check",
        "scheme": report.scheme,
        "kappa": num(report.kappa),
        "omega_t": num(report.omega_t),
        "rows": rows,
        "order": order,
        "monotone": report.monotone,
        "threshold": num(report.threshold),
        "passed": report.passed,
    }


def render_oracle(doc: dict) -> str:
    lines = [f"scheme={doc['scheme']} kappa={doc['kappa']:.12g} omega_t={doc['omega_t']:.12g}",
             f"{'N':>8} {'deviation':>14} {'leakage':>14}"]
    for r in doc["rows"]:
        lines.append(f"{r['N']:>8d} {r['deviation']:>14.6e} {r['leakage']:>14.6e}")
    order = "n/a" if doc["order"] is None else f"{doc['order']:.4f}"
    lines.append(f"order {order}  monotone {doc['monotone']}")
    status = "ok" if doc["passed"] else "THRESHOLD BREACH"
    lines.append(f"final deviation {doc['rows'][-1]['deviation']:.6e} (threshold {doc['threshold']:.1e}) {status}")
    return "\n".join(lines) + "\n"


@main.command("oracle-check")
@click.option("--scheme", type=click.Choice(["single", "double"]), default="single", show_default=True)
@click.option("--kappa", type=float, default=math.sqrt(2.0), show_default="sqrt(2)")
@click.option("--slices", callback=_int_list, default=None,
              help="Comma-separated slice counts [single: 100,1000,10000; double: 100*OmegaT].")
@click.option("--omega-t", type=float, default=300.0, show_default=True, help="Larmor phase (double only).")
@click.option("--numba/--no-numba", "use_numba", default=None, help="Override QMREADOUT_NUMBA.")
@click.option("--timing", is_flag=True, help="Include wall-clock seconds (not deterministic).")
@click.option("--format", "fmt_name", type=click.Choice(["text", "json"]), default="text", show_default=True)
@click.option("--out", type=str, default=None)
def cmd_oracle_check(scheme, kappa, slices, omega_t, use_numba, timing, fmt_name, out):
    """Compare the time-sliced oracle with the analytic passage map."""
    from .oracle import convergence_report, default_slices

    if kappa < 0:
        raise click.BadParameter("kappa must be non-negative", param_hint="--kappa")
    if scheme == "double" and not omega_t > 0:
        raise click.BadParameter("omega_t must be positive", param_hint="--omega-t")
    if slices is None:
        slices = [100, 1000, 10000] if scheme == "single" else [default_slices(omega_t)]
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        try:
            report = convergence_report(scheme, kappa, slices, omega_t if scheme == "double" else None, use_numba)
        except ValueError as exc:
            raise click.UsageError(str(exc)) from exc
    doc = oracle_doc(report, timing)
    text = _json(doc) if fmt_name == "json" else render_oracle(doc)
    _emit(text, out, f"oracle_check_{scheme}.{'json' if fmt_name == 'json' else 'txt'}")
    if not report.passed:
        sys.exit(EXIT_THRESHOLD)


# ---------------------------------------------------------------------------
# optimize

OPT_FIELDS = ("kappa_sq", "amp_gain", "squeeze_V", "squeeze_r", "kappa2_sq", "nbar", "fidelity", "branch")


def _optimum_doc(o) -> dict:
    return {f: (getattr(o, f) if f == "branch" else num(getattr(o, f))) for f in OPT_FIELDS}


def optimize_doc(scheme: str, A: float, frees=None) -> dict:
    closed = opt.closed_form(scheme, A)
    if scheme == "double":
        # couplings are fixed; the check is closed form against the channel pipeline
        _, nbar, F = two_cell_pipeline(TwoCellSpec.unit_gain(A))
        numeric = {"nbar": num(nbar), "fidelity": num(F)}
        disc = max(abs(nbar - closed.nbar), abs(F - closed.fidelity))
    else:
        o = opt.numeric_optimize(scheme, A, frees)
        numeric = _optimum_doc(o)
        disc = opt.discrepancy(o, closed)
    return {
        "command": "optimize",
        "scheme": scheme,
        "loss": num(A),
        "frees": sorted(frees) if frees else sorted(opt.SCHEME_FREES.get(scheme, ())),
        "closed_form": _optimum_doc(closed),
        "numeric": numeric,
        "discrepancy": num(disc),
        "threshold": OPTIMIZE_THRESHOLD,
        "passed": bool(disc <= OPTIMIZE_THRESHOLD),
    }


def render_optimize(doc: dict) -> str:
    lines = [f"scheme={doc['scheme']} A={doc['loss']:.12g} frees={','.join(doc['frees']) or '-'}",
             f"{'field':>10} {'closed form':>20} {'numeric':>20}"]
    for f in OPT_FIELDS:
        a, b = doc["closed_form"].get(f), doc["numeric"].get(f)
        if a is None and b is None:
            continue
        lines.append(f"{f:>10} {fmt(a) if f != 'branch' else a:>20} "
                     f"{(fmt(b) if f != 'branch' else b) if b is not None else '-':>20}")
    status = "ok" if doc["passed"] else "THRESHOLD BREACH"
    lines.append(f"max discrepancy {doc['discrepancy']:.3e} {status}")
    return "\n".join(lines) + "\n"


@main.command("optimize")
@click.option("--scheme", type=click.Choice(["single", "double", "uniform", "selective"]),
              default="single", show_default=True)
@click.option("--loss", type=float, default=0.0, show_default=True)
@click.option("--free", "frees", multiple=True, type=click.Choice(["kappa_sq", "V", "r"]),
              help="Parameter to search over (repeatable); scheme default if omitted.")
@click.option("--format", "fmt_name", type=click.Choice(["text", "json"]), default="text", show_default=True)
@click.option("--out", type=str, default=None)
def cmd_optimize(scheme, loss, frees, fmt_name, out):
    """Numeric optimum against the closed form."""
    _check_loss(loss)
    if scheme == "uniform" and loss != 0.0:
        raise click.BadParameter("uniform squeezing has a closed form only at zero loss", param_hint="--loss")
    try:
        doc = optimize_doc(scheme, loss, set(frees) if frees else None)
    except opt.BracketError as exc:
        raise click.ClickException(f"bracket failure: {exc}") from exc
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc
    text = _json(doc) if fmt_name == "json" else render_optimize(doc)
    _emit(text, out, f"optimize_{scheme}.{'json' if fmt_name == 'json' else 'txt'}")
    if not doc["passed"]:
        sys.exit(EXIT_THRESHOLD)


if __name__ == "__main__":
    main()
