"""Batch command-line interface.

Subcommands expose every computation with reproducible seeds and
plot-ready CSV/JSON outputs:

* ``jensen-gap``  closed-form and numeric gap of a fading shape
* ``region``      evaluate one rate region, emit its constraints
* ``gap-check``   certify a constant-gap theorem over a parameter grid
* ``sweep``       symmetric-rate inner/outer table at INR = SNR^alpha
* ``af``          n-phase scheme: r1/r2/corners/cancellation/tridiag
* ``isi``         2-tap fading ISI capacity sandwich

Exit codes: 0 on success, 1 when a numerical theorem check FAILs (so CI
can gate on it), 2 on bad arguments.  Identical argv produce byte-identical
output files; ``FFIC_THREADS`` caps grid parallelism (default: hardware
count) without affecting results or output order.
"""

from __future__ import annotations

import argparse
import cmath
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence

from . import __version__
from .afscheme import (
    cancellation_check,
    isi_achievable_rate,
    isi_bounds,
    nphase_corner_gap,
    r1_rate,
    r2_rate,
    tridiag_growth,
)
from .fading import (
    FadingModel,
    NoClosedFormError,
    jensen_gap_closed_form,
    jensen_gap_numeric,
)
from .mc import McConfig
from .regions import (
    ChannelSpec,
    SplitParams,
    fb_inner,
    fb_outer,
    imac_regions,
    nofb_achievable,
    nofb_inner,
    nofb_outer,
    region_gap,
    static_equivalent,
    symmetric_sweep,
)

DEFAULT_SNR_GRID = (10.0, 1e3, 1e6)
DEFAULT_ALPHA_GRID = (0.25, 0.5, 1.0)
DEFAULT_RHO_GRID = (0.0, 0.3, 0.7, 0.95)
STDERR_SLACK = 3.0


def _metadata(cfg: McConfig) -> dict:
    return {"seed": cfg.seed, "samples": cfg.samples, "version": f"ffic {__version__}"}


def _write_text(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _emit_json(obj: dict, out: str | None) -> None:
    _write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", out)


def _emit_csv(header: Sequence[str], rows: Iterable[Sequence], meta: dict, out: str | None) -> None:
    lines = ["# " + " ".join(f"{k}={v}" for k, v in sorted(meta.items()))]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(str(v) for v in row))
    _write_text("\n".join(lines) + "\n", out)


def _thread_count() -> int:
    raw = os.environ.get("FFIC_THREADS")
    if raw is not None:
        return max(1, int(raw))
    return os.cpu_count() or 1


def _parallel_map(fn: Callable, items: Sequence) -> list:
    """Apply fn to items, possibly in threads; output order is input order."""
    workers = min(_thread_count(), len(items))
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _model_from_args(args, mean_power: float) -> FadingModel:
    shape = "deterministic" if getattr(args, "deterministic", False) else args.shape
    if shape in ("gamma", "weibull"):
        if args.k is None:
            print(f"error: --k is required for the {shape} shape", file=sys.stderr)
            raise SystemExit(2)
        return FadingModel(shape, mean_power, k=args.k)
    return FadingModel(shape, mean_power)


def _spec_from_args(args) -> ChannelSpec:
    shape = "deterministic" if getattr(args, "deterministic", False) else args.shape
    snr2 = args.snr if args.snr2 is None else args.snr2
    inr2 = args.inr if args.inr2 is None else args.inr2
    phase = "zero" if shape == "deterministic" else "uniform"  # static plug-in: real gains
    return ChannelSpec.from_mean_powers(
        args.snr, snr2, args.inr, inr2, shape=shape, k=args.k, phase=phase
    )


def _cfg_from_args(args) -> McConfig:
    return McConfig(samples=args.samples, seed=args.seed)


def _add_mc_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--samples", type=int, default=1_000_000, help="Monte Carlo draws per expectation")
    p.add_argument("--seed", type=int, default=42, help="base seed for all substreams")


def _add_out_flags(p: argparse.ArgumentParser, fmt: bool = True) -> None:
    p.add_argument("--out", type=str, default=None, help="output file (default: stdout)")
    if fmt:
        p.add_argument("--format", choices=("json", "csv"), default="json")


def _add_shape_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--shape", choices=("rayleigh", "gamma", "weibull", "deterministic"),
                   default="rayleigh", help="fading shape of every link")
    p.add_argument("--k", type=float, default=None, help="shape parameter for gamma/weibull")


# ---------------------------------------------------------------------------
# jensen-gap
# ---------------------------------------------------------------------------


def _cmd_jensen_gap(args) -> int:
    model = _model_from_args(args, args.mean_power)
    cfg = _cfg_from_args(args)
    try:
        closed = jensen_gap_closed_form(model)
    except NoClosedFormError:
        closed = None
    numeric = jensen_gap_numeric(model, cfg=cfg)
    obj = {
        "shape": model.shape,
        "k": model.k,
        "mean_power": model.mean_power,
        "closed_form": closed,
        "gap_at_zero": numeric.gap_at_zero,
        "gap_stderr": numeric.gap_stderr,
        "xi_curve": [[a, xi] for a, xi in numeric.xi_curve],
        "metadata": _metadata(cfg),
    }
    ok = True
    if closed is not None:
        slack = STDERR_SLACK * numeric.gap_stderr + 1e-6  # quadrature tolerance floor
        ok = numeric.gap_at_zero <= closed + slack
        obj["pass"] = ok
    _emit_json(obj, args.out)
    if closed is not None:
        print(f"closed_form_bound_bits {closed:.6f}", file=sys.stderr)
    print(f"numeric_gap_bits {numeric.gap_at_zero:.6f}", file=sys.stderr)
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# region
# ---------------------------------------------------------------------------

_REGION_BUILDERS = (
    "nofb-inner", "nofb-outer", "nofb-achievable",
    "fb-inner", "fb-outer", "imac-inner", "imac-outer",
    "static-nofb", "static-fb",
)


def _build_cli_region(kind: str, ch: ChannelSpec, args, cfg: McConfig):
    if kind == "nofb-inner":
        return nofb_inner(ch, cfg)
    if kind == "nofb-outer":
        return nofb_outer(ch, cfg)
    if kind == "nofb-achievable":
        return nofb_achievable(ch, cfg)
    if kind == "fb-inner":
        return fb_inner(ch, SplitParams.feedback(ch, args.rho_mag, args.theta), cfg)
    if kind == "fb-outer":
        return fb_outer(ch, args.rho_mag * cmath.exp(1j * args.theta), cfg)
    if kind == "imac-inner":
        return imac_regions(ch, cfg)[0]
    if kind == "imac-outer":
        return imac_regions(ch, cfg)[1]
    if kind == "static-nofb":
        return static_equivalent(ch, feedback=False, cfg=cfg)
    return static_equivalent(ch, feedback=True, rho_mag=args.rho_mag, theta=args.theta, cfg=cfg)


def _cmd_region(args) -> int:
    ch = _spec_from_args(args)
    cfg = _cfg_from_args(args)
    region = _build_cli_region(args.kind, ch, args, cfg)
    obj = region.to_json()
    obj["metadata"] = _metadata(cfg)
    if args.format == "csv":
        rows = [
            (c.label, c.c1, c.c2, c.bound, c.bound_stderr) for c in region.constraints
        ]
        _emit_csv(("label", "c1", "c2", "bound", "stderr"), rows, _metadata(cfg), args.out)
    else:
        _emit_json(obj, args.out)
    return 0


# ---------------------------------------------------------------------------
# gap-check
# ---------------------------------------------------------------------------


def _closed_gap(shape: str, k: float | None) -> float:
    if shape == "deterministic":
        return 0.0
    model = FadingModel(shape, 1.0, k=k) if shape in ("gamma", "weibull") else FadingModel(shape, 1.0)
    return jensen_gap_closed_form(model)


def _grid_points(args) -> list[tuple[float, float, float | None]]:
    snrs = args.snr_list or DEFAULT_SNR_GRID
    alphas = args.alpha_list or DEFAULT_ALPHA_GRID
    rhos: Sequence[float | None]
    if args.kind in ("fb", "static-fb"):
        rhos = args.rho_list or DEFAULT_RHO_GRID
    else:
        rhos = (None,)
    return [(s, a, r) for s in snrs for a in alphas for r in rhos]


def _check_point(kind: str, shape: str, k, cfg: McConfig, point) -> dict:
    snr, alpha, rho = point
    inr = snr**alpha
    phase = "zero" if shape == "deterministic" else "uniform"  # static plug-in: real gains
    ch = ChannelSpec.symmetric(snr, inr, shape=shape, k=k, phase=phase)
    row: dict = {"snr": snr, "alpha": alpha}
    if rho is not None:
        row["rho_mag"] = rho
    if kind == "nofb":
        gap = region_gap(nofb_outer(ch, cfg), nofb_inner(ch, cfg))
        row.update(delta=gap.delta_vertex, stderr=gap.delta_vertex_stderr)
    elif kind == "fb":
        inner = fb_inner(ch, SplitParams.feedback(ch, rho, 0.0), cfg)
        outer = fb_outer(ch, complex(rho), cfg)
        gap = region_gap(outer, inner)
        row.update(delta=gap.delta_vertex, stderr=gap.delta_vertex_stderr)
    elif kind == "imac":
        inner, outer = imac_regions(ch, cfg)
        gap = region_gap(outer, inner)
        row.update(delta=gap.delta_vertex, stderr=gap.delta_vertex_stderr)
    else:  # static equivalence: per-rate constraint-wise comparison
        feedback = kind == "static-fb"
        if feedback:
            fading = fb_inner(ch, SplitParams.feedback(ch, rho, 0.0), cfg)
            static = static_equivalent(ch, feedback=True, rho_mag=rho, cfg=cfg)
        else:
            fading = nofb_inner(ch, cfg)
            static = static_equivalent(ch, feedback=False, cfg=cfg)
        deltas, lows, ses = [], [], []
        for fc, sc in zip(fading.constraints, static.constraints):
            d = (sc.bound - fc.bound) / fc.weight
            deltas.append(d)
            lows.append(d)
            ses.append(math.hypot(fc.bound_stderr, sc.bound_stderr) / fc.weight)
        row.update(delta=max(deltas), min_delta=min(lows), stderr=max(ses))
    return row


_THRESHOLDS = {
    "nofb": lambda c: c + 1.0,
    "fb": lambda c: c + 2.0,
    "imac": lambda c: 1.0 + c / 2.0,
    "static-nofb": lambda c: 2.0 * c,
    "static-fb": lambda c: 3.0 * c,
}


def _cmd_gap_check(args) -> int:
    cfg = _cfg_from_args(args)
    c_jg = _closed_gap(args.shape, args.k)
    threshold = _THRESHOLDS[args.kind](c_jg)
    points = _grid_points(args)
    rows = _parallel_map(
        lambda pt: _check_point(args.kind, args.shape, args.k, cfg, pt), points
    )
    all_pass = True
    for row in rows:
        ok = row["delta"] <= threshold + STDERR_SLACK * row["stderr"]
        if "min_delta" in row:  # static: fading may not exceed the static bound
            ok = ok and row["min_delta"] >= -STDERR_SLACK * row["stderr"]
        row["pass"] = bool(ok)
        all_pass &= ok
        tag = "PASS" if ok else "FAIL"
        extras = f" rho={row['rho_mag']}" if "rho_mag" in row else ""
        print(
            f"{tag} snr={row['snr']:g} alpha={row['alpha']:g}{extras} "
            f"delta={row['delta']:.4f} threshold={threshold:.4f}",
            file=sys.stderr,
        )
    obj = {
        "kind": args.kind,
        "shape": args.shape,
        "jensen_gap": c_jg,
        "threshold": threshold,
        "points": rows,
        "all_pass": bool(all_pass),
        "metadata": _metadata(cfg),
    }
    _emit_json(obj, args.out)
    return 0 if all_pass else 1


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------


def _cmd_sweep(args) -> int:
    cfg = _cfg_from_args(args)
    rows = symmetric_sweep(args.alpha, args.snr_db_list, shape=args.shape, cfg=cfg, k=args.k)
    table = [(r.snr_db, r.alpha, r.sym_inner, r.sym_outer, r.gap) for r in rows]
    if args.format == "json":
        obj = {
            "rows": [
                dict(zip(("snr_db", "alpha", "sym_inner", "sym_outer", "gap"), t))
                for t in table
            ],
            "metadata": _metadata(cfg),
        }
        _emit_json(obj, args.out)
    else:
        _emit_csv(("snr_db", "alpha", "sym_inner", "sym_outer", "gap"), table,
                  _metadata(cfg), args.out)
    return 0


# ---------------------------------------------------------------------------
# af / isi
# ---------------------------------------------------------------------------


def _cmd_af(args) -> int:
    cfg = _cfg_from_args(args)
    meta = _metadata(cfg)
    if args.mode == "tridiag":
        rows = []
        for n in args.n_list:
            g = tridiag_growth(args.a, args.b, n)
            rows.append((args.a, args.b, n, g.limit_estimate, g.limit_closed_form))
        _emit_csv(("a", "b", "n", "growth", "closed_form"), rows, meta, args.out)
        return 0
    if args.mode == "cancellation":
        rep = cancellation_check(args.n, args.blocks, args.seed, snr=args.snr, inr=args.inr)
        obj = rep.to_json()
        obj["metadata"] = meta
        _emit_json(obj, args.out)
        return 0

    ch = ChannelSpec.symmetric(args.snr, args.inr, shape=args.shape, k=args.k)
    c_jg = _closed_gap(args.shape, args.k)
    if args.mode == "r1":
        rows = []
        lower = math.log2(1.0 + args.snr + args.inr) - 3.0 * c_jg - 2.0
        for n in args.n_list:
            est = r1_rate(ch, n, cfg)
            rows.append((n, est.mean, lower))
        _emit_csv(("n", "r1_estimate", "lower_bound"), rows, meta, args.out)
        return 0
    if args.mode == "r2":
        est = r2_rate(ch, cfg)
        _emit_json({"r2_estimate": est.mean, "stderr": est.stderr, "metadata": meta}, args.out)
        return 0
    # corners
    res = nphase_corner_gap(ch, c_jg, cfg)
    obj = res.to_json()
    obj["bound"] = 2.0 + 3.0 * c_jg
    obj["pass"] = res.per_user_gap <= obj["bound"] + STDERR_SLACK * res.stderr
    obj["metadata"] = meta
    _emit_json(obj, args.out)
    return 0 if obj["pass"] else 1


def _cmd_isi(args) -> int:
    cfg = _cfg_from_args(args)
    c_jg = args.c_jg if args.c_jg is not None else _closed_gap(args.shape, args.k)
    lower, upper = isi_bounds(args.snr, args.inr, c_jg)
    obj = {
        "snr": args.snr,
        "inr": args.inr,
        "c_jg": c_jg,
        "lower": lower,
        "upper": upper,
        "width": upper - lower,
        "metadata": _metadata(cfg),
    }
    code = 0
    if args.check_achievable:
        est = isi_achievable_rate(args.snr, args.inr, args.n, cfg, shape=args.shape, k=args.k)
        slack = STDERR_SLACK * est.stderr
        ok = lower - slack <= est.mean <= upper + slack
        obj.update(achievable=est.mean, achievable_stderr=est.stderr, n=args.n)
        obj["pass"] = bool(ok)
        code = 0 if ok else 1
    _emit_json(obj, args.out)
    return code


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ffic",
        description="Jensen-gap and capacity-gap toolkit for fading interference channels",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("jensen-gap", help="closed-form and numeric Jensen gap of a shape")
    _add_shape_flags(p)
    p.add_argument("--mean-power", type=float, default=1.0)
    _add_mc_flags(p)
    _add_out_flags(p, fmt=False)
    p.set_defaults(fn=_cmd_jensen_gap)

    p = sub.add_parser("region", help="evaluate one rate region")
    p.add_argument("--kind", choices=_REGION_BUILDERS, required=True)
    _add_shape_flags(p)
    p.add_argument("--deterministic", action="store_true",
                   help="shorthand for --shape deterministic")
    p.add_argument("--snr", type=float, required=True, help="SNR1 (linear)")
    p.add_argument("--inr", type=float, required=True, help="INR1 (linear)")
    p.add_argument("--snr2", type=float, default=None, help="SNR2 (default: symmetric)")
    p.add_argument("--inr2", type=float, default=None, help="INR2 (default: symmetric)")
    p.add_argument("--rho-mag", type=float, default=0.0)
    p.add_argument("--theta", type=float, default=0.0)
    _add_mc_flags(p)
    _add_out_flags(p)
    p.set_defaults(fn=_cmd_region)

    p = sub.add_parser("gap-check", help="certify a constant-gap theorem over a grid")
    p.add_argument("--kind", choices=tuple(_THRESHOLDS), required=True)
    _add_shape_flags(p)
    p.add_argument("--grid", choices=("default",), default="default")
    p.add_argument("--snr-list", type=float, nargs="+", default=None)
    p.add_argument("--alpha-list", type=float, nargs="+", default=None)
    p.add_argument("--rho-list", type=float, nargs="+", default=None)
    _add_mc_flags(p)
    _add_out_flags(p, fmt=False)
    p.set_defaults(fn=_cmd_gap_check)

    p = sub.add_parser("sweep", help="symmetric-rate table at INR = SNR^alpha")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--snr-db-list", type=float, nargs="+", required=True)
    _add_shape_flags(p)
    _add_mc_flags(p)
    _add_out_flags(p)
    p.set_defaults(fn=_cmd_sweep, format="csv")

    p = sub.add_parser("af", help="n-phase amplify-and-forward analysis")
    p.add_argument("--mode", choices=("r1", "r2", "corners", "cancellation", "tridiag"),
                   required=True)
    _add_shape_flags(p)
    p.add_argument("--snr", type=float, default=100.0)
    p.add_argument("--inr", type=float, default=10.0)
    p.add_argument("--n", type=int, default=8, help="phase count (cancellation)")
    p.add_argument("--n-list", type=int, nargs="+", default=(64,), help="phase counts (r1/tridiag)")
    p.add_argument("--blocks", type=int, default=16, help="symbols per phase (cancellation)")
    p.add_argument("--a", type=float, default=3.0)
    p.add_argument("--b", type=float, default=1.0)
    _add_mc_flags(p)
    _add_out_flags(p, fmt=False)
    p.set_defaults(fn=_cmd_af)

    p = sub.add_parser("isi", help="2-tap fading ISI capacity sandwich")
    _add_shape_flags(p)
    p.add_argument("--snr", type=float, required=True)
    p.add_argument("--inr", type=float, required=True)
    p.add_argument("--c-jg", type=float, default=None,
                   help="override the shape's closed-form Jensen gap")
    p.add_argument("--check-achievable", action="store_true")
    p.add_argument("--n", type=int, default=128)
    _add_mc_flags(p)
    _add_out_flags(p, fmt=False)
    p.set_defaults(fn=_cmd_isi)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
