"""Command-line entry point.

Exit codes: 0 success, 1 data or I/O error, 2 usage error. Every command
writes to stdout unless ``--out`` is given. ``OTDEBIAS_SEED`` sets the
default seed; ``--seed`` overrides it.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import biaslab, catalog, encodings, galaxy, losses, metrics, ssm, transport, wavelet
from .core import DataError, ParameterError, Rng, ShapeError, as_tensor, read_ndt, write_ndt

SEED_ENV = "OTDEBIAS_SEED"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def default_seed():
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _seed(args):
    return args.seed if args.seed is not None else default_seed()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def dumps(obj):
    """Stable JSON text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _emit(args, text):
    if getattr(args, "out", None):
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _emit_tensor(args, arr, summary=None):
    if args.out:
        write_ndt(args.out, arr)
        if summary is not None:
            sys.stdout.write(dumps(summary))
    else:
        sys.stdout.write(dumps({"shape": list(arr.shape), "data": arr}))


def _hk_config(args):
    return transport.HKConfig(
        n_bins=args.bins,
        z_range=(args.z_min, args.z_max),
        eps_entropic=args.eps,
        stop_tol=args.tol,
        max_iter=args.max_iter,
        delta=args.delta,
    )


def _load_image(path):
    p = Path(path)
    if p.suffix == ".csv":
        try:
            return as_tensor(np.loadtxt(p, delimiter=",", ndmin=2))
        except ValueError as exc:
            raise DataError(f"{path}: {exc}") from None
    return read_ndt(p)


# -- commands ---------------------------------------------------------------


def cmd_decompose(args):
    image = _load_image(args.image)
    if image.ndim != 2:
        raise ShapeError("decompose expects a 2-D image")
    if args.bottleneck:
        feats = wavelet.bottleneck_features(image, args.size, args.sigma, args.wavelength)
        out = feats.grid
    else:
        bank = wavelet.make_gabor_bank(args.size, args.sigma, args.wavelength)
        out = wavelet.decompose(image, bank).maps
    _emit_tensor(args, out, {"shape": list(out.shape)})


def cmd_scan(args):
    x = _load_image(args.input)
    if x.ndim != 2:
        raise ShapeError("scan expects a (T, D) sequence")
    if args.params:
        params = ssm.SSMParams.load(args.params)
    else:
        params = ssm.SSMParams.random(x.shape[1], Rng(_seed(args)), selective=False)
    res = ssm.scan(x, params)
    _emit_tensor(args, res.y, {"shape": list(res.y.shape), "h_final": res.h_final})


def cmd_encode(args):
    kw = dict(k=args.k, normalize=args.normalize)
    if args.dec is None:
        vec = encodings.encode_coord(args.ra, **kw)
    else:
        vec = encodings.encode_sky(args.ra, args.dec, **kw)
    _emit(args, dumps({"k": args.k, "encoding": vec}))


def cmd_sinkhorn(args):
    a = np.array(catalog.read_values(args.a, args.column))
    b = np.array(catalog.read_values(args.b, args.column))
    if a.size != b.size:
        raise ShapeError("marginals must have the same number of bins")
    centers = np.arange(a.size, dtype=float) if args.unit_grid else None
    if centers is None:
        cfg = transport.HKConfig(n_bins=a.size, z_range=(args.z_min, args.z_max))
        centers = transport.Histogram(cfg.edges(), np.full(a.size, 1.0 / a.size)).centers
    plan = transport.sinkhorn(
        a, b, transport.squared_cost(centers), args.eps, args.tol, args.max_iter
    )
    out = {
        "transport_cost": plan.transport_cost,
        "dual_value": plan.dual_value,
        "iterations": plan.iterations_used,
        "marginal_err": plan.marginal_err,
        "converged": plan.converged,
    }
    if args.plan:
        out["plan"] = plan.plan
    _emit(args, dumps(out))


def _load_dist(path, kind, column, cfg):
    if kind == "hist":
        return catalog.read_histogram(path)
    values = catalog.read_values(path, column)
    return transport.histogram(values, cfg)


def cmd_hk(args):
    cfg = _hk_config(args)
    p = _load_dist(args.pred, args.kind, args.column, cfg)
    q = _load_dist(args.target, args.kind, args.column, cfg)
    if not p.same_binning(q):
        raise DataError("pred and target histograms use different binnings")
    if args.kind == "hist":
        cfg = transport.HKConfig(
            n_bins=p.n, z_range=(float(p.edges[0]), float(p.edges[-1])),
            eps_entropic=args.eps, stop_tol=args.tol, max_iter=args.max_iter, delta=args.delta,
        )
    res = transport.hk_distance_sq(p, q, cfg, variant=args.variant, debias=not args.no_debias)
    _emit(args, dumps(res.as_dict()))


def cmd_hist(args):
    cfg = _hk_config(args)
    h = transport.histogram(catalog.read_values(args.input, args.column), cfg)
    if h.clamped:
        print(f"note: {h.clamped} value(s) clamped into the end bins", file=sys.stderr)
    _emit(args, catalog.histogram_to_csv(h))


def cmd_eval(args):
    parsed = catalog.parse_catalog(args.catalog, strict=args.strict)
    report = metrics.metrics_from_rows(parsed.rows, args.thresh)
    out = report.as_dict()
    out["n_filtered"] = len(parsed.filtered)
    out["ingest"] = parsed.report()
    if args.baseline:
        base = metrics.metrics_from_rows(
            catalog.parse_catalog(args.baseline, strict=args.strict).rows, args.thresh
        )
        out["relative_improvement_pct"] = {
            k: metrics.relative_improvement(base.overall[k], report.overall[k])
            for k in ("log_mse", "outlier_rate")
            if base.overall[k] != 0
        }
    _emit(args, dumps(out))


def cmd_loss_eval(args):
    parts = json.loads(Path(args.parts).read_text(encoding="utf-8"))
    cfg = losses.LossConfig()
    if args.config:
        cfg = losses.LossConfig.from_dict(json.loads(Path(args.config).read_text(encoding="utf-8")))
    out = losses.loss_breakdown(parts, cfg, args.epoch, training=not args.eval)
    _emit(args, dumps(out))


def cmd_schedule(args):
    lines = ["t,lr"]
    for t in range(args.epochs + 1):
        st = losses.ScheduleState(
            t=t, t_w=args.warmup, T=args.epochs, eta_min=args.eta_min,
            eta_max=args.eta_max, eta_init=args.eta_init, phi=args.phi,
        )
        lines.append(f"{t},{losses.uba_lr(st)!r}")
    _emit(args, "\n".join(lines) + "\n")


def cmd_simulate(args):
    sel = biaslab.SelectionFn.parse(args.selection)
    cfg = _hk_config(args)
    cat = biaslab.sample_catalog(sel, args.n, Rng(_seed(args)), cfg=cfg)
    _emit(args, biaslab.synthetic_to_csv(cat))
    if args.obs_out:
        Path(args.obs_out).write_text(catalog.histogram_to_csv(cat.observed_dist), encoding="utf-8")
    if args.true_out:
        Path(args.true_out).write_text(catalog.histogram_to_csv(cat.true_dist), encoding="utf-8")


def cmd_recalibrate(args):
    obs = catalog.read_histogram(args.obs)
    tgt = catalog.read_histogram(args.target)
    if not obs.same_binning(tgt):
        raise DataError("observed and target histograms use different binnings")
    cfg = transport.HKConfig(
        n_bins=obs.n, z_range=(float(obs.edges[0]), float(obs.edges[-1])),
        eps_entropic=args.eps, stop_tol=args.tol, max_iter=args.max_iter, delta=args.delta,
    )
    res = biaslab.hk_recalibrate(obs, tgt, cfg, steps=args.steps, lr=args.lr)
    summary = {
        "hk2_initial": res.loss_trace[0],
        "hk2_final": res.loss_trace[-1],
        "steps": res.steps,
        "failed": res.failed,
        "mass": res.histogram.mass,
    }
    if args.out:
        Path(args.out).write_text(catalog.histogram_to_csv(res.histogram), encoding="utf-8")
        summary.pop("mass")
    sys.stdout.write(dumps(summary))


def cmd_ablate(args):
    cat = biaslab.read_synthetic(args.catalog, _hk_config(args))
    res = biaslab.ablation_run(cat, hk_weight=args.hk_weight, threads=args.threads)
    text = res.to_csv() if args.format == "csv" else dumps(res.as_dict())
    _emit(args, text)


def cmd_gen_galaxy(args):
    spec = galaxy.SyntheticGalaxySpec(
        kind=args.kind, arms=args.arms, pitch=args.pitch, axis_ratio=args.axis_ratio,
        noise_sigma=args.noise, resolution=args.resolution, rotation=args.rotation,
    )
    img = galaxy.gen_galaxy(spec, Rng(_seed(args)))
    _emit_tensor(args, img, {"shape": list(img.shape)})


def cmd_selftest(args):
    from .docsbook import load_corpus, run_examples

    report = run_examples(load_corpus(), threads=args.threads)
    _emit(args, dumps(report.as_dict()))
    return 0 if report.ok else 1


# -- parser -----------------------------------------------------------------


def _add_hk_opts(p, transport_only=False):
    p.add_argument("--eps", type=float, default=0.1, help="entropic regularisation")
    p.add_argument("--tol", type=float, default=1e-4, help="marginal stopping tolerance")
    p.add_argument("--max-iter", type=int, default=50)
    if transport_only:
        return
    p.add_argument("--delta", type=float, default=1.0, help="Hellinger weight")
    p.add_argument("--bins", type=int, default=40)
    p.add_argument("--z-min", type=float, default=0.0)
    p.add_argument("--z-max", type=float, default=2.0)


def build_parser():
    parser = _Parser(prog="otdebias", description=__doc__.splitlines()[0])
    parser.add_argument("--threads", type=int, default=1, help="cap on worker threads")
    parser.add_argument("--seed", type=int, default=None, help=f"overrides ${SEED_ENV}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=fn)
        p.add_argument("--out", default=None)
        p.add_argument("--seed", type=int, default=None, dest="seed_sub", help=f"overrides ${SEED_ENV}")
        p.add_argument("--threads", type=int, default=None, dest="threads_sub")
        return p

    p = add("decompose", cmd_decompose, "directional wavelet maps of an image")
    p.add_argument("--image", required=True, help="NDT1 or CSV image")
    p.add_argument("--size", type=int, default=9)
    p.add_argument("--sigma", type=float, default=2.0)
    p.add_argument("--wavelength", type=float, default=4.0)
    p.add_argument("--bottleneck", action="store_true", help="emit the 8x8 pooled modulus")

    p = add("scan", cmd_scan, "state-space scan of a (T, D) sequence")
    p.add_argument("--input", required=True)
    p.add_argument("--params", default=None, help="JSON parameters; random when omitted")

    p = add("encode", cmd_encode, "Fourier encoding of sky coordinates")
    p.add_argument("--ra", type=float, required=True)
    p.add_argument("--dec", type=float, default=None)
    p.add_argument("--k", type=int, default=encodings.DEFAULT_K)
    p.add_argument("--normalize", action="store_true", help="divide degrees by 360")

    p = add("sinkhorn", cmd_sinkhorn, "entropic OT between two mass vectors")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--column", default=None)
    p.add_argument("--unit-grid", action="store_true", help="bins at 0, 1, 2, ...")
    p.add_argument("--z-min", type=float, default=0.0)
    p.add_argument("--z-max", type=float, default=2.0)
    p.add_argument("--plan", action="store_true", help="include the transport plan")
    _add_hk_opts(p, transport_only=True)

    p = add("hk", cmd_hk, "debiased HK^2 between two redshift samples or histograms")
    p.add_argument("--pred", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--kind", choices=("values", "hist"), default="values")
    p.add_argument("--column", default=None)
    p.add_argument("--variant", choices=("density", "sqrt"), default="density")
    p.add_argument("--no-debias", action="store_true")
    _add_hk_opts(p)

    p = add("hist", cmd_hist, "fixed-bin histogram as lo,hi,mass CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--column", default=None)
    _add_hk_opts(p)

    p = add("eval", cmd_eval, "photo-z metrics for a catalog with predictions")
    p.add_argument("--catalog", required=True)
    p.add_argument("--baseline", default=None, help="catalog to compute relative improvement against")
    p.add_argument("--thresh", type=float, default=metrics.OUTLIER_THRESH)
    p.add_argument("--strict", action="store_true")

    p = add("loss-eval", cmd_loss_eval, "total loss breakdown from a JSON of parts")
    p.add_argument("--parts", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--epoch", type=int, default=0)
    p.add_argument("--eval", action="store_true", help="evaluation mode (HK term off)")

    p = add("schedule", cmd_schedule, "learning-rate schedule as t,lr CSV")
    p.add_argument("--epochs", type=int, default=120)
    p.add_argument("--warmup", type=int, default=10)
    p.add_argument("--eta-min", type=float, default=5e-6)
    p.add_argument("--eta-max", type=float, default=1e-3)
    p.add_argument("--eta-init", type=float, default=1e-4)
    p.add_argument("--phi", type=float, default=0.7)

    p = add("simulate", cmd_simulate, "selection-biased synthetic catalog")
    p.add_argument("--selection", default="logistic:z0=0.8,k=6")
    p.add_argument("--n", type=int, default=10_000)
    p.add_argument("--obs-out", default=None, help="write the observed histogram CSV here")
    p.add_argument("--true-out", default=None, help="write the population histogram CSV here")
    _add_hk_opts(p)

    p = add("recalibrate", cmd_recalibrate, "HK descent from an observed to a target histogram")
    p.add_argument("--obs", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--steps", type=int, default=500)
    p.add_argument("--lr", type=float, default=0.05)
    _add_hk_opts(p)

    p = add("ablate", cmd_ablate, "four-mode loss ablation on a simulated catalog")
    p.add_argument("--catalog", required=True)
    p.add_argument("--hk-weight", type=float, default=1e-3)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    _add_hk_opts(p)

    p = add("gen-galaxy", cmd_gen_galaxy, "render a synthetic galaxy image")
    p.add_argument("--kind", choices=galaxy.KINDS, default="spiral")
    p.add_argument("--arms", type=int, default=2)
    p.add_argument("--pitch", type=float, default=0.35)
    p.add_argument("--axis-ratio", type=float, default=1.0)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--resolution", type=int, default=64)
    p.add_argument("--rotation", type=float, default=0.0)

    add("selftest", cmd_selftest, "run the worked-example corpus")
    return parser


def run_cli(argv=None):
    """Parse ``argv`` and dispatch; returns the exit code."""
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "seed_sub", None) is not None:
            args.seed = args.seed_sub
        if getattr(args, "threads_sub", None) is not None:
            args.threads = args.threads_sub
        if args.command is None:
            raise UsageError("a subcommand is required (see --help)")
        if args.threads < 1:
            raise UsageError("--threads must be >= 1")
        return args.func(args) or 0
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except ParameterError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (DataError, ShapeError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(run_cli())
