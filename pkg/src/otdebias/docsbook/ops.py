"""Adapters from JSON corpus inputs to the public API.

Each adapter returns plain JSON-comparable values. Cases that check a
property rather than a number use a ``view`` input that selects which
scalar summary to return.
"""

from __future__ import annotations

import dataclasses
import math
import os
import subprocess
import sys
import tempfile
from pathlib import Path

import numpy as np

from .. import biaslab, catalog, core, encodings, galaxy, losses, metrics, ssm, transport, wavelet


def _tensor_new(inp):
    t = core.tensor_new(inp["shape"], inp.get("fill", 0.0))
    return t.size if inp.get("view") == "size" else t.tolist()


def _normal_sample(inp):
    x = core.normal_sample(core.Rng(inp["seed"]), inp["shape"])
    view = inp["view"]
    if view == "mean":
        return float(x.mean())
    if view == "var":
        return float(x.var())
    if view == "repeat_diff":
        y = core.normal_sample(core.Rng(inp["seed"]), inp["shape"])
        return float(np.max(np.abs(x - y)))
    raise KeyError(view)


def _make_gabor_bank(inp):
    size, sigma, lam = inp["size"], inp["sigma"], inp["wavelength"]
    view = inp["view"]
    if view == "origin":
        k, _ = wavelet.gabor_raw(inp["theta"], size, sigma, lam)
        c = k[size // 2, size // 2]
        return [float(c.real), float(c.imag)]
    bank = wavelet.make_gabor_bank(size, sigma, lam)
    by_theta = {round(k.theta, 12): k for k in bank}
    if view == "pi_symmetry":
        k0, kpi = by_theta[0.0], by_theta[round(math.pi, 12)]
        return float(max(np.max(np.abs(k0.real_part - kpi.real_part)),
                         np.max(np.abs(k0.imag_part + kpi.imag_part))))
    if view == "norms":
        return [float(np.linalg.norm(k.complex)) for k in bank]
    raise KeyError(view)


def _decompose(inp):
    bank = wavelet.make_gabor_bank(inp["size"], inp["sigma"], inp["wavelength"])
    view = inp["view"]
    if view == "constant":
        img = np.full((inp["res"], inp["res"]), inp["value"])
        return float(np.max(np.abs(wavelet.decompose(img, bank).maps)))
    if view == "impulse":
        n, half = inp["res"], inp["size"] // 2
        img = np.zeros((n, n))
        c = n // 2
        img[c, c] = 1.0
        maps = wavelet.decompose(img, bank).maps
        worst = 0.0
        for m, kern in enumerate(bank):
            # correlation with conj(k) of a delta gives conj(k) flipped about the impulse
            window = maps[2 * m : 2 * m + 2, c - half : c + half + 1, c - half : c + half + 1]
            worst = max(worst,
                        np.max(np.abs(window[0] - kern.real_part[::-1, ::-1])),
                        np.max(np.abs(window[1] + kern.imag_part[::-1, ::-1])))
        return float(worst)
    if view == "shift_ratio":
        spec = galaxy.SyntheticGalaxySpec(kind=inp.get("kind", "spiral"), resolution=inp["res"])
        img = galaxy.gen_galaxy(spec)
        shifted = np.roll(img, 1, axis=1)
        a, b = wavelet.decompose(img, bank), wavelet.decompose(shifted, bank)
        rel = lambda u, v: np.linalg.norm(u - v) / np.linalg.norm(u)
        return float(rel(a.magnitude(), b.magnitude()) / rel(a.real_tree(), b.real_tree()))
    raise KeyError(view)


def _bottleneck(inp):
    res = inp["res"]
    if inp["view"] == "compression":
        maps = np.ones((8, res, res))
        return wavelet.bottleneck(maps, res).compression_factor
    if inp["view"] == "constant":
        maps = np.full((8, res, res), inp["value"])
        grid = wavelet.bottleneck(maps, res).grid
        return float(np.max(np.abs(grid - inp["value"])))
    raise KeyError(inp["view"])


def _cross_resolution_cv(inp):
    view = inp["view"]
    if view == "identical":
        img = galaxy.gen_galaxy(galaxy.SyntheticGalaxySpec(resolution=64))
        return wavelet.cross_resolution_cv([img, img, img])
    if view == "series":
        return 100.0 * wavelet._cv(inp["values"])
    if view == "spiral_ratio":
        imgs = [galaxy.gen_galaxy(galaxy.SyntheticGalaxySpec(resolution=r)) for r in inp["resolutions"]]
        return wavelet.cross_resolution_cv(imgs) / wavelet.cross_resolution_cv(imgs, baseline=True)
    raise KeyError(view)


def _selective_delta(inp):
    out = ssm.selective_delta(np.asarray(inp["delta"], float))
    if inp.get("view") == "row_products":
        return np.prod(out, axis=-1).tolist()
    return out.tolist()


def _discretize(inp):
    if inp.get("view") == "branch_gap":
        eps = inp["eps"]
        _, inside = ssm.discretize(-1.0, 1.0, eps * (1 - 1e-9), eps)
        _, outside = ssm.discretize(-1.0, 1.0, eps, eps)
        # remove the delta factor so both sides compare the bare ratio
        return abs(outside / eps - inside / (eps * (1 - 1e-9)))
    return list(ssm.discretize(inp["A"], inp["B"], inp["delta"], inp.get("eps", ssm.TAYLOR_EPS)))


def _params_1d(inp):
    return ssm.SSMParams(A=np.array([inp["A"]], float), B=np.array([inp["B"]], float),
                         C=np.array([inp["C"]], float), D=np.array([inp["D"]], float))


def _scan(inp):
    x = np.asarray(inp["x"], float)[:, None]
    res = ssm.scan(x, _params_1d(inp), np.full_like(x, inp["delta"]))
    if inp.get("view") == "y_and_h":
        return {"y": res.y[:, 0].tolist(), "h": res.h_final.tolist()}
    return res.y[:, 0].tolist()


def _scan_4dir(inp):
    d = inp["d"]
    rng = core.Rng(inp.get("seed", 0))
    params = ssm.SSMParams.random(d, rng, selective=True)
    if inp.get("zero_bias", True):
        params = dataclasses.replace(params, direction_bias=None)
    view = inp["view"]
    if view == "rot_symmetry":
        half = rng.normal((8, 8, d))
        grid = half + np.rot90(half, 2, axes=(0, 1))
        out = ssm.scan_4dir(grid, params)
        row, row_rev = out[..., :d], out[..., d : 2 * d]
        return float(np.max(np.abs(row - np.rot90(row_rev, 2, axes=(0, 1)))))
    if view == "zero":
        return float(np.max(np.abs(ssm.scan_4dir(np.zeros((8, 8, d)), params))))
    if view == "channels":
        return int(ssm.scan_4dir(rng.normal((8, 8, d)), params).shape[-1])
    raise KeyError(view)


def _gated_aggregate(inp):
    rng = core.Rng(inp.get("seed", 0))
    d, n = inp["d"], inp.get("tokens", 5)
    streams = [rng.normal((n, d)) for _ in range(4)]
    wc = rng.normal((4 * d, d))
    wg = rng.normal((4 * d, d))
    view = inp["view"]
    if view == "zero_gate":
        y = ssm.gated_aggregate(streams, np.zeros_like(wg), wc)
        return float(np.max(np.abs(y - 0.5 * (np.concatenate(streams, -1) @ wc))))
    if view == "zero_content":
        return float(np.max(np.abs(ssm.gated_aggregate(streams, wg, np.zeros_like(wc)))))
    if view == "bound_violation":
        worst = 0.0
        for _ in range(inp.get("draws", 20)):
            streams = [rng.normal((n, d)) for _ in range(4)]
            wc, wg = rng.normal((4 * d, d)), rng.normal((4 * d, d))
            y = ssm.gated_aggregate(streams, wg, wc)
            content = np.concatenate(streams, -1) @ wc
            worst = max(worst, float(np.max(np.abs(y) - np.abs(content))))
        return max(worst, 0.0)
    raise KeyError(view)


def _residual_fuse(inp):
    return float(ssm.residual_fuse(inp["x"], inp["y"], inp["gate"]))


def _encode_coord(inp):
    k, lo, hi = inp["k"], inp.get("omega_min", encodings.OMEGA_MIN), inp.get("omega_max", encodings.OMEGA_MAX)
    view = inp["view"]
    if view == "vector":
        return encodings.encode_coord(inp["theta"], k, lo, hi).tolist()
    if view == "frequencies":
        return encodings.frequencies(k, lo, hi).tolist()
    if view == "periodicity":
        w = encodings.frequencies(k, lo, hi)
        j = inp["index"]
        a = encodings.encode_coord(inp["theta"], k, lo, hi)
        b = encodings.encode_coord(inp["theta"] + inp["periods"] / w[j], k, lo, hi)
        return float(max(abs(a[j] - b[j]), abs(a[k + j] - b[k + j])))
    raise KeyError(view)


def _relate_tasks(inp):
    rel = (encodings.TaskRelation.from_weights(inp["weights"]) if "weights" in inp
           else encodings.TaskRelation(np.asarray(inp["raw"], float)))
    if inp.get("view") == "matrix":
        return rel.matrix.tolist()
    a, b = encodings.relate_tasks(inp["f_cls"], inp["f_red"], rel)
    return [a.tolist(), b.tolist()]


def _cfg(inp):
    keys = ("n_bins", "eps_entropic", "stop_tol", "max_iter", "delta")
    kw = {k: inp[k] for k in keys if k in inp}
    if "z_range" in inp:
        kw["z_range"] = tuple(inp["z_range"])
    return transport.HKConfig(**kw)


def _histogram(inp):
    cfg = _cfg(inp)
    if inp.get("view") == "uniform_grid":
        n = inp["count"]
        lo, hi = cfg.z_range
        values = lo + (np.arange(n) + 0.5) * (hi - lo) / n
        h = transport.histogram(values, cfg)
        return float(np.max(np.abs(h.mass - 1.0 / cfg.n_bins)))
    h = transport.histogram(inp["values"], cfg)
    if inp.get("view") == "max_mass":
        return float(h.mass.max())
    return h.mass.tolist()


def _sinkhorn(inp):
    if inp.get("view") == "random_converge":
        rng = core.Rng(inp["seed"])
        n = inp["n_bins"]
        cost = transport.squared_cost(transport.Histogram.from_mass(np.full(n, 1.0 / n)).centers)
        worst = 0.0
        for _ in range(inp["pairs"]):
            a, b = rng.dirichlet(np.ones(n)), rng.dirichlet(np.ones(n))
            plan = transport.sinkhorn(a, b, cost, inp["eps"], inp["stop_tol"], inp["max_iter"])
            worst = max(worst, plan.marginal_err)
        return worst
    plan = transport.sinkhorn(inp["a"], inp["b"], inp["cost"], inp["eps"],
                              inp.get("stop_tol", 1e-12), inp.get("max_iter", 10_000))
    if inp.get("view") == "plan":
        return plan.plan.tolist()
    return plan.transport_cost


def _hellinger_sq(inp):
    return transport.hellinger_sq(inp["p"], inp["q"])


def _hk_distance_sq(inp):
    cfg = _cfg(inp)
    view = inp.get("view", "value")
    if view == "symmetry":
        rng = core.Rng(inp["seed"])
        worst = 0.0
        for _ in range(inp["pairs"]):
            p, q = rng.dirichlet(np.ones(cfg.n_bins)), rng.dirichlet(np.ones(cfg.n_bins))
            e = cfg.edges()
            a = transport.hk_distance_sq(transport.Histogram(e, p), transport.Histogram(e, q), cfg).hk2
            b = transport.hk_distance_sq(transport.Histogram(e, q), transport.Histogram(e, p), cfg).hk2
            worst = max(worst, abs(a - b))
        return worst
    e = cfg.edges()
    p = transport.Histogram(e, np.asarray(inp["p"], float))
    q = transport.Histogram(e, np.asarray(inp["q"], float))
    return transport.hk_distance_sq(p, q, cfg).hk2


def _hk_loss(inp):
    cfg = _cfg(inp)
    rng = core.Rng(inp["seed"])
    view = inp["view"]
    if view == "matched":
        z = rng.uniform(*cfg.z_range, size=inp["n"])
        target = transport.histogram(z, cfg)
        loss, grad = transport.hk_loss(z, target, cfg)
        return float(loss)
    if view == "below_support":
        target = transport.histogram(rng.uniform(1.5, 2.0, size=200), cfg)
        pred = rng.uniform(0.0, 0.5, size=inp["n"])
        _, grad = transport.hk_loss(pred, target, cfg)
        return float(grad.max())
    if view == "fd_relerr":
        tight = cfg.tight()
        worst = 0.0
        for _ in range(inp["instances"]):
            target = transport.histogram(rng.uniform(0.2, 1.8, size=300), tight)
            pred = rng.uniform(0.1, 1.9, size=inp["n"])
            _, grad = transport.hk_loss(pred, target, tight)
            from .oracles import central_difference

            fd = central_difference(lambda x: transport.hk_loss(x, target, tight)[0], pred, inp["h"])
            worst = max(worst, float(np.linalg.norm(grad - fd) / np.linalg.norm(fd)))
        return worst
    raise KeyError(view)


def _focal_loss(inp):
    res = losses.focal_loss(np.asarray(inp["probs"], float), inp["label"],
                            inp.get("alpha"), inp["gamma"])
    return res.value


def _adaptive_gamma(inp):
    return losses.adaptive_gamma(inp["l_current"], inp["l_baseline"], inp["gamma0"], inp["eta"])


def _color_weight(inp):
    if "values" in inp:
        return [losses.color_weight(v) for v in inp["values"]]
    return losses.color_weight(inp["g_r"])


def _redshift_loss(inp):
    return losses.redshift_loss(inp["z_pred"], inp["z_true"], inp.get("weights")).value


def _vib_kl(inp):
    return losses.vib_kl(losses.VIBState(np.asarray(inp["mu"], float), np.asarray(inp["sigma"], float)))[0]


def _reparameterize(inp):
    mu = np.asarray(inp["mu"], float)
    sigma = np.asarray(inp["sigma"], float)
    view = inp["view"]
    if view == "value":
        return losses.reparameterize(losses.VIBState(mu, sigma), core.Rng(inp["seed"])).tolist()
    if view == "repeat_diff":
        a = losses.reparameterize(losses.VIBState(mu, sigma), core.Rng(inp["seed"]))
        b = losses.reparameterize(losses.VIBState(mu, sigma), core.Rng(inp["seed"]))
        return float(np.max(np.abs(a - b)))
    if view == "mean":
        rng = core.Rng(inp["seed"])
        n = inp["draws"]
        big = losses.VIBState(np.tile(mu, n), np.tile(sigma, n))
        z = losses.reparameterize(big, rng).reshape(n, mu.size)
        return z.mean(axis=0).tolist()
    raise KeyError(view)


def _lsi_term(inp):
    if inp.get("view") == "increasing":
        vals = [losses.lsi_term(k, inp["c_raw"])[0] for k in inp["kls"]]
        return bool(all(b > a for a, b in zip(vals, vals[1:])))
    return losses.lsi_term(inp["kl"], inp["c_raw"])[0]


def _total_loss(inp):
    return losses.total_loss(inp["parts"], losses.LossConfig(), inp["epoch"], inp.get("training", True))


def _hk_curriculum(inp):
    return losses.hk_curriculum(inp["epoch"], losses.LossConfig(**inp.get("cfg", {})))


def _uba_lr(inp):
    keys = ("t", "t_w", "T", "phi")
    return losses.uba_lr(losses.ScheduleState(**{k: inp[k] for k in keys if k in inp}))


def _z_norm(inp):
    if "values" in inp:
        v = metrics.z_norm(np.asarray(inp["values"], float))
        return bool(np.all(np.diff(v) > 0))
    return metrics.z_norm(inp["z"])


def _compute_metrics(inp):
    rep = metrics.compute_metrics(inp["z_true"], inp["z_pred"], inp.get("outlier_thresh", 0.15))
    if inp.get("view") == "bins":
        return list(rep.per_bin)
    return rep.overall


def _relative_improvement(inp):
    return metrics.relative_improvement(inp["baseline"], inp["treated"])


def _coefficient_of_variation(inp):
    return metrics.coefficient_of_variation(inp["values"])


def _accuracy(inp):
    return metrics.accuracy(inp["pred"], inp["true"])


def _sample_catalog(inp):
    sel = biaslab.SelectionFn.parse(inp["selection"])
    cat = biaslab.sample_catalog(sel, inp["n"], core.Rng(inp["seed"]))
    view = inp["view"]
    if view == "obs_equals_true":
        return float(np.max(np.abs(cat.observed_dist.mass - cat.true_dist.mass)))
    if view == "mass_above":
        centers = cat.observed_dist.centers
        return float(cat.observed_dist.mass[centers > inp["z"]].sum())
    if view == "ks_margin":
        control = biaslab.sample_catalog(biaslab.SelectionFn("none"), inp["n"], core.Rng(inp["seed"]))
        return (biaslab.ks_statistic(cat.observed_dist, cat.true_dist)
                - biaslab.ks_statistic(control.observed_dist, control.true_dist))
    raise KeyError(view)


def _hk_recalibrate(inp):
    view = inp["view"]
    if view in ("fixed_point", "one_hot"):
        cfg = _cfg(inp)
        e = cfg.edges()
        obs = transport.Histogram(e, np.asarray(inp["observed"], float))
        tgt = transport.Histogram(e, np.asarray(inp["target"], float))
        res = biaslab.hk_recalibrate(obs, tgt, cfg, inp["steps"], inp["lr"])
        if view == "fixed_point":
            return float(np.max(np.abs(res.histogram.mass - tgt.mass)))
        return float(res.histogram.mass[int(np.argmax(tgt.mass))])
    if view == "recovery_ratio":
        sel = biaslab.SelectionFn.parse(inp["selection"])
        cat = biaslab.sample_catalog(sel, inp["n"], core.Rng(inp["seed"]))
        res = biaslab.hk_recalibrate(cat.observed_dist, cat.true_dist, steps=inp["steps"], lr=inp["lr"])
        before = transport.hk_distance_sq(cat.observed_dist, cat.true_dist).hk2
        after = transport.hk_distance_sq(res.histogram, cat.true_dist).hk2
        return after / before
    raise KeyError(view)


def _ablation_run(inp):
    sel = biaslab.SelectionFn.parse(inp["selection"])
    cat = biaslab.sample_catalog(sel, inp["n"], core.Rng(inp["seed"]))
    view = inp["view"]
    if view == "columns":
        return list(biaslab.ablation_run(cat, modes=tuple(inp["modes"])).reports)
    res = biaslab.ablation_run(cat)
    lm = {m: r.overall["log_mse"] for m, r in res.reports.items()}
    if view == "hk_gain":
        return lm["mse-only"] - lm["+hk"]
    if view == "control_spread":
        # largest gap to mse-only in units of twice its bootstrap std
        std = biaslab.bootstrap_std(res.eval_z, res.predictions["mse-only"])
        return max(abs(v - lm["mse-only"]) for v in lm.values()) / (2 * std)
    raise KeyError(view)


def _parse_catalog(inp):
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "cat.csv"
        path.write_text(inp["text"], encoding="utf-8")
        parsed = catalog.parse_catalog(path)
    return {
        "rows": [[r.id, r.z_true, r.z_pred, r.g_r] for r in parsed.rows],
        "filtered": [[ln, i, why] for ln, i, why in parsed.filtered],
        "error_lines": [ln for ln, _ in parsed.errors],
    }


def _gen_galaxy(inp):
    view = inp["view"]
    if view == "radial":
        spec = galaxy.SyntheticGalaxySpec(kind="elliptical", resolution=inp["res"])
        img = galaxy.gen_galaxy(spec)
        # exact-radius pairs: 90 degree rotation and transpose map pixel centres onto equal radii
        return float(max(np.max(np.abs(img - np.rot90(img))), np.max(np.abs(img - img.T))))
    if view == "rot180":
        spec = galaxy.SyntheticGalaxySpec(kind="spiral", arms=2, resolution=inp["res"])
        img = galaxy.gen_galaxy(spec)
        return float(np.max(np.abs(img - np.rot90(img, 2))))
    if view == "cross_res":
        lo = galaxy.gen_galaxy(galaxy.SyntheticGalaxySpec(kind=inp["kind"], resolution=64))
        hi = galaxy.gen_galaxy(galaxy.SyntheticGalaxySpec(kind=inp["kind"], resolution=128))
        down = hi.reshape(64, 2, 64, 2).mean(axis=(1, 3))
        return float(np.corrcoef(lo.ravel(), down.ravel())[0, 1])
    raise KeyError(view)


def _run_cli(inp):
    with tempfile.TemporaryDirectory() as tmp:
        for name, text in inp.get("files", {}).items():
            Path(tmp, name).write_text(text, encoding="utf-8")
        env = dict(os.environ)
        src = str(Path(__file__).resolve().parents[2])
        env["PYTHONPATH"] = src + os.pathsep + env.get("PYTHONPATH", "")
        proc = subprocess.run([sys.executable, "-m", "otdebias", *inp["argv"]], cwd=tmp,
                              capture_output=True, text=True, env=env)
    view = inp["view"]
    if view == "exit_code":
        return proc.returncode
    if view == "line_count":
        return len(proc.stdout.splitlines()) - 1
    if view == "json_field":
        import json

        data = json.loads(proc.stdout)
        for key in inp["path"]:
            data = data[key]
        return data
    raise KeyError(view)


def _run_examples(inp):
    from . import ExampleCase, run_examples

    cases = [ExampleCase.from_dict(c) for c in inp["cases"]]
    report = run_examples(cases)
    return [r.status for r in report.results]


ADAPTERS = {
    "tensor_new": _tensor_new,
    "normal_sample": _normal_sample,
    "make_gabor_bank": _make_gabor_bank,
    "decompose": _decompose,
    "bottleneck": _bottleneck,
    "cross_resolution_cv": _cross_resolution_cv,
    "selective_delta": _selective_delta,
    "discretize": _discretize,
    "scan": _scan,
    "scan_4dir": _scan_4dir,
    "gated_aggregate": _gated_aggregate,
    "residual_fuse": _residual_fuse,
    "encode_coord": _encode_coord,
    "relate_tasks": _relate_tasks,
    "histogram": _histogram,
    "sinkhorn": _sinkhorn,
    "hellinger_sq": _hellinger_sq,
    "hk_distance_sq": _hk_distance_sq,
    "hk_loss": _hk_loss,
    "focal_loss": _focal_loss,
    "adaptive_gamma": _adaptive_gamma,
    "color_weight": _color_weight,
    "redshift_loss": _redshift_loss,
    "vib_kl": _vib_kl,
    "reparameterize": _reparameterize,
    "lsi_term": _lsi_term,
    "total_loss": _total_loss,
    "hk_curriculum": _hk_curriculum,
    "uba_lr": _uba_lr,
    "z_norm": _z_norm,
    "compute_metrics": _compute_metrics,
    "relative_improvement": _relative_improvement,
    "coefficient_of_variation": _coefficient_of_variation,
    "accuracy": _accuracy,
    "sample_catalog": _sample_catalog,
    "hk_recalibrate": _hk_recalibrate,
    "ablation_run": _ablation_run,
    "parse_catalog": _parse_catalog,
    "gen_galaxy": _gen_galaxy,
    "run_cli": _run_cli,
    "run_examples": _run_examples,
}
