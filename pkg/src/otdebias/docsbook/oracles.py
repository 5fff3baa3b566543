"""Independent reference computations for the worked-example corpus.

Nothing here calls into the library's numerical code paths: closed forms are
evaluated with ``math``, transport optima by exhaustive enumeration or a
generic LP solver, recurrences by explicit unrolling, and gradients by
central differences of the function under test.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.optimize import linprog


def const(inputs):
    return inputs["value"]


def normal_moment(inputs):
    return {"mean": 0.0, "var": 1.0}[inputs["view"]]


def gabor_at_origin(inputs):
    # exp(-0) * exp(i * 0)
    return [1.0, 0.0]


def _gabor(theta, size, sigma, lam):
    half = size // 2
    re = np.empty((size, size))
    im = np.empty((size, size))
    env = np.empty((size, size))
    for i in range(size):
        for j in range(size):
            y, x = i - half, j - half
            xp = x * math.cos(theta) + y * math.sin(theta)
            yp = -x * math.sin(theta) + y * math.cos(theta)
            e = math.exp(-(xp * xp + yp * yp) / (2 * sigma * sigma))
            env[i, j] = e
            re[i, j] = e * math.cos(2 * math.pi * xp / lam)
            im[i, j] = e * math.sin(2 * math.pi * xp / lam)
    return re, im, env


def gabor_pi_symmetry(inputs):
    size, sigma, lam = inputs["size"], inputs["sigma"], inputs["wavelength"]
    r0, i0, _ = _gabor(0.0, size, sigma, lam)
    r1, i1, _ = _gabor(math.pi, size, sigma, lam)
    return float(max(np.max(np.abs(r0 - r1)), np.max(np.abs(i0 + i1))))


def brute_constant_response(inputs):
    """Direct double loop of a constant image against zero-mean kernels."""
    size, sigma, lam, c = inputs["size"], inputs["sigma"], inputs["wavelength"], inputs["value"]
    worst = 0.0
    for theta in (math.pi / 2, math.pi, 3 * math.pi / 2, 0.0):
        re, im, env = _gabor(theta, size, sigma, lam)
        re = re - env * (re.sum() / env.sum())
        im = im - im.mean()
        norm = math.sqrt(float((re**2).sum() + (im**2).sum()))
        acc_r = acc_i = 0.0
        for i in range(size):
            for j in range(size):
                acc_r += c * re[i, j] / norm
                acc_i += c * im[i, j] / norm
        worst = max(worst, abs(acc_r), abs(acc_i))
    return worst


def population_cv_percent(inputs):
    v = inputs["values"]
    m = sum(v) / len(v)
    var = sum((x - m) ** 2 for x in v) / len(v)
    return 100.0 * math.sqrt(var) / m


def geometric_normalise(inputs):
    out = []
    for row in inputs["delta"]:
        logs = [math.log(d) for d in row]
        mean = sum(logs) / len(logs)
        out.append([math.exp(v - mean) for v in logs])
    return out


def zoh_closed_form(inputs):
    a, b, d = inputs["A"], inputs["B"], inputs["delta"]
    if a == 0:
        return [1.0, d * b]
    return [math.exp(d * a), (math.exp(d * a) - 1.0) / a * b]


def zoh_branch_gap(inputs):
    # exact expm1 ratio on both sides of the switch: the function is smooth
    eps = inputs["eps"]
    f = lambda x: math.expm1(x) / x
    return abs(f(-eps) - f(-eps * (1 - 1e-9)))


def unrolled_scan(inputs):
    """y_t = C sum_{s<=t} Abar^(t-s) Bbar x_s + D x_t, by explicit double loop."""
    a, b, c, dd, delta = inputs["A"], inputs["B"], inputs["C"], inputs["D"], inputs["delta"]
    abar, bbar = zoh_closed_form({"A": a, "B": b, "delta": delta})
    x = inputs["x"]
    y = []
    for t in range(len(x)):
        acc = 0.0
        for s in range(t + 1):
            acc += abar ** (t - s) * bbar * x[s]
        y.append(c * acc + dd * x[t])
    return y


def convex_mix(inputs):
    g = inputs["gate"]
    return g * inputs["y"] + (1 - g) * inputs["x"]


def log_spaced(inputs):
    k, lo, hi = inputs["k"], inputs["omega_min"], inputs["omega_max"]
    return [lo * (hi / lo) ** (i / (k - 1)) for i in range(k)]


def one_hot_bin(inputs):
    lo, hi, n = inputs["lo"], inputs["hi"], inputs["bins"]
    w = (hi - lo) / n
    out = [0.0] * n
    for v in inputs["values"]:
        idx = min(n - 1, max(0, int(math.floor((v - lo) / w + 1e-12))))
        out[idx] += 1.0 / len(inputs["values"])
    return out


def exact_ot_lp(inputs):
    """Unregularised OT value from a generic LP solver."""
    a, b = np.asarray(inputs["a"], float), np.asarray(inputs["b"], float)
    cost = np.asarray(inputs["cost"], float)
    n, m = a.size, b.size
    a_eq = np.zeros((n + m, n * m))
    for i in range(n):
        a_eq[i, i * m : (i + 1) * m] = 1.0
    for j in range(m):
        a_eq[n + j, j::m] = 1.0
    res = linprog(cost.ravel(), A_eq=a_eq, b_eq=np.concatenate([a, b]), bounds=(0, None), method="highs")
    return float(res.fun)


def _compositions(total, parts):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def exact_ot_enumerate(a_units, b_units, cost, unit):
    """Minimum cost over every integer coupling (masses in multiples of ``unit``).

    Integer marginals admit an integral optimal vertex of the transportation
    polytope, so this enumeration is exact.
    """
    n, m = len(a_units), len(b_units)
    best = math.inf

    def rec(i, remaining, acc):
        nonlocal best
        if i == n:
            if all(r == 0 for r in remaining):
                best = min(best, acc)
            return
        for row in itertools.product(*(range(min(a_units[i], r) + 1) for r in remaining)):
            if sum(row) != a_units[i]:
                continue
            rec(i + 1, [r - x for r, x in zip(remaining, row)],
                acc + sum(cost[i][j] * row[j] * unit for j in range(m)))

    rec(0, list(b_units), 0.0)
    return best


def exact_ot_grid(inputs):
    unit = 1.0 / inputs["denominator"]
    a = [round(x / unit) for x in inputs["a"]]
    b = [round(x / unit) for x in inputs["b"]]
    return exact_ot_enumerate(a, b, inputs["cost"], unit)


def hellinger_loop(inputs):
    return 2.0 * sum((math.sqrt(p) - math.sqrt(q)) ** 2 for p, q in zip(inputs["p"], inputs["q"]))


def hk_two_bin_exhaustive(inputs):
    """Adjacent unit-spaced one-hots: the only coupling moves all mass one unit."""
    p, q = inputs["p"], inputs["q"]
    transport = exact_ot_grid({"a": p, "b": q, "cost": [[0, 1], [1, 0]], "denominator": 1})
    return transport + inputs["delta"] * hellinger_loop({"p": p, "q": q})


def central_difference(fn, x, h):
    x = np.asarray(x, dtype=np.float64)
    g = np.empty_like(x)
    for i in range(x.size):
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        g[i] = (fn(xp) - fn(xm)) / (2 * h)
    return g


def focal_direct(inputs):
    p = inputs["probs"][inputs["label"]]
    a = (inputs.get("alpha") or [1.0] * len(inputs["probs"]))[inputs["label"]]
    return -a * (1 - p) ** inputs["gamma"] * math.log(p)


def gamma_direct(inputs):
    lc, lb = inputs["l_current"], inputs["l_baseline"]
    return inputs["gamma0"] + inputs["eta"] * math.tanh((lc - lb) / lb)


def redshift_direct(inputs):
    w = inputs.get("weights") or [1.0] * len(inputs["z_pred"])
    return sum(wi * (math.log(1 + p) - math.log(1 + t)) ** 2
               for wi, p, t in zip(w, inputs["z_pred"], inputs["z_true"]))


def kl_closed_form(inputs):
    return sum(0.5 * (m * m + s * s - 1 - 2 * math.log(s)) for m, s in zip(inputs["mu"], inputs["sigma"]))


def lsi_direct(inputs):
    return math.sqrt(math.log(1 + math.exp(inputs["c_raw"])) * inputs["kl"])


def total_direct(inputs):
    p = inputs["parts"]
    lam = inputs["lambda_hk_expected"]
    lsi = p.get("lsi", math.sqrt(math.log(2) * p["kl"]))
    return p["L_cls"] + 0.5 * p["L_red"] + 0.25 * p["kl"] + 0.12 * lsi + lam * p.get("L_hk", 0.0)


def ramp_direct(inputs):
    e = inputs["epoch"]
    if e < 2:
        return 0.0
    return 0.035 * min(1.0, (e - 2) / 10)


def uba_direct(inputs):
    t, tw, T = inputs["t"], inputs.get("t_w", 10), inputs.get("T", 120)
    lo, hi, init, phi = 5e-6, 1e-3, 1e-4, inputs.get("phi", 0.7)
    if t < tw:
        return init + (hi - init) * t / tw
    return lo + 0.5 * (hi - lo) * (1 + math.cos(math.pi * phi * (t - tw) / (T - tw)))


def log1p_direct(inputs):
    return math.log(1 + inputs["z"])


def metrics_direct(inputs):
    zt, zp = inputs["z_true"], inputs["z_pred"]
    n = len(zt)
    return {
        "log_mse": sum((math.log(1 + p) - math.log(1 + t)) ** 2 for p, t in zip(zp, zt)) / n,
        "bias": sum(p - t for p, t in zip(zp, zt)) / n,
        "outlier_rate": sum(abs(p - t) / (1 + t) > 0.15 for p, t in zip(zp, zt)) / n,
    }


def improvement_direct(inputs):
    b, t = inputs["baseline"], inputs["treated"]
    return 100.0 * (b - t) / b


def accuracy_count(inputs):
    p, t = inputs["pred"], inputs["true"]
    return 100.0 * sum(x == y for x, y in zip(p, t)) / len(p)


def sample_mean_target(inputs):
    return inputs["mu"]


REGISTRY = {name: fn for name, fn in globals().items() if callable(fn) and not name.startswith("_")
            and name not in ("linprog", "central_difference", "exact_ot_enumerate")}
