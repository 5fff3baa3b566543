"""Regenerate the worked-example corpus JSON. Expected values are written by hand."""
import json, math
from pathlib import Path
OUT = Path(__file__).resolve().parents[1] / "src" / "otdebias" / "docsbook" / "corpus"
E = math.e

def C(op, case, inputs, expected, tol=0.0, prov="TRIVIAL", compare="abs", oracle=None):
    return dict(op=op, case=case, inputs=inputs, expected=expected, tolerance=tol,
                provenance=prov, compare=compare, oracle=oracle)

files = {}
files["core_arrays"] = [
    C("tensor_new", "2x2 zeros", {"shape": [2, 2], "fill": 0.0}, [[0.0, 0.0], [0.0, 0.0]], compare="eq"),
    C("tensor_new", "fill 1.5", {"shape": [3], "fill": 1.5}, [1.5, 1.5, 1.5], compare="eq"),
    C("tensor_new", "size is product of extents", {"shape": [2, 3, 4], "fill": 0.0, "view": "size"}, 24, compare="eq"),
    C("normal_sample", "sample mean", {"seed": 42, "shape": [100000], "view": "mean"}, 0.0, 0.02, "DERIVED", oracle="normal_moment"),
    C("normal_sample", "same seed twice", {"seed": 42, "shape": [1000], "view": "repeat_diff"}, 0.0, compare="eq"),
    C("normal_sample", "sample variance", {"seed": 42, "shape": [100000], "view": "var"}, 1.0, 0.02, "DERIVED", oracle="normal_moment"),
]
files["wavelet_frontend"] = [
    C("make_gabor_bank", "origin value", {"theta": 0.7, "size": 9, "sigma": 2.0, "wavelength": 4.0, "view": "origin"}, [1.0, 0.0], 1e-15, oracle="gabor_at_origin"),
    C("make_gabor_bank", "theta 0 vs pi", {"size": 9, "sigma": 2.0, "wavelength": 4.0, "view": "pi_symmetry"}, 0.0, 1e-12, "DERIVED", oracle="gabor_pi_symmetry"),
    C("make_gabor_bank", "unit norm", {"size": 9, "sigma": 2.0, "wavelength": 4.0, "view": "norms"}, [1.0] * 4, 1e-12),
    C("decompose", "constant image", {"res": 8, "size": 5, "sigma": 1.2, "wavelength": 3.0, "value": 3.0, "view": "constant"}, 0.0, 1e-8, "DERIVED", oracle="brute_constant_response"),
    C("decompose", "impulse gives flipped kernel", {"res": 21, "size": 9, "sigma": 2.0, "wavelength": 4.0, "view": "impulse"}, 0.0, 1e-12),
    C("decompose", "shift: modulus beats real part", {"res": 64, "size": 9, "sigma": 2.0, "wavelength": 4.0, "view": "shift_ratio"}, 1.0, prov="DERIVED", compare="lt"),
    C("bottleneck", "64 px", {"res": 64, "view": "compression"}, 1.0, 0.0, "PAPER"),
    C("bottleneck", "244 px", {"res": 244, "view": "compression"}, 3.8, 0.05, "PAPER"),
    C("bottleneck", "constant maps pool to constant", {"res": 64, "value": 0.7, "view": "constant"}, 0.0, 1e-15),
    C("cross_resolution_cv", "identical tensors", {"view": "identical"}, 0.0, 0.0),
    C("cross_resolution_cv", "accuracy series", {"view": "series", "values": [75.19, 81.72, 82.42, 80.93]}, 3.58, 0.01, "PAPER", oracle="population_cv_percent"),
    C("cross_resolution_cv", "spiral vs fixed-scale baseline", {"view": "spiral_ratio", "resolutions": [64, 128, 244]}, 1.0, prov="DERIVED", compare="lt"),
]
files["ssm_core"] = [
    C("selective_delta", "constant row", {"delta": [[3.0, 3.0, 3.0]]}, [[1.0, 1.0, 1.0]], 1e-15),
    C("selective_delta", "row [1, e^2]", {"delta": [[1.0, E**2]]}, [[0.3679, 2.7183]], 1e-4, "DERIVED", oracle="geometric_normalise"),
    C("selective_delta", "unit row product", {"delta": [[0.5, 2.0, 7.0], [1e-3, 5.0, 0.2], [10.0, 10.0, 0.01]], "view": "row_products"}, [1.0, 1.0, 1.0], 1e-12),
    C("discretize", "Taylor limit at zero", {"A": 0.0, "B": 1.0, "delta": 1.0, "eps": 1e-6}, [1.0, 1.0], 1e-15),
    C("discretize", "A = -1", {"A": -1.0, "B": 1.0, "delta": 1.0}, [0.367879, 0.632121], 1e-6, "DERIVED", oracle="zoh_closed_form"),
    C("discretize", "continuity at the switch", {"eps": 1e-6, "view": "branch_gap"}, 0.0, 1e-9, "DERIVED", oracle="zoh_branch_gap"),
    C("scan", "running sum", {"A": 0.0, "B": 1.0, "C": 1.0, "D": 0.0, "delta": 1.0, "x": [1.0, 2.0, 3.0]}, [1.0, 3.0, 6.0], 1e-12, "DERIVED", oracle="unrolled_scan"),
    C("scan", "zero input", {"A": -0.3, "B": 0.7, "C": 1.1, "D": 0.4, "delta": 1.0, "x": [0.0] * 4, "view": "y_and_h"}, {"y": [0.0] * 4, "h": [0.0]}, 0.0),
    C("scan", "memoryless when A = -50", {"A": -50.0, "B": 2.0, "C": 1.5, "D": 0.25, "delta": 1.0, "x": [1.0, -2.0, 0.5, 3.0]}, [0.31, -0.62, 0.155, 0.93], 1e-9, "DERIVED", oracle="unrolled_scan"),
    C("scan_4dir", "180 degree symmetric grid", {"d": 3, "seed": 4, "view": "rot_symmetry"}, 0.0, 1e-12, "DERIVED"),
    C("scan_4dir", "zero grid", {"d": 2, "seed": 1, "view": "zero"}, 0.0, 0.0),
    C("scan_4dir", "4D channels", {"d": 5, "seed": 2, "view": "channels"}, 20, compare="eq"),
    C("gated_aggregate", "zero gate weights", {"d": 3, "seed": 5, "view": "zero_gate"}, 0.0, 1e-12),
    C("gated_aggregate", "zero content weights", {"d": 3, "seed": 6, "view": "zero_content"}, 0.0, 0.0),
    C("gated_aggregate", "gate bounds magnitude", {"d": 4, "seed": 7, "draws": 50, "view": "bound_violation"}, 0.0, prov="DERIVED", compare="le"),
    C("residual_fuse", "gate 0", {"x": 2.0, "y": 4.0, "gate": 0.0}, 2.0, 0.0),
    C("residual_fuse", "gate 1", {"x": 2.0, "y": 4.0, "gate": 1.0}, 4.0, 0.0),
    C("residual_fuse", "gate 0.5", {"x": 2.0, "y": 4.0, "gate": 0.5}, 3.0, 1e-15, "DERIVED", oracle="convex_mix"),
]
files["encodings_tasks"] = [
    C("encode_coord", "theta 0", {"theta": 0.0, "k": 3, "view": "vector"}, [0.0, 0.0, 0.0, 1.0, 1.0, 1.0], 0.0),
    C("encode_coord", "integer periods", {"theta": 0.37, "k": 4, "index": 2, "periods": 3, "view": "periodicity"}, 0.0, 1e-9),
    C("encode_coord", "log-spaced frequencies", {"k": 3, "omega_min": 1.0, "omega_max": 100.0, "view": "frequencies"}, [1.0, 10.0, 100.0], 1e-9, "DERIVED", oracle="log_spaced"),
    C("relate_tasks", "zero logits average", {"raw": [[0.0, 0.0], [0.0, 0.0]], "f_cls": [1.0, 2.0], "f_red": [3.0, 6.0]}, [[2.0, 4.0], [2.0, 4.0]], 1e-15),
    C("relate_tasks", "learned regime", {"weights": [[0.45, 0.55], [0.32, 0.68]], "view": "matrix"}, [[0.45, 0.55], [0.32, 0.68]], 1e-12, "PAPER"),
    C("relate_tasks", "equal features fixed point", {"raw": [[1.3, -0.4], [2.0, 0.1]], "f_cls": [0.5, -1.5, 2.0], "f_red": [0.5, -1.5, 2.0]}, [[0.5, -1.5, 2.0], [0.5, -1.5, 2.0]], 1e-12),
]
unit3 = [[0, 1, 4], [1, 0, 1], [4, 1, 0]]
files["transport"] = [
    C("histogram", "value 1.0 on 40 bins", {"values": [1.0], "lo": 0.0, "hi": 2.0, "bins": 40}, [0.0] * 20 + [1.0] + [0.0] * 19, 0.0, "DERIVED", oracle="one_hot_bin"),
    C("histogram", "uniform grid fill", {"count": 4000, "view": "uniform_grid"}, 0.0, 1e-12),
    C("histogram", "all values equal", {"values": [0.73] * 5, "view": "max_mass"}, 1.0, 0.0),
    C("sinkhorn", "unique coupling plan", {"a": [1.0, 0.0], "b": [0.0, 1.0], "cost": [[0, 1], [1, 0]], "eps": 0.01, "view": "plan"}, [[0.0, 1.0], [0.0, 0.0]], 1e-9, "DERIVED"),
    C("sinkhorn", "unique coupling cost", {"a": [1.0, 0.0], "b": [0.0, 1.0], "cost": [[0, 1], [1, 0]], "eps": 0.01}, 1.0, 1e-9, "DERIVED", oracle="exact_ot_lp"),
    C("sinkhorn", "identity plan", {"a": [0.5, 0.5], "b": [0.5, 0.5], "cost": [[0, 1], [1, 0]], "eps": 1e-3}, 0.0, 1e-6, oracle="exact_ot_lp"),
    C("sinkhorn", "3-bin quarter grid", {"a": [0.5, 0.25, 0.25], "b": [0.25, 0.25, 0.5], "cost": unit3, "eps": 1e-3, "denominator": 4}, 0.5, 1e-3, "DERIVED", oracle="exact_ot_grid"),
    C("sinkhorn", "default configuration converges", {"seed": 3, "n_bins": 40, "pairs": 20, "eps": 0.1, "stop_tol": 1e-4, "max_iter": 50, "view": "random_converge"}, 1e-4, prov="PAPER", compare="lt"),
    C("hellinger_sq", "identity", {"p": [0.3, 0.7], "q": [0.3, 0.7]}, 0.0, 0.0),
    C("hellinger_sq", "disjoint one-hots", {"p": [1.0, 0.0], "q": [0.0, 1.0]}, 4.0, 1e-12, "DERIVED", oracle="hellinger_loop"),
    C("hellinger_sq", "half vs one-hot", {"p": [0.5, 0.5], "q": [1.0, 0.0]}, 1.171573, 1e-6, "DERIVED", oracle="hellinger_loop"),
    C("hk_distance_sq", "identity after debiasing", {"n_bins": 4, "p": [0.1, 0.2, 0.3, 0.4], "q": [0.1, 0.2, 0.3, 0.4]}, 0.0, 1e-6),
    C("hk_distance_sq", "adjacent unit one-hots", {"n_bins": 2, "z_range": [0.0, 2.0], "eps_entropic": 1e-3, "stop_tol": 1e-12, "max_iter": 10000, "delta": 1.0, "p": [1.0, 0.0], "q": [0.0, 1.0]}, 5.0, 1e-3, "DERIVED", oracle="hk_two_bin_exhaustive"),
    C("hk_distance_sq", "symmetry on random pairs", {"n_bins": 40, "seed": 11, "pairs": 20, "view": "symmetry"}, 0.0, 1e-10),
    C("hk_loss", "matched sample set", {"seed": 5, "n": 500, "view": "matched"}, 0.0, 0.05),
    C("hk_loss", "predictions below support", {"seed": 6, "n": 64, "view": "below_support"}, 0.0, prov="DERIVED", compare="lt"),
    C("hk_loss", "central differences", {"seed": 8, "n": 32, "instances": 2, "h": 1e-5, "view": "fd_relerr"}, 1e-4, prov="DERIVED", compare="lt"),
]
parts1 = {"L_cls": 1.0, "L_red": 1.0, "kl": 1.0, "L_hk": 1.0}
files["losses_sched"] = [
    C("focal_loss", "gamma 0 is cross-entropy", {"probs": [0.2, 0.3, 0.5], "label": 2, "gamma": 0.0}, 0.693147, 1e-6, oracle="focal_direct"),
    C("focal_loss", "perfect prediction", {"probs": [0.0, 1.0, 0.0], "label": 1, "gamma": 2.0}, 0.0, 0.0),
    C("focal_loss", "p_y 0.5, gamma 2", {"probs": [0.5, 0.5], "label": 0, "gamma": 2.0}, 0.173287, 1e-6, "DERIVED", oracle="focal_direct"),
    C("adaptive_gamma", "on baseline", {"l_current": 0.8, "l_baseline": 0.8, "gamma0": 2.0, "eta": 1.0}, 2.0, 0.0),
    C("adaptive_gamma", "twice baseline", {"l_current": 1.6, "l_baseline": 0.8, "gamma0": 2.0, "eta": 1.0}, 2.761594, 1e-6, "DERIVED", oracle="gamma_direct"),
    C("adaptive_gamma", "current loss to zero", {"l_current": 0.0, "l_baseline": 0.8, "gamma0": 2.0, "eta": 1.0}, 1.238406, 1e-6, "DERIVED", oracle="gamma_direct"),
    C("color_weight", "three tiers", {"values": [0.1, 0.45, 0.9, 1.3, 2.0]}, [0.3, 0.7, 1.0, 0.7, 0.3], 0.0, "PAPER"),
    C("color_weight", "boundaries take the upper tier", {"values": [0.3, 0.6, 1.2, 1.5]}, [0.7, 1.0, 1.0, 0.7], 0.0),
    C("color_weight", "default bands", {"values": [0.6, 1.2, 0.35, 1.45, 1.6, 0.29]}, [1.0, 1.0, 0.7, 0.7, 0.3, 0.3], 0.0, "DERIVED"),
    C("redshift_loss", "identity", {"z_pred": [0.2, 1.4], "z_true": [0.2, 1.4]}, 0.0, 0.0),
    C("redshift_loss", "log e = 1", {"z_pred": [E - 1], "z_true": [0.0]}, 1.0, 1e-12, "DERIVED", oracle="redshift_direct"),
    C("redshift_loss", "weight 0.3", {"z_pred": [E - 1], "z_true": [0.0], "weights": [0.3]}, 0.3, 1e-12, "DERIVED", oracle="redshift_direct"),
    C("vib_kl", "prior match", {"mu": [0.0], "sigma": [1.0]}, 0.0, 0.0),
    C("vib_kl", "mu 1", {"mu": [1.0], "sigma": [1.0]}, 0.5, 1e-12, "DERIVED", oracle="kl_closed_form"),
    C("vib_kl", "sigma e", {"mu": [0.0], "sigma": [E]}, 2.194528, 1e-6, "DERIVED", oracle="kl_closed_form"),
    C("reparameterize", "sigma to zero", {"mu": [0.3, -1.2], "sigma": [1e-300, 1e-300], "seed": 1, "view": "value"}, [0.3, -1.2], 0.0),
    C("reparameterize", "seeded repeat", {"mu": [0.3, -1.2], "sigma": [0.5, 2.0], "seed": 1, "view": "repeat_diff"}, 0.0, compare="eq"),
    C("reparameterize", "sample mean", {"mu": [0.5, -2.0], "sigma": [1.0, 3.0], "seed": 9, "draws": 100000, "view": "mean"}, [0.5, -2.0], 0.03, "DERIVED", oracle="sample_mean_target"),
    C("lsi_term", "zero kl", {"kl": 0.0, "c_raw": 0.0}, 0.0, 0.0),
    C("lsi_term", "sqrt ln 2", {"kl": 1.0, "c_raw": 0.0}, 0.832555, 1e-6, "DERIVED", oracle="lsi_direct"),
    C("lsi_term", "increasing in kl", {"kls": [0.0, 0.1, 0.5, 1.0, 4.0], "c_raw": 0.3, "view": "increasing"}, True, compare="eq"),
    C("total_loss", "all ones after ramp", {"parts": parts1, "epoch": 12, "lambda_hk_expected": 0.035}, 1.884907, 1e-6, "DERIVED", oracle="total_direct"),
    C("total_loss", "all zeros", {"parts": {"L_cls": 0.0, "L_red": 0.0, "kl": 0.0, "L_hk": 0.0}, "epoch": 5}, 0.0, 0.0),
    C("total_loss", "no HK term before epoch 2", {"parts": parts1, "epoch": 1, "lambda_hk_expected": 0.0}, 1.849907, 1e-6, "PAPER", oracle="total_direct"),
    C("hk_curriculum", "epoch 0", {"epoch": 0}, 0.0, 0.0, "PAPER"),
    C("hk_curriculum", "ramp done", {"epoch": 12}, 0.035, 1e-15, "PAPER"),
    C("hk_curriculum", "mid ramp", {"epoch": 7}, 0.0175, 1e-15, "DERIVED", oracle="ramp_direct"),
    C("uba_lr", "end of warmup", {"t": 10}, 1e-3, compare="eq", prov="PAPER"),
    C("uba_lr", "t = T, phi 0.7", {"t": 120, "phi": 0.7}, 2.1008e-4, 1e-8, "DERIVED", oracle="uba_direct"),
    C("uba_lr", "t = 0", {"t": 0}, 1e-4, 1e-18, "PAPER"),
]
files["eval_metrics"] = [
    C("z_norm", "z 0", {"z": 0.0}, 0.0, 0.0),
    C("z_norm", "z 1", {"z": 1.0}, 0.693147, 1e-6, "DERIVED", oracle="log1p_direct"),
    C("z_norm", "monotone", {"values": [0.0, 0.01, 0.5, 1.0, 1.99]}, True, compare="eq"),
    C("compute_metrics", "perfect predictor", {"z_true": [0.1, 0.7, 1.2, 1.8], "z_pred": [0.1, 0.7, 1.2, 1.8]}, {"log_mse": 0.0, "bias": 0.0, "outlier_rate": 0.0}, 0.0),
    C("compute_metrics", "single row", {"z_true": [0.0], "z_pred": [E - 1]}, {"log_mse": 1.0, "bias": E - 1, "outlier_rate": 1.0}, 1e-6, "DERIVED", oracle="metrics_direct"),
    C("compute_metrics", "bin labels", {"z_true": [0.1, 0.7, 1.2, 1.8], "z_pred": [0.1, 0.7, 1.2, 1.8], "view": "bins"}, ["0.0-0.5", "0.5-1.0", "1.0-1.5", "1.5-2.0"], compare="eq", prov="PAPER"),
    C("relative_improvement", "log-mse row", {"baseline": 0.023460, "treated": 0.018072}, 22.96, 0.05, "PAPER", oracle="improvement_direct"),
    C("relative_improvement", "outlier row", {"baseline": 0.144996, "treated": 0.107155}, 26.10, 0.05, "PAPER", oracle="improvement_direct"),
    C("relative_improvement", "identity", {"baseline": 0.5, "treated": 0.5}, 0.0, 0.0),
    C("coefficient_of_variation", "accuracy series", {"values": [75.19, 81.72, 82.42, 80.93]}, 3.58, 0.01, "PAPER", oracle="population_cv_percent"),
    C("coefficient_of_variation", "constant list", {"values": [4.0, 4.0, 4.0]}, 0.0, 0.0),
    C("coefficient_of_variation", "baseline series", {"values": [64.56, 68.58, 73.05, 75.63]}, 6.01, 0.01, "DERIVED", oracle="population_cv_percent"),
    C("accuracy", "identical", {"pred": [0, 1, 2, 3], "true": [0, 1, 2, 3]}, 100.0, 0.0),
    C("accuracy", "disjoint", {"pred": [0, 0, 0], "true": [1, 1, 1]}, 0.0, 0.0),
    C("accuracy", "three of four", {"pred": [0, 1, 2, 3], "true": [0, 1, 2, 0]}, 75.0, 1e-12, "DERIVED", oracle="accuracy_count"),
]
files["biaslab"] = [
    C("sample_catalog", "no selection", {"selection": "none", "n": 2000, "seed": 3, "view": "obs_equals_true"}, 0.0, 0.0),
    C("sample_catalog", "hard cutoff at z = 1", {"selection": "step:z_cut=1", "n": 2000, "seed": 3, "z": 1.0, "view": "mass_above"}, 0.0, 0.0),
    C("sample_catalog", "logistic KS above control", {"selection": "logistic:z0=0.8,k=6", "n": 10000, "seed": 7, "view": "ks_margin"}, 0.0, prov="DERIVED", compare="gt"),
    C("hk_recalibrate", "fixed point", {"n_bins": 3, "observed": [0.2, 0.3, 0.5], "target": [0.2, 0.3, 0.5], "steps": 50, "lr": 0.05, "view": "fixed_point"}, 0.0, 0.0),
    C("hk_recalibrate", "adjacent one-hot", {"n_bins": 40, "observed": [0.0] * 10 + [1.0] + [0.0] * 29, "target": [0.0] * 11 + [1.0] + [0.0] * 28, "steps": 500, "lr": 0.05, "view": "one_hot"}, 0.9, prov="DERIVED", compare="ge"),
    C("hk_recalibrate", "logistic recovery", {"selection": "logistic:z0=0.8,k=6", "n": 10000, "seed": 7, "steps": 500, "lr": 0.05, "view": "recovery_ratio"}, 0.5, prov="DERIVED", compare="le"),
    C("ablation_run", "unbiased control spread", {"selection": "none", "n": 10000, "seed": 7, "view": "control_spread"}, 1.0, prov="DERIVED", compare="lt"),
    C("ablation_run", "hk beats mse-only under selection", {"selection": "logistic:z0=0.8,k=6", "n": 10000, "seed": 7, "view": "hk_gain"}, 0.0, prov="DERIVED", compare="gt"),
    C("ablation_run", "four columns", {"selection": "logistic:z0=0.8,k=6", "n": 1000, "seed": 7, "modes": ["mse-only", "+color", "+hk", "+color+hk"], "view": "columns"}, ["mse-only", "+color", "+hk", "+color+hk"], compare="eq", prov="PAPER"),
]
hk_vals = "z\n0.1\n0.4\n0.4\n1.3\n1.9\n"
perfect = "id,z_true,z_pred\ng1,0.1,0.1\ng2,0.8,0.8\ng3,1.6,1.6\n"
files["cli_io"] = [
    C("parse_catalog", "well-formed row", {"text": "id,z_true,z_pred,g_r\ng1,0.12,0.13,0.85\n"}, {"rows": [["g1", 0.12, 0.13, 0.85]], "filtered": [], "error_lines": []}, 0.0),
    C("parse_catalog", "out-of-range z", {"text": "id,z_true,z_pred,g_r\ng1,0.12,0.13,0.85\ng2,2.5,0.4,0.9\n"}, {"rows": [["g1", 0.12, 0.13, 0.85]], "filtered": [[3, "g2", "out-of-range"]], "error_lines": []}, 0.0),
    C("parse_catalog", "non-numeric z", {"text": "id,z_true,z_pred,g_r\ng1,0.12,0.13,0.85\ng2,abc,0.4,0.9\n"}, {"rows": [["g1", 0.12, 0.13, 0.85]], "filtered": [], "error_lines": [3]}, 0.0),
    C("gen_galaxy", "elliptical radial symmetry", {"res": 64, "view": "radial"}, 0.0, 1e-9),
    C("gen_galaxy", "2-arm spiral 180 degree symmetry", {"res": 64, "view": "rot180"}, 0.0, 1e-9),
    C("gen_galaxy", "64 vs downsampled 128", {"kind": "spiral", "view": "cross_res"}, 0.99, prov="DERIVED", compare="gt"),
    C("run_cli", "hk on identical files", {"files": {"a.csv": hk_vals, "b.csv": hk_vals}, "argv": ["hk", "--pred", "a.csv", "--target", "b.csv"], "view": "json_field", "path": ["hk2"]}, 0.0, 1e-6),
    C("run_cli", "schedule rows", {"argv": ["schedule", "--epochs", "120"], "view": "line_count"}, 121, compare="eq"),
    C("run_cli", "eval on perfect predictor", {"files": {"p.csv": perfect}, "argv": ["eval", "--catalog", "p.csv"], "view": "json_field", "path": ["overall"]}, {"log_mse": 0.0, "bias": 0.0, "outlier_rate": 0.0}, 0.0),
    C("run_cli", "unknown subcommand", {"argv": ["frobnicate"], "view": "exit_code"}, 2, compare="eq"),
]
good = C("residual_fuse", "gate 0.5", {"x": 2.0, "y": 4.0, "gate": 0.5}, 3.0, 1e-15)
bad = dict(good, case="gate 0.5 perturbed", expected=3.1)
mismatch = C("sinkhorn", "3-bin case at large eps", {"a": [0.5, 0.25, 0.25], "b": [0.25, 0.25, 0.5], "cost": unit3, "eps": 1.0, "denominator": 4}, 0.5, 1e-3, "DERIVED", oracle="exact_ot_grid")
files["docsbook"] = [
    C("run_examples", "correct cases all pass", {"cases": [good, files["core_arrays"][0], files["transport"][9]]}, ["PASS", "PASS", "PASS"], compare="eq"),
    C("run_examples", "one perturbed expectation", {"cases": [good, bad, files["eval_metrics"][0]]}, ["PASS", "TOLERANCE_FAIL", "PASS"], compare="eq"),
    C("run_examples", "oracle disagreement is its own status", {"cases": [mismatch]}, ["ORACLE_MISMATCH"], compare="eq"),
]
for name, cases in files.items():
    (OUT / f"{name}.json").write_text(json.dumps(cases, indent=1) + "\n", encoding="utf-8")
print(sum(len(v) for v in files.values()))
