"""Named verification scenarios shared by the command line and the test suite.

A scenario takes a resolved configuration (grid, path count, seed, model
parameters, tolerances), simulates in fixed-size blocks through
:func:`~skewfold.statistics.run_batches`, and returns a report: one entry per
check with its target, estimate and pass/fail, plus a sample path for export.

Configuration layout (every key optional except the scenario's required
model parameters when a configuration file is supplied)::

    seed: 42
    grid: {T: 1.0, n: 4096}
    n_paths: 100000
    block_size: 512
    params: {alpha: 0.7}
    tolerances: {sign_law: 0.015}
"""

from __future__ import annotations

import copy
import math
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ConfigurationError
from .excursions import unfold_conventional, unfold_skorokhod
from .local_time import crossing_mask, estimate_local_time, occupation_local_time, tanaka_local_time, upcrossing_local_time
from .particles import ParticleParams, build_skew_system, simulate_base
from .paths import RngStream, TimeGrid, sample_brownian
from .processes import SkewBesselParams, nakao_solution, ocone_counterexample, skew_bessel, skew_brownian
from .reflection import conventional_reflect
from .statistics import mc_estimate, run_batches

__all__ = ["SCENARIOS", "Scenario", "resolve_config", "run_scenario", "sample_series", "report_fingerprint"]

SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)
EXACT = 1e-12


@dataclass(frozen=True)
class Scenario:
    name: str
    summary: str
    required: tuple
    preset: dict
    run: Callable
    series: Callable


def _check(name, target, estimate, passed, tolerance=None, ci=None, **extra):
    d = {
        "name": name,
        "target": target,
        "estimate": estimate,
        "tolerance": tolerance,
        "ci": ci,
        "passed": bool(passed),
    }
    d.update(extra)
    return d


def _within(name, target, estimate, tol, ci=None, **extra):
    return _check(name, target, estimate, abs(estimate - target) <= tol, tol, ci, **extra)


def _at_most(name, estimate, bound, target=0.0, **extra):
    return _check(name, target, estimate, estimate <= bound, bound, **extra)


def _grid(cfg) -> TimeGrid:
    return TimeGrid(cfg["grid"]["T"], cfg["grid"]["n"])


def _block(cfg, n=None):
    if cfg.get("block_size"):
        return int(cfg["block_size"])
    n = cfg["grid"]["n"] if n is None else n
    return max(1, 2**21 // (n + 1))


def _batches(cfg, task, n_paths=None, grid_n=None, substream=0):
    return run_batches(
        task,
        int(cfg["n_paths"] if n_paths is None else n_paths),
        _block(cfg, grid_n),
        int(cfg["seed"]),
        workers=int(cfg.get("workers", 1)),
        substream=substream,
    )


def _sign_check(name, x, target, tol):
    m = mc_estimate((np.asarray(x) > 0).astype(float))
    return _within(name, target, m.mean, tol, ci=[m.mean - 3 * m.std_error, m.mean + 3 * m.std_error], n=m.n_samples)


def _ratio_median(num, den):
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.asarray(num, float) / np.asarray(den, float)
    r = r[~np.isnan(r)]
    return float(np.median(r)) if r.size else float("nan")


# ---------------------------------------------------------------- unfolding


def _run_unfold_skorokhod(cfg):
    p, tol = cfg["params"], cfg["tolerances"]
    alpha, method = float(p["alpha"]), p["lt_method"]
    grid = _grid(cfg)

    def task(stream, n):
        B = sample_brownian(grid, stream.child(0), n_paths=n)
        r = unfold_skorokhod(B, alpha, stream.child(1))
        d = r.diagnostics
        return {
            "abs": d["abs_identity"],
            "flat": d["pushing_flat"],
            "lx": estimate_local_time(r.X, method, "right").final,
            "ls": estimate_local_time(r.folded, method, "right").final,
            "C": r.pushing.final,
        }

    out = _batches(cfg, task)
    checks = [
        _at_most("abs_identity", float(out["abs"].max()), EXACT),
        _at_most("pushing_flat_off_zero_set", float(out["flat"].max()), EXACT),
        _within("lt_ratio_median", alpha, _ratio_median(out["lx"], out["ls"]), tol["lt_ratio"], estimator=method),
        _within("lt_matches_pushing_median", 1.0, _ratio_median(out["ls"], out["C"]), tol["lt_pushing"], estimator=method),
    ]
    ref = p.get("refinement")
    if ref:
        for j, a in enumerate(ref["alphas"]):
            meds = []
            for k, n in enumerate(ref["n"]):
                g = TimeGrid(grid.horizon, int(n))

                def rtask(stream, m, g=g, a=a):
                    B = sample_brownian(g, stream.child(0), n_paths=m)
                    return {"r": unfold_skorokhod(B, float(a), stream.child(1), lt_method="tanaka").diagnostics["product"]}

                res = _batches(cfg, rtask, n_paths=ref["n_paths"], grid_n=int(n), substream=100 * (1 + j * 10 + k))
                meds.append(float(np.median(res["r"])))
            dec = all(b < a_ for a_, b in zip(meds, meds[1:]))
            checks.append(_check(f"product_residual_decreases_alpha_{a}", "strictly decreasing", meds, dec, n=list(ref["n"])))
    return checks


def _series_unfold_skorokhod(cfg):
    grid = _grid(cfg)
    s = RngStream(int(cfg["seed"]), 0)
    B = sample_brownian(grid, s.child(0))
    r = unfold_skorokhod(B, float(cfg["params"]["alpha"]), s.child(1), diagnostics=False)
    return {"U": B.total.values, "S": r.folded.values, "C": r.pushing.values, "Z": r.Z.values, "X": r.X.values}


def _run_unfold_conventional(cfg):
    p, tol = cfg["params"], cfg["tolerances"]
    alpha, gamma = float(p["alpha"]), float(p["gamma"])
    grid = _grid(cfg)

    def task(stream, n):
        U = skew_brownian(gamma, 0.0, grid, stream.child(0), n_paths=n)
        r = unfold_conventional(U, alpha, stream.child(1))
        return {"x1": r.X.values[..., -1], "levy": r.diagnostics["levy_skorokhod"]}

    out = _batches(cfg, task)
    return [
        _sign_check("sign_law", out["x1"], alpha, tol["sign_law"]),
        _check("levy_skorokhod_gap_median", 0.0, float(np.median(out["levy"])), True, info=True),
    ]


def _series_unfold_conventional(cfg):
    grid = _grid(cfg)
    s = RngStream(int(cfg["seed"]), 0)
    p = cfg["params"]
    U = skew_brownian(float(p["gamma"]), 0.0, grid, s.child(0))
    r = unfold_conventional(U, float(p["alpha"]), s.child(1))
    return {"U": U.values, "R": r.folded.values, "U_levy": r.levy.values, "X": r.X.values}


# ---------------------------------------------------------------- processes


def _run_skew_bm(cfg):
    p, tol = cfg["params"], cfg["tolerances"]
    alpha, x0 = float(p["alpha"]), float(p["x0"])
    grid = _grid(cfg)

    def task(stream, n):
        return {"x1": skew_brownian(alpha, x0, grid, stream, n_paths=n).values[..., grid.index_of(1.0)]}

    out = _batches(cfg, task)
    checks = []
    if x0 == 0:
        checks.append(_sign_check("sign_law", out["x1"], alpha, tol["sign_law"]))
    m = mc_estimate(out["x1"])
    checks.append(_check("mean_at_1", None, m.mean, True, ci=[m.mean - 3 * m.std_error, m.mean + 3 * m.std_error], info=True))
    return checks


def _series_skew_bm(cfg):
    p = cfg["params"]
    return {"X": skew_brownian(float(p["alpha"]), float(p["x0"]), _grid(cfg), RngStream(int(cfg["seed"]), 0)).values}


def _run_skew_bessel(cfg):
    p, tol = cfg["params"], cfg["tolerances"]
    prm = SkewBesselParams(float(p["delta"]), float(p["alpha"]))
    grid = _grid(cfg)

    def task(stream, n):
        d = skew_bessel(prm, grid, stream, n_paths=n).diagnostics
        return {k: d[k] for k in ("lt_R", "lt_G_pos", "lt_G_neg", "n_excursions")}

    out = _batches(cfg, task)
    target = prm.alpha / (1 - prm.alpha)
    ratio = _ratio_median(out["lt_G_pos"], out["lt_G_neg"])
    checks = [
        _check("scale_lt_ratio_median", target, ratio, abs(ratio - target) <= tol["lt_ratio_rel"] * target,
               tol["lt_ratio_rel"] * target),
        _at_most("bessel_lt_median", float(np.median(out["lt_R"])), tol["bessel_lt"],
                 mean=float(np.mean(out["lt_R"]))),
    ]
    sl = p.get("sign_law")
    if sl:
        g2 = TimeGrid(grid.horizon, int(sl["n"]))

        def stask(stream, n):
            return {"x1": skew_bessel(prm, g2, stream, n_paths=n).X.values[..., g2.index_of(1.0)]}

        res = _batches(cfg, stask, n_paths=sl["n_paths"], grid_n=g2.n_steps, substream=100)
        checks.insert(0, _sign_check("sign_law", res["x1"], prm.alpha, tol["sign_law"]))
    checks.append(_check("excursions_per_path_mean", None, float(np.mean(out["n_excursions"])), True, info=True))
    return checks


def _series_skew_bessel(cfg):
    p = cfg["params"]
    r = skew_bessel(SkewBesselParams(float(p["delta"]), float(p["alpha"])), _grid(cfg), RngStream(int(cfg["seed"]), 0))
    return {"R": r.folded.values, "Z": r.Z.values, "X": r.X.values}


def _run_ocone(cfg):
    p, tol = cfg["params"], cfg["tolerances"]
    u, v = float(p["u"]), float(p["v"])
    grid = _grid(cfg)
    k2 = grid.index_of(2.0)

    def task(stream, n):
        r = ocone_counterexample(u, v, grid, stream, n_paths=n)
        return {"x2": r.X.values[..., k2], "xi2": r.Xi.values[..., k2], "res": r.diagnostics["tanaka_X"]}

    out = _batches(cfg, task)
    target = 3.0 * (u - v) / math.sqrt(2.0 * math.pi)
    mx = mc_estimate(out["x2"] ** 3)
    mxi = mc_estimate(out["xi2"] ** 3)
    n_se = tol["third_moment_se"]
    return [
        _check("third_moment_X", target, mx.mean, abs(mx.mean - target) <= n_se * mx.std_error,
               n_se * mx.std_error, ci=[mx.mean - n_se * mx.std_error, mx.mean + n_se * mx.std_error], n=mx.n_samples),
        _check("third_moment_Xi_mirrors_X", -mx.mean, mxi.mean, abs(mxi.mean + mx.mean) <= EXACT * (1 + abs(mx.mean)), EXACT),
        _at_most("tanaka_residual_X", float(out["res"].max()), 1e-9),
    ]


def _series_ocone(cfg):
    p = cfg["params"]
    r = ocone_counterexample(float(p["u"]), float(p["v"]), _grid(cfg), RngStream(int(cfg["seed"]), 0))
    return {"clock": r.clock.values, "X": r.X.values, "Xi": r.Xi.values, "U_levy": r.U_ocone.values}


def _run_nakao(cfg):
    p, tol = cfg["params"], cfg["tolerances"]
    alpha, x0 = float(p["alpha"]), float(p["x0"])
    grid = _grid(cfg)

    def task(stream, n):
        r = nakao_solution(alpha, x0, grid, stream, n_paths=n)
        return {"x1": r.X.values[..., grid.index_of(1.0)], "res": r.residual, "drv": r.diagnostics["driver_identity"]}

    out = _batches(cfg, task)
    checks = []
    if x0 == 0:
        checks.append(_sign_check("sign_law", out["x1"], alpha, tol["sign_law"]))
    checks.append(_at_most("driver_identity", float(out["drv"].max()), 1e-9))
    checks.append(_check("residual_median", 0.0, float(np.median(out["res"])), True, info=True))
    qv = p.get("variation")
    if qv:
        g2 = TimeGrid(grid.horizon, int(qv["n"]))

        def vtask(stream, n):
            d = nakao_solution(alpha, x0, g2, stream, n_paths=n).diagnostics
            return {k: d[k] for k in ("qv_U", "qv_V", "cross_UV")}

        res = _batches(cfg, vtask, n_paths=qv["n_paths"], grid_n=g2.n_steps, substream=100)
        t = g2.horizon
        checks += [
            _at_most("qv_U_max_dev", float(np.max(np.abs(res["qv_U"] - t))), tol["variation"], target=t),
            _at_most("qv_V_max_dev", float(np.max(np.abs(res["qv_V"] - t))), tol["variation"], target=t),
            _at_most("cross_UV_max_abs", float(np.max(np.abs(res["cross_UV"]))), tol["variation"]),
        ]
    s = RngStream(int(cfg["seed"]), 0, 7)
    a = nakao_solution(alpha, x0, grid, s, n_paths=2).X.values
    b = nakao_solution(alpha, x0, grid, s, n_paths=2).X.values
    checks.append(_check("pathwise_repeatable", True, bool(np.array_equal(a, b)), np.array_equal(a, b)))
    return checks


def _series_nakao(cfg):
    p = cfg["params"]
    r = nakao_solution(float(p["alpha"]), float(p["x0"]), _grid(cfg), RngStream(int(cfg["seed"]), 0))
    return {"B1": r.B1.values, "B2": r.B2.values, "Y": r.Y.values, "X": r.X.values, "U": r.U.values, "V": r.V.values}


def _particle_params(p) -> ParticleParams:
    rho = float(p["rho"])
    sigma = float(p["sigma"]) if p.get("sigma") is not None else math.sqrt(max(0.0, 1 - rho * rho))
    return ParticleParams(rho, sigma, float(p.get("g", 0.0)), float(p.get("h", 0.0)),
                          float(p["zeta1"]), float(p["zeta2"]), float(p["eta1"]), float(p["eta2"]))


def _run_particles(cfg):
    p, tol = cfg["params"], cfg["tolerances"]
    prm = _particle_params(p)
    grid = _grid(cfg)
    keys = ("gap_identity", "difference", "sum", "splice", "intertwine", "lt_pos", "lt_neg",
            "qv_B1", "qv_B2", "cross_B12", "component1", "component2")

    def task(stream, n):
        base = simulate_base(prm, grid, stream.child(0), n_paths=n)
        r = build_skew_system(base, prm, stream.child(1), lt_method=p["lt_method"])
        d = {k: r.diagnostics[k] for k in keys}
        d["W_identity"] = np.max(np.abs(r.aux.W.values - base.Y.values), axis=-1)
        d["y_end"] = r.Y_t.final
        return d

    out = _batches(cfg, task)
    alpha, _, zeta, eta = prm.skew
    t = grid.horizon
    checks = [_at_most(k, float(out[k].max()), EXACT) for k in ("gap_identity", "difference", "sum", "splice", "intertwine", "W_identity")]
    checks += [
        _within("lt_ratio_median", 1.0, _ratio_median(zeta * out["lt_pos"], eta * out["lt_neg"]), tol["lt_ratio"]),
        _at_most("qv_B1_max_dev", float(np.max(np.abs(out["qv_B1"] - t))), tol["variation"], target=t),
        _at_most("qv_B2_max_dev", float(np.max(np.abs(out["qv_B2"] - t))), tol["variation"], target=t),
        _at_most("cross_B12_max_abs", float(np.max(np.abs(out["cross_B12"]))), tol["variation"]),
    ]
    m = mc_estimate((out["y_end"] > 0).astype(float))
    band = tol["sign_law_se"] * m.std_error
    checks.append(_within("sign_law", alpha, m.mean, band, ci=[m.mean - band, m.mean + band], n=m.n_samples))
    checks.append(_check("component_residual_median", 0.0,
                         [float(np.median(out["component1"])), float(np.median(out["component2"]))], True, info=True))
    return checks


def _series_particles(cfg):
    p = cfg["params"]
    prm = _particle_params(p)
    s = RngStream(int(cfg["seed"]), 0)
    base = simulate_base(prm, _grid(cfg), s.child(0))
    r = build_skew_system(base, prm, s.child(1), lt_method=p["lt_method"])
    return {"X1": base.X1.values, "X2": base.X2.values, "Y": base.Y.values, "Y_t": r.Y_t.values,
            "Xi_t": r.Xi_t.values, "X1_t": r.X1_t.values, "X2_t": r.X2_t.values, "L_hat": r.L_hat.values.values}


def _run_localtime_xval(cfg):
    tol = cfg["tolerances"]
    grid = _grid(cfg)
    tz = 0.25 * math.sqrt(grid.dt)

    def task(stream, n):
        B = sample_brownian(grid, stream, n_paths=n)
        R = conventional_reflect(B)
        return {
            "occ": occupation_local_time(R, qv=B.qv).final,
            "up": upcrossing_local_time(R, tol=tz, zero_mask=crossing_mask(B), grid_correction=True).final,
            "tan": 2.0 * tanaka_local_time(B, "symmetric").final,
        }

    out = _batches(cfg, task)
    checks = [_within("occupation_mean", SQRT_2_OVER_PI, float(np.mean(out["occ"])), tol["mean_rel"] * SQRT_2_OVER_PI,
                      n=int(out["occ"].size))]
    for a, b in (("occ", "up"), ("occ", "tan"), ("up", "tan")):
        checks.append(_within(f"median_ratio_{a}_{b}", 1.0, _ratio_median(out[a], out[b]), tol["pairwise_rel"]))
    return checks


def _series_localtime_xval(cfg):
    grid = _grid(cfg)
    B = sample_brownian(grid, RngStream(int(cfg["seed"]), 0))
    R = conventional_reflect(B)
    tz = 0.25 * math.sqrt(grid.dt)
    return {
        "B": B.total.values,
        "R": R.values,
        "L_occupation": occupation_local_time(R, qv=B.qv).values.values,
        "L_upcrossing": upcrossing_local_time(R, tol=tz, zero_mask=crossing_mask(B), grid_correction=True).values.values,
        "L_tanaka": 2.0 * tanaka_local_time(B, "symmetric").values.values,
    }


_R = 1 / math.sqrt(2)

SCENARIOS = {
    s.name: s
    for s in [
        Scenario(
            "unfold-skorokhod",
            "skew unfolding of the Skorokhod reflection: |X| = S, L^X = alpha L^S, product-rule residual under refinement",
            ("alpha",),
            {"grid": {"T": 1.0, "n": 2**16}, "n_paths": 200,
             "params": {"alpha": 0.7, "lt_method": "upcrossing",
                        "refinement": {"n": [2**12, 2**14, 2**16], "alphas": [0.3, 0.7], "n_paths": 100}},
             "tolerances": {"lt_ratio": 0.05, "lt_pushing": 0.10}},
            _run_unfold_skorokhod, _series_unfold_skorokhod,
        ),
        Scenario(
            "unfold-conventional",
            "skew unfolding of |U| for U a skew Brownian motion; Levy transform reflection gap",
            ("alpha",),
            {"grid": {"T": 1.0, "n": 2**12}, "n_paths": 10_000,
             "params": {"alpha": 0.7, "gamma": 0.3}, "tolerances": {"sign_law": 0.02}},
            _run_unfold_conventional, _series_unfold_conventional,
        ),
        Scenario(
            "skew-bm",
            "skew Brownian motion: P(X(1) > 0) = alpha",
            ("alpha",),
            {"grid": {"T": 1.0, "n": 2**12}, "n_paths": 100_000,
             "params": {"alpha": 0.7, "x0": 0.0}, "tolerances": {"sign_law": 0.015}},
            _run_skew_bm, _series_skew_bm,
        ),
        Scenario(
            "skew-bessel",
            "skew Bessel process: scale-function local-time ratio, vanishing Bessel local time, sign law",
            ("delta", "alpha"),
            {"grid": {"T": 1.0, "n": 2**16}, "n_paths": 200,
             "params": {"delta": 1.5, "alpha": 0.7, "sign_law": {"n": 2**12, "n_paths": 10_000}},
             "tolerances": {"lt_ratio_rel": 0.25, "bessel_lt": 0.05, "sign_law": 0.02}},
            _run_skew_bessel, _series_skew_bessel,
        ),
        Scenario(
            "ocone",
            "Brownian motion on a sign-dependent clock vs its mirror image: third moments at t = 2",
            ("u", "v"),
            {"grid": {"T": 2.0, "n": 8}, "n_paths": 1_000_000,
             "params": {"u": 2.0, "v": 1.0}, "tolerances": {"third_moment_se": 3.0}},
            _run_ocone, _series_ocone,
        ),
        Scenario(
            "nakao",
            "perturbed skew Tanaka equation via oscillating Brownian motion: sign law, drivers, repeatability",
            ("alpha",),
            {"grid": {"T": 1.0, "n": 2**12}, "n_paths": 10_000,
             "params": {"alpha": 0.7, "x0": 0.0, "variation": {"n": 2**16, "n_paths": 20}},
             "tolerances": {"sign_law": 0.02, "variation": 0.05}},
            _run_nakao, _series_nakao,
        ),
        Scenario(
            "particles",
            "two particles with skew-elastic collisions: exact gap identities, local-time balance, rewired drivers",
            ("zeta1", "zeta2", "eta1", "eta2"),
            {"grid": {"T": 1.0, "n": 2**16}, "n_paths": 200,
             "params": {"zeta1": 3.0, "zeta2": 1.0, "eta1": 1.0, "eta2": 1.0, "rho": _R, "sigma": None,
                        "g": 0.0, "h": 0.0, "lt_method": "upcrossing"},
             "tolerances": {"lt_ratio": 0.15, "variation": 0.05, "sign_law_se": 3.0}},
            _run_particles, _series_particles,
        ),
        Scenario(
            "localtime-xval",
            "occupation, upcrossing and Tanaka local-time estimators on reflected Brownian motion",
            (),
            {"grid": {"T": 1.0, "n": 2**16}, "n_paths": 2000,
             "params": {}, "tolerances": {"mean_rel": 0.05, "pairwise_rel": 0.10}},
            _run_localtime_xval, _series_localtime_xval,
        ),
    ]
}

_TOP_KEYS = {"scenario", "seed", "grid", "n_paths", "block_size", "workers", "params", "tolerances", "output_dir"}
DEFAULT_SEED = 20240601


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def resolve_config(name: str, user: Optional[dict] = None, strict: bool = False) -> dict:
    """Merge a user configuration onto the scenario preset and validate it.

    With ``strict=True`` (configuration read from a file) every required model
    parameter must be given explicitly.
    """
    if name not in SCENARIOS:
        raise ConfigurationError(f"unknown scenario {name!r}; available: {', '.join(SCENARIOS)}")
    sc = SCENARIOS[name]
    user = {} if user is None else dict(user)
    if not isinstance(user, dict):
        raise ConfigurationError("configuration must be a mapping")
    unknown = set(user) - _TOP_KEYS
    if unknown:
        raise ConfigurationError(f"unknown configuration keys: {sorted(unknown)}")
    if user.get("scenario") not in (None, name):
        raise ConfigurationError(f"configuration is for scenario {user['scenario']!r}, not {name!r}")
    params = user.get("params") or {}
    if not isinstance(params, dict):
        raise ConfigurationError("params must be a mapping")
    if strict:
        missing = [k for k in sc.required if params.get(k) is None]
        if missing:
            raise ConfigurationError(f"scenario {name!r} requires parameter(s): {', '.join(missing)}")
    bad = set(params) - set(sc.preset["params"])
    if bad:
        raise ConfigurationError(f"unknown parameter(s) for {name!r}: {sorted(bad)}")
    badt = set(user.get("tolerances") or {}) - set(sc.preset["tolerances"])
    if badt:
        raise ConfigurationError(f"unknown tolerance(s) for {name!r}: {sorted(badt)}")
    cfg = _merge({"seed": DEFAULT_SEED, "block_size": None, "workers": 1, **sc.preset}, user)
    cfg["scenario"] = name
    try:
        TimeGrid(cfg["grid"]["T"], cfg["grid"]["n"])
        if int(cfg["n_paths"]) < 2:
            raise ConfigurationError("n_paths must be >= 2")
        seed = int(cfg["seed"])
        if not 0 <= seed < 2**64:
            raise ConfigurationError("seed must lie in [0, 2**64)")
        for k in sc.required:
            float(cfg["params"][k])
    except (TypeError, ValueError, KeyError) as e:
        if isinstance(e, ConfigurationError):
            raise
        raise ConfigurationError(f"invalid configuration: {e}") from None
    _validate_model(name, cfg)
    return cfg


def _validate_model(name, cfg):
    p = cfg["params"]
    if "alpha" in p and name != "particles" and not 0 < float(p["alpha"]) < 1:
        raise ConfigurationError("alpha must lie in (0, 1)")
    if name == "unfold-conventional" and not 0 < float(p["gamma"]) < 1:
        raise ConfigurationError("gamma must lie in (0, 1)")
    if name in ("skew-bm", "skew-bessel", "nakao"):
        _grid(cfg).index_of(1.0)
    if name == "skew-bessel":
        SkewBesselParams(float(p["delta"]), float(p["alpha"]))
    if name == "ocone":
        if float(p["u"]) <= 0 or float(p["v"]) <= 0:
            raise ConfigurationError("u and v must be > 0")
        g = _grid(cfg)
        g.index_of(1.0), g.index_of(2.0)
    if name == "particles":
        prm = _particle_params(p)
        if not prm.driftless:
            raise ConfigurationError("the particles scenario runs the driftless system (g = h = 0)")
        if not 0 < prm.alpha < 1:
            raise ConfigurationError(f"derived alpha = {prm.alpha} must lie in (0, 1)")
    if name in ("unfold-skorokhod", "particles") and p["lt_method"] not in ("occupation", "upcrossing", "tanaka"):
        raise ConfigurationError(f"unknown lt_method {p['lt_method']!r}")


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def run_scenario(cfg: dict) -> dict:
    """Run a resolved configuration and return the report as a plain dict.

    The report holds the scenario name, the seed, the full parameter echo
    (everything except the worker count and output directory, which do not
    affect results), the checks, an overall pass flag and the wall-clock time.
    """
    sc = SCENARIOS[cfg["scenario"]]
    t0 = time.perf_counter()
    checks = sc.run(cfg)
    echo = {k: v for k, v in cfg.items() if k not in ("workers", "output_dir", "scenario", "seed")}
    echo["block_size"] = _block(cfg)
    report = {
        "scenario": sc.name,
        "seed": int(cfg["seed"]),
        "parameters": echo,
        "checks": checks,
        "passed": all(c["passed"] for c in checks),
        "wall_clock": time.perf_counter() - t0,
    }
    return _jsonable(report)


def sample_series(cfg: dict) -> dict:
    """One sample path of every series the scenario exports, keyed by name (plus ``t``)."""
    sc = SCENARIOS[cfg["scenario"]]
    out = {"t": _grid(cfg).times}
    out.update({k: np.asarray(v) for k, v in sc.series(cfg).items()})
    return out


def report_fingerprint(report: dict) -> dict:
    """The report without its wall-clock field (what reruns must reproduce)."""
    return {k: v for k, v in report.items() if k != "wall_clock"}
