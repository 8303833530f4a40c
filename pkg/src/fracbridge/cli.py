"""Reproducible experiment runner: JSON config in, CSV + JSON artifacts out.

Usage:
    fracbridge <subcommand> --config cfg.json [--seed N] [--out DIR]

Subcommands: simulate, estimate, consistency, limitlaw, constants, selftest.
The output directory defaults to $FRACBRIDGE_OUT or the working directory.
Identical (config, seed) pairs produce byte-identical artifacts; every JSON
summary embeds the seed and a SHA-256 digest of the resolved configuration.

Config schema (all fields optional unless a subcommand needs them; complex
numbers are two-element arrays [re, im]):

    {
      "model": {"H": 0.7, "alpha": [0.3, -0.2], "T": 1.0, "sigma": 1.0},
      "grid":  {"n_steps": 4096, "t_max": 0.999},
      "t_list": [0.9, 0.99, 0.999],
      "t_eval": 0.995, "t_eval_2": 0.998,
      "n_reps": 1000, "seed": 0, "step_factor": 50,
      "floor": 0.05, "ks_threshold": 0.1, "estimator": "continuous",
      "law": {"s": 2.0}, "n_samples": 100000
    }

Model fields may also sit at the top level ({"H": .., "alpha": [..]}).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import bridge, chaos, estimate, gauss, limitlaw, special
from .exceptions import ConfigError, DomainError, FracbridgeError
from .gauss import SeedSpec, TimeGrid

__all__ = ["ExperimentConfig", "parse_config", "run", "main"]

KINDS = ("simulate", "estimate", "consistency", "limitlaw", "constants", "selftest")

DEFAULTS = {"T": 1.0, "sigma": 1.0, "n_steps": 4096, "n_reps": 1000, "delta": 1e-3, "seed": 0}


@dataclass
class ExperimentConfig:
    kind: str
    model: special.ModelParams | None
    seed: int
    raw: dict = field(default_factory=dict)

    @property
    def digest(self) -> str:
        blob = json.dumps({"kind": self.kind, **self.raw, "seed": self.seed}, sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()

    def get(self, key, default=None):
        return self.raw.get(key, default)


def _fail(path: str, msg: str):
    raise ConfigError(f"{path}: {msg}")


def _as_number(val, path, positive=False):
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        _fail(path, f"expected a number, got {val!r}")
    if positive and not val > 0:
        _fail(path, f"must be positive, got {val}")
    return float(val)


def _as_complex(val, path) -> complex:
    if not (isinstance(val, (list, tuple)) and len(val) == 2):
        _fail(path, f"expected a two-element array [re, im], got {val!r}")
    re = _as_number(val[0], path + "[0]")
    im = _as_number(val[1], path + "[1]")
    return complex(re, im)


def _parse_model(doc: dict) -> special.ModelParams | None:
    src = doc.get("model", doc)
    prefix = "model." if "model" in doc else ""
    if "H" not in src or "alpha" not in src:
        return None
    H = _as_number(src["H"], prefix + "H")
    alpha = _as_complex(src["alpha"], prefix + "alpha")
    T = _as_number(src.get("T", DEFAULTS["T"]), prefix + "T", positive=True)
    sigma = _as_number(src.get("sigma", DEFAULTS["sigma"]), prefix + "sigma", positive=True)
    if not 0.0 < H < 1.0:
        _fail(prefix + "H", f"must lie in (0, 1), got {H}")
    if not alpha.real > 0.0:
        _fail(prefix + "alpha", f"Re(alpha) must be positive, got {alpha.real}")
    try:
        return special.ModelParams(H=H, alpha=alpha, T=T, sigma=sigma)
    except DomainError as exc:
        _fail(prefix.rstrip(".") or "model", str(exc))


def parse_config(text: str, kind: str = "simulate") -> ExperimentConfig:
    """Parse and validate a JSON config document for the given subcommand."""
    if kind not in KINDS:
        raise ConfigError(f"kind: unknown experiment kind {kind!r}")
    try:
        doc = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ConfigError("top level: expected a JSON object")

    model = _parse_model(doc)
    seed = int(_as_number(doc.get("seed", DEFAULTS["seed"]), "seed"))
    cfg = ExperimentConfig(kind=kind, model=model, seed=seed, raw=doc)

    needs_model = kind in ("simulate", "estimate", "consistency", "constants")
    if needs_model and model is None:
        _fail("model", "H and alpha are required for this subcommand")
    if kind in ("simulate", "estimate", "consistency"):
        model.require_well_posed()
    if kind in ("estimate", "consistency"):
        model.require_estimation_domain()
        n_reps = int(_as_number(doc.get("n_reps", DEFAULTS["n_reps"]), "n_reps"))
        if n_reps < 1:
            _fail("n_reps", f"must be >= 1, got {n_reps}")
    if kind == "simulate":
        grid = doc.get("grid", {})
        n_steps = int(_as_number(grid.get("n_steps", DEFAULTS["n_steps"]), "grid.n_steps", positive=True))
        t_max = _as_number(grid.get("t_max", model.T - DEFAULTS["delta"]), "grid.t_max", positive=True)
        if t_max >= model.T:
            _fail("grid.t_max", f"must be below T={model.T}, got {t_max}")
        cfg.raw.setdefault("grid", {})
        cfg.raw["grid"] = {"n_steps": n_steps, "t_max": t_max}
    if kind == "consistency":
        t_list = doc.get("t_list")
        if t_list is None:
            t_list = [model.T - 0.1, model.T - 0.01, model.T - 0.001]
        if not isinstance(t_list, list) or not t_list:
            _fail("t_list", "expected a non-empty array of times")
        t_list = [_as_number(t, f"t_list[{i}]") for i, t in enumerate(t_list)]
        if any(not 0 < t < model.T for t in t_list):
            _fail("t_list", f"every time must lie in (0, T={model.T})")
        cfg.raw["t_list"] = t_list
    if kind == "estimate":
        t_eval = _as_number(doc.get("t_eval", model.T - 0.005), "t_eval")
        if not 0 < t_eval < model.T:
            _fail("t_eval", f"must lie in (0, T={model.T}), got {t_eval}")
        cfg.raw["t_eval"] = t_eval
        if "t_eval_2" in doc:
            t2 = _as_number(doc["t_eval_2"], "t_eval_2")
            if not t_eval < t2 < model.T:
                _fail("t_eval_2", f"must lie in ({t_eval}, T={model.T}), got {t2}")
    if kind == "limitlaw":
        law = doc.get("law", {})
        s = _as_number(law.get("s", 1.0), "law.s", positive=True)
        cfg.raw["law"] = {"s": s}
        n_samples = int(_as_number(doc.get("n_samples", 100_000), "n_samples", positive=True))
        cfg.raw["n_samples"] = n_samples
    return cfg


# ---------------------------------------------------------------------------
# Artifact writing
# ---------------------------------------------------------------------------


def _write_json(path: Path, payload: dict):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _summary(cfg: ExperimentConfig, **extra) -> dict:
    return {"config_sha256": cfg.digest, "seed": cfg.seed, "kind": cfg.kind, **extra}


def _run_simulate(cfg: ExperimentConfig, out: Path) -> int:
    p = cfg.model
    grid = TimeGrid.uniform(cfg.raw["grid"]["t_max"], cfg.raw["grid"]["n_steps"])
    paths = bridge.simulate_bridge(p, grid, SeedSpec(cfg.seed))
    for name, proc in (("zeta", paths.zeta), ("omega", paths.omega), ("bridge", paths.Z)):
        with open(out / f"{name}.csv", "w") as fh:
            gauss.write_path_csv(proc, fh)
    consts = special.constants_report(p)
    _write_json(out / "summary.json", _summary(cfg, constants=consts, n_steps=grid.n_steps, t_max=grid.t_max))
    return 0


def _write_estimate_csv(path: Path, summary: estimate.McSummary):
    with open(path, "w") as fh:
        fh.write("replication,t_eval,re_alpha_hat,im_alpha_hat,re_err_norm,im_err_norm,abs_err_norm\n")
        for row in summary.csv_rows():
            fh.write(",".join(f"{v:.17g}" if isinstance(v, float) else str(v) for v in row) + "\n")


def _run_estimate(cfg: ExperimentConfig, out: Path) -> int:
    p = cfg.model
    case = estimate.classify_case(p.H, p.alpha)
    if case is special.LimitCase.INCONSISTENT:
        raise ConfigError("model: no limit experiment in the inconsistent regime Re(alpha) in (1/2, H)")
    lc = estimate.LimitConfig(
        model=p,
        t_eval=cfg.raw["t_eval"],
        t_eval_2=cfg.get("t_eval_2"),
        n_reps=int(cfg.get("n_reps", DEFAULTS["n_reps"])),
        seed=cfg.seed,
        step_factor=int(cfg.get("step_factor", 50)),
        ks_threshold=float(cfg.get("ks_threshold", 0.1)),
        estimator=str(cfg.get("estimator", "continuous")),
    )
    summary = estimate.run_limit_experiment(lc)
    _write_estimate_csv(out / "estimate.csv", summary)
    _write_json(out / "summary.json", _summary(cfg, **summary.to_dict()))
    return 0


def _run_consistency(cfg: ExperimentConfig, out: Path) -> int:
    cc = estimate.ConsistencyConfig(
        model=cfg.model,
        t_list=tuple(cfg.raw["t_list"]),
        n_reps=int(cfg.get("n_reps", DEFAULTS["n_reps"])),
        seed=cfg.seed,
        step_factor=int(cfg.get("step_factor", 50)),
        floor=float(cfg.get("floor", 0.05)),
    )
    summary = estimate.run_consistency_experiment(cc)
    _write_estimate_csv(out / "consistency.csv", summary)
    _write_json(out / "summary.json", _summary(cfg, **summary.to_dict()))
    return 0


def _run_limitlaw(cfg: ExperimentConfig, out: Path) -> int:
    law = limitlaw.CRLaw(cfg.raw["law"]["s"])
    n = cfg.raw["n_samples"]
    samples = limitlaw.cr_sample(law, n, SeedSpec(cfg.seed))
    with open(out / "samples.csv", "w") as fh:
        fh.write("re,im\n")
        for z in samples:
            fh.write(f"{z.real:.17g},{z.imag:.17g}\n")
    rgrid = np.linspace(0.0, 10.0 * math.sqrt(law.s), 201)
    with open(out / "density_table.csv", "w") as fh:
        fh.write("r,radial_cdf,density,marginal_density\n")
        for r in rgrid:
            fh.write(
                f"{r:.17g},{limitlaw.cr_radial_cdf(r, law):.17g},"
                f"{limitlaw.cr_density(complex(r, 0.0), law):.17g},"
                f"{limitlaw.cr_marginal_density(r, law):.17g}\n"
            )
    ks = limitlaw.ks_statistic(np.abs(samples), lambda r: limitlaw.cr_radial_cdf(r, law))
    _write_json(out / "summary.json", _summary(cfg, s=law.s, n_samples=n, ks_radial=ks))
    return 0


def _run_constants(cfg: ExperimentConfig, out: Path) -> int:
    consts = special.constants_report(cfg.model)
    _write_json(out / "constants.json", _summary(cfg, constants=consts))
    print(json.dumps(consts, sort_keys=True))
    return 0


# ---------------------------------------------------------------------------
# Selftest battery
# ---------------------------------------------------------------------------


def _selftest_checks(seed: int):
    yield "special.gamma_one", lambda: abs(special.cgamma(1.0) - 1.0) < 1e-12
    yield "special.gamma_half", lambda: abs(special.cgamma(0.5) - math.sqrt(math.pi)) < 1e-12

    def reflection():
        v = abs(special.cgamma(1 + 1j)) ** 2 * math.sinh(math.pi) / math.pi
        return abs(v - 1.0) < 1e-10

    yield "special.gamma_reflection", reflection

    def recurrence():
        rng = SeedSpec(seed, 1).generator()
        for _ in range(100):
            z = complex(rng.uniform(0.1, 10.0), rng.uniform(-10.0, 10.0))
            g1, g2 = special.cgamma(z + 1), z * special.cgamma(z)
            if abs(g1 - g2) > 1e-12 * abs(g2):
                return False
        return True

    yield "special.gamma_recurrence", recurrence

    def w_zero_reduction():
        p = special.ModelParams(H=0.7, alpha=0.3 + 0.0j)
        a = special.omega_T_second_moment(p)
        b = special.xi_T_second_moment(0.7, 0.3)
        return abs(a - b) < 1e-10 * abs(b)

    yield "special.w_zero_reduction", w_zero_reduction

    def inner_products():
        for H, s, t in ((0.7, 0.3, 0.8), (0.4, 0.3, 0.8)):
            want = gauss.fbm_covariance(H, s, t)
            if H > 0.5:
                got = gauss.inner_product_highH(
                    lambda u: (u <= s).astype(float),
                    lambda u: (u <= t).astype(float),
                    H,
                    1.0,
                    n=512,
                    breakpoints=(s, t),
                )
            else:
                got = gauss.inner_product_lowH(
                    lambda u: (u <= s).astype(float),
                    gauss.BVFunction.indicator(t),
                    H,
                    1.0,
                    n=512,
                    breakpoints=(s,),
                )
            if abs(got - want) > 1e-6 * abs(want):
                return False
        return True

    yield "gauss.inner_product_indicators", inner_products

    def sampler_cross():
        grid = TimeGrid.uniform(1.0, 256)
        ends_a = np.array(
            [gauss.sample_fbm_circulant(0.7, grid, SeedSpec(seed, 10_000 + k)).values[-1] for k in range(2000)]
        )
        ends_b = np.array(
            [gauss.sample_fbm_cholesky(0.7, grid, SeedSpec(seed, 20_000 + k)).values[-1] for k in range(2000)]
        )
        return limitlaw.ks_two_sample(ends_a, ends_b) <= 0.05

    yield "gauss.sampler_cross_validation", sampler_cross

    def chaos_report():
        return chaos.mc_chaos_checks(0.7, 20_000, SeedSpec(seed, 3)).all_passed

    yield "chaos.mc_identities", chaos_report

    def cr_sampler():
        law = limitlaw.CRLaw(2.0)
        z = limitlaw.cr_sample(law, 20_000, SeedSpec(seed, 4))
        ks = limitlaw.ks_statistic(np.abs(z), lambda r: limitlaw.cr_radial_cdf(r, law))
        return ks <= 0.02

    yield "limitlaw.sampler_gof", cr_sampler

    def estimator_invariance():
        p = special.ModelParams(H=0.7, alpha=0.3 - 0.2j)
        grid = TimeGrid.uniform(0.99, 1024)
        paths = bridge.simulate_bridge(p, grid, SeedSpec(seed, 5))
        base = estimate.lse_discrete(paths.Z, p.T)
        rng = SeedSpec(seed, 6).generator()
        for _ in range(50):
            c = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
            if abs(c) < 1e-3:
                continue
            scaled = gauss.ComplexPath(grid, c * paths.Z.values)
            if abs(estimate.lse_discrete(scaled, p.T) - base) > 1e-10 * (1 + abs(base)):
                return False
        return True

    yield "estimate.scale_invariance", estimator_invariance

    def euler_agreement():
        p = special.ModelParams(H=0.7, alpha=0.3 - 0.2j)
        gaps = []
        for n in (512, 1024):
            grid = TimeGrid.uniform(0.9, n)
            zeta = gauss.sample_complex_fbm(p.H, grid, SeedSpec(seed, 7))
            exact = bridge.bridge_exact(bridge.omega_path(zeta, p), p)
            euler = bridge.bridge_euler(zeta, p)
            gaps.append(float(np.max(np.abs(exact.values - euler.values))))
        return gaps[1] < gaps[0]

    yield "bridge.euler_agreement", euler_agreement


def _run_selftest(cfg: ExperimentConfig, out: Path) -> int:
    results = {}
    failed = 0
    for name, fn in _selftest_checks(cfg.seed):
        try:
            ok = bool(fn())
        except FracbridgeError as exc:
            ok = False
            results[name] = f"error: {exc}"
        results.setdefault(name, "pass" if ok else "FAIL")
        if not ok:
            failed += 1
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
    _write_json(out / "selftest.json", _summary(cfg, results=results, failed=failed))
    return 1 if failed else 0


_RUNNERS = {
    "simulate": _run_simulate,
    "estimate": _run_estimate,
    "consistency": _run_consistency,
    "limitlaw": _run_limitlaw,
    "constants": _run_constants,
    "selftest": _run_selftest,
}


def run(cfg: ExperimentConfig, out_dir=None) -> int:
    """Execute a validated config; writes artifacts and returns an exit status."""
    out = Path(out_dir if out_dir is not None else os.environ.get("FRACBRIDGE_OUT", "."))
    out.mkdir(parents=True, exist_ok=True)
    return _RUNNERS[cfg.kind](cfg, out)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="fracbridge", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="kind", required=True)
    for kind in KINDS:
        sp = sub.add_parser(kind)
        sp.add_argument("--config", type=Path, default=None, help="JSON config file")
        sp.add_argument("--seed", type=int, default=None, help="override config seed")
        sp.add_argument("--out", type=Path, default=None, help="output directory")
    args = parser.parse_args(argv)
    try:
        text = args.config.read_text() if args.config else "{}"
        cfg = parse_config(text, kind=args.kind)
        if args.seed is not None:
            cfg.seed = args.seed
        return run(cfg, args.out)
    except FracbridgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
