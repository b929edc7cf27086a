"""Command-line front end.

::

    crossing-times run   experiment.toml [--out DIR] [--seed N] [--threads N]
    crossing-times sweep experiment.toml [--out DIR] [--seed N] [--threads N]

Both commands write ``results.csv`` and ``manifest.json`` into the output
directory. Exit codes: 0 success, 2 invalid configuration, 3 numerical
failure (the message names the violated invariant).
"""
from __future__ import annotations

import argparse
import csv
import itertools
import json
import logging
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import __version__
from .core import (ConfigurationError, GaussianPacketSpec, Grid1D, PhysParams,
                   WaveFunction, make_gaussian, odd_superposition)

log = logging.getLogger(__name__)

COLUMNS = ["method", "tau", "p_nocross", "p_cross", "re_D", "abs_D",
           "gamma_d", "a", "mc_stderr", "wallclock"]
METHODS = ("image", "qbm", "detector", "cmeas", "timeless")
SWEEP_AXES = ("tau", "gamma_d", "a")
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

# tolerance used to flag numerical failures in produced rows
SUM_RULE_TOL = 1e-8
PROB_TOL = 1e-6


class InvariantViolation(RuntimeError):
    """A computed number broke a property that must hold by construction."""

    def __init__(self, invariant: str, detail: str):
        super().__init__(f"invariant '{invariant}' violated: {detail}")
        self.invariant = invariant


def _check_keys(section: str, got: Dict[str, Any], allowed: Sequence[str]) -> None:
    extra = sorted(set(got) - set(allowed))
    if extra:
        raise ConfigurationError(f"unknown key(s) in [{section}]: {', '.join(extra)}")


def _float(section: str, d: Dict[str, Any], key: str, default=None) -> Optional[float]:
    v = d.get(key, default)
    if v is None:
        return None
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigurationError(f"[{section}] {key} must be a number")
    return float(v)


def _float_list(section: str, key: str, v) -> List[float]:
    vals = v if isinstance(v, list) else [v]
    if not vals:
        raise ConfigurationError(f"[{section}] {key} must not be empty")
    out = []
    for x in vals:
        if isinstance(x, bool) or not isinstance(x, (int, float)):
            raise ConfigurationError(f"[{section}] {key} must contain numbers")
        out.append(float(x))
    return out


@dataclass
class ExperimentConfig:
    """Validated, fully resolved experiment description.

    ``to_dict`` returns every value that influences the output, defaults
    included, so the manifest alone reproduces the CSV.
    """

    methods: List[str]
    taus: List[float]
    state: Dict[str, Any]
    grid: Dict[str, Any]
    physics: Dict[str, Any]
    detector: Dict[str, Any]
    cmeas: Dict[str, Any]
    qbm: Dict[str, Any]
    timeless: Dict[str, Any]
    sweep: Dict[str, List[float]] = field(default_factory=dict)
    fit_window: Optional[List[float]] = None
    seed: Optional[int] = None
    output_dir: str = "results"

    @classmethod
    def from_dict(cls, raw: Dict[str, Any]) -> "ExperimentConfig":
        _check_keys("top level", raw, ["methods", "tau", "seed", "state", "grid", "physics",
                                       "detector", "cmeas", "qbm", "timeless", "sweep",
                                       "output"])
        methods = raw.get("methods")
        if not isinstance(methods, list) or not methods:
            raise ConfigurationError("'methods' must be a non-empty list")
        bad = [m for m in methods if m not in METHODS]
        if bad:
            raise ConfigurationError(f"unknown method(s): {bad}; choose from {list(METHODS)}")
        methods = [m for m in METHODS if m in methods]

        seed = raw.get("seed")
        if seed is not None and (isinstance(seed, bool) or not isinstance(seed, int)
                                 or not 0 <= seed < 2 ** 64):
            raise ConfigurationError("seed must be an unsigned 64-bit integer")

        st = dict(raw.get("state", {}))
        _check_keys("state", st, ["kind", "x0", "p0", "sigma"])
        kind = st.get("kind", "gaussian")
        if kind not in ("gaussian", "odd"):
            raise ConfigurationError("[state] kind must be 'gaussian' or 'odd'")
        state = {"kind": kind, "x0": _float("state", st, "x0", 5.0),
                 "p0": _float("state", st, "p0", 0.0),
                 "sigma": _float("state", st, "sigma", 0.5)}

        gr = dict(raw.get("grid", {}))
        _check_keys("grid", gr, ["half_width", "n_points"])
        n_points = gr.get("n_points", 1024)
        if isinstance(n_points, bool) or not isinstance(n_points, int):
            raise ConfigurationError("[grid] n_points must be an integer")
        grid = {"half_width": _float("grid", gr, "half_width", 40.0), "n_points": n_points}

        ph = dict(raw.get("physics", {}))
        _check_keys("physics", ph, ["m", "hbar", "gamma", "kT", "D", "gamma_d"])
        physics = {"m": _float("physics", ph, "m", 1.0), "hbar": _float("physics", ph, "hbar", 1.0),
                   "gamma_d": _float("physics", ph, "gamma_d", 0.0)}
        if "D" in ph:
            if "kT" in ph:
                raise ConfigurationError("[physics] give either D or kT, not both")
            physics["gamma"] = _float("physics", ph, "gamma", 1.0)
            D = _float("physics", ph, "D")
            physics["kT"] = D / (2.0 * physics["m"] * physics["gamma"]) if physics["gamma"] > 0 else 0.0
            if D > 0 and physics["gamma"] <= 0:
                raise ConfigurationError("[physics] D > 0 needs gamma > 0")
        else:
            physics["gamma"] = _float("physics", ph, "gamma", 0.0)
            physics["kT"] = _float("physics", ph, "kT", 0.0)

        det = dict(raw.get("detector", {}))
        _check_keys("detector", det, ["dt", "sponge_width", "sponge_rate"])
        detector = {"dt": _float("detector", det, "dt", 1e-3),
                    "sponge_width": _float("detector", det, "sponge_width", 0.0),
                    "sponge_rate": _float("detector", det, "sponge_rate", 0.0)}

        cm = dict(raw.get("cmeas", {}))
        _check_keys("cmeas", cm, ["dt", "a"])
        cmeas = {"dt": _float("cmeas", cm, "dt", 1e-3), "a": _float("cmeas", cm, "a")}

        qb = dict(raw.get("qbm", {}))
        _check_keys("qbm", qb, ["n_nodes", "support_tol"])
        qbm = {"n_nodes": int(qb.get("n_nodes", 32)),
               "support_tol": _float("qbm", qb, "support_tol", 1e-6)}

        tl = dict(raw.get("timeless", {}))
        _check_keys("timeless", tl, ["sigma_p", "sigma_x", "p_mean", "x_mean", "region",
                                     "center", "radius", "lo", "hi", "n_samples",
                                     "epsilon", "t0"])
        timeless = {
            "sigma_p": _float("timeless", tl, "sigma_p", 1.0),
            "sigma_x": _float("timeless", tl, "sigma_x", 1.0),
            "p_mean": _float_list("timeless", "p_mean", tl.get("p_mean", [0.0, 0.0])),
            "x_mean": _float_list("timeless", "x_mean", tl.get("x_mean", [0.0, 0.0])),
            "region": tl.get("region", "disk"),
            "n_samples": int(tl.get("n_samples", 100_000)),
            "epsilon": _float("timeless", tl, "epsilon", 1e-6),
            "t0": _float("timeless", tl, "t0", 0.0),
        }
        if timeless["region"] == "disk":
            timeless["center"] = _float_list("timeless", "center", tl.get("center", [0.0, 0.0]))
            timeless["radius"] = _float("timeless", tl, "radius", 1.0)
        elif timeless["region"] == "rectangle":
            if "lo" not in tl or "hi" not in tl:
                raise ConfigurationError("[timeless] rectangle needs lo and hi")
            timeless["lo"] = _float_list("timeless", "lo", tl["lo"])
            timeless["hi"] = _float_list("timeless", "hi", tl["hi"])
        else:
            raise ConfigurationError("[timeless] region must be 'disk' or 'rectangle'")

        sw = raw.get("sweep")
        sweep: Dict[str, List[float]] = {}
        fit_window = None
        if sw is not None:
            if not isinstance(sw, dict):
                raise ConfigurationError("[sweep] must be a table of axis = [values]")
            sw = dict(sw)
            if "fit_window" in sw:
                fit_window = _float_list("sweep", "fit_window", sw.pop("fit_window"))
                if len(fit_window) != 2 or not 0 < fit_window[0] < fit_window[1]:
                    raise ConfigurationError("[sweep] fit_window must be [tau_lo, tau_hi] with 0 < lo < hi")
            _check_keys("sweep", sw, SWEEP_AXES)
            for k in SWEEP_AXES:
                if k in sw:
                    if not isinstance(sw[k], list):
                        raise ConfigurationError(f"[sweep] {k} must be a list")
                    sweep[k] = _float_list("sweep", k, sw[k])

        tau_raw = raw.get("tau")
        if tau_raw is None and "tau" not in sweep and methods != ["timeless"]:
            raise ConfigurationError("'tau' is required")
        taus = _float_list("top level", "tau", tau_raw) if tau_raw is not None else []
        if any(not t > 0 for t in taus + sweep.get("tau", [])):
            raise ConfigurationError("tau values must be positive")

        out = dict(raw.get("output", {}))
        _check_keys("output", out, ["dir"])
        cfg = cls(methods=methods, taus=taus, state=state, grid=grid, physics=physics,
                  detector=detector, cmeas=cmeas, qbm=qbm, timeless=timeless, sweep=sweep,
                  fit_window=fit_window, seed=seed, output_dir=str(out.get("dir", "results")))
        cfg.validate()
        return cfg

    def validate(self) -> None:
        """Cross-field checks; constructs the cheap objects to surface their errors."""
        self.phys_params()
        Grid1D.symmetric(self.grid["half_width"], self.grid["n_points"])
        GaussianPacketSpec(self.state["x0"], self.state["p0"], self.state["sigma"])
        if "timeless" in self.methods and self.seed is None:
            raise ConfigurationError("a seed is required when the timeless Monte Carlo runs")
        if "qbm" in self.methods and self.phys_params().D <= 0:
            raise ConfigurationError("qbm needs a positive diffusion constant (D or gamma*kT)")
        if "detector" in self.methods and self.detector["dt"] <= 0:
            raise ConfigurationError("[detector] dt must be positive")
        if "cmeas" in self.methods:
            a_vals = self.sweep.get("a", [self.measurement_strength()])
            if any(not a > 0 for a in a_vals):
                raise ConfigurationError("cmeas needs a > 0 ([cmeas] a or a positive D)")
        if self.timeless["n_samples"] < 10_000:
            raise ConfigurationError("[timeless] n_samples must be at least 1e4")

    def phys_params(self, gamma_d: Optional[float] = None) -> PhysParams:
        p = self.physics
        return PhysParams(m=p["m"], hbar=p["hbar"], gamma=p["gamma"], kT=p["kT"],
                          gamma_d=p["gamma_d"] if gamma_d is None else gamma_d)

    def measurement_strength(self) -> float:
        a = self.cmeas["a"]
        return self.phys_params().a if a is None else a

    def initial_state(self) -> WaveFunction:
        grid = Grid1D.symmetric(self.grid["half_width"], self.grid["n_points"])
        spec = GaussianPacketSpec(self.state["x0"], self.state["p0"], self.state["sigma"])
        params = self.phys_params()
        if self.state["kind"] == "odd":
            return odd_superposition(spec, grid, params)
        return make_gaussian(spec, grid, params)

    def to_dict(self) -> Dict[str, Any]:
        return {"methods": self.methods, "tau": self.taus, "seed": self.seed,
                "state": self.state, "grid": self.grid, "physics": self.physics,
                "detector": self.detector,
                "cmeas": dict(self.cmeas, a=self.measurement_strength()),
                "qbm": self.qbm, "timeless": self.timeless, "sweep": self.sweep,
                "fit_window": self.fit_window, "output": {"dir": self.output_dir}}


def load_config(path, seed: Optional[int] = None) -> ExperimentConfig:
    """Parse and validate a TOML file; ``seed`` overrides the file's seed."""
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except OSError as exc:
        raise ConfigurationError(f"cannot read config: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigurationError(f"config is not valid TOML: {exc}") from exc
    if seed is not None:
        raw["seed"] = seed
    return ExperimentConfig.from_dict(raw)


def _row(method: str, tau=None, p_nocross=None, p_cross=None, re_D=None, abs_D=None,
         gamma_d=None, a=None, mc_stderr=None) -> Dict[str, Any]:
    return {"method": method, "tau": tau, "p_nocross": p_nocross, "p_cross": p_cross,
            "re_D": re_D, "abs_D": abs_D, "gamma_d": gamma_d, "a": a,
            "mc_stderr": mc_stderr, "wallclock": None}


def _check_probability(method: str, name: str, v: float) -> None:
    if not math.isfinite(v):
        raise InvariantViolation("finite_probability", f"{method} {name} = {v}")
    if v < -PROB_TOL or v > 1 + PROB_TOL:
        raise InvariantViolation("probability_range", f"{method} {name} = {v!r}")


def run_point(cfg: ExperimentConfig, method: str, tau: Optional[float],
              gamma_d: float, a: float, n_workers: int = 1) -> Dict[str, Any]:
    """Evaluate one method at one parameter point and return a CSV row."""
    from .decoherence import crossing_decoherence
    from .detector import (DetectorParams, MeasurementParams,
                           continuous_measurement_probability, detection_probabilities)
    from .fokker_planck import FPKernelParams
    from .timeless import (Disk, Rectangle, TimelessConfig, gaussian_phase_space_sampler,
                           timeless_region_probability)
    from .wigner import qbm_no_cross_probability

    if method == "timeless":
        t = cfg.timeless
        region = (Disk(tuple(t["center"]), t["radius"]) if t["region"] == "disk"
                  else Rectangle(tuple(t["lo"]), tuple(t["hi"])))
        tc = TimelessConfig(gaussian_phase_space_sampler(t["sigma_p"], t["sigma_x"],
                                                         t["p_mean"], t["x_mean"]),
                            n_samples=t["n_samples"], epsilon=t["epsilon"], t0=t["t0"],
                            seed=cfg.seed, n_workers=n_workers)
        est = timeless_region_probability(tc, region, cfg.physics["m"])
        _check_probability(method, "p_enter", est.probability)
        return _row(method, p_nocross=1.0 - est.probability, p_cross=est.probability,
                    mc_stderr=est.stderr)

    psi0 = cfg.initial_state()
    if method == "image":
        r = crossing_decoherence(psi0, tau)
        for name in ("p_nocross", "p_cross"):
            if not math.isfinite(getattr(r, name)):
                raise InvariantViolation("finite_probability", f"image {name}")
        if abs(r.sum_rule_residual) > SUM_RULE_TOL:
            raise InvariantViolation("sum_rule", f"residual {r.sum_rule_residual:.3e}")
        return _row(method, tau, r.p_nocross, r.p_cross, r.re_D, r.abs_D)
    if method == "qbm":
        p = cfg.phys_params()
        res = qbm_no_cross_probability(psi0, FPKernelParams(p.m, p.D, tau),
                                       support_tol=cfg.qbm["support_tol"],
                                       n_nodes=cfg.qbm["n_nodes"])
        _check_probability(method, "p_r", res.raw)
        return _row(method, tau, res.p_nocross, res.p_cross)
    if method == "detector":
        d = cfg.detector
        pr = detection_probabilities(psi0, DetectorParams(gamma_d, d["dt"], d["sponge_width"],
                                                          d["sponge_rate"]), tau)
        _check_probability(method, "p_nd", pr.p_nd)
        return _row(method, tau, pr.p_nd, pr.p_d, gamma_d=gamma_d)
    if method == "cmeas":
        p_plus = continuous_measurement_probability(psi0, MeasurementParams(a, cfg.cmeas["dt"]), tau)
        _check_probability(method, "p_plus", p_plus)
        return _row(method, tau, p_plus, 1.0 - p_plus, a=a)
    raise ConfigurationError(f"unknown method {method}")


def _points(cfg: ExperimentConfig) -> List[Dict[str, Any]]:
    """Cartesian product of the sweep axes with the base values."""
    base = {"tau": cfg.taus, "gamma_d": [cfg.physics["gamma_d"]],
            "a": [cfg.measurement_strength()]}
    axes = {k: cfg.sweep.get(k, base[k]) for k in SWEEP_AXES}
    pts = []
    for method in cfg.methods:
        taus = [None] if method == "timeless" else axes["tau"]
        gds = axes["gamma_d"] if method == "detector" else [None]
        As = axes["a"] if method == "cmeas" else [None]
        for tau, gd, a in itertools.product(taus, gds, As):
            pts.append({"method": method, "tau": tau, "gamma_d": gd, "a": a})
    return pts


def _scaling_row(cfg: ExperimentConfig, rows: List[Dict[str, Any]]) -> Optional[Dict[str, Any]]:
    """Log-log exponents of p_cross and |Re D| from the image rows of a tau sweep.

    Stored in the ``p_cross`` and ``re_D`` columns of a row whose method is
    ``image_scaling_exponent``.
    """
    from .decoherence import _loglog_slope

    img = [r for r in rows if r["method"] == "image"]
    lo, hi = cfg.fit_window if cfg.fit_window else (0.0, math.inf)
    sel = [r for r in img if lo <= r["tau"] <= hi]
    if len(sel) < 3:
        log.warning("scaling fit skipped: fewer than 3 tau points inside the fit window")
        return None
    if any(r["p_cross"] <= 0 or r["re_D"] == 0 for r in sel):
        raise InvariantViolation("positive_fit_data", "p_cross or Re D vanished in the fit window")
    t = np.array([r["tau"] for r in sel])
    e_cross = _loglog_slope(t, np.array([r["p_cross"] for r in sel]))
    e_red = _loglog_slope(t, np.abs(np.array([r["re_D"] for r in sel])))
    if not (math.isfinite(e_cross) and math.isfinite(e_red)):
        raise InvariantViolation("finite_exponent", "scaling fit produced a non-finite slope")
    return _row("image_scaling_exponent", p_cross=e_cross, re_D=e_red)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    return repr(float(v))


def write_csv(path: Path, rows: List[Dict[str, Any]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(COLUMNS)
        for r in rows:
            w.writerow([_fmt(r[c]) for c in COLUMNS])


def execute(cfg: ExperimentConfig, out_dir: Path, command: str, n_threads: int = 1,
            wallclock: bool = False) -> List[Dict[str, Any]]:
    """Run every point, write ``results.csv`` and ``manifest.json``."""
    pts = _points(cfg)

    def work(pt):
        t0 = time.perf_counter()
        row = run_point(cfg, pt["method"], pt["tau"], pt["gamma_d"], pt["a"])
        if wallclock:
            row["wallclock"] = time.perf_counter() - t0
        return row

    if n_threads > 1 and len(pts) > 1:
        with ThreadPoolExecutor(n_threads) as ex:
            rows = list(ex.map(work, pts))  # map keeps input order
    else:
        rows = [work(pt) for pt in pts]
    if command == "sweep" and "tau" in cfg.sweep and "image" in cfg.methods:
        extra = _scaling_row(cfg, rows)
        if extra is not None:
            rows.append(extra)

    out_dir.mkdir(parents=True, exist_ok=True)
    write_csv(out_dir / "results.csv", rows)
    manifest = {"command": command, "config": cfg.to_dict(), "version": __version__,
                "seed": cfg.seed, "columns": COLUMNS, "n_rows": len(rows),
                "numpy": np.__version__}
    with open(out_dir / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return rows


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="crossing-times",
                                 description="Crossing and arrival probabilities for x = 0.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, text in (("run", "evaluate the configured methods at the configured tau values"),
                       ("sweep", "evaluate over the Cartesian product of the [sweep] axes")):
        sp = sub.add_parser(name, help=text)
        sp.add_argument("config", help="TOML experiment file")
        sp.add_argument("--out", help="output directory (overrides [output] dir)")
        sp.add_argument("--seed", type=int, help="RNG seed override")
        sp.add_argument("--threads", type=int, default=1, help="worker threads (default 1)")
        sp.add_argument("--wallclock", action="store_true",
                        help="record per-row timings (makes the CSV non-reproducible)")
        sp.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config, args.seed)
        if args.threads < 1:
            raise ConfigurationError("--threads must be at least 1")
        if args.command == "sweep":
            if not cfg.sweep:
                raise ConfigurationError("sweep needs one or two non-empty axes in [sweep]")
            if len(cfg.sweep) > 2:
                raise ConfigurationError("sweep supports at most two axes")
        elif cfg.sweep:
            raise ConfigurationError("[sweep] is only valid with the sweep command")
        out = Path(args.out if args.out else cfg.output_dir)
        execute(cfg, out, args.command, args.threads, args.wallclock)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvariantViolation as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (FloatingPointError, ArithmeticError) as exc:
        print(f"numerical failure: invariant 'finite_arithmetic' violated: {exc}",
              file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
