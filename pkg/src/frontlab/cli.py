"""Command line front-end: ``frontlab run <config>`` and ``frontlab describe <topic>``.

Configuration schema (INI; ``[section] key = value``)::

    [model]        name        gasless_combustion | exo_endo          (required)
    [params]       every parameter of the named model                 (required)
                   gasless_combustion: beta
                   exo_endo: sigma, tau, a2, a3, b2, b3, d2, d3
    [grid]         X = 60, N = 2401, order = 4
    [weight]       alpha_minus = auto, alpha_plus = auto, x0 = 5
    [rates]        policy = measured | fixed; omega, rho, nu (fixed only);
                   T = 50, dt = 0.01, samples = 10
    [lp]           dt = 0.05, tol = 1e-10, T = auto, delta = 0.05,
                   delta0 = 0.01, q0 = 0.5
    [sampling]     seed = 0, qs = -0.2 0 0.2, draws = 3, amplitude = 0.004,
                   t0 = 5, T_phase = 60
    [experiments]  run = front spectrum decay manifold foliate verify
    [output]       dir = out

``auto`` weights sit mid-window: half the fitted tail rates on each side.

Exit status: 0 all requested checks pass; 1 a check failed; 2 configuration
error (schema, inadmissible weight); 3 numerical failure.  Outputs are
``summary.json``, ``MANIFEST`` and per-experiment CSV files.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from .evolve import (RateBundle, evolve_semilinear, limit_semigroup_check, select_rates,
                     semigroup_decay_rate, write_trajectory_csv)
from .front import initial_guess, save_profile, solve_front
from .grid import make_grid, make_weight
from .manifold import (LPConfig, StableFoliation, mild_equivalence, phi_tangency,
                       round_trips, verify_theorem)
from .model import BUILTIN_DEFAULTS, builtin_model
from .spectrum import (adjoint_zero_mode, assemble_linearization, essential_spectrum_curves,
                       mid_window_weight, point_spectrum, write_curves_csv)

__all__ = ["main", "run", "describe", "ConfigError", "load_config", "EXPERIMENTS"]

log = logging.getLogger("frontlab")

EXPERIMENTS = ("front", "spectrum", "decay", "manifold", "foliate", "verify")
DEPENDS = {"front": (), "spectrum": ("front",), "decay": ("spectrum",),
           "manifold": ("decay",), "foliate": ("decay",), "verify": ("foliate",)}

REQUIRED = object()
SCHEMA = {
    "model": {"name": (str, REQUIRED, "built-in model name")},
    "grid": {"X": (float, 60.0, "half-length of the domain"),
             "N": (int, 2401, "number of nodes (odd)"),
             "order": (int, 4, "finite-difference order (2 or 4)")},
    "weight": {"alpha_minus": (str, "auto", "left weight rate or 'auto'"),
               "alpha_plus": (str, "auto", "right weight rate or 'auto'"),
               "x0": (float, 5.0, "half-width of the weight transition")},
    "rates": {"policy": (str, "measured", "'measured' or 'fixed'"),
              "omega": (float, None, "fixed omega"),
              "rho": (float, None, "fixed rho"),
              "nu": (float, None, "fixed nu"),
              "T": (float, 50.0, "decay-fit horizon"),
              "dt": (float, 0.01, "time step for evolution"),
              "samples": (int, 10, "random fields for decay fits")},
    "lp": {"dt": (float, 0.05, "Lyapunov-Perron time step"),
           "tol": (float, 1e-10, "fixed-point tolerance"),
           "T": (str, "auto", "horizon or 'auto' (exp(-2 omega T) <= tol)"),
           "delta": (float, 0.05, "trajectory-ball radius"),
           "delta0": (float, 0.01, "data-ball radius"),
           "q0": (float, 0.5, "shift range")},
    "sampling": {"seed": (int, 0, "seed for all random sampling"),
                 "qs": (str, "-0.2 0 0.2", "shifts of the sample plan"),
                 "draws": (int, 3, "stable data per shift"),
                 "amplitude": (float, 0.004, "|z0|_beta of sampled data"),
                 "t0": (float, 5.0, "forward-invariance time"),
                 "T_phase": (float, 60.0, "asymptotic-phase horizon")},
    "experiments": {"run": (str, "front spectrum", "experiments to run")},
    "output": {"dir": (str, "out", "output directory, relative to the config")},
}
PARAM_NAMES = {k: tuple(v) for k, v in BUILTIN_DEFAULTS.items()}

TOPICS = ("config", "pipeline", "outputs", "models", "exit-codes")


class ConfigError(ValueError):
    pass


def _convert(path, typ, raw):
    try:
        return typ(raw)
    except ValueError:
        raise ConfigError(f"{path}: expected {typ.__name__}, got {raw!r}") from None


def load_config(path) -> dict:
    """Parse and validate an experiment config; errors name the field path."""
    cp = configparser.ConfigParser()
    cp.optionxform = str
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"{path}: not a readable file")
    cp.read(path)
    unknown = set(cp.sections()) - set(SCHEMA) - {"params"}
    if unknown:
        raise ConfigError(f"unknown section(s): {', '.join(sorted(unknown))}")
    cfg = {}
    for sec, fields in SCHEMA.items():
        got = dict(cp[sec]) if cp.has_section(sec) else {}
        extra = set(got) - set(fields)
        if extra:
            raise ConfigError(f"{sec}.{sorted(extra)[0]}: unknown key")
        out = {}
        for key, (typ, default, _) in fields.items():
            if key in got:
                out[key] = _convert(f"{sec}.{key}", typ, got[key])
            elif default is REQUIRED:
                raise ConfigError(f"{sec}.{key}: required")
            else:
                out[key] = default
        cfg[sec] = out
    name = cfg["model"]["name"]
    if name not in PARAM_NAMES:
        raise ConfigError(f"model.name: unknown model {name!r}; known: {', '.join(PARAM_NAMES)}")
    params = dict(cp["params"]) if cp.has_section("params") else {}
    for key in PARAM_NAMES[name]:
        if key not in params:
            raise ConfigError(f"params.{key}: required for model {name}")
    extra = set(params) - set(PARAM_NAMES[name])
    if extra:
        raise ConfigError(f"params.{sorted(extra)[0]}: not a parameter of {name}")
    cfg["params"] = {k: _convert(f"params.{k}", float, v) for k, v in params.items()}
    runs = cfg["experiments"]["run"].replace(",", " ").split()
    bad = [r for r in runs if r not in EXPERIMENTS]
    if bad:
        raise ConfigError(f"experiments.run: unknown experiment {bad[0]!r}; "
                          f"known: {', '.join(EXPERIMENTS)}")
    cfg["experiments"]["run"] = runs
    cfg["sampling"]["qs"] = [_convert("sampling.qs", float, v)
                             for v in cfg["sampling"]["qs"].replace(",", " ").split()]
    if cfg["rates"]["policy"] not in ("measured", "fixed"):
        raise ConfigError("rates.policy: must be 'measured' or 'fixed'")
    if cfg["rates"]["policy"] == "fixed":
        for k in ("omega", "rho", "nu"):
            if cfg["rates"][k] is None:
                raise ConfigError(f"rates.{k}: required when policy = fixed")
    for sec, key in (("weight", "alpha_minus"), ("weight", "alpha_plus"), ("lp", "T")):
        v = cfg[sec][key]
        cfg[sec][key] = None if v == "auto" else _convert(f"{sec}.{key}", float, v)
    cfg["output"]["dir"] = str((path.parent / cfg["output"]["dir"]).resolve())
    return cfg


def _closure(runs):
    """Requested experiments plus prerequisites, in dependency order."""
    need = set()

    def add(e):
        if e not in need:
            need.add(e)
            for d in DEPENDS[e]:
                add(d)
    for r in runs:
        add(r)
    return [e for e in EXPERIMENTS if e in need]


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


class _Pipeline:
    def __init__(self, cfg):
        self.cfg = cfg
        self.out = Path(cfg["output"]["dir"])
        self.rng = np.random.default_rng(cfg["sampling"]["seed"])
        self.summary = {"config": {k: v for k, v in cfg.items() if k != "output"},
                        "checks": {}}

    def check(self, name, ok):
        self.summary["checks"][name] = bool(ok)

    def front(self):
        c = self.cfg
        try:
            self.model = builtin_model(c["model"]["name"], c["params"])
            g = self.grid = make_grid(c["grid"]["X"], c["grid"]["N"])
        except ValueError as exc:
            raise ConfigError(f"params: {exc}") from None
        guess = initial_guess(self.model, (np.zeros(self.model.n), self.model.right_state), g,
                              0.5)
        self.profile = solve_front(self.model, guess, 0.7, grid=g, order=c["grid"]["order"])
        save_profile(self.out / "profile.csv", self.profile)
        p = self.profile
        self.summary["front"] = {"c": p.c, "residual": p.residual,
                                 "omega_minus": p.omega_minus, "omega_plus": p.omega_plus}
        self.check("front_residual", p.residual <= 1e-10)

    def spectrum(self):
        c, p = self.cfg["weight"], self.profile
        if c["alpha_minus"] is None and c["alpha_plus"] is None:
            self.weight = mid_window_weight(p, c["x0"])
        else:
            mid = mid_window_weight(p, c["x0"])
            am = mid.alpha_minus if c["alpha_minus"] is None else c["alpha_minus"]
            ap = mid.alpha_plus if c["alpha_plus"] is None else c["alpha_plus"]
            self.weight = make_weight((am, ap), c["x0"])
        try:
            self.weight.check_admissible(p.omega_minus, p.omega_plus)
        except ValueError as exc:
            raise ConfigError(f"weight: {exc}") from None
        seed = self.cfg["sampling"]["seed"]
        self.op = assemble_linearization(self.model, p, 0.0, self.weight)
        self.spec = point_spectrum(self.op, seed=seed)
        self.pair = adjoint_zero_mode(self.op)
        write_curves_csv(self.out / "curves.csv",
                         essential_spectrum_curves(self.model, p, self.weight))
        s = self.spec
        self.summary["spectrum"] = {
            "alpha": list(self.weight.alpha), "ess_sup_real": s.ess_sup_real, "nu": s.nu,
            "lambda0": [s.lambda0.real, s.lambda0.imag], "cosine": s.cosine,
            "eigenvalues": [[z.real, z.imag] for z in s.eigenvalues]}
        self.summary["hypothesis_pass"] = dict(s.hypothesis_pass)
        for k, v in s.hypothesis_pass.items():
            self.check(k, v)

    def decay(self):
        c = self.cfg["rates"]
        if c["policy"] == "fixed":
            self.rates = RateBundle(c["omega"], c["rho"], c["nu"])
            self.summary["decay"] = {"policy": "fixed"}
            return
        sd = semigroup_decay_rate(self.op, self.pair, self.weight, c["T"], c["dt"],
                                  c["samples"], self.rng)
        lim = limit_semigroup_check(self.model, self.weight, self.grid, self.profile,
                                    c["T"], c["dt"], c["samples"], self.rng)
        self.rates = select_rates(lim["S2_rate"], sd["nu_hat"])
        self.summary["decay"] = {
            "nu_hat": sd["nu_hat"], "C_hat": sd["C_hat"], "beta_growth": sd["beta_growth"],
            "center_drift": sd["center_drift"], "rho_hat": lim["S2_rate"],
            "coupling_error": lim["coupling_error"],
            "rates": {"omega": self.rates.omega, "rho": self.rates.rho, "nu": self.rates.nu}}
        self.check("decay_rate", sd["nu_hat"] >= 0.9 * self.spec.nu)
        self.check("beta_bounded", sd["beta_bounded"])
        self.check("limit_semigroup", lim["pass"])

    def _foliation(self):
        if not hasattr(self, "fol"):
            c = self.cfg["lp"]
            lpc = LPConfig(self.rates, c["T"], c["dt"], c["tol"], c["delta"], c["delta0"],
                           c["q0"])
            self.fol = StableFoliation(self.model, self.profile, self.weight, lpc)
        return self.fol

    def manifold(self):
        fol = self._foliation()
        z0 = fol.stable_sample(0.0, fol.cfg.delta0, self.rng)
        sol = fol.solve(0.0, z0)
        tan = phi_tangency(fol, 0.0, z0)
        mid = mild_equivalence(fol, 0.0, z0)
        S = fol.context(0.0).profile.Y0 + sol.y.states[0]
        traj = evolve_semilinear(self.model, self.profile, 0.0, S - self.profile.Y0,
                                 self.cfg["rates"]["T"], self.cfg["rates"]["dt"],
                                 op=fol.context(0.0).op, store_every=50)
        write_trajectory_csv(self.out / "trajectory.csv", traj, self.grid, self.weight,
                             self.model.n2)
        self.summary["phi"] = {"phi_coeff": sol.phi_coeff,
                               "contraction_factors": sol.contraction_factors,
                               "iterations": sol.iterations, "tail_bound": sol.tail_bound,
                               "ball_norm": sol.ball_norm, "tangency_slope": tan["slope"],
                               "duhamel_defect": mid["defect"]}
        self.check("contraction", max(sol.contraction_factors, default=0.0) < 0.5)
        self.check("phi_tangency", 1.8 <= tan["slope"] <= 2.2)
        self.check("duhamel", mid["pass"])

    def foliate(self):
        fol, s = self._foliation(), self.cfg["sampling"]
        self.samples = round_trips(fol, s["qs"], s["draws"], s["amplitude"], self.rng,
                                   self.cfg["rates"]["T"], self.cfg["rates"]["dt"],
                                   s["T_phase"])
        _write_rows(self.out / "foliation.csv",
                    ["sample_id", "q_true", "q_root_find", "q_asymptotic", "residual"],
                    [[r["sample_id"], repr(r["q_true"]), repr(r["q_root_find"]),
                      repr(r["q_asymptotic"]), repr(r["residual"])] for r in self.samples])
        self.summary["foliation"] = [{k: r[k] for k in ("sample_id", "q_true", "q_root_find",
                                                        "q_asymptotic", "residual", "unique")}
                                     for r in self.samples]
        self.check("foliation_round_trip", all(
            abs(r["q_root_find"] - r["q_true"]) <= 1e-3
            and abs(r["q_root_find"] - r["q_asymptotic"]) <= 5e-3 and r["unique"]
            for r in self.samples))

    def verify(self):
        fol, s = self._foliation(), self.cfg["sampling"]
        rep = verify_theorem(fol, s["qs"], s["draws"], s["amplitude"], self.rng,
                             self.cfg["rates"]["T"], self.cfg["rates"]["dt"], s["t0"],
                             s["T_phase"], samples=self.samples)
        self.summary["verify"] = {
            "checks": rep["checks"], "omega": rep["omega"], "invariance": rep["invariance"],
            "lipschitz": rep["lipschitz"], "mild_equivalence": rep["mild_equivalence"],
            "decay": [{k: r[k] for k in ("sample_id", "alpha_rate", "v_rate", "u_constant")}
                      for r in self.samples]}
        for k, v in rep["checks"].items():
            self.check(f"verify_{k}", v)


def _manifest(out, status):
    with open(out / "MANIFEST", "w") as fh:
        for name, st in status.items():
            fh.write(f"{name} {st}\n")


def run(config_path) -> int:
    """Run the experiments of a config; return the exit status."""
    try:
        cfg = load_config(config_path)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    out = Path(cfg["output"]["dir"])
    out.mkdir(parents=True, exist_ok=True)
    order = _closure(cfg["experiments"]["run"])
    status = {e: "pending" for e in order}
    _manifest(out, status)
    pipe = _Pipeline(cfg)
    pipe.summary["timings"] = {}
    code = 0
    for e in order:
        t = time.perf_counter()
        try:
            getattr(pipe, e)()
        except ConfigError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            status[e], code = "failed", 2
        except (RuntimeError, ValueError, np.linalg.LinAlgError) as exc:
            print(f"{e} failed: {exc}", file=sys.stderr)
            status[e], code = "failed", 3
        else:
            status[e] = "completed"
        pipe.summary["timings"][e] = time.perf_counter() - t
        _manifest(out, status)
        if code:
            for r in order[order.index(e) + 1:]:
                status[r] = "skipped"
            _manifest(out, status)
            break
    pipe.summary["status"] = status
    pipe.summary["pass"] = code == 0 and all(pipe.summary["checks"].values())
    with open(out / "summary.json", "w") as fh:
        json.dump(pipe.summary, fh, indent=2, default=_jsonable)
    if code:
        return code
    return 0 if pipe.summary["pass"] else 1


def _jsonable(o):
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(f"not serializable: {type(o).__name__}")


def describe(topic: str) -> str:
    """Documentation text for `topic`; raises ValueError listing valid topics."""
    if topic == "config":
        lines = []
        for sec, fields in SCHEMA.items():
            lines.append(f"[{sec}]")
            for k, (typ, d, doc) in fields.items():
                dd = "required" if d is REQUIRED else f"default {d}"
                lines.append(f"  {k} ({typ.__name__}, {dd}): {doc}")
            if sec == "model":
                lines.append("[params]")
                for m, keys in PARAM_NAMES.items():
                    lines.append(f"  {m}: {', '.join(keys)} (all required)")
        return "\n".join(lines)
    if topic == "pipeline":
        return "\n".join(f"{e} <- {', '.join(DEPENDS[e]) or '(none)'}" for e in EXPERIMENTS)
    if topic == "outputs":
        return ("summary.json   flags, front data, spectrum, rates, phi diagnostics, foliation\n"
                "MANIFEST       completion state per experiment\n"
                "profile.csv    front profile (front)\n"
                "curves.csv     k, side, branch, re, im (spectrum)\n"
                "trajectory.csv t, sup, alpha, v_sup (manifold)\n"
                "foliation.csv  sample_id, q_true, q_root_find, q_asymptotic, residual (foliate)")
    if topic == "models":
        return "\n".join(f"{m}: {', '.join(f'{k}={v}' for k, v in p.items())}"
                         for m, p in BUILTIN_DEFAULTS.items())
    if topic == "exit-codes":
        return "0 pass\n1 a check failed\n2 configuration error\n3 numerical failure"
    raise ValueError(f"unknown topic {topic!r}; valid topics: {', '.join(TOPICS)}")


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="frontlab", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="cmd", required=True)
    r = sub.add_parser("run", help="run the experiments of a config file")
    r.add_argument("config")
    d = sub.add_parser("describe", help="print documentation")
    d.add_argument("topic")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    if args.cmd == "run":
        return run(args.config)
    try:
        print(describe(args.topic))
    except ValueError as exc:
        print(exc, file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
