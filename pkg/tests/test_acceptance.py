"""Acceptance criteria 1-10 at the reference configuration.

Each test records one PASS/FAIL line (shown in the ``acceptance`` section of
the terminal summary).  Criteria 7-10 share two full ``verify`` runs of the
CLI; the first run supplies the round-trip, decay and invariance data.
"""
import json
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import _front, record
from frontlab.cli import run as cli_run
from frontlab.evolve import (check_nonlinearity_estimates, eval_Fq, limit_semigroup_check,
                             select_rates, semigroup_decay_rate)
from frontlab.grid import make_weight, smooth_random_fields
from frontlab.manifold import LPConfig, StableFoliation, mild_equivalence, phi_tangency
from frontlab.spectrum import (adjoint_zero_mode, apply_projections, assemble_linearization,
                               essential_spectrum_curves, mid_window_weight, point_spectrum,
                               projection_lipschitz_check)
from oracles import C_SHOOTING_BETA_05, shooting_speed

pytestmark = pytest.mark.slow

ROOT = Path(__file__).resolve().parents[1]


@pytest.fixture(scope="module")
def ref():
    t = time.perf_counter()
    model, p = _front(60.0, 2401)
    return model, p, time.perf_counter() - t


@pytest.fixture(scope="module")
def ref_spectral(ref):
    model, p, _ = ref
    t = time.perf_counter()
    w = mid_window_weight(p)
    op = assemble_linearization(model, p, 0.0, w)
    spec = point_spectrum(op)
    ess = essential_spectrum_curves(model, p, w)
    pair = adjoint_zero_mode(op)
    return w, op, spec, ess, pair, time.perf_counter() - t


@pytest.fixture(scope="module")
def ref_decay(ref, ref_spectral):
    model, p, _ = ref
    w, op, spec, ess, pair, _ = ref_spectral
    rng = np.random.default_rng(0)
    sd = semigroup_decay_rate(op, pair, w, 50.0, 0.01, 5, rng)
    lim = limit_semigroup_check(model, w, p.grid, p, 50.0, 0.01, 5, rng)
    return sd, lim, select_rates(lim["S2_rate"], sd["nu_hat"])


def _verify_run(tmp: Path) -> tuple[int, Path, float]:
    text = (ROOT / "configs" / "verify.ini").read_text()
    out = tmp / "out"
    cfg = tmp / "verify.ini"
    cfg.write_text(text.replace("dir = out/verify", f"dir = {out}"))
    t = time.perf_counter()
    code = cli_run(cfg)
    return code, out, time.perf_counter() - t


@pytest.fixture(scope="module")
def run_a(tmp_path_factory):
    code, out, wall = _verify_run(tmp_path_factory.mktemp("verify_a"))
    return code, out, json.loads((out / "summary.json").read_text()), wall


@pytest.fixture(scope="module")
def run_b(tmp_path_factory):
    code, out, _ = _verify_run(tmp_path_factory.mktemp("verify_b"))
    return code, out


def test_criterion_01_front(ref):
    model, p, wall = ref
    c_live = shooting_speed(0.5)
    rel = abs(p.c - c_live) / c_live
    rel_frozen = abs(p.c - C_SHOOTING_BETA_05) / C_SHOOTING_BETA_05
    _, p2 = _front(120.0, 4801)
    rel_X = abs(p2.c - p.c) / p.c
    ok = p.residual <= 1e-10 and rel <= 1e-6 and rel_frozen <= 1e-6 and rel_X < 1e-6 and wall < 30
    record(1, ok, f"residual={p.residual:.1e} c={p.c:.10f} rel_vs_shooting={rel:.1e} "
                  f"rel_X_doubling={rel_X:.1e} solve={wall:.1f}s")
    assert ok


def test_criterion_02_spectrum(ref, ref_spectral):
    model, p, _ = ref
    w, op, spec, ess, pair, wall = ref_spectral
    ess0 = essential_spectrum_curves(model, p, make_weight((0.0, 0.0)))
    ok = (ess["ess_sup_real"] < 0 and abs(spec.lambda0) <= 1e-4 * spec.nu
          and spec.cosine >= 0.999 and abs(ess0["ess_sup_real"]) <= 1e-8 and wall < 120)
    record(2, ok, f"ess_sup={ess['ess_sup_real']:.4f} |lambda0|={abs(spec.lambda0):.1e} "
                  f"nu={spec.nu:.4f} cos={spec.cosine:.6f} "
                  f"unweighted_sup={ess0['ess_sup_real']:.1e} time={wall:.1f}s")
    assert ok


def test_criterion_03_projections(ref, ref_spectral):
    model, p, _ = ref
    w, op, spec, ess, pair, _ = ref_spectral
    rng = np.random.default_rng(3)
    norm_err = abs(pair.pi(pair.Yqprime) - 1.0)
    F = smooth_random_fields(p.grid, model.n, 100, rng)
    Pc, Ps, _ = apply_projections(pair, F)
    Pc2 = apply_projections(pair, Pc)[0]
    scale = np.max(np.abs(F))
    idem = np.max(np.abs(Pc2 - Pc)) / scale
    compl = max(np.max(np.abs(Pc + Ps - F)), np.max(np.abs(pair.pi(Ps)))) / scale
    ratios = []
    for q in (0.025, 0.05, 0.1):
        pq = adjoint_zero_mode(assemble_linearization(model, p, q, w))
        ratios.append(projection_lipschitz_check(pair, pq, np.random.default_rng(0),
                                                 20)["norm_ratio"])
    spread = max(ratios) / min(ratios)
    ok = norm_err <= 1e-10 and idem <= 1e-10 and compl <= 1e-10 and spread <= 2.0
    record(3, ok, f"|pi(Y')-1|={norm_err:.1e} idempotence={idem:.1e} "
                  f"complement={compl:.1e} lipschitz_ratios="
                  + ",".join(f"{r:.3f}" for r in ratios))
    assert ok


def test_criterion_04_semigroup(ref, ref_spectral, ref_decay):
    _, p, _ = ref
    spec = ref_spectral[2]
    sd, _, _ = ref_decay
    h, dt, T = p.grid.h, 0.01, 50.0
    bound = (h**2 + dt**2) * T
    ok = sd["nu_hat"] >= 0.9 * spec.nu and sd["center_drift"] <= bound and sd["beta_bounded"]
    record(4, ok, f"nu_hat={sd['nu_hat']:.4f} 0.9nu={0.9 * spec.nu:.4f} "
                  f"center_drift={sd['center_drift']:.1e} (bound {bound:.2f}) "
                  f"beta_growth={sd['beta_growth']:.3f}")
    assert ok


def test_criterion_05_nonlinearity(ref, ref_spectral):
    model, p, _ = ref
    w = ref_spectral[0]
    consts = []
    for d in (0.1, 0.05, 0.025):
        rep = check_nonlinearity_estimates(model, p, 0.0, w, 25, d, np.random.default_rng(5))
        consts.append(np.array(list(rep["constants"].values())))
    C = np.array(consts)
    spread = float(np.max((C.max(axis=0) - C.min(axis=0)) / C.min(axis=0)))
    y = smooth_random_fields(p.grid, model.n, 1, np.random.default_rng(6), extent=5.0)[0]
    eps = np.array([0.01, 0.005, 0.0025])
    vals = [np.max(np.abs(eval_Fq(model, p, 0.0, e * y))) for e in eps]
    slope = float(np.polyfit(np.log(eps), np.log(vals), 1)[0])
    ok = bool(np.all(np.isfinite(C))) and spread < 0.5 and 1.9 <= slope <= 2.1
    record(5, ok, f"max_variation_over_delta={spread:.3f} scaling_slope={slope:.4f}")
    assert ok


def test_criterion_06_lyapunov_perron(ref, ref_spectral, ref_decay):
    model, p, _ = ref
    w = ref_spectral[0]
    rates = ref_decay[2]
    fol = StableFoliation(model, p, w, LPConfig(rates))
    z0 = fol.stable_sample(0.0, 0.01, np.random.default_rng(7))
    t = time.perf_counter()
    sol = fol.solve(0.0, z0)
    wall = time.perf_counter() - t
    mid = mild_equivalence(fol, 0.0, z0)
    tan = phi_tangency(fol, 0.0, z0)
    fmax = max(sol.contraction_factors, default=0.0)
    ok = fmax < 0.5 and mid["defect"] <= 1e-4 and 1.8 <= tan["slope"] <= 2.2 and wall < 300
    record(6, ok, f"max_factor={fmax:.3f} iterations={sol.iterations} "
                  f"duhamel={mid['defect']:.1e} tangency_slope={tan['slope']:.4f} "
                  f"solve={wall:.1f}s")
    assert ok


def test_criterion_07_decay(run_a):
    code, out, s, _ = run_a
    chk = s["verify"]["checks"]
    dec = s["verify"]["decay"]
    om = s["verify"]["omega"]
    ok = chk["alpha_decay"] and chk["u_bounded"] and chk["v_decay"]
    record(7, ok, f"omega={om:.4f} min_alpha_rate={min(r['alpha_rate'] for r in dec):.4f} "
                  f"min_v_rate={min(r['v_rate'] for r in dec):.4f} "
                  f"max_u_constant={max(r['u_constant'] for r in dec):.2f}")
    assert ok


def test_criterion_08_foliation(run_a):
    code, out, s, _ = run_a
    rows = s["foliation"]
    err = max(abs(r["q_root_find"] - r["q_true"]) for r in rows)
    gap = max(abs(r["q_root_find"] - r["q_asymptotic"]) for r in rows)
    unique = all(r["unique"] for r in rows)
    wall = s["timings"]["foliate"]
    ok = len(rows) == 9 and err <= 1e-3 and gap <= 5e-3 and unique and wall < 900
    record(8, ok, f"samples={len(rows)} max|q_rf-q|={err:.1e} max|q_rf-q_ap|={gap:.1e} "
                  f"unique={unique} foliate={wall:.0f}s")
    assert ok


def test_criterion_09_invariance(run_a):
    code, out, s, _ = run_a
    inv = s["verify"]["invariance"]
    ok = bool(inv["pass"])
    record(9, ok, f"residual_initial={inv['residual_initial']:.1e} "
                  f"residual_evolved={inv['residual_evolved']:.1e}")
    assert ok


def _bodies(out: Path) -> dict:
    return {f.name: [ln for ln in f.read_bytes().splitlines() if not ln.startswith(b"#")]
            for f in sorted(out.glob("*.csv"))}


def test_criterion_10_determinism(run_a, run_b):
    code_a, out_a, _, _ = run_a
    code_b, out_b = run_b
    a, b = _bodies(out_a), _bodies(out_b)
    ok = code_a == 0 and code_b == 0 and len(a) >= 4 and a == b
    record(10, ok, f"exit_codes={code_a},{code_b} csv_files={sorted(a)} identical={a == b}")
    assert ok
