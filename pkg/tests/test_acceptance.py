"""End-to-end acceptance checks.

Each test prints one ``criterion k: PASS/FAIL`` line (visible under ``-s`` or
``-v``) and asserts the same condition, including its runtime budget.
"""

import time

import numpy as np

from htevec.eigenprocess import (
    bivariate_process,
    detect_atoms,
    resolvent_stat,
)
from htevec.ensembles import EnsembleSpec, Kind
from htevec.fixedpoint import SolverConfig, eval_L_pair, eval_L_u, limit_cov_kappa, solve_rho_z, stieltjes_mu_phi
from htevec.inversion import EtaSchedule, cov_C_from_H, spectral_cdf
from htevec.montecarlo import (
    gaussianity_diag,
    jackknife_cov,
    map_replicates,
    replicate_decomposition,
    scaling_scan,
    tightness_check,
)
from htevec.philib import PhiModel
from htevec.population import PopulationSampler, population_kappa_handle
from htevec.verification import verify_identities

from conftest import cached_samples

ER_SPEC = (("p", 2.0),)
LEVY_SPEC = (("alpha", 1.5),)
# t = 1/2 is the median of a symmetric spectrum; for ER it falls inside the
# atom at 0 and for every ensemble there the variance of B^n decays like 1/n
T_MID = 0.25


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


def semicircle(z):
    r = np.sqrt(z * z - 4 + 0j)
    if (r / z).real < 0:
        r = -r
    return (z - r) / 2


def var_and_se(x):
    d2 = (x - x.mean()) ** 2
    return np.var(x, ddof=1), np.std(d2, ddof=1) / np.sqrt(x.size)


def test_criterion_1_exact_identities(report):
    with Timer() as tm:
        recs = verify_identities(instances=120, n_max=50, seed=2024)
    checks = sorted({r.check for r in recs})
    failures = [r for r in recs if not r.passed]
    counts = {c: sum(r.check == c for r in recs) for c in checks}
    worst = {c: max(r.residual for r in recs if r.check == c) for c in checks}
    ok = not failures and min(counts.values()) >= 100 and max(r.n for r in recs) <= 50 and tm.elapsed < 60
    report("criterion 1", ok, f"checks={checks} worst={worst} time={tm.elapsed:.1f}s")
    assert ok


def test_criterion_2_structural_invariants(report):
    z_list = [0.3 + 1j, -1.2 - 0.4j, 2j]
    kinds = [EnsembleSpec(Kind.LEVY, alpha=1.5, seed=3), EnsembleSpec(Kind.ERDOS_RENYI, p=2.0, seed=3),
             EnsembleSpec(Kind.GAUSSIAN, seed=3), EnsembleSpec(Kind.PERMUTATION, seed=3),
             EnsembleSpec(Kind.EXPLODING_MOMENTS, m_atoms=((0.5, 0.0), (1.0, 2.0)), seed=3)]
    grid = np.linspace(0, 1, 9)
    worst_ds, boundary_ok, x_ok, count = 0.0, True, True, 0
    for spec in kinds:
        for n in (5, 17, 50):
            for r in range(8):
                dec = replicate_decomposition(spec, n, r)
                ov = dec.overlaps
                worst_ds = max(worst_ds, np.max(np.abs(ov.sum(0) - 1)), np.max(np.abs(ov.sum(1) - 1)))
                b = bivariate_process(dec, grid, grid).values
                boundary_ok &= bool(np.all(b[[0, -1], :] == 0) and np.all(b[:, [0, -1]] == 0))
                for z in z_list:
                    x_ok &= resolvent_stat(dec, 0.0, z).value == 0 and resolvent_stat(dec, 1.0, z).value == 0
                count += 1
    ok = worst_ds < 1e-10 and boundary_ok and x_ok
    report("criterion 2", ok, f"decompositions={count} max_row_col_dev={worst_ds:.2e} "
                              f"boundary_zero={boundary_ok} X_ends_zero={x_ok}")
    assert ok


def test_criterion_3_tightness(report):
    grid = np.linspace(0, 1, 5)
    specs = {"ER p=2": EnsembleSpec(Kind.ERDOS_RENYI, p=2.0, seed=31),
             "Levy 1.5": EnsembleSpec(Kind.LEVY, alpha=1.5, seed=31),
             "Permutation": EnsembleSpec(Kind.PERMUTATION, seed=31)}
    lines, ok = [], True
    with Timer() as tm:
        for name, spec in specs.items():
            for n in (50, 200):
                rep = tightness_check(spec, n, 200, grid, workers=1, full_bound=False)
                ok &= rep.passed
                lines.append(f"{name} n={n} worst={rep.worst:.3f}")
    ok &= tm.elapsed < 300
    report("criterion 3", ok, "; ".join(lines) + f" time={tm.elapsed:.0f}s")
    assert ok


def test_criterion_4_variance_scaling(report):
    n_list = [100, 200, 400, 800]
    point = (0.5, T_MID)
    res = {}
    with Timer() as tm:
        for name, spec in {"ER p=2": EnsembleSpec(Kind.ERDOS_RENYI, p=2.0, seed=41),
                           "Levy 1.5": EnsembleSpec(Kind.LEVY, alpha=1.5, seed=41),
                           "Gaussian": EnsembleSpec(Kind.GAUSSIAN, seed=41)}.items():
            res[name] = scaling_scan(spec, n_list, 400, point, workers=1).slope
    ok = (abs(res["ER p=2"]) < 0.3 and abs(res["Levy 1.5"]) < 0.3 and -1.4 < res["Gaussian"] < -0.6
          and tm.elapsed < 900)
    report("criterion 4", ok, " ".join(f"{k}: slope={v:+.3f}" for k, v in res.items()) + f" time={tm.elapsed:.0f}s")
    assert ok


def test_criterion_5_permutation_covariance(report):
    pts = ((0.5, 0.5), (0.25, 0.75), (0.75, 0.25), (0.3, 0.6))
    pairs = [(0, 0), (0, 1), (1, 2), (2, 3), (1, 3), (3, 3)]
    with Timer() as tm:
        x = cached_samples("permutation", (), 500, 400, pts, "B", 51)
        cov, se = jackknife_cov(x)
    lines, ok = [], True
    for i, j in pairs:
        (s, t), (s2, t2) = pts[i], pts[j]
        lim = (min(s, s2) - s * s2) * (min(t, t2) - t * t2)
        z = abs(cov[i, j] - lim) / se[i, j]
        ok &= z < 3
        lines.append(f"{pts[i]}x{pts[j]} z={z:.2f}")
    ok &= tm.elapsed < 120
    report("criterion 5", ok, "; ".join(lines) + f" time={tm.elapsed:.0f}s")
    assert ok


def test_criterion_6_semicircle_reduction(report):
    model = PhiModel.exploding(((1.0, 0.0),))
    zs = [2j, 0.5 + 0.3j, -1.5 + 1j, 3 - 0.4j, 1j, -0.2 + 0.5j, 2.5 + 0.2j, -3 + 2j, 0.9 - 1.1j, 4j]
    with Timer() as tm:
        err = max(abs(stieltjes_mu_phi(solve_rho_z(model, z)) - semicircle(z)) for z in zs)
        f0 = spectral_cdf(model, [0.0]).values[0]
    ok = err < 1e-6 and abs(f0 - 0.5) < 1e-2 and tm.elapsed < 60
    report("criterion 6", ok, f"max|G-G_sc|={err:.2e} F(0)={f0:.4f} time={tm.elapsed:.0f}s")
    assert ok


def test_criterion_7_resolvent_covariance(report):
    model = PhiModel.erdos_renyi(2.0)
    base = [(0.5, 2j), (0.5, 3j), (0.25, 2j)]
    pts = tuple(p for s, z in base for p in ((s, z), (s, z.conjugate())))
    with Timer() as tm:
        x = cached_samples("erdos_renyi", ER_SPEC, 1000, 400, pts, "X", 71)
        cov, se = jackknife_cov(x)
        lines, ok = [], True
        for k, (s, z) in enumerate(base):
            i, j = 2 * k, 2 * k + 1
            lim = limit_cov_kappa(model, s, z, s, z.conjugate())
            c, e = complex(cov[i, j]), complex(se[i, j])
            zr = abs(c.real - lim.real) / e.real
            # the imaginary part vanishes identically for a conjugate pair
            zi = abs(c.imag - lim.imag) / e.imag if e.imag > 1e-12 else 0.0
            ok &= zr < 3 and zi < 3
            lines.append(f"s={s} z={z}: mc={c.real:.3e} lim={lim.real:.3e} z_re={zr:.2f} z_im={zi:.2f}")
    ok &= tm.elapsed < 1800
    report("criterion 7", ok, "; ".join(lines) + f" time={tm.elapsed:.0f}s")
    assert ok


def test_criterion_8_spectral_cdf(report):
    spec = EnsembleSpec(Kind.ERDOS_RENYI, p=2.0, seed=81)
    n, reps = 2000, 20
    with Timer() as tm:
        ev = np.concatenate(map_replicates(lambda d: d.eigenvalues, spec, n, reps, workers=1))
        atoms, _ = detect_atoms(ev)
        cand = np.linspace(-2.4, 2.4, 17)
        lam = np.array([l for l in cand if np.all(np.abs(l - atoms) > 0.1)])
        # equal sizes: the pooled CDF is the average of the replicate CDFs
        emp = np.searchsorted(np.sort(ev), lam, side="right") / ev.size
        F = spectral_cdf(PhiModel.erdos_renyi(2.0), lam).values
    sup = float(np.max(np.abs(F - emp)))
    ok = sup < 0.02 and tm.elapsed < 600
    report("criterion 8", ok, f"atoms={np.round(atoms, 3).tolist()} grid={lam.size} sup={sup:.4f} "
                              f"time={tm.elapsed:.0f}s")
    assert ok


def test_criterion_9_eigenvalue_process_variance(report):
    lines, ok = [], True
    with Timer() as tm:
        # Erdos-Renyi: the solver route for H, lambda = 0.5 off the atoms
        x = cached_samples("erdos_renyi", ER_SPEC, 1000, 400, ((0.5, 0.1), (0.5, 0.5)), "C", 91)
        v, e = var_and_se(x[:, 1])
        cfg = SolverConfig(trunc_eps=1e-8)
        model = PhiModel.erdos_renyi(2.0)
        handle = lambda s, z, s2, z2: limit_cov_kappa(model, s, z, s2, z2, cfg)  # noqa: E731
        lim = cov_C_from_H(handle, 0.5, 0.5, 0.5, 0.5, EtaSchedule((0.4, 0.2, 0.1)), ray_q=4)
        good = v > 3 * e and lim > 0
        ok &= good
        lines.append(f"ER lam=0.5 var={v:.2e}+-{e:.1e} limit={lim:.2e}")
        # Levy: population dynamics for H
        y = cached_samples("levy", LEVY_SPEC, 1000, 400, ((0.5, 0.5),), "C", 92)
        v, e = var_and_se(y[:, 0])
        lmodel = PhiModel.from_spec(EnsembleSpec(Kind.LEVY, alpha=1.5))
        ph = population_kappa_handle(PopulationSampler(lmodel, pool=20000, sweeps=30, seed=9))
        lim = cov_C_from_H(ph, 0.5, 0.5, 0.5, 0.5, EtaSchedule((0.4, 0.2, 0.1)), ray_q=4)
        good = v > 3 * e and lim > 0
        ok &= good
        lines.append(f"Levy lam=0.5 var={v:.2e}+-{e:.1e} limit={lim:.2e}")
    ok &= tm.elapsed < 600
    report("criterion 9", ok, "; ".join(lines) + f" time={tm.elapsed:.0f}s")
    assert ok


def test_criterion_10_gaussianity(report):
    with Timer() as tm:
        x = cached_samples("erdos_renyi", ER_SPEC, 800, 800, ((0.5, T_MID),), "B", 101)[:, 0]
        zs, zk = gaussianity_diag(x)
    ok = abs(zs) < 4 and abs(zk) < 4 and tm.elapsed < 600
    report("criterion 10", ok, f"z_skew={zs:+.2f} z_kurt={zk:+.2f} time={tm.elapsed:.0f}s")
    assert ok


def test_criterion_11_solver_stability(report):
    model = PhiModel.erdos_renyi(2.0)
    with Timer() as tm:
        base = SolverConfig()
        d_nodes = max(abs(eval_L_u(model, 0.3, 0.5, z, base) - eval_L_u(model, 0.3, 0.5, z, base.with_(nodes=320)))
                      for z in (2j, 0.5 + 0.5j, 0.3 + 0.2j))
        sols = [solve_rho_z(model, 1 + 1j, base.with_(method="picard", damping=d, max_iter=2000))
                for d in (0.5, 0.8)] + [solve_rho_z(model, 1 + 1j, base.with_(method="newton"))]
        d_damp = max(float(np.max(np.abs(r.values - sols[-1].values))) for r in sols[:-1])
        # equal s: the two sides of the tensor grid genuinely trade places
        p = eval_L_pair(model, 0.4, 0.5, 0.5 + 1j, 0.5, -3j)
        q = eval_L_pair(model, 0.4, 0.5, -3j, 0.5, 0.5 + 1j)
        d_sym = abs(p - q)
    ok = d_nodes < 1e-5 and d_damp < 1e-8 and d_sym < 1e-7 and tm.elapsed < 300
    report("criterion 11", ok, f"node_doubling={d_nodes:.2e} damping={d_damp:.2e} symmetry={d_sym:.2e} "
                               f"time={tm.elapsed:.0f}s")
    assert ok

