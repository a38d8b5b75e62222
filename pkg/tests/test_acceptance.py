"""End-to-end acceptance checks.

Each test covers one criterion, asserts it at the stated tolerance and
records a single PASS/FAIL line; the lines are printed as they happen and
again in the terminal summary.
"""

import math
import subprocess
import sys
import time
import warnings
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import pytest

from fourext import (ExtensionConfig, PrecisionContext, attach_rhs, build_system,
                     count_zeros, exact_extension, fe_constant, frame_function, get_function,
                     lsq_solve, sup_error, svd, truncated_solve)
from fourext.analysis import (breakpoints, condition_bound, plateau_onset, rate_fit, spectrum_report,
                              stability_constants, tsvd_bound_slack)
from fourext.experiments import ExperimentSpec, run

RESULTS = {}
E2 = 5.82842712474619009760337744842


@contextmanager
def criterion(number, budget):
    """Time a criterion, check its runtime budget and record PASS/FAIL."""
    notes = []
    t0 = time.perf_counter()
    try:
        yield notes
        elapsed = time.perf_counter() - t0
        notes.append(f"{elapsed:.1f}s")
        assert elapsed < budget, f"runtime {elapsed:.1f}s exceeds {budget}s"
    except BaseException as exc:
        line = f"C{number} FAIL " + "; ".join(notes + [str(exc).splitlines()[0] if str(exc) else type(exc).__name__])
        RESULTS[number] = line
        print(line)
        raise
    line = f"C{number} PASS " + "; ".join(notes)
    RESULTS[number] = line
    print(line)


def _curve(fname, config_of, Ns, eps, precision=None, points=10001, solver="tsvd"):
    f = get_function(fname)
    out = []
    for N in Ns:
        args = (config_of(N),) if precision is None else (config_of(N), precision)
        system = attach_rhs(build_system(*args), f)
        sol = lsq_solve(system) if solver == "lsq" else truncated_solve(system, eps)
        out.append((N, sup_error(f, sol, points)))
    return out


def test_c01_breakpoints():
    with criterion(1, 60) as notes:
        cases = [(1e-6, 4, None), (1e-12, 8, None), (1e-18, 12, 40), (1e-24, 16, 40)]
        for eps, expected, digits in cases:
            N0 = breakpoints(2.0, eps, Nmax=None).N0
            assert round(N0) == expected, (eps, N0)
            P = PrecisionContext.extended(digits) if digits else None
            errs = _curve("linear", lambda N: ExtensionConfig(T=2.0, N=N), range(1, expected + 7), eps, P,
                          points=1001)
            onset = plateau_onset(errs)
            notes.append(f"eps={eps:g}: N0={N0:.2f} onset={onset}")
            assert onset is not None and abs(onset - N0) <= 2, (eps, onset, N0)


def test_c02_conditioning_rates():
    with criterion(2, 120) as notes:
        P = PrecisionContext.extended(60)
        lam = [(N, svd(build_system(ExtensionConfig(T=2.0, N=N), P)).S[-1]) for N in range(5, 16)]
        sig = [(N, svd(build_system(ExtensionConfig(T=2.0, N=N, grid="discrete"), P)).S[-1])
               for N in range(5, 16)]
        r_lam = rate_fit(lam) / E2 ** 2
        r_sig = rate_fit(sig) / E2
        notes.append(f"lambda_min rate/E^2={r_lam:.3f} sigma_min rate/E={r_sig:.3f}")
        assert abs(r_lam - 1) <= 0.15 and abs(r_sig - 1) <= 0.15


def test_c03_table1():
    with criterion(3, 300) as notes:
        table = {40: 8.0, 80: 10.4, 120: 12.3, 160: 13.9, 200: 15.3}
        for N, ref in table.items():
            Kd = condition_bound("discrete", N, 2.0, epsilon=1e-14)
            Kc = condition_bound("continuous", N, 2.0, epsilon=2.5e-13)
            notes.append(f"N={N}: {Kd:.1f}/{Kc:.2e}")
            assert ref / 2 <= Kd <= ref * 2, (N, Kd)
            assert 1e6 <= Kc <= 1e7, (N, Kc)


def test_c04_table2():
    with criterion(4, 300) as notes:
        refs = {1.0: 2.4e4, 2.0: 25.0, 4.0: 12.0}
        for gamma, ref in refs.items():
            for N in (40, 120, 200):
                K = condition_bound("equispaced", N, 2.0, gamma, 1e-14)
                notes.append(f"g={gamma:g},N={N}: {K:.3g}")
                assert ref / 3 <= K <= ref * 3, (gamma, N, K)


def test_c05_accuracy_floors():
    with criterion(5, 180) as notes:
        Ns = range(2, 201, 2)
        disc = _curve("runge25", lambda N: ExtensionConfig(T=2.0, N=N, grid="discrete"), Ns, 1e-14)
        # the floor is the lowest error seen; it is reached once within a factor 10 of it
        floor = min(e for _, e in disc)
        hit = next(N for N, e in disc if e <= 10 * floor)
        after = [e for N, e in disc if N >= hit]
        notes.append(f"discrete floor {floor:.1e} reached at N={hit}, max after {max(after):.1e}")
        assert hit <= 120 and dict(disc)[hit] <= 1e-11
        assert max(after) <= 10 * floor

        cont = _curve("runge25", lambda N: ExtensionConfig(T=2.0, N=N), Ns, 1e-14)
        plateau = float(np.median([e for N, e in cont if N >= 100]))
        notes.append(f"continuous plateau {plateau:.1e}")
        assert 1e-9 <= plateau <= 1e-6


def test_c06_convergence_rates():
    with criterion(6, 60) as notes:
        N1 = int(breakpoints(2.0, 1e-14, Nmax=None).N1)
        config = lambda N: ExtensionConfig(T=2.0, N=N, grid="discrete")
        rho_expx = rate_fit(_curve("expx", config, range(2, N1 + 1), 1e-14))
        f = get_function("runge16")
        target = min(f.analyticity(2.0).rhoStar, fe_constant(2.0))
        rho_runge = rate_fit(_curve("runge16", config, range(2, N1 + 1), 1e-14))
        notes.append(f"window [2,{N1}] expx {rho_expx:.3f} vs {E2:.3f}; runge16 {rho_runge:.3f} vs {target:.3f}")
        assert abs(rho_expx / E2 - 1) <= 0.25
        assert abs(rho_runge / target - 1) <= 0.25


def test_c07_equispaced():
    with criterion(7, 600) as notes:
        f = get_function("runge100")
        exact = {N: sup_error(f, exact_extension(f, ExtensionConfig.equispaced(N, 2.0, 1.0), 120), 2001)
                 for N in (10, 40)}
        ratio = exact[40] / exact[10]
        notes.append(f"exact error(40)/error(10)={ratio:.2e}")
        assert ratio >= 100

        errs = _curve("runge100", lambda N: ExtensionConfig.equispaced(N, 2.0, 2.0), range(4, 201, 4), 1e-14)
        by100 = min(e for N, e in errs if N <= 100)
        floor = min(e for _, e in errs)
        first = next((N for N, e in errs if e <= 1e-8), None)
        notes.append(f"numerical min error up to N=100 {by100:.1e}, first <=1e-8 at N={first}")
        assert by100 <= 1e-8
        assert max(e for N, e in errs if N >= first) <= 10 * floor


def test_c08_spectrum():
    with criterion(8, 300) as notes:
        rep = spectrum_report(build_system(ExtensionConfig(T=2.0, N=200)), 0.1)
        tol = 6 * math.log(401)
        notes.append(f"above 0.9: {rep.nearOne}, below 0.1: {rep.nearZero}")
        assert abs(rep.nearOne - 401 / 2) <= tol and abs(rep.nearZero - 401 / 2) <= tol
        sym = spectrum_report(build_system(ExtensionConfig(T=2.0, N=20), PrecisionContext.extended(60)))
        notes.append(f"symmetry residual {sym.symmetryResidual:.1e}")
        assert sym.symmetryResidual <= 1e-8


def test_c09_frame_function_zeros():
    with criterion(9, 300) as notes:
        system = build_system(ExtensionConfig(T=2.0, N=20), PrecisionContext.extended(60))
        fact = svd(system)
        counts = {n: count_zeros(frame_function(fact, n, system.config), 20001, 40)
                  for n in (0, 5, 10, 20, 40)}
        notes.append(f"zero counts {counts}")
        assert all(c == n for n, c in counts.items())


def test_c10_noise():
    with criterion(10, 60) as notes:
        for delta in (1e-4, 1e-8, 1e-12):
            errs = {}
            for grid in ("discrete", "continuous"):
                spec = ExperimentSpec("noise", "expx", T=2.0, grid=grid, Nrange="30", noise=delta, seed=7)
                errs[grid] = run(spec)[0].metrics["supError"]
            notes.append(f"delta={delta:g}: {errs['discrete']:.1e}/{errs['continuous']:.1e}")
            assert errs["discrete"] <= 50 * delta + 1e-13
            assert errs["continuous"] <= 5e7 * delta + 1e-6


def test_c11_tsvd_bounds():
    with criterion(11, 600) as notes:
        worst = math.inf
        for name in ("runge25", "pole87", "expx", "absx7"):
            f = get_function(name)
            for N in (4, 8, 12, 16, 20):
                for eps in (1e-6, 1e-12):
                    r = tsvd_bound_slack(f, N, 2.0, eps, digits=60)
                    worst = min(worst, r["errorSlack"], r["coeffSlack"])
                    assert r["errorSlack"] >= -1e-10 and r["coeffSlack"] >= -1e-10, (name, N, eps, r)
        notes.append(f"40 cases, smallest slack {worst:.1e}")


def test_c12_stability_constants():
    with criterion(12, 900) as notes:
        eps = 1e-6
        N2 = breakpoints(2.0, eps, 2.0, Nmax=40, digits=60).N2
        reps = {N: stability_constants(N, 2 * N, 2.0, eps, 60) for N in range(1, 3 * N2 + 1)}
        for N in range(1, N2):
            assert reps[N].C1 == pytest.approx(reps[N].D, rel=1e-6), N
        c1 = [reps[N].C1 for N in range(N2, 3 * N2 + 1)]
        spread = max(c1) / min(c1)
        notes.append(f"N2={N2}, C1 spread over [N2,3N2] {spread:.2f}")
        assert spread < 5
        # soft check: reported, not asserted
        over = [N for N in range(N2, 3 * N2 + 1) if reps[N].C2 > 10 * eps * reps[N].C1]
        notes.append("C2 <= 10 eps C1 holds" if not over else f"C2 > 10 eps C1 at N={over}")
        if over:
            warnings.warn(f"C2 exceeds 10*eps*C1 at N={over}")


def test_c13_property_suite():
    with criterion(13, 120) as notes:
        tests = Path(__file__).parent
        files = [str(tests / name) for name in ("test_core.py", "test_systems.py", "test_solver.py",
                                                "test_analysis.py", "test_experiments_cli.py")]
        proc = subprocess.run([sys.executable, "-m", "pytest", *files, "--double-only", "-m", "not slow",
                               "-q", "-p", "no:cacheprovider"], capture_output=True, text=True)
        summary = proc.stdout.strip().splitlines()[-1]
        notes.append(summary)
        assert proc.returncode == 0, proc.stdout[-2000:]
