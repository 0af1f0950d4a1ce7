"""Acceptance criteria 1-14, run against ``compcos verify --suite all --seed 42``.

The full verification run executes twice (about four minutes each); the
second run only feeds the determinism criterion.  Each test prints one
``AC<n> PASS|FAIL`` line; run with ``-s`` or ``-v`` to see them inline.
"""

import json
import re

import numpy as np
import pytest

from compcos.cli import main
from compcos.config import default_config, suite_samples
from compcos.report import report_schema
from compcos.special import injectivity_classify

import jsonschema

TIMING_KEYS = ("runtime_ms", "suite_runtime_ms", "section_runtime_ms")


def _verify(path):
    code = main(["verify", "--suite", "all", "--seed", "42", "--out", str(path)])
    with open(path, encoding="utf-8") as fh:
        return code, json.load(fh)


@pytest.fixture(scope="module")
def runs(tmp_path_factory):
    d = tmp_path_factory.mktemp("acceptance")
    first = _verify(d / "run1.json")
    second = _verify(d / "run2.json")
    return first, second


@pytest.fixture(scope="module")
def report(runs):
    (code, rep), _ = runs
    jsonschema.validate(rep, report_schema())
    return rep


def cases(rep, pattern):
    rx = re.compile(pattern)
    return [c for c in rep["cases"] if rx.search(c["name"])]


def ms(rep, key):
    meta = rep["meta"]
    return meta["section_runtime_ms"].get(key, meta["suite_runtime_ms"].get(key))


def verdict(capsys, label, checks):
    """Print one line per criterion, then assert every named check."""
    failed = [name for name, ok in checks if not ok]
    line = f"AC{label} {'PASS' if not failed else 'FAIL'}"
    if failed:
        line += "  (" + "; ".join(failed) + ")"
    with capsys.disabled():
        print("\n" + line)
    assert not failed, line


def all_pass(cs, expected_count=None):
    ok = bool(cs) and all(c["pass"] and c["residual"] <= c["tolerance"] for c in cs)
    if expected_count is not None:
        ok = ok and len(cs) == expected_count
    return ok


def mc_samples(suite):
    return suite_samples(default_config(), suite)


def test_ac01_cone_algebra(report, capsys):
    cs = cases(report, r"^cone:")
    names = {c["name"] for c in cs}
    identities = ("multiplicativity", "shift", "triangular", "reversal", "inverse_reversal")
    verdict(capsys, "01 cone algebra", [
        ("every identity at m=1..4", all(f"cone:{i}:m={m}" in names for i in identities for m in range(1, 5))),
        ("max relative error <= 1e-10", all_pass(cs) and all(c["tolerance"] <= 1e-10 for c in cs)),
        ("runtime < 5 s", ms(report, "cone") < 5_000),
    ])


def test_ac02_gamma_layer(report, capsys):
    siegel = cases(report, r"^gamma:cone_vs_siegel$")
    dual = cases(report, r"^gamma:stiefel_volume_dual$")
    laplace = cases(report, r"^gamma:laplace:")
    verdict(capsys, "02 gamma layer", [
        ("cone gamma = Siegel gamma to 1e-12", all_pass(siegel, 1) and siegel[0]["tolerance"] <= 1e-12),
        ("volume dual formulas to 1e-12", all_pass(dual, 1) and dual[0]["tolerance"] <= 1e-12),
        ("Laplace identity on 5 s to 1e-6", all_pass(laplace, 5)
         and all(c["residual"] <= 1e-6 * np.hypot(*c["rhs"]) for c in laplace)),
        ("runtime < 30 s", ms(report, "gamma") < 30_000),
    ])


def test_ac03_measure_layer(report, capsys):
    cs = cases(report, r"^measure:(polar|triangular)_vs_direct$")
    verdict(capsys, "03 measure layer", [
        ("both Jacobian checks within 3 combined stderr", all_pass(cs, 2)),
        ("10^6 samples", mc_samples("measure") >= 1_000_000),
        ("runtime < 2 min", ms(report, "measure") < 120_000),
    ])


def test_ac04_average_identity(report, capsys):
    want = ["n=4:m=2:lam=(1.0, 1.0)", "n=4:m=2:lam=(2.0, 0.5)", "n=4:m=2:lam=(0.5, -0.5)", "n=5:m=2:lam=(1.0, 1.0)"]
    cs = [c for c in report["cases"] if c["name"] in {f"average:{w}" for w in want}]
    verdict(capsys, "04 average identity", [
        ("four points within 3 stderr", all_pass(cs, 4)),
        ("10^6 samples", mc_samples("average") >= 1_000_000),
        ("runtime < 2 min", ms(report, "average") < 120_000),
    ])


def test_ac05_rank_one_funk_hecke(report, capsys):
    quotients = cases(report, r"^eigen:n=3:m=1:k=2:lam=")
    consts = cases(report, r"^eigen:rank_one_constant:")
    null = cases(report, r"^eigen:rank_one_null_")
    lams = {re.search(r"lam=([^:]+)", c["name"]).group(1) for c in quotients}
    verdict(capsys, "05 rank-one Funk-Hecke", [
        ("lambda in {0.5, 1, 3}", lams == {"0.5", "1", "3"}),
        ("T^lam P_2 = c mu_2 P_2 within 3 stderr", all_pass(quotients)),
        ("target equals the classical multiplier", all_pass(consts, 3)),
        ("mu_2(0) = 0 and the transform vanishes", all_pass(null, 2)),
        ("runtime < 1 min", ms(report, "eigen:rank_one") < 60_000),
    ])


def test_ac06_composite_multiplier(report, capsys):
    checks = []
    for n in (4, 5):
        for lam in ("(1.0, 1.0)", "(1.5, 0.5)"):
            prefix = re.escape(f"eigen:n={n}:m=2:k=2:lam={lam}:")
            frames = cases(report, prefix + r"frame\d$")
            disp = cases(report, prefix + r"dispersion$")
            checks.append((f"({n},2,2) lam={lam}: 5 frames within 3 stderr", all_pass(frames, 5)))
            checks.append((f"({n},2,2) lam={lam}: dispersion <= 3", all_pass(disp, 1) and disp[0]["tolerance"] <= 3))
    checks.append(("runtime < 5 min", ms(report, "eigen:composite") < 300_000))
    verdict(capsys, "06 composite multiplier", checks)


def test_ac07_annihilation(report, capsys):
    checks = []
    for k, lam in ((2, "(1.0, 0.0)"), (4, "(1.0, 1.0)")):
        prefix = re.escape(f"annihilate:n=4:m=2:k={k}:lam={lam}:")
        checks.append((f"k={k} lam={lam}: zero tag", all_pass(cases(report, prefix + "mu_zero$"), 1)))
        frames = cases(report, prefix + r"frame\d$")
        checks.append((f"k={k} lam={lam}: |T P| <= 3 stderr at 5 frames",
                       all_pass(frames, 5) and all(c["rhs"] == [0.0, 0.0] for c in frames)))
    checks.append(("runtime < 5 min", ms(report, "annihilate") < 300_000))
    verdict(capsys, "07 annihilation", checks)


def test_ac08_functional_equation(report, capsys):
    one = cases(report, r"^functional:n=4:m=2:f=one:")
    quad = cases(report, r"^functional:n=4:m=2:f=quadratic:functional_equation$")
    names = {c["name"].rsplit(":", 1)[1] for c in one}
    verdict(capsys, "08 functional equation", [
        ("f=1: LHS, RHS and both closed forms present",
         names >= {"functional_equation", "functional_lhs_vs_closed", "functional_rhs_vs_closed"}),
        ("f=1: all comparisons within tolerance", all_pass(one)),
        ("f=even invariant polynomial: LHS = RHS within 3 stderr", all_pass(quad, 1)),
        ("10^6 samples", mc_samples("functional") >= 1_000_000),
        ("runtime < 5 min", ms(report, "functional") < 300_000),
    ])


def test_ac09_power_fourier(report, capsys):
    closed = cases(report, r"^zeta:n=3:m=1:power_fourier_closed_forms$")
    mc = cases(report, r"^zeta:n=4:m=2:power_fourier$")
    verdict(capsys, "09 power Fourier strip identity", [
        ("(3,1,-2) closed forms to 1e-8", all_pass(closed, 1)
         and closed[0]["tolerance"] <= 1e-8 * max(np.hypot(*closed[0]["lhs"]), np.hypot(*closed[0]["rhs"]))),
        ("(4,2,(-2.5,-1.5)) within 3 combined stderr", all_pass(mc, 1)),
        ("runtime < 3 min", ms(report, "zeta") < 180_000),
    ])


def test_ac10_hecke(report, capsys):
    checks = [(f"k={k}: three random y within 3 stderr", all_pass(cases(report, rf"^hecke:k={k}:y\d$"), 3)) for k in (1, 2)]
    checks += [("10^6 samples", mc_samples("hecke") >= 1_000_000), ("runtime < 3 min", ms(report, "hecke") < 180_000)]
    verdict(capsys, "10 Hecke identity", checks)


def test_ac11_projection_slice(report, capsys):
    checks = []
    for n in (5, 4):
        cs = cases(report, rf"^radon:slice:n={n}:k=3:m=2:\d+$")
        checks.append((f"(n,k,m)=({n},3,2): 10 residuals <= 1e-8", len(cs) == 10 and all(c["residual"] <= 1e-8 for c in cs)))
    checks.append(("runtime < 10 s", ms(report, "radon") < 10_000))
    verdict(capsys, "11 projection slice", checks)


def test_ac12_perp_duality(report, capsys):
    verdict(capsys, "12 perp duality", [
        ("(4,1) vs (4,3) within 3 combined stderr", all_pass(cases(report, r"^perp:n=4:m=1:vs:m=3$"), 1)),
        ("(5,2) vs (5,3) within 3 combined stderr", all_pass(cases(report, r"^perp:n=5:m=2:vs:m=3$"), 1)),
        ("runtime < 3 min", ms(report, "perp") < 180_000),
    ])


def test_ac13_classifier_table(report, capsys):
    cs = cases(report, r"^gamma:classify:")
    # independent restatement of the rank dichotomy for constant indices
    expected = {}
    for n, m in ((3, 1), (4, 2), (5, 2), (4, 1)):
        rank = min(m, n - m)
        for lam in (0.0, 0.5, 1.0, 2.0, 3.0):
            bad = lam.is_integer() and (lam % 2 == 0 if rank == 1 else True)
            expected[(n, m, lam)] = not bad
    direct = all(injectivity_classify(np.full(m, lam), n).injective is want for (n, m, lam), want in expected.items())
    verdict(capsys, "13 classifier table", [
        ("20 grid points in the report", all_pass(cs, 20)),
        ("direct verdicts match the rank rules", direct),
        ("runtime < 1 s", ms(report, "gamma:classifier") < 1_000),
    ])


def _numeric(rep):
    meta = {k: v for k, v in rep["meta"].items() if k not in TIMING_KEYS}
    return {"suite": rep["suite"], "cases": rep["cases"], "meta": meta}


def test_ac14_determinism(runs, capsys):
    (code1, rep1), (code2, rep2) = runs
    verdict(capsys, "14 determinism", [
        ("same exit code", code1 == code2),
        ("identical numeric fields", _numeric(rep1) == _numeric(rep2)),
    ])
