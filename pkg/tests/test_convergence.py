"""Convolution engine, tail certificates, and the convergence drivers."""

import math
import os
import subprocess
import sys

import numpy as np
import pytest

from fpl import _fast
from fpl import convergence as cv
from fpl import distinguished as dist
from fpl import kernels as ker
from fpl import space as sp
from fpl import spectral as spec
from fpl.numerics import DomainError


# ----------------------------------------------------------------------
# datums and config parsing
# ----------------------------------------------------------------------
@pytest.mark.parametrize("text", [
    "radial_bump:center=2,width=0.5",
    "radial_gaussian:width=1.5",
    "dirac_translate:s=1",
])
def test_datum_roundtrip(text):
    d = cv.parse_datum(text)
    assert cv.parse_datum(d.to_string()) == d


def test_datum_profiles():
    bump = cv.Datum("radial_bump", {"center": 2.0, "width": 0.5})
    assert bump.profile(np.array([2.0]))[0] == pytest.approx(1.0)
    assert bump.profile(np.array([1.5, 2.5])).max() == 0.0
    assert bump.r_support == 2.5
    gauss = cv.Datum("radial_gaussian", {"width": 2.0})
    assert gauss.profile(np.array([0.0]))[0] == 1.0
    assert gauss.profile(np.array([2.0]))[0] == pytest.approx(math.exp(-0.5))
    dirac = cv.Datum("dirac_translate", {"s": 1.0})
    assert dirac.is_dirac and dirac.r_support == 1.0
    with pytest.raises(DomainError):
        dirac.profile(np.array([1.0]))


@pytest.mark.parametrize("kind,params", [
    ("radial_bump", {"center": 2.0, "width": 0.0}),
    ("radial_gaussian", {"width": -1.0}),
    ("dirac_translate", {"s": 0.0}),
    ("plane_wave", {"k": 1.0}),
])
def test_datum_validation(kind, params):
    with pytest.raises(DomainError):
        cv.Datum(kind, params)


def test_parse_datum_bad_parameter():
    with pytest.raises(ValueError, match="bad datum parameter"):
        cv.parse_datum("radial_bump:center2,width=1")


def test_config_roundtrip():
    espec = cv.ExperimentSpec(
        space="H3", side="s", sigma=0.5, t_grid=(4.0, 8.0),
        datum=cv.Datum("radial_bump", {"center": 1.0, "width": 0.5}),
        norms=("l1", "linf"), out="rows.csv")
    back = cv.parse_config(espec.to_text())
    assert back == espec


@pytest.mark.parametrize("mangle,msg", [
    (lambda s: s.replace("side = s", "side = y"), "side"),
    (lambda s: s.replace("t_grid = 4,8", "t_grid = 0.5,8"), "> 1"),
    (lambda s: s.replace("norms = l1", "norms = l2"), "unknown norms"),
    (lambda s: s + "extra = 1\n", "unknown keys"),
    (lambda s: s + "side = x\n", "duplicate"),
    (lambda s: s.replace("sigma = 0.5\n", ""), "missing"),
    (lambda s: s.replace("side = s", "side"), "bad config line"),
])
def test_config_validation(mangle, msg):
    base = ("space = H3\nside = s\nsigma = 0.5\nt_grid = 4,8\n"
            "datum = radial_bump:center=1,width=0.5\nnorms = l1\n")
    with pytest.raises(ValueError, match=msg):
        cv.parse_config(mangle(base))


def test_config_norm_datum_pairing():
    dirac = cv.Datum("dirac_translate", {"s": 1.0})
    bump = cv.Datum("radial_bump", {"center": 1.0, "width": 0.5})
    with pytest.raises(ValueError, match="dirac_translate datum"):
        cv.ExperimentSpec("H3", "x", 0.5, (4.0,), bump, ("dirac",))
    with pytest.raises(ValueError, match="only the"):
        cv.ExperimentSpec("H3", "x", 0.5, (4.0,), dirac, ("l1", "dirac"))
    with pytest.raises(ValueError, match="ambient-side"):
        cv.ExperimentSpec("H3", "s", 0.5, (4.0,), dirac, ("dirac",))


# ----------------------------------------------------------------------
# sphere rule and the Busemann average identity
# ----------------------------------------------------------------------
def test_theta_rule_normalised(h3):
    _, log_w = cv.theta_rule(h3, 64)
    assert np.exp(log_w).sum() == pytest.approx(1.0, abs=1e-14)


def test_theta_average_reproduces_phi0(h3, h2):
    """Avg_theta e^{-rho B} over the sphere rule equals phi_0."""
    for desc, tol in ((h3, 1e-12), (h2, 1e-7)):
        cos_th, log_w = cv.theta_rule(desc, 256)
        w = np.exp(log_w)
        for r in (1.0, 2.5):
            bus = np.array([dist.busemann_log(r, th)
                            for th in np.arccos(cos_th)])
            avg = float(np.dot(w, np.exp(-desc.rho_norm * bus)))
            want = math.exp(float(spec.phi0_log(desc, r)))
            assert avg == pytest.approx(want, rel=tol)


# ----------------------------------------------------------------------
# kernel tables
# ----------------------------------------------------------------------
def test_table_matches_ambient_kernel(h3):
    t, sg = 5.0, 0.5
    table = cv.build_kernel_table(h3, t, sg, 0, 250.0)
    for r in (0.0, 0.31, 1.7, 8.3, 40.1, 190.7):
        want = ker.q_kernel(h3, t, sg, r).log_mag
        assert float(table.log_eval(r)) == pytest.approx(want, abs=2e-7)


def test_table_matches_group_kernel(h3):
    t, sg = 5.0, 0.25
    table = cv.build_kernel_table(h3, t, sg, 1, 250.0)
    for r in (0.0, 0.31, 1.7, 8.3, 40.1, 190.7):
        want = dist.q0_kernel(h3, t, sg, r).log_mag
        assert float(table.log_eval(r)) == pytest.approx(want, abs=2e-7)


def test_table_guards(h3):
    table = cv.build_kernel_table(h3, 2.0, 0.5, 0, 30.0)
    with pytest.raises(DomainError, match="beyond"):
        table.log_eval(np.array([table.r_max * 1.2]))
    with pytest.raises(DomainError, match="mode"):
        cv.build_kernel_table(h3, 2.0, 0.5, 7, 30.0)
    with pytest.raises(DomainError, match="no table route"):
        cv.build_kernel_table(sp.preset("H4"), 2.0, 0.5, 0, 30.0)


# ----------------------------------------------------------------------
# analytic tail masses
# ----------------------------------------------------------------------
def test_radial_tail_mass_bounds_exact_tail(h3):
    t, sg = 4.0, 0.5
    assert cv.radial_tail_mass(h3, t, sg, 5.0) == 1.0
    vals = [cv.radial_tail_mass(h3, t, sg, R) for R in (20.0, 40.0, 200.0)]
    assert vals[0] > vals[1] > vals[2] > 0.0
    above = ker.critical_region_mass(h3, t, sg, 0.5)["above"]
    bound = cv.radial_tail_mass(h3, t, sg, t ** 2.5)
    assert above <= bound <= 1.0


def test_group_tail_mass_matches_beta_split(h3):
    t, sg, eps = 12.0, 0.5, 0.5
    split = dist.qtilde_critical_mass(h3, t, sg, eps)
    got = cv.group_tail_mass(h3, t, sg, t ** (1.0 + eps))
    assert got == pytest.approx(split["above"], rel=1e-12)
    with pytest.raises(DomainError):
        cv.group_tail_mass(sp.preset("H4"), t, sg, 4.0)


# ----------------------------------------------------------------------
# convolution cores: dual-route check and backend equality
# ----------------------------------------------------------------------
def test_conv_agrees_with_multiplier_route(h3):
    """Polar-coordinates convolution vs transform-multiply-invert."""
    datum = cv.Datum("radial_gaussian", {"width": 1.0})
    rs = np.array([0.6, 2.3, 6.0])
    for side, mode in (("x", 0), ("s", 1)):
        table = cv.build_kernel_table(h3, 2.0, 0.5, mode, 50.0)
        conv = cv.conv_profile_log(h3, table, datum, rs)
        mult = cv.multiplier_profile_log(h3, 2.0, 0.5, datum, side, rs)
        # the spectral route loses accuracy in the e^{-rho r} far field;
        # the short radii probe the engine itself
        assert np.max(np.abs(conv - mult)[:2]) < 1e-7
        assert abs(conv[2] - mult[2]) < 2e-4


def test_numba_and_numpy_cores_agree(h3):
    datum = cv.Datum("radial_gaussian", {"width": 1.0})
    table = cv.build_kernel_table(h3, 2.0, 0.5, 0, 50.0)
    rs = np.array([0.0, 0.6, 2.3, 6.0, 11.0])
    s_vals, log_pref = cv._datum_s_quadrature(h3, datum)
    cos_th, log_w = cv.theta_rule(h3, 128)
    args = (table.x0, table.dx_inv, table.reduced,
            table.rho, table.ce, table.t2, table.mode)
    a = _fast.conv_core(rs, s_vals, log_pref, cos_th, log_w, *args)
    b = _fast._conv_core_py(rs, s_vals, log_pref, cos_th, log_w, *args)
    assert np.max(np.abs(a - b)) < 1e-12
    c = _fast.dirac_diff_core(rs[1:], 1.0, cos_th, log_w, *args)
    d = _fast._dirac_diff_core_py(rs[1:], 1.0, cos_th, log_w, *args)
    assert np.max(np.abs(c - d)) < 1e-12


def test_env_flag_selects_numpy_backend(h3):
    """FPL_DISABLE_NUMBA=1 must flip the backend and preserve values."""
    datum = cv.Datum("radial_gaussian", {"width": 1.0})
    table = cv.build_kernel_table(h3, 3.0, 0.5, 0, 50.0)
    rs = np.array([0.5, 2.0, 7.5])
    here = cv.conv_profile_log(h3, table, datum, rs)
    code = (
        "import numpy as np\n"
        "from fpl import _fast, convergence as cv, spectral as spec\n"
        "from fpl import space as sp\n"
        "assert _fast.backend_name() == 'numpy', _fast.backend_name()\n"
        "h3 = spec.calibrate(sp.preset('H3'))\n"
        "datum = cv.Datum('radial_gaussian', {'width': 1.0})\n"
        "table = cv.build_kernel_table(h3, 3.0, 0.5, 0, 50.0)\n"
        "out = cv.conv_profile_log(h3, table, datum, "
        "np.array([0.5, 2.0, 7.5]))\n"
        "print(','.join(f'{float(v)!r}' for v in out))\n"
    )
    env = dict(os.environ, FPL_DISABLE_NUMBA="1")
    proc = subprocess.run([sys.executable, "-c", code], env=env,
                          capture_output=True, text=True, timeout=300)
    assert proc.returncode == 0, proc.stderr
    other = np.array([float(v) for v in proc.stdout.strip().split(",")])
    assert np.max(np.abs(here - other)) < 1e-12


# ----------------------------------------------------------------------
# distances and their certificates
# ----------------------------------------------------------------------
def test_l1_distance_group_side(h3):
    datum = cv.Datum("radial_bump", {"center": 1.0, "width": 0.5})
    res = cv.l1_distance(h3, 4.0, 0.5, datum, side="s")
    ref_mass = dist.mass_functional_s(h3, datum.profile,
                                      r_support=datum.r_support)
    assert res["mass"] == pytest.approx(ref_mass, rel=1e-9)
    assert res["value"] > 0.0
    assert res["noise_bound"] < 0.2 * res["value"]
    assert res["tail_bound"] < 0.05 * res["value"]


def test_l1_distance_ambient_side_decreases(h3):
    datum = cv.Datum("radial_bump", {"center": 1.0, "width": 0.5})
    ref_mass = dist.mass_functional_x(h3, datum.profile,
                                      r_support=datum.r_support)
    vals = []
    for t in (4.0, 8.0):
        res = cv.l1_distance(h3, t, 0.5, datum, side="x")
        assert res["mass"] == pytest.approx(ref_mass, rel=1e-9)
        vals.append(res["value"] / res["mass"])
    assert vals[1] < vals[0]


def test_linf_group_distance_fields(h3):
    datum = cv.Datum("radial_bump", {"center": 1.0, "width": 0.5})
    res = cv.linf_group_distance(h3, 6.0, 0.5, datum)
    assert res["scaled"] == pytest.approx(36.0 * res["value"], rel=1e-12)
    assert res["r_at"] > 0.0


def test_boundary_functional_golden(golden, h3):
    tv, mean = cv.boundary_functional(h3, 1.0, n_theta=4096)
    assert mean == pytest.approx(1.0, abs=1e-12)
    assert tv == pytest.approx(golden["boundary_tv_h3_s1"], rel=1e-6)
    # the default rule carries the |density - 1| corner at ~2e-6
    tv_def, _ = cv.boundary_functional(h3, 1.0)
    assert tv_def == pytest.approx(golden["boundary_tv_h3_s1"], rel=1e-5)
    with pytest.raises(DomainError):
        cv.boundary_functional(h3, -1.0)


def test_dirac_distance_near_boundary_limit(golden, h3):
    res = cv.dirac_distance(h3, 6.0, 0.5, 1.0)
    tv = golden["boundary_tv_h3_s1"]
    assert abs(res["value"] / tv - 1.0) < 0.01
    assert res["value"] <= tv + res["tail_bound"] + res["noise_bound"]
    assert res["tail_bound"] < 5e-3
    with pytest.raises(DomainError):
        cv.dirac_distance(h3, 6.0, 0.5, -1.0)


# ----------------------------------------------------------------------
# counterexample series and the experiment driver
# ----------------------------------------------------------------------
def test_scaled_sup_series_flat(h3):
    rows = cv.scaled_sup_series(h3, 0.5, (5.0, 10.0, 20.0))
    scaled = [row["scaled_sup"] for row in rows]
    assert max(scaled) / min(scaled) < 1.5
    assert all(row["r_at"] > 0 for row in rows)


def test_delayed_diff_series_bounded_below(h3):
    rows = cv.delayed_diff_series(h3, (5.0, 10.0), sigma=0.5, delay=3.0)
    scaled = [row["scaled_diff"] for row in rows]
    assert min(scaled) > 0.03
    assert max(scaled) / min(scaled) < 10.0


def test_fit_decay_rate():
    ts = np.array([2.0, 4.0, 8.0, 16.0])
    assert cv.fit_decay_rate(ts, 3.0 * ts ** -1.7) == pytest.approx(
        -1.7, rel=1e-12)
    with pytest.raises(DomainError):
        cv.fit_decay_rate(ts, np.array([1.0, 0.0, 1.0, 1.0]))


def test_run_experiment_rows_and_csv(h3):
    espec = cv.ExperimentSpec(
        space="H3", side="s", sigma=0.5, t_grid=(4.0, 8.0),
        datum=cv.Datum("radial_bump", {"center": 1.0, "width": 0.5}),
        norms=("l1", "linf"))
    rows = cv.run_experiment(h3, espec)
    assert [(r["t"], r["norm"]) for r in rows] == [
        (4.0, "l1"), (4.0, "linf"), (8.0, "l1"), (8.0, "linf")]
    for row in rows:
        assert row["value"] > 0 and row["tail_bound"] >= 0
    text = cv.experiment_rows_to_csv(rows)
    lines = text.strip().split("\n")
    assert lines[0] == "t,sigma,norm,value,tail_bound,scaled"
    assert len(lines) == 5
    got = float(lines[2].split(",")[3])
    assert got == pytest.approx(rows[1]["value"], rel=1e-15)


def test_run_experiment_rejects_ambient_linf(h3):
    espec = cv.ExperimentSpec(
        space="H3", side="x", sigma=0.5, t_grid=(4.0,),
        datum=cv.Datum("radial_bump", {"center": 1.0, "width": 0.5}),
        norms=("linf",))
    with pytest.raises(DomainError, match="side = s"):
        cv.run_experiment(h3, espec)
