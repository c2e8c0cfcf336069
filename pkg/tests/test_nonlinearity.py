import numpy as np
import pytest

import oracles
from nlrd import (
    PreconditionError,
    bistable_from_callables,
    extend,
    make_bistable,
    stiffness,
)


def test_reference_cubic_constants(ref_f):
    st = stiffness(ref_f)
    # critical point of f' at s = (1+theta)/3 = 13/30
    assert abs(st.maxfp - 79 / 300) < 1e-15
    assert abs(float(ref_f.fprime(13 / 30)) - 79 / 300) < 1e-12
    assert float(ref_f.fprime(0.0)) == pytest.approx(-0.3, abs=1e-15)
    assert float(ref_f.fprime(1.0)) == pytest.approx(-0.7, abs=1e-15)
    assert st.maxfp < 0.5  # flat enough for the measurable-solution pathway
    # integral against an independent Simpson oracle
    quad = oracles.simpson(ref_f.f, 0.0, 1.0)
    assert abs(st.intF - 1 / 30) < 1e-15
    assert abs(quad - 1 / 30) < 1e-12


def test_scan_oracle_agrees_with_closed_form_maxfp(ref_f):
    s = np.linspace(0, 1, 200001)
    scan = float(np.max(ref_f.fprime(s)))
    assert abs(scan - 79 / 300) < 1e-9


def test_theta_above_half_rejected_by_integral_clause():
    with pytest.raises(PreconditionError, match="int_0\\^1 f"):
        make_bistable(0.6, 1.0)


def test_bad_amplitude_and_theta():
    with pytest.raises(PreconditionError):
        make_bistable(0.3, -1.0)
    with pytest.raises(PreconditionError):
        make_bistable(1.2, 1.0)


def test_fprime_below_one_clause():
    # amplitude pushing max f' to 1 violates the slope bound
    with pytest.raises(PreconditionError, match="f' < 1"):
        make_bistable(0.3, 3.0 / 0.79 + 0.01)


def test_stiffness_gamma_is_exact_complement(ref_f):
    st = stiffness(ref_f)
    assert st.gamma == 1.0 - st.maxfp
    assert abs(st.gamma - 221 / 300) < 1e-15


def test_stiffness_scaled_amplitude():
    theta = 0.3
    a = 0.49 * 3.0 / (1.0 - theta + theta * theta)
    st = stiffness(make_bistable(theta, a))
    assert abs(st.maxfp - 0.49) < 1e-15
    assert abs(st.gamma - 0.51) < 1e-15


def test_antiderivative_at_one(ref_f):
    assert abs(float(ref_f.antiderivative(1.0)) - 1 / 30) < 1e-15
    quad = oracles.simpson(ref_f.f, 0.0, 1.0)
    assert abs(float(ref_f.antiderivative(1.0)) - quad) < 1e-12


@pytest.mark.parametrize("mode", ["odd", "linear-tails", "zero-left"])
def test_extension_is_identity_on_unit_interval(ref_f, mode):
    ext = extend(ref_f, mode)
    s = np.linspace(0.0, 1.0, 1001)
    assert float(np.max(np.abs(ext.f(s) - ref_f.f(s)))) == 0.0


def test_extension_tails(ref_f):
    odd = extend(ref_f, "odd")
    # -f(0.2) = -(0.2 * (-0.1) * 0.8) = 0.016
    assert float(odd.f(-0.2)) == pytest.approx(0.016, abs=1e-15)
    zl = extend(ref_f, "zero-left")
    assert float(zl.f(-5.0)) == 0.0
    for mode in ("odd", "linear-tails", "zero-left"):
        ext = extend(ref_f, mode)
        assert float(ext.f(1.5)) == pytest.approx(float(ref_f.fprime(1.0)) * 0.5, abs=1e-14)
    lt = extend(ref_f, "linear-tails")
    assert float(lt.f(-0.5)) == pytest.approx(float(ref_f.fprime(0.0)) * -0.5, abs=1e-15)


def test_odd_extension_odd_symmetry(ref_f):
    odd = extend(ref_f, "odd")
    s = np.linspace(0.0, 1.0, 157)
    assert np.max(np.abs(odd.f(-s) + odd.f(s))) == 0.0


def test_odd_extension_even_antiderivative(ref_f):
    odd = extend(ref_f, "odd")
    t = np.linspace(-2.0, 2.0, 401)
    assert np.max(np.abs(odd.antiderivative(t) - odd.antiderivative(np.abs(t)))) == 0.0


def test_g_strictly_increasing(ref_f):
    s = np.linspace(0.0, 1.0 - 1e-3, 1000)
    delta = 1e-3
    g0 = s - ref_f.f(s)
    g1 = (s + delta) - ref_f.f(s + delta)
    assert np.all(g1 > g0)


def test_generic_callable_validation():
    f = make_bistable(0.3, 1.0)
    ok = bistable_from_callables(lambda s: f.f(s), lambda s: f.fprime(s), 0.3)
    assert abs(ok.int_f - 1 / 30) < 1e-9
    with pytest.raises(PreconditionError):
        bistable_from_callables(lambda s: np.abs(f.f(s)), lambda s: f.fprime(s), 0.3)
