"""Split-signature lane: admissibility, translated bracket, decision walk,
and the normal form for null-curvature-gradient metrics."""

import random

import pytest

from cubint.expr import (Box, DEFAULT_CFG, diff, eval_at, is_zero, nf_is_zero,
                         parse, simplify)
from cubint.geometry import (ChartMismatch, gauss_curvature, isothermal_metric,
                             null_metric)
from cubint.invariants import Codifferential, HolomorphicityViolated
from cubint.pseudo import (bracket_FH_null, decide_pseudo, normal_form_metric,
                           quasi_holo_check)
from cubint.tensorcoords import SymTensor3
from cubint.verify import MomentumPoly, canonical_bracket_FH

BOX = Box(-1.0, 1.0, -1.0, 1.0)


# ---------------------------------------------------------------- admissibility

def test_quasi_holo_constant_pair_passes():
    v1, v2 = quasi_holo_check(("1", "1"))
    assert v1.is_zero and v2.is_zero


def test_quasi_holo_respects_variable_split():
    # a1 may be any function of x, a2 any function of y
    v1, v2 = quasi_holo_check(("x^3", "y^2 - 2*y"))
    assert v1.is_zero and v2.is_zero


def test_quasi_holo_flags_wrong_variable_with_witness():
    v1, v2 = quasi_holo_check(("y", "1"))
    assert v1.is_nonzero
    assert v1.witness is not None
    assert v2.is_zero
    v1, v2 = quasi_holo_check(("x", "x"))
    assert v1.is_zero
    assert v2.is_nonzero


def test_quasi_holo_accepts_codifferential_object():
    c = Codifferential.null_pair("x^2", "0")
    v1, v2 = quasi_holo_check(c)
    assert v1.is_zero and v2.is_zero


def test_quasi_holo_rejects_wrong_chart_metric():
    with pytest.raises(ChartMismatch):
        quasi_holo_check(("1", "1"), isothermal_metric("1 + x^2"))


def test_quasi_holo_rejects_iso_codifferential():
    with pytest.raises(ChartMismatch):
        quasi_holo_check(Codifferential.isothermal("x^2"))


# ------------------------------------------------------------ translated bracket

def test_bracket_null_integral_of_x_only_metric():
    # lam depends on x only, so py^3 Poisson-commutes with H
    out = bracket_FH_null(("0", "0", "0", "1"), null_metric("1 + x^2"))
    assert len(out) == 5
    assert all(nf_is_zero(e) for e in out)


def test_bracket_null_H_times_linear_on_flat():
    # F = H * (px + 3 py) with H = 2 px py is conserved on the flat chart
    out = bracket_FH_null(("0", "2", "6", "0"), null_metric("1"))
    assert all(nf_is_zero(e) for e in out)


def test_bracket_null_generic_metric_obstructs_px_cubed():
    out = bracket_FH_null(("1", "0", "0", "0"), null_metric("1 + x^2 + y^2"))
    kinds = [is_zero(e, BOX, DEFAULT_CFG).kind for e in out]
    # only the px^3 py coefficient survives: it is 2 lam_x / lam^2 * lam ... etc.
    assert kinds == ["zero", "nonzero", "zero", "zero", "zero"]


def test_bracket_null_matches_canonical_route():
    rng = random.Random(20)
    for _ in range(3):
        lam = parse("%d + %d*x^2 + %d*x*y + %d*y^2"
                    % tuple(rng.randint(1, 4) for _ in range(4)))
        m = null_metric(simplify(lam))
        coeffs = tuple(parse("%d + %d*x + %d*y"
                             % tuple(rng.randint(-3, 3) for _ in range(3)))
                       for _ in range(4))
        f = MomentumPoly({(3, 0): coeffs[0], (2, 1): coeffs[1],
                          (1, 2): coeffs[2], (0, 3): coeffs[3]})
        got = bracket_FH_null(f, m)
        want = canonical_bracket_FH(m, f)
        for e, key in zip(got, ((4, 0), (3, 1), (2, 2), (1, 3), (0, 4))):
            w = want.coeffs.get(key, parse("0"))
            assert nf_is_zero(simplify(e - w))


def test_bracket_null_tensor_and_tuple_inputs_agree():
    m = null_metric("2 + x*y")
    t = SymTensor3((parse("x"), parse("0"), parse("0"), parse("y")))
    from_tensor = bracket_FH_null(t, m)
    from_tuple = bracket_FH_null(("x", "0", "0", "y"), m)
    for a, b in zip(from_tensor, from_tuple):
        assert nf_is_zero(simplify(a - b))


def test_bracket_null_rejects_noncubic():
    with pytest.raises(ValueError):
        bracket_FH_null(MomentumPoly({(1, 0): parse("1")}), null_metric("1"))


def test_bracket_null_rejects_wrong_chart():
    with pytest.raises(ChartMismatch):
        bracket_FH_null(("1", "0", "0", "0"), isothermal_metric("1"))


# ------------------------------------------------------------------ normal form

@pytest.mark.parametrize("profile, r_text", [
    ("x", "2"),
    ("x^2", "4*x"),
    ("0", "0"),
    ("x^3 - x", "6*x^2 - 2"),
])
def test_normal_form_curvature_reads_off_profile(profile, r_text):
    # lam = 1/(y + f)^2 has R = 2 df/dx
    m = normal_form_metric(profile)
    assert nf_is_zero(simplify(gauss_curvature(m) - parse(r_text)))


def test_normal_form_lambda_value():
    m = normal_form_metric("x^2")
    assert eval_at(m.lam, (0.5, 0.25)) == pytest.approx(4.0)


def test_normal_form_rejects_y_dependence():
    with pytest.raises(ValueError):
        normal_form_metric("y")
    with pytest.raises(ValueError):
        normal_form_metric("x + x*y^2")


@pytest.mark.parametrize("u_text", ["x*y", "x + y^2", "x^2*y - y"])
def test_exponential_lambda_curvature_identity(u_text):
    # for lam = e^u the null-chart curvature collapses to u_xy e^-u
    u = parse(u_text)
    m = null_metric(simplify(parse("exp(%s)" % u_text)))
    expect = simplify(diff(diff(u, "x"), "y") * parse("exp(-(%s))" % u_text))
    assert nf_is_zero(simplify(gauss_curvature(m) - expect))


# ---------------------------------------------------------------- decision walk

def test_decide_normal_form_hits_phi1_obstruction():
    m = normal_form_metric("x^2")
    assert nf_is_zero(simplify(gauss_curvature(m) - parse("4*x")))
    v = decide_pseudo(m, ("1", "1"))
    assert v.is_incompatible
    assert "Prop. 6.7" in v.failed
    assert v.reason == "Prop. qub-phi1"
    assert v.path() == ["Input g and A", "Is phi0 constant?", "Is phi1 == 0?"]


def test_decide_x_only_metric_compatible_with_certificate():
    # lam(x) dx dy is flat, and F = py^3 survives certification
    v = decide_pseudo(null_metric("1 + x^2"), ("0", "1"))
    assert v.status == "CompatibleConstCurvature"
    assert v.certificate is not None
    assert all(w.is_zero for w in v.certificate.values())
    assert v.f is not None
    assert nf_is_zero(simplify(v.f.c[3] - parse("1")))
    assert v.path()[-1] == "Certificate {F, H} == 0"


def test_decide_flat_chart_constant_pair():
    v = decide_pseudo(null_metric("1"), ("1", "1"))
    assert v.status == "CompatibleConstCurvature"
    assert v.note is not None
    assert v.certificate is not None


def test_decide_generic_metric_trivial_pair_takes_formula_branch():
    v = decide_pseudo(null_metric("1 + x^2 + y^2"), ("0", "0"))
    assert v.status == "CompatibleWithFormula"
    assert v.via == "Thm1.1"
    assert v.f.is_trivial()
    # the split-signature walk inserts the extra gradient-modulus box
    assert "Is phi1 == 0?" in v.path()


def test_decide_rejects_wrong_chart():
    with pytest.raises(ChartMismatch):
        decide_pseudo(isothermal_metric("1 + x^2"), ("1", "1"))


def test_decide_rejects_inadmissible_pair():
    with pytest.raises(HolomorphicityViolated):
        decide_pseudo(normal_form_metric("x"), ("y", "0"))


def test_decide_deterministic():
    m = normal_form_metric("x^2")
    a = decide_pseudo(m, ("1", "1"))
    b = decide_pseudo(m, ("1", "1"))
    assert a.status == b.status and a.failed == b.failed
    assert a.path() == b.path()
