import json
import math
import pathlib

import pytest

import kamtorus as kt

GOLDEN = (1 + math.sqrt(5)) / 2
CONFIGS = pathlib.Path(__file__).resolve().parents[2] / "configs"


def golden_f0(kbox, eps):
    f = kt.FourierField(2, 2, kbox)
    f.add_sin(0, [1, 1], eps)
    f.add_cos(1, [1, 0], eps)
    return f


def test_field_roundtrip_and_norm():
    f = kt.FourierField(2, 1, 3)
    f.add_cos(0, [1, 2], 0.5)
    assert f.coeff(0, [1, 2]) == pytest.approx(0.25)
    assert f.coeff(0, [-1, -2]) == pytest.approx(0.25)
    # <k> = 3, two modes of modulus 1/4
    assert kt.sobolev_norm(f, 1) == pytest.approx(3 * math.sqrt(2) / 4)
    g = kt.FourierField.from_json(f.to_json())
    assert kt.sobolev_norm(g - f, 0) == 0.0
    assert f.evaluate([[0.0, 0.0]])[0][0] == pytest.approx(0.5)


def test_homological_equation_closed_form():
    f = kt.FourierField(2, 1, 4)
    f.add_cos(0, [1, 1], 1.0)
    g = kt.solve_homological(f, [1.0, GOLDEN], 4, 1e-2, 4)
    # g = i f_k / (alpha . k): cos -> sin / (1 + golden) up to sign
    val = g.evaluate([[0.3, 0.2]])[0][0]
    assert abs(val) == pytest.approx(abs(math.sin(0.5)) / (1 + GOLDEN))


def test_golden_pair_straightens():
    c = kt.SchemeConstants.defaults(2)
    f0 = golden_f0(c.kbox, 1e-3)
    r = kt.kam_iterate([1.0, GOLDEN], f0, c)
    assert r.converged
    assert r.iterations <= 8
    assert r.steps[-1]["delta_s0"] < 1e-11
    assert kt.conjugacy_residual([1.0, GOLDEN], f0, r.beta, r.alpha_inf) < 1e-8
    rot = kt.rotation_vector([1.0, GOLDEN], f0, [0.3, 1.7], T=2000.0)
    assert max(abs(a - b) for a, b in zip(rot, r.alpha_inf)) < 1e-5
    assert kt.conjugacy_flow_check(r, [1.0, GOLDEN], f0, [0.3, 1.7], T=50.0) < 1e-6


def test_resonant_frequency_is_excluded():
    c = kt.SchemeConstants.defaults(2)
    r = kt.kam_iterate([1.0, 2.0], golden_f0(c.kbox, 1e-3), c)
    assert not r.converged
    assert r.resonance is not None


def test_bad_constants_are_rejected():
    c = kt.SchemeConstants.defaults(2)
    c.mu = 28
    with pytest.raises(kt.Error, match="mu"):
        c.validate()


def test_transport_and_forced_equation():
    c = kt.SchemeConstants.defaults(2)
    a0 = kt.FourierField(2, 1, 4)
    op = kt.TransportOperator([1.0], [1.0], a0)
    red = kt.reduce(op, c)
    assert not red.excluded
    assert red.m_inf == [1.0]
    f = kt.FourierField(2, 1, 2)
    f.add_cos(0, [1, 1], 1.0)
    sol = kt.forced_solve(op, f, red, c)
    assert sol["c"] == 0.0
    assert sol["residual"] < 1e-12
    assert sol["b"].evaluate([[0.4, 0.1]])[0][0] == pytest.approx(-0.5 * math.sin(0.5))
    bad = kt.FourierField(2, 1, 2)
    bad.add_cos(0, [1, -1], 1.0)
    with pytest.raises(kt.SmallDivisorError):
        kt.forced_solve(op, bad, red, c)


def test_cli_runner(tmp_path):
    cfg = json.loads((CONFIGS / "zero2d.json").read_text())
    code, log = kt.run("straighten", cfg, out=str(tmp_path))
    assert code == 0
    run = json.loads((tmp_path / "run.json").read_text())
    assert run["status"] == "converged"
    assert run["iterations"] == 0
    code, _ = kt.run("straighten", json.loads((CONFIGS / "bad_mu.json").read_text()), out=str(tmp_path / "b"))
    assert code == 1
