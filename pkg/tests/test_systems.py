import numpy as np
import pytest

from sympint import (ConfigError, eval_energy, get_system, is_scalar,
                     is_separable, list_systems, make_state,
                     numeric_gradients)
from sympint.verify import _fd_partial, _scalar_field

ALL_SYSTEMS = ["oscillator", "free-particle", "pendulum", "quartic",
               "driven-oscillator", "sine-kinetic", "ramp-kinetic",
               "henon-heiles", "coupled-oscillators"]


def test_registry_lists_all():
    assert list_systems() == sorted(ALL_SYSTEMS)


def test_unknown_system_message_lists_registry():
    with pytest.raises(ConfigError, match="oscillator"):
        get_system("does-not-exist")


def test_kind_predicates():
    assert is_scalar(get_system("pendulum"))
    assert is_separable(get_system("henon-heiles"))
    assert is_separable(get_system("pendulum"))
    assert not is_separable(get_system("sine-kinetic"))
    assert not is_scalar(get_system("henon-heiles"))


@pytest.mark.parametrize("name", ALL_SYSTEMS)
def test_analytic_gradients_match_finite_differences(name):
    sysd = get_system(name)
    rng = np.random.default_rng(hash(name) % 2 ** 32)
    for _ in range(5):
        s = make_state(rng.uniform(-1, 1, sysd.dim),
                       rng.uniform(-1, 1, sysd.dim), t=rng.uniform(0, 2))
        fq, fp = numeric_gradients(sysd, s)
        np.testing.assert_allclose(sysd.dHdq(s.q, s.p, s.t), fq,
                                   rtol=1e-6, atol=1e-7)
        np.testing.assert_allclose(sysd.dHdp(s.q, s.p, s.t), fp,
                                   rtol=1e-6, atol=1e-7)


@pytest.mark.parametrize("name", ["oscillator", "pendulum", "quartic",
                                  "driven-oscillator", "sine-kinetic",
                                  "ramp-kinetic"])
def test_derivative_tables_match_finite_differences(name):
    # every analytic table entry must agree with an FD probe of the field
    sysd = get_system(name)
    rng = np.random.default_rng(3)
    for _ in range(3):
        x, y, t = rng.uniform(-0.9, 0.9, 3)
        for key, fn in sysd.derivs.items():
            which, key_vars = key.split("_")
            want = _fd_partial(_scalar_field(sysd, which), key_vars, x, y, t)
            got = float(fn(x, y, t))
            assert got == pytest.approx(want, rel=1e-6, abs=1e-6), key


def test_energies_at_reference_points():
    assert eval_energy(get_system("pendulum"), make_state(0.0, 0.0)) == -1.0
    assert eval_energy(get_system("free-particle"),
                       make_state(3.0, 2.0)) == 2.0
    assert eval_energy(get_system("quartic"),
                       make_state(1.0, 0.0)) == pytest.approx(0.25)
    # H = 0.5 p^2 sin q
    assert eval_energy(get_system("sine-kinetic"),
                       make_state(np.pi / 2, 2.0)) == pytest.approx(2.0)
    # H = 0.5 q p^2
    assert eval_energy(get_system("ramp-kinetic"),
                       make_state(2.0, 3.0)) == pytest.approx(9.0)


def test_driven_oscillator_time_dependence():
    sysd = get_system("driven-oscillator")
    e0 = eval_energy(sysd, make_state(1.0, 0.0, t=0.0))
    e1 = eval_energy(sysd, make_state(1.0, 0.0, t=0.4))
    assert e0 != e1


def test_henon_heiles_energy():
    sysd = get_system("henon-heiles")
    s = make_state([0.1, -0.2], [0.3, 0.4])
    want = 0.5 * (0.3 ** 2 + 0.4 ** 2) + 0.5 * (0.1 ** 2 + 0.2 ** 2) \
        + 0.1 ** 2 * (-0.2) - (-0.2) ** 3 / 3.0
    assert eval_energy(sysd, s) == pytest.approx(want, abs=1e-15)


def test_coupled_oscillators_gradient():
    sysd = get_system("coupled-oscillators")
    s = make_state([0.5, -0.3], [0.0, 0.0])
    gq = sysd.dHdq(s.q, s.p, s.t)
    # dU/dq1 = q1 + kappa q2, dU/dq2 = q2 + kappa q1, kappa = 0.35
    np.testing.assert_allclose(gq, [0.5 + 0.35 * -0.3, -0.3 + 0.35 * 0.5],
                               atol=1e-15)
