import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from catbell.noise import (
    PRESETS,
    NoiseModel,
    dephase_fidelity,
    dephasing_factor,
    fiber_transmissivity,
    preset,
    storage_time,
    total_transmissivity,
)


def test_fiber_values():
    assert fiber_transmissivity(0) == 1.0
    assert fiber_transmissivity(50, 0.2) == pytest.approx(0.1, rel=1e-12)
    assert fiber_transmissivity(15, 0.2) == pytest.approx(0.5012, abs=1e-4)


def test_fiber_negative():
    with pytest.raises(ValueError):
        fiber_transmissivity(-1)


def test_total_ideal():
    assert total_transmissivity(NoiseModel(), 0, 0) == 1.0


def test_total_table1():
    assert total_transmissivity(PRESETS["table1"], 0, 0) == pytest.approx(0.81**2 * 0.8 * 0.05 * 0.97, rel=1e-12)
    assert total_transmissivity(PRESETS["table1"], 0, 0) == pytest.approx(0.02546, abs=1e-5)


def test_total_m1_costs_two_reflections():
    nm = PRESETS["table1"]
    assert total_transmissivity(nm, 7, 1) == pytest.approx(total_transmissivity(nm, 7, 0) * 0.81**2, rel=1e-12)


def test_default_reflections():
    assert NoiseModel().reflections(2) == (3, 2, 1)
    assert NoiseModel(alice_reflections=0, bob_syndrome_reflections=4).reflections(1) == (0, 4, 1)


@given(st.floats(0, 200), st.floats(0, 200))
def test_total_multiplicative(L1, L2):
    nm = PRESETS["table1"]
    base = total_transmissivity(nm, 0, 1)
    lhs = total_transmissivity(nm, L1 + L2, 1)
    rhs = base * fiber_transmissivity(L1) * fiber_transmissivity(L2)
    assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-300)


@given(st.floats(0, 100), st.floats(0, 5), st.integers(0, 5))
def test_total_monotone(L, dL, extra):
    nm = PRESETS["table1"]
    assert total_transmissivity(nm, L + dL, 0) <= total_transmissivity(nm, L, 0)
    more = nm.with_(alice_reflections=1 + extra)
    assert total_transmissivity(more, L, 0) <= total_transmissivity(nm, L, 0) * (1 + 1e-12)


def test_storage_time():
    assert storage_time(0, NoiseModel()) == 0
    assert storage_time(10, NoiseModel()) == pytest.approx(50e-6)
    assert storage_time(5, NoiseModel(t_proc=1e-6)) == pytest.approx(26e-6)


def test_dephase_examples():
    assert dephase_fidelity(0.9, 0, 1e-3) == 0.9
    assert dephase_fidelity(0.9, 1e6, 1e-3) == pytest.approx(0.5)
    assert dephase_fidelity(1.0, 25e-6, 1e-3) == pytest.approx(0.5 + 0.5 * math.exp(-0.025), rel=1e-12)
    assert dephase_fidelity(1.0, 25e-6, 1e-3) == pytest.approx(0.98765, abs=1e-5)
    assert dephase_fidelity(0.8, 1.0, math.inf) == 0.8


@given(st.floats(0.5, 1.0), st.floats(0, 1), st.floats(1e-6, 10))
def test_dephase_bounds(F, t, tc):
    Fp = dephase_fidelity(F, t, tc)
    assert 0.5 - 1e-15 <= Fp <= F + 1e-15


def test_dephase_rejects():
    with pytest.raises(ValueError):
        dephase_fidelity(0.3, 0, 1)
    with pytest.raises(ValueError):
        dephase_fidelity(0.8, -1, 1)


@given(st.floats(1e-2, 1e3), st.floats(0, 10))
def test_saturation_factor(tc, L):
    assert dephasing_factor(storage_time(L, NoiseModel()), tc) > 0.995


@pytest.mark.parametrize(
    "kw",
    [dict(eta_d=1.3), dict(eta_int=-0.1), dict(t_c=0), dict(t_0=-1), dict(gamma_db_per_km=-0.1),
     dict(alice_reflections=-1), dict(q_int=0.6), dict(t_proc=-1)],
)
def test_model_validation(kw):
    with pytest.raises(ValueError):
        NoiseModel(**kw)


def test_presets():
    assert preset("table1").eta_uc == 0.05
    assert preset("table1-altdc").eta_dc == 0.356
    assert preset("table1").eta_c == pytest.approx(0.04)
    with pytest.raises(ValueError):
        preset("nope")
