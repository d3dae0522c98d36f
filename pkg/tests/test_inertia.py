import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from lowinertia.core import HourlySeries
from lowinertia.errors import ConfigurationError, InconsistencyError, RangeError
from lowinertia.inertia import (
    CommitmentSeries,
    UnitRecord,
    fill_inertia_constants,
    kinetic_energy_at,
    kinetic_energy_series,
    n1_kinetic_energy,
)


def oracle_energy(fleet, online):
    """Exact rational sum of H*S over online units, rounded once at the end."""
    total = Fraction(0)
    for u in fleet:
        if online[u.unit_id]:
            total += Fraction(u.h_s) * Fraction(u.s_mva)
    return float(total / 1000)


def commitment_of(patterns):
    return CommitmentSeries({uid: HourlySeries(0, tuple(p)) for uid, p in patterns.items()})


def test_empty_fleet_is_zero():
    assert kinetic_energy_at([], CommitmentSeries(), 0) == 0.0


def test_single_unit():
    u = UnitRecord("G1", 1600.0, 6.0)
    c = commitment_of({"G1": [True]})
    assert kinetic_energy_at([u], c, 0) == 9.6


def test_all_offline_gives_zero_series():
    fleet = [UnitRecord(f"G{i}", 500.0, 4.0) for i in range(3)]
    c = commitment_of({u.unit_id: [False] * 5 for u in fleet})
    assert kinetic_energy_series(fleet, c).values == (0.0,) * 5


def test_toggling_unit():
    u = UnitRecord("G1", 1600.0, 6.0)
    c = commitment_of({"G1": [True, False, True, False]})
    assert kinetic_energy_series([u], c).values == (9.6, 0.0, 9.6, 0.0)


def test_out_of_range_hour():
    u = UnitRecord("G1", 1600.0, 6.0)
    with pytest.raises(RangeError):
        kinetic_energy_at([u], commitment_of({"G1": [True]}), 3)


def test_unknown_inertia_needs_default():
    u = UnitRecord("G1", 100.0, None, category="hydro")
    with pytest.raises(ConfigurationError):
        u.kinetic_energy
    with pytest.raises(ConfigurationError):
        fill_inertia_constants([u], {"nuclear": 6.0})
    assert fill_inertia_constants([u], {"hydro": 3.0})[0].h_s == 3.0


def test_commitment_rejects_unknown_units():
    with pytest.raises(ConfigurationError):
        CommitmentSeries({"X": HourlySeries(0, (True,))}, [UnitRecord("G1", 1.0, 1.0)])


def test_random_fleet_matches_oracle():
    rng = random.Random(7)
    fleet = [UnitRecord(f"G{i}", rng.uniform(10, 1800), rng.uniform(1.5, 9.0)) for i in range(100)]
    hours = 24
    patterns = {u.unit_id: [rng.random() < 0.6 for _ in range(hours)] for u in fleet}
    c = commitment_of(patterns)
    series = kinetic_energy_series(fleet, c)
    for t in range(hours):
        online = {uid: p[t] for uid, p in patterns.items()}
        expected = oracle_energy(fleet, online)
        assert kinetic_energy_at(fleet, c, t) == expected
        assert series.values[t] == expected


unit_lists = st.lists(
    st.tuples(st.floats(1.0, 2000.0), st.floats(0.5, 12.0), st.booleans()), min_size=0, max_size=40
)


@settings(max_examples=200)
@given(unit_lists, st.randoms())
def test_order_independent_and_exact(units, rnd):
    fleet = [UnitRecord(f"G{i}", s, h) for i, (s, h, _) in enumerate(units)]
    online = {f"G{i}": on for i, (_, _, on) in enumerate(units)}
    c = commitment_of({uid: [on] for uid, on in online.items()})
    shuffled = list(fleet)
    rnd.shuffle(shuffled)
    value = kinetic_energy_at(fleet, c, 0)
    assert value == kinetic_energy_at(shuffled, c, 0)
    assert value == oracle_energy(fleet, online)


def test_n1_subtracts_incident_unit():
    di = UnitRecord("O3", 1666.7, 6.0, True)
    assert n1_kinetic_energy(150.0, di) == pytest.approx(140.0, abs=1e-3)
    assert n1_kinetic_energy(150.0, di, di_online=False) == 150.0


def test_n1_inconsistent():
    di = UnitRecord("O3", 2000.0, 5.0, True)
    with pytest.raises(InconsistencyError):
        n1_kinetic_energy(5.0, di)


def test_invalid_units():
    with pytest.raises(ValueError):
        UnitRecord("G", 0.0, 1.0)
    with pytest.raises(ValueError):
        UnitRecord("G", 10.0, -1.0)
