from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import gamma1_index, ligozat, naive_eta_product
from qcong.eta import (
    EtaQuotient,
    EtaSyntaxError,
    FractionalPowerError,
    QExpansion,
    cusp_order,
    delta_power,
    divisors,
    eta_series,
    expand,
    index_gamma0,
    index_gamma1,
    is_holo_at_cusps,
    level_lcm,
    meta,
    parse_eta,
    sturm_bound,
    weight2,
)
from qcong.series import IntSeries, ModSeries

TBAR = EtaQuotient({3: 1, 2: -1, 1: -1})

quotients = st.dictionaries(
    st.integers(1, 12), st.integers(-6, 6).filter(bool), min_size=1, max_size=4
).map(EtaQuotient)


def test_eta_series_examples():
    e1 = eta_series(1, 8)
    assert e1.offset24 == 1 and e1.series.tolist() == [1, -1, -1, 0, 0, 1, 0, 1]
    e2 = eta_series(2, 5)
    assert e2.offset24 == 2 and e2.series.tolist() == [1, 0, -1, 0, -1]


def test_expand_examples():
    t = expand(TBAR, 5)
    assert t.offset24 == 0 and t.series.tolist() == [1, 1, 3, 3, 8]
    d = expand(EtaQuotient({1: 24}), 3)
    assert d.offset24 == 24 and d.series.tolist() == [1, -24, 252]
    e = expand(EtaQuotient({80: 12}), 81)
    assert e.offset24 == 960
    assert all(e.series[n] == 0 for n in range(1, 80)) and e.series[80] == -12


@given(quotients, st.sampled_from([5, 7, 11]))
def test_expand_matches_product_oracle(eq, p):
    L = 40
    exact = naive_eta_product(eq.factors, L)
    assert expand(eq, L).series.tolist() == exact
    assert expand(eq, L, p).series.tolist() == [c % p for c in exact]


def test_frobenius_digits_large_exponents():
    # exponents well above ell exercise the base-ell digit path
    for eq in (EtaQuotient({1: 624}), EtaQuotient({1: 1224, 2: 48, 3: -48})):
        L = 120
        exact = expand(eq, L).series
        assert expand(eq, L, 7).series == exact.reduce(7)
        assert expand(eq, L, 5).series == exact.reduce(5)


def test_eta5_over_eta_5z_is_one_mod_5():
    eq = EtaQuotient({1: 5, 5: -1})
    s = expand(eq, 500, 5).series
    assert s == ModSeries.one(500, 5)


def test_descriptor_algebra():
    a = EtaQuotient({1: 2, 2: -1})
    b = EtaQuotient({2: 1, 3: 4})
    assert (a * b).factors == {1: 2, 3: 4}
    assert (a / a).factors == {}
    assert (a**3).factors == {1: 6, 2: -3}
    assert hash(a * b) == hash(EtaQuotient({3: 4, 1: 2}))
    with pytest.raises(AttributeError):
        a._factors = {}
    with pytest.raises(ValueError):
        EtaQuotient({0: 1})


def test_metadata_examples():
    assert weight2(TBAR) == -1 and level_lcm(TBAR) == 6
    assert weight2(delta_power(1)) == 24
    assert weight2(EtaQuotient()) == 0 and level_lcm(EtaQuotient()) == 1
    m = meta(TBAR)
    assert (m.weight2, m.level, m.holo_at_cusps) == (-1, 6, False)


def test_parse_eta():
    assert parse_eta("3^1 * 2^-1 * 1^-1") == TBAR
    assert parse_eta("3^1 2^-1 1^-1") == TBAR
    assert parse_eta('{"factors": [[3, 1], [2, -1], [1, -1]]}') == TBAR
    assert parse_eta(str(TBAR)) == TBAR
    assert parse_eta("5") == EtaQuotient({5: 1})
    with pytest.raises(EtaSyntaxError, match="2\\^x"):
        parse_eta("3^1 * 2^x")
    with pytest.raises(EtaSyntaxError):
        parse_eta('{"factors": 3}')


@given(quotients)
def test_str_round_trip(eq):
    assert parse_eta(str(eq)) == eq
    assert EtaQuotient.from_pairs(eq.to_json()["factors"]) == eq


def test_cusp_order_examples():
    assert cusp_order(delta_power(1), 1, 1) == 1
    assert cusp_order(TBAR, 6, 1) < 0
    with pytest.raises(ValueError):
        cusp_order(TBAR, 6, 4)


@given(quotients)
def test_cusp_order_at_infinity_and_oracle(eq):
    N = level_lcm(eq)
    assert cusp_order(eq, N, N) == Fraction(eq.offset24, 24)
    for c in divisors(N):
        assert cusp_order(eq, N, c) == ligozat(eq.factors, N, c)


def test_holomorphy_examples():
    assert is_holo_at_cusps(delta_power(1), 1)
    assert not is_holo_at_cusps(TBAR, 6)
    f7 = delta_power(49) * EtaQuotient({1: 48, 2: 48, 3: -48})
    assert is_holo_at_cusps(f7, 6)
    with pytest.raises(ValueError):
        is_holo_at_cusps(TBAR, 4)


def test_indices():
    assert index_gamma0(1440) == 3456 and index_gamma0(1) == 1
    assert index_gamma1(6) == 24
    for N in range(1, 31):
        assert index_gamma1(N) == gamma1_index(N)


def test_sturm_bound():
    assert sturm_bound(15, 1440) == 2161
    assert sturm_bound(9, 2880) == 2593
    assert sturm_bound(24, 1) == 2
    with pytest.raises(ValueError):
        sturm_bound(0, 1)


def test_qexpansion():
    q = QExpansion(48, IntSeries([1, 2, 3]))
    assert q.is_integral() and q.to_series().tolist() == [0, 0, 1, 2, 3]
    with pytest.raises(FractionalPowerError):
        QExpansion(5, IntSeries([1])).to_series()
    with pytest.raises(FractionalPowerError):
        QExpansion(-24, IntSeries([1])).to_series()
    prod = QExpansion(1, IntSeries([1, 1])) * QExpansion(2, IntSeries([1, -1]))
    assert prod.offset24 == 3 and prod.series.tolist() == [1, 0]
