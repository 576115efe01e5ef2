import math

import numpy as np
import pytest

from sexratio import (ChildrenBoundary, ContractError, Doubling, Finiteness, GirlsBoundary, PBoys,
                      PBoysMore, ParameterError, SqrtBoundary, finiteness_class, parse_strategy,
                      should_stop)
from sexratio.strategies import FORM_LOGLOG, FORM_PLAIN, boundary


def test_doubling_stops_after_first_boy():
    assert should_stop(Doubling(), 1, 1, 0, 1)


def test_sqrt_boundary_equality_stops():
    assert should_stop(SqrtBoundary(1.0), 4, 2, 1, 3)
    assert not should_stop(SqrtBoundary(1.01), 4, 2, 1, 3)


def test_p_boys_more_hits_level():
    assert should_stop(PBoysMore(2), 2, 2, 0, 2)
    assert not should_stop(PBoysMore(2), 3, 1, 1, 2)


def test_p_boys_counts_boys_not_surplus():
    assert should_stop(PBoys(2), 5, -1, 3, 2)
    assert not should_stop(PBoys(2), 1, 1, 0, 1)


def test_doubling_is_y_at_least_2x():
    for k in range(1, 30):
        for x in range(k + 1):
            y = k - x
            assert should_stop(Doubling(), k, y - x, x, y) == (y >= 2 * x)


def test_girls_boundary_uses_girls_count():
    g = GirlsBoundary(1.0, FORM_PLAIN)
    # X = 4 girls, h = 2
    assert should_stop(g, 10, 2, 4, 6)
    assert not should_stop(g, 8, 0, 4, 4)


def test_children_boundary_uses_k():
    ch = ChildrenBoundary(1.0, FORM_PLAIN)
    assert should_stop(ch, 9, 3, 3, 6)
    assert not should_stop(ch, 9, 1, 4, 5)


def test_loglog_boundary_zero_for_small_x():
    assert boundary(np.array([0.0, 1.0, 2.0]), 1.0, FORM_LOGLOG).tolist() == [0.0, 0.0, 0.0]
    x = 100.0
    assert math.isclose(float(boundary(x, 2.0, FORM_LOGLOG)), 2 * math.sqrt(x * math.log(math.log(x))))


@pytest.mark.parametrize("args", [(0, 0, 0, 0), (2, 2, 0, 1), (2, 0, 0, 1), (1, 1, -1, 2)])
def test_inconsistent_state_is_contract_error(args):
    with pytest.raises(ContractError):
        should_stop(PBoys(1), *args)


@pytest.mark.parametrize("make", [lambda: PBoys(0), lambda: PBoysMore(-1), lambda: PBoys(1.5),
                                  lambda: PBoys(True), lambda: SqrtBoundary(0.0),
                                  lambda: SqrtBoundary(float("nan")), lambda: GirlsBoundary(-1.0),
                                  lambda: ChildrenBoundary(1.0, form=7)])
def test_invalid_parameters(make):
    with pytest.raises(ParameterError):
        make()


@pytest.mark.parametrize("spec,cls", [
    (PBoys(3), Finiteness.ALMOST_SURELY_FINITE),
    (PBoysMore(2), Finiteness.ALMOST_SURELY_FINITE),
    (SqrtBoundary(50.0), Finiteness.ALMOST_SURELY_FINITE),
    (ChildrenBoundary(9.0, FORM_PLAIN), Finiteness.ALMOST_SURELY_FINITE),
    (Doubling(), Finiteness.POSITIVE_NON_TERMINATION),
    (GirlsBoundary(1.0), Finiteness.ALMOST_SURELY_FINITE),
    (GirlsBoundary(2.0), Finiteness.UNCLASSIFIED),
    (GirlsBoundary(2.5), Finiteness.POSITIVE_NON_TERMINATION),
    (ChildrenBoundary(1.4), Finiteness.ALMOST_SURELY_FINITE),
    (ChildrenBoundary(math.sqrt(2)), Finiteness.UNCLASSIFIED),
    (ChildrenBoundary(1.5), Finiteness.POSITIVE_NON_TERMINATION),
])
def test_finiteness_classes(spec, cls):
    assert finiteness_class(spec) is cls


def test_girls_boundary_plain_form_is_finite():
    assert finiteness_class(GirlsBoundary(5.0, FORM_PLAIN)) is Finiteness.ALMOST_SURELY_FINITE


@pytest.mark.parametrize("spec", [PBoys(2), PBoysMore(3), SqrtBoundary(0.75), Doubling(),
                                  GirlsBoundary(1.5), GirlsBoundary(1.0, FORM_PLAIN),
                                  ChildrenBoundary(1.2), ChildrenBoundary(2.0, FORM_PLAIN)])
def test_text_round_trip(spec):
    assert parse_strategy(str(spec)) == spec


@pytest.mark.parametrize("text", ["", "pboys", "pboys:x", "sqrt:-1", "girlsbound:weird:1",
                                  "doubling:2", "nosuch:1"])
def test_bad_text_rejected(text):
    with pytest.raises(ParameterError):
        parse_strategy(text)


def test_vectorised_stops_match_scalar():
    rng = np.random.default_rng(0)
    k = rng.integers(1, 200, 500)
    x = np.array([rng.integers(0, kk + 1) for kk in k])
    s = k - 2 * x
    for spec in (PBoys(2), PBoysMore(2), SqrtBoundary(1.3), Doubling(), GirlsBoundary(1.0),
                 ChildrenBoundary(1.0)):
        vec = spec.stops(k, s)
        for i in range(0, 500, 7):
            assert bool(vec[i]) == should_stop(spec, int(k[i]), int(s[i]), int(x[i]),
                                               int(k[i] - x[i]))


def test_level_type_flags():
    assert PBoysMore(1).level_type and SqrtBoundary(1.0).level_type and Doubling().level_type
    assert not PBoys(1).level_type and not GirlsBoundary(1.0).level_type
