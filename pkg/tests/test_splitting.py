from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import numpy as np
import pytest

from gpesplit.flows import FlowRegime, ModelParams, make_subflows
from gpesplit.hermite import build_basis, inverse, mass_norm
from gpesplit.splitting import build_scheme, chain_minus, chain_plus, composite_step, counting, solve_weights


@pytest.fixture(scope="module")
def setup():
    b = build_basis(1.0, 10)
    rng = np.random.default_rng(7)
    a = (rng.standard_normal(b.shape) + 1j * rng.standard_normal(b.shape)) * np.exp(-0.5 * b.mu)
    return b, inverse(b, a)


def test_lie_weight():
    assert build_scheme(2).exact_weights == (Fraction(1, 2),)


def test_order_four_weights():
    sc = build_scheme(4)
    assert sc.exact_weights == (Fraction(-1, 6), Fraction(2, 3))
    assert sc.weights == (-1 / 6, 2 / 3)


def test_order_six_weights():
    # hand-solved: g1 + g2 + g3 = 1/2 with moments in 1, 1/4, 1/9 and 1, 1/16, 1/81
    assert solve_weights(3) == (Fraction(1, 48), Fraction(-8, 15), Fraction(81, 80))


@pytest.mark.parametrize("q, S", [(2, 4), (4, 12), (6, 24), (8, 40), (10, 60), (12, 84), (14, 112), (16, 144)])
def test_step_count(q, S):
    assert build_scheme(q).step_count == S == q * (q // 2 + 1)


@pytest.mark.parametrize("q", [0, 3, 2.5, 18, -2])
def test_invalid_orders(q):
    with pytest.raises(ValueError):
        build_scheme(q)


def test_chain_ordering():
    calls = []

    def lin(x, t):
        calls.append(("L", t))
        return x

    def non(x, t):
        calls.append(("N", t))
        return x

    from gpesplit.flows import SubFlows
    flows = SubFlows(lin, non)
    chain_plus(2, 0.5, 0, flows)
    assert calls == [("L", 0.5), ("N", 0.5), ("L", 0.5), ("N", 0.5)]
    calls.clear()
    chain_minus(1, 0.5, 0, flows)
    assert calls == [("N", 0.5), ("L", 0.5)]
    with pytest.raises(ValueError):
        chain_plus(0, 0.1, 0, flows)


def test_all_substeps_are_positive(setup):
    b, psi = setup
    seen = []
    base = make_subflows(b, ModelParams(), FlowRegime.DISSIPATIVE)

    def lin(x, t):
        seen.append(t)
        return base.linear(x, t)

    from gpesplit.flows import SubFlows
    composite_step(build_scheme(8), 0.1, psi, SubFlows(lin, base.nonlinear))
    assert min(seen) > 0


def test_counter_matches_step_count(setup):
    b, psi = setup
    flows, counter = counting(make_subflows(b, ModelParams(), FlowRegime.UNITARY))
    for q in (2, 6, 10):
        counter.reset()
        composite_step(build_scheme(q), 0.05, psi, flows)
        assert counter.total == build_scheme(q).step_count
        assert counter.linear == counter.nonlinear


def test_executor_gives_identical_result(setup):
    b, psi = setup
    flows = make_subflows(b, ModelParams(), FlowRegime.UNITARY)
    sc = build_scheme(6)
    with ThreadPoolExecutor(3) as pool:
        assert np.array_equal(composite_step(sc, 0.1, psi, flows, pool), composite_step(sc, 0.1, psi, flows))


def _local_errors(b, psi, q, taus):
    flows = make_subflows(b, ModelParams(), FlowRegime.UNITARY)
    sc = build_scheme(q)
    ref = build_scheme(12)
    out = []
    for t in taus:
        exact = psi
        for _ in range(4):
            exact = composite_step(ref, t / 4, exact, flows)
        out.append(mass_norm(b, composite_step(sc, t, psi, flows) - exact))
    return np.array(out)


def test_lie_average_local_error_is_third_order(setup):
    # The symmetric Lie average is second order, so one step errs by O(tau^3).
    b, psi = setup
    e = _local_errors(b, psi, 2, [0.1, 0.05, 0.025])
    rates = np.log2(e[:-1] / e[1:])
    assert np.all(np.abs(rates - 3) < 0.3)


def test_order_four_local_error(setup):
    b, psi = setup
    e = _local_errors(b, psi, 4, [0.2, 0.1, 0.05])
    assert np.all(np.log2(e[:-1] / e[1:]) > 4.5)
