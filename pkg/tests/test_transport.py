import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from genlab.divergences import total_variation
from genlab.errors import DimensionMismatch, SpaceTooLarge
from genlab.space import Distribution, build_space, discrete_space, line_space, plain_set, point_mass
from genlab.transport import (
    bounded_lipschitz,
    prokhorov,
    tv_coupling,
    wasserstein1,
    wasserstein1_dual,
)
import oracles
from strategies import distributions_on, metric_spaces, pairs


def two_point(d):
    return build_space(["a", "b"], [[0, d], [d, 0]])


def masses(space):
    return point_mass(space, 0), point_mass(space, 1)


HALF = [0.5, 0.5]
QUARTER = [0.25, 0.75]


class TestWasserstein:
    def test_point_masses(self):
        s = two_point(3.0)
        assert wasserstein1(*masses(s), s)[0] == 3.0

    def test_identical(self):
        s = line_space([0, 1, 4])
        p = Distribution(s, [0.2, 0.3, 0.5])
        assert wasserstein1(p, p, s)[0] == 0.0

    def test_one_parameter_family_oracle(self):
        # Couplings of (0.5,0.5) and (0.25,0.75) are [[t, .5-t], [.25-t, .25+t]], t in [0, .25].
        s = line_space([0, 1])
        p, q = Distribution(s, HALF), Distribution(s, QUARTER)
        ts = np.linspace(0, 0.25, 2501)
        brute = min((0.5 - t) + (0.25 - t) for t in ts)
        assert wasserstein1(p, q, s)[0] == pytest.approx(brute, abs=1e-12)
        assert wasserstein1(p, q, s)[0] == pytest.approx(0.25, abs=1e-12)

    def test_plan_is_valid_coupling(self):
        s = line_space([0, 1, 3])
        p, q = Distribution(s, [0.6, 0.4, 0.0]), Distribution(s, [0.1, 0.2, 0.7])
        value, plan = wasserstein1(p, q, s)
        assert np.allclose(plan.probs.sum(axis=1), p.probs, atol=1e-9)
        assert np.allclose(plan.probs.sum(axis=0), q.probs, atol=1e-9)
        assert plan.cost == pytest.approx(float(np.sum(plan.probs * s.dist)), abs=1e-9)

    def test_space_mismatch(self):
        s, t = line_space([0, 1]), line_space([0, 1, 2])
        with pytest.raises(DimensionMismatch):
            wasserstein1(point_mass(s, 0), point_mass(t, 0), s)

    @settings(max_examples=80, deadline=None)
    @given(pairs(2, 7))
    def test_matches_scipy(self, pqs):
        s, p, q = pqs
        assert wasserstein1(p, q, s)[0] == pytest.approx(oracles.w1_primal(p.probs, q.probs, s.dist), abs=1e-9)

    @settings(max_examples=80, deadline=None)
    @given(pairs(2, 7))
    def test_strong_duality(self, pqs):
        s, p, q = pqs
        primal = wasserstein1(p, q, s)[0]
        dual, f = wasserstein1_dual(p, q, s)
        assert abs(primal - dual) <= 1e-6
        assert np.all(np.abs(f[:, None] - f[None, :]) <= s.dist + 1e-9)

    @settings(max_examples=60, deadline=None)
    @given(st.data())
    def test_metric_axioms(self, data):
        s = data.draw(metric_spaces(2, 6))
        p, q, r = (data.draw(distributions_on(s)) for _ in range(3))
        pq, qp = wasserstein1(p, q, s)[0], wasserstein1(q, p, s)[0]
        assert abs(pq - qp) <= 1e-9
        assert pq <= wasserstein1(p, r, s)[0] + wasserstein1(r, q, s)[0] + 1e-8


class TestDual:
    def test_point_masses_potential(self):
        s = two_point(3.0)
        value, f = wasserstein1_dual(*masses(s), s)
        assert value == pytest.approx(3.0) and np.allclose(f - f[1], [3.0, 0.0])

    def test_identical(self):
        s = line_space([0, 2])
        p = Distribution(s, HALF)
        assert wasserstein1_dual(p, p, s)[0] == pytest.approx(0.0, abs=1e-12)

    def test_example_pair(self):
        s = line_space([0, 1])
        assert wasserstein1_dual(Distribution(s, HALF), Distribution(s, QUARTER), s)[0] == pytest.approx(0.25)

    def test_singleton(self):
        s = build_space(["x"], [[0]])
        assert wasserstein1_dual(point_mass(s, 0), point_mass(s, 0), s)[0] == 0.0


class TestTvCoupling:
    @pytest.mark.parametrize("p, q, expected", [(HALF, HALF, 0.0), ([1, 0], [0, 1], 1.0), (HALF, QUARTER, 0.25)])
    def test_examples(self, p, q, expected):
        s = plain_set(2)
        value, c = tv_coupling(Distribution(s, p), Distribution(s, q))
        assert value == pytest.approx(expected, abs=1e-12)
        assert np.allclose(np.diag(c.probs), np.minimum(p, q))

    def test_identity_coupling(self):
        s = plain_set(3)
        p = Distribution(s, [0.2, 0.3, 0.5])
        assert np.allclose(tv_coupling(p, p)[1].probs, np.diag(p.probs))

    @settings(max_examples=100, deadline=None)
    @given(pairs(2, 8))
    def test_equals_half_l1(self, pqs):
        _, p, q = pqs
        value, c = tv_coupling(p, q)
        assert abs(value - 0.5 * np.abs(p.probs - q.probs).sum()) <= 1e-9
        off_diagonal = c.probs.sum() - np.trace(c.probs)
        assert off_diagonal == pytest.approx(value, abs=1e-9)


class TestProkhorov:
    def test_identical(self):
        s = line_space([0, 1, 2])
        p = Distribution(s, [0.2, 0.3, 0.5])
        assert prokhorov(p, p, s) == 0.0

    @pytest.mark.parametrize("d, expected", [(0.4, 0.4), (3.0, 1.0)])
    def test_point_masses(self, d, expected):
        s = two_point(d)
        assert prokhorov(*masses(s), s) == pytest.approx(expected, abs=1e-12)

    def test_cap(self):
        s = discrete_space(5)
        with pytest.raises(SpaceTooLarge):
            prokhorov(point_mass(s, 0), point_mass(s, 1), s, cap=4)

    @settings(max_examples=60, deadline=None)
    @given(pairs(2, 6))
    def test_matches_bruteforce(self, pqs):
        s, p, q = pqs
        assert prokhorov(p, q, s) == pytest.approx(oracles.prokhorov_bruteforce(p.probs, q.probs, s.dist), abs=1e-9)

    @settings(max_examples=60, deadline=None)
    @given(pairs(2, 6))
    def test_symmetric_and_bounded(self, pqs):
        s, p, q = pqs
        a, b = prokhorov(p, q, s), prokhorov(q, p, s)
        assert abs(a - b) <= 1e-9 and 0 <= a <= 1


class TestBoundedLipschitz:
    def test_identical(self):
        s = line_space([0, 1])
        p = Distribution(s, HALF)
        assert bounded_lipschitz(p, p, s) == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("d, expected", [(0.4, 0.4), (3.0, 2.0)])
    def test_point_masses(self, d, expected):
        s = two_point(d)
        assert bounded_lipschitz(*masses(s), s) == pytest.approx(expected, abs=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(pairs(2, 6))
    def test_matches_scipy(self, pqs):
        s, p, q = pqs
        ref = oracles.lipschitz_dual(p.probs, q.probs, s.dist, box=1.0)
        assert bounded_lipschitz(p, q, s) == pytest.approx(ref, abs=1e-9)

    @settings(max_examples=60, deadline=None)
    @given(pairs(2, 6))
    def test_lattice_relations(self, pqs):
        s, p, q = pqs
        bl = bounded_lipschitz(p, q, s)
        w = wasserstein1(p, q, s)[0]
        assert bl <= w + 1e-8
        assert bl <= 2 * total_variation(p, q) + 1e-8
        assert w <= (s.diameter + 1) * prokhorov(p, q, s) + 1e-8
