import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from genlab.errors import NoPath
from genlab.lattice import METRICS, SLACK_TOL, builtin_edges, conversion_chain, edge, verify_all
from genlab.space import Distribution, build_space, line_space
from strategies import pairs


class TestEdges:
    def test_count_and_names(self):
        edges = builtin_edges()
        assert len(edges) == 8
        assert len({e.name for e in edges}) == 8

    def test_identity_transform(self):
        assert edge("BL_W").transform(0.7) == 0.7

    def test_diameter_transform(self):
        assert edge("W_PR").transform(0.5, diam=3) == 2.0
        with pytest.raises(ValueError):
            edge("W_PR").transform(0.5)

    @pytest.mark.parametrize("name, x, expected", [
        ("BL_TV", 0.3, 0.6), ("TV_HL", 0.3, 0.3), ("KL_CHI2_LOG", 1.0, math.log(2)),
        ("KL_CHI2", 1.0, 1.0), ("TV_KL", 0.5, 0.5), ("W_TV", 0.5, 1.0),
    ])
    def test_transforms(self, name, x, expected):
        assert edge(name).transform(x, diam=2.0) == pytest.approx(expected)

    def test_zero_times_infinity(self):
        assert edge("W_TV").transform(math.inf, diam=0.0) == 0.0

    @settings(max_examples=100)
    @given(st.floats(0, 1e6), st.floats(0, 1e6), st.floats(0, 10))
    def test_transforms_monotone(self, x, y, diam):
        lo, hi = sorted((x, y))
        for e in builtin_edges():
            assert e.transform(lo, diam) <= e.transform(hi, diam)

    def test_unknown_edge(self):
        with pytest.raises(KeyError):
            edge("XX")


class TestVerifyAll:
    def test_identical_pair(self):
        s = line_space([0, 1, 3])
        p = Distribution(s, [0.2, 0.3, 0.5])
        for r in verify_all(p, p, s):
            assert r.lhs == pytest.approx(0.0, abs=1e-12) and r.rhs == pytest.approx(0.0, abs=1e-12)
            assert r.slack == pytest.approx(0.0, abs=1e-12)

    def test_point_masses(self):
        s = build_space("ab", [[0, 0.4], [0.4, 0]])
        reports = {r.edge.name: r for r in verify_all(Distribution(s, [1, 0]), Distribution(s, [0, 1]), s)}
        r = reports["TV_HL"]
        assert r.lhs == pytest.approx(1.0) and r.rhs == pytest.approx(math.sqrt(2))
        assert r.slack == pytest.approx(math.sqrt(2) - 1, abs=1e-12)
        assert reports["TV_KL"].vacuous and reports["TV_KL"].holds

    def test_pinsker_example(self):
        s = line_space([0, 1])
        reports = {r.edge.name: r for r in verify_all(Distribution(s, [0.5, 0.5]), Distribution(s, [0.25, 0.75]), s)}
        r = reports["TV_KL"]
        # KL((.5,.5) || (.25,.75)) = .5 ln 2 + .5 ln(2/3) = 0.143841...
        kl = 0.5 * math.log(2) + 0.5 * math.log(2 / 3)
        assert r.lhs == pytest.approx(0.25, abs=1e-15)
        assert r.rhs == pytest.approx(math.sqrt(kl / 2), abs=1e-12)
        assert r.rhs == pytest.approx(0.268180, abs=1e-6)

    @settings(max_examples=80, deadline=None)
    @given(pairs(2, 7))
    def test_every_edge_holds(self, pqs):
        s, p, q = pqs
        reports = verify_all(p, q, s)
        assert len(reports) == 8
        assert all(r.slack >= -SLACK_TOL for r in reports)


class TestConversionChain:
    def test_bl_to_tv(self):
        c = conversion_chain("BL", "TV")
        assert [e.name for e in c.edges] == ["BL_TV"]
        assert c(0.3) == pytest.approx(0.6)

    def test_tv_to_chi2(self):
        c = conversion_chain("TV", "CHI2")
        assert [e.name for e in c.edges] == ["TV_KL", "KL_CHI2_LOG"]
        assert c(1.0) == pytest.approx(math.sqrt(math.log(2) / 2))

    def test_identity(self):
        c = conversion_chain("W", "W")
        assert c.edges == () and c(0.37) == 0.37

    def test_no_path(self):
        with pytest.raises(NoPath):
            conversion_chain("HL", "TV")

    def test_unknown_metric(self):
        with pytest.raises(KeyError):
            conversion_chain("W", "FOO")

    def test_needs_diameter(self):
        with pytest.raises(ValueError):
            conversion_chain("W", "PR")
        assert conversion_chain("W", "PR", diam=2.0)(0.1) == pytest.approx(0.3)

    @pytest.mark.parametrize("src", METRICS)
    @pytest.mark.parametrize("dst", METRICS)
    def test_reachable_chains_are_monotone(self, src, dst):
        try:
            c = conversion_chain(src, dst, diam=1.5)
        except NoPath:
            return
        xs = np.sort(np.random.default_rng(3).uniform(0, 5, 50))
        ys = [c(x) for x in xs]
        assert all(a <= b for a, b in zip(ys, ys[1:]))

    @settings(max_examples=40, deadline=None)
    @given(pairs(2, 6))
    def test_chain_bounds_hold_on_pairs(self, pqs):
        from genlab.lattice import all_metrics
        s, p, q = pqs
        vals = all_metrics(p, q, s)
        for src in METRICS:
            for dst in METRICS:
                try:
                    c = conversion_chain(src, dst, diam=s.diameter)
                except NoPath:
                    continue
                bound = c(vals[dst])
                assert vals[src] <= bound + 1e-8 or math.isinf(bound)
