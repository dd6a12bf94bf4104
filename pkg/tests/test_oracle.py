import math

import numpy as np
import pytest

from competition_lab import oracle
from competition_lab.oracle import (
    BLUE,
    EMPTY,
    RED,
    TinyGraph,
    build_generator,
    event_probability,
    transient_distribution,
)


def test_tiny_graph_constructors():
    p = TinyGraph.path(3)
    assert p.adjacency == ((1,), (0, 2), (1,))
    c = TinyGraph.cycle(4)
    assert c.adjacency[0] == (3, 1)
    g = TinyGraph.grid(2, 2)
    assert len(g.sites) == 4
    assert all(len(nbrs) == 2 for nbrs in g.adjacency)
    with pytest.raises(ValueError):
        TinyGraph.path(13)


def test_generator_rows_sum_to_zero():
    gen = build_generator(TinyGraph.path(4), "competition", (0, RED, BLUE, 0))
    sums = np.asarray(gen.q.sum(axis=1)).ravel()
    assert np.allclose(sums, 0.0, atol=1e-12)


def test_distribution_is_probability_vector():
    gen = build_generator(TinyGraph.path(4), "competition", (0, RED, BLUE, 0))
    dist = transient_distribution(gen, (0, RED, BLUE, 0), 1.0)
    assert np.all(dist >= -1e-15)
    assert math.isclose(dist.sum(), 1.0, abs_tol=1e-9)


def test_time_zero_is_point_mass():
    init = (RED, BLUE)
    gen = build_generator(TinyGraph.path(2), "competition", init)
    dist = transient_distribution(gen, init, 0.0)
    assert dist[gen.state_row(init)] == 1.0


def test_two_site_closed_form():
    """Competition on two adjacent sites: each flips the other at rate 1.

    The chain leaves (R,B) at rate 2 toward (R,R) or (B,B) equally, so
    P(consensus by t) = 1 - e^{-2t}, split evenly.
    """
    init = (RED, BLUE)
    gen = build_generator(TinyGraph.path(2), "competition", init)
    dist = transient_distribution(gen, init, 1.0, tol=1e-12)
    expect = (1 - math.exp(-2)) / 2
    assert abs(dist[gen.state_row((RED, RED))] - expect) < 1e-9
    assert abs(dist[gen.state_row((BLUE, BLUE))] - expect) < 1e-9
    assert abs(dist[gen.state_row(init)] - math.exp(-2)) < 1e-9


def test_richardson_is_color_erased_competition():
    """With a single color the competition generator has no flip moves, so the
    occupancy law equals the growth model's."""
    init = (0, RED, RED, 0)
    g_rich = build_generator(TinyGraph.path(4), "richardson", init)
    g_comp = build_generator(TinyGraph.path(4), "competition", init)
    assert set(g_rich.states) == set(g_comp.states)
    t = 0.8
    d_rich = transient_distribution(g_rich, init, t)
    d_comp = transient_distribution(g_comp, init, t)
    for s in g_rich.states:
        assert math.isclose(
            d_rich[g_rich.state_row(s)], d_comp[g_comp.state_row(s)], abs_tol=1e-9
        )


def test_richardson_canonicalizes_colors():
    gen = build_generator(TinyGraph.path(3), "richardson", (BLUE, 0, 0))
    assert gen.states[0] == (RED, 0, 0)


def test_voter_requires_full_coloring():
    with pytest.raises(ValueError):
        build_generator(TinyGraph.path(3), "voter", (RED, 0, BLUE))


def test_voter_consensus_mass_grows():
    init = (RED, BLUE, RED, BLUE)
    gen = build_generator(TinyGraph.cycle(4), "voter", init)

    def consensus(dist):
        return event_probability(
            gen, dist, lambda s: len(set(s)) == 1
        )

    d1 = transient_distribution(gen, init, 0.5)
    d2 = transient_distribution(gen, init, 2.0)
    assert 0 < consensus(d1) < consensus(d2) < 1


def test_event_probability_total():
    init = (0, RED, BLUE, 0)
    gen = build_generator(TinyGraph.path(4), "competition", init)
    dist = transient_distribution(gen, init, 1.0)
    assert math.isclose(event_probability(gen, dist, lambda s: True), 1.0, abs_tol=1e-9)


def test_compare_engine_z_scores():
    init = (RED, BLUE)
    gen = build_generator(TinyGraph.path(2), "competition", init)
    dist = transient_distribution(gen, init, 1.0)
    # perfect agreement: feed the oracle's own distribution as frequencies
    n = 100000
    observed = []
    for s, p in zip(gen.states, dist):
        observed.extend([s] * int(round(p * n)))
    rows = oracle.compare_engine(gen, dist, observed)
    assert oracle.max_abs_z(rows) < 0.2
