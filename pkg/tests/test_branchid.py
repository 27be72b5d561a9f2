"""Branch discrimination from decay measurements at the unit-decay points."""
import math

import numpy as np
import pytest

from jcflow import (
    Measurement,
    branch_degenerate,
    identify_branch,
    pairwise_distinctness,
    unit_decay_spectrum,
)


def test_measurement_validation():
    with pytest.raises(ValueError):
        Measurement(-1, 0.5, 1e-6)
    with pytest.raises(ValueError):
        Measurement(0, 1.5, 1e-6)
    with pytest.raises(ValueError):
        Measurement(0, 0.5, -1e-6)


def test_degenerate_modes_are_square_offsets():
    # sqrt(j+1) integer makes P_j branch independent (0 or 1 for every n)
    assert [j for j in range(25) if branch_degenerate(j)] == [0, 3, 8, 15, 24]
    for j in (0, 3, 8, 15):
        vals = [unit_decay_spectrum(n, j) for n in range(51)]
        assert max(vals) - min(vals) < 1e-12


def test_unit_decay_frozen_values():
    assert unit_decay_spectrum(0, 0) == 1.0
    assert abs(unit_decay_spectrum(0, 1) - 0.6331276710207078) < 1e-15
    assert abs(unit_decay_spectrum(3, 2) - 0.037673852035541029) < 1e-15


def test_identify_branch_example():
    first = Measurement(0, 1.0, 1e-9)
    second = Measurement(2, unit_decay_spectrum(3, 2), 1e-9)
    hits = identify_branch(first, second, 10)
    assert len(hits) == 1
    branch, g0 = hits[0]
    assert branch.n == 3
    assert abs(g0 - 3.5 * math.pi) < 1e-12


def test_identify_branch_seeded_round_trip():
    rng = np.random.default_rng(29)
    for _ in range(25):
        n = int(rng.integers(0, 11))
        j = int(rng.integers(1, 21))
        while branch_degenerate(j):
            j = int(rng.integers(1, 21))
        first = Measurement(0, 1.0, 1e-9)
        second = Measurement(j, unit_decay_spectrum(n, j), 1e-9)
        hits = identify_branch(first, second, 10)
        assert len(hits) == 1
        assert abs(hits[0][1] - (n + 0.5) * math.pi) < 1e-9


def test_identify_branch_needs_mode_zero_first():
    with pytest.raises(ValueError):
        identify_branch(Measurement(1, 0.5, 1e-6), Measurement(2, 0.5, 1e-6), 4)


def test_loose_tolerance_keeps_several():
    first = Measurement(0, 1.0, 1e-9)
    second = Measurement(1, unit_decay_spectrum(2, 1), 0.9)
    hits = identify_branch(first, second, 6)
    assert len(hits) > 1


def test_pairwise_distinctness_frozen():
    assert abs(pairwise_distinctness(1, 20) - 0.0035366585357353166) < 1e-15
    assert abs(pairwise_distinctness(2, 10) - 0.013508552654874606) < 1e-15
    with pytest.raises(ValueError):
        pairwise_distinctness(3, 10)  # degenerate mode
    with pytest.raises(ValueError):
        pairwise_distinctness(1, 0)
