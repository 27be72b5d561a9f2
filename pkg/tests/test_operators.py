"""Operator construction and closed-form evolution checks."""
import math

import numpy as np
import pytest

from jcflow import (
    BasisLabel,
    ModelParams,
    amplitude,
    build_operators,
    evolution_detuned,
    evolution_resonant,
    guarded_indices,
    matrix_exponential_oracle,
    subsystem_block,
    unitarity_defect,
)

CUTOFF = 8


def test_params_validation():
    with pytest.raises(ValueError):
        ModelParams(coupling=-0.1)
    with pytest.raises(ValueError):
        ModelParams(coupling=1.0, cutoff=1)
    assert ModelParams(coupling=1.0, cutoff=5).dim == 12


def test_basis_label_roundtrip():
    for i in range(24):
        lab = BasisLabel.from_index(i)
        assert lab.index == i
    assert BasisLabel(3, 1).index == 7
    assert BasisLabel(0, 0).index == 0
    with pytest.raises(ValueError):
        BasisLabel(-1, 0)
    with pytest.raises(ValueError):
        BasisLabel(0, 2)


def test_ladder_action():
    ops = build_operators(ModelParams(coupling=1.0, cutoff=CUTOFF))
    a = np.asarray(ops["a"])
    for n in range(1, CUTOFF + 1):
        for s in (0, 1):
            col = np.zeros(2 * (CUTOFF + 1))
            col[2 * n + s] = 1.0
            out = a @ col
            assert abs(out[2 * (n - 1) + s] - math.sqrt(n)) < 1e-15
            assert np.count_nonzero(np.abs(out) > 1e-15) == 1


def test_commutator_guarded():
    ops = build_operators(ModelParams(coupling=1.0, cutoff=CUTOFF))
    a = np.asarray(ops["a"])
    ad = np.asarray(ops["a_dagger"])
    comm = a @ ad - ad @ a
    gi = guarded_indices(CUTOFF)
    dim = 2 * (CUTOFF + 1)
    assert np.abs((comm - np.eye(dim))[np.ix_(gi, gi)]).max() < 1e-14
    # the top photon sector pays for the cut: [a, a+] = -cutoff there
    assert abs(comm[dim - 1, dim - 1] + CUTOFF) < 1e-13


def test_spin_algebra():
    ops = build_operators(ModelParams(coupling=1.0, cutoff=CUTOFF))
    tp = np.asarray(ops["tau_plus"])
    tm = np.asarray(ops["tau_minus"])
    t3 = np.asarray(ops["tau_3"])
    dim = 2 * (CUTOFF + 1)
    assert np.abs(tp @ tm + tm @ tp - np.eye(dim)).max() < 1e-15
    assert np.abs(tp @ tm - tm @ tp - 2.0 * t3).max() < 1e-15
    # tau_3 eigenvalues are +-1/2, upper level first in each pair
    assert np.allclose(np.diag(t3)[::2], 0.5)
    assert np.allclose(np.diag(t3)[1::2], -0.5)


def test_interaction_and_free_parts():
    p = ModelParams(coupling=0.4, detuning=0.7, cutoff=CUTOFF, mode_frequency=1.3)
    ops = build_operators(p)
    v = np.asarray(ops["V"])
    assert np.abs(v - v.conj().T).max() == 0.0
    h0 = np.asarray(ops["H0"])
    want = 1.3 * np.asarray(ops["number"]) + (1.3 + 0.7) * np.asarray(ops["tau_3"])
    assert np.abs(h0 - want).max() == 0.0
    # V couples |j,up> to |j+1,down> with sqrt(j+1)
    for j in range(CUTOFF):
        assert abs(v[2 * (j + 1) + 1, 2 * j] - math.sqrt(j + 1)) < 1e-15
    assert ops["V"].truncation_tainted
    assert not ops["tau_3"].truncation_tainted


def test_resonant_matches_oracle():
    rng = np.random.default_rng(11)
    ops = build_operators(ModelParams(coupling=1.0, cutoff=CUTOFF))
    v = np.asarray(ops["V"])
    gi = guarded_indices(CUTOFF)
    for _ in range(10):
        g = rng.uniform(0.05, 2.0)
        t = rng.uniform(0.0, 8.0)
        u = np.asarray(evolution_resonant(ModelParams(coupling=g, cutoff=CUTOFF), t))
        uo = np.asarray(matrix_exponential_oracle(g * v, t))
        assert np.abs((u - uo)[np.ix_(gi, gi)]).max() < 1e-12


def test_resonant_rejects_detuned():
    with pytest.raises(ValueError):
        evolution_resonant(ModelParams(coupling=1.0, detuning=0.5), 1.0)


def test_detuned_matches_oracle_and_is_unitary():
    rng = np.random.default_rng(12)
    ops = build_operators(ModelParams(coupling=1.0, cutoff=CUTOFF))
    v = np.asarray(ops["V"])
    t3 = np.asarray(ops["tau_3"])
    gi = guarded_indices(CUTOFF)
    for _ in range(10):
        g = rng.uniform(0.05, 2.0)
        d = rng.uniform(-4.0, 4.0)
        t = rng.uniform(0.0, 6.0)
        p = ModelParams(coupling=g, detuning=d, cutoff=CUTOFF)
        u = evolution_detuned(p, t)
        uo = np.asarray(matrix_exponential_oracle(d * t3 + g * v, t))
        assert np.abs((np.asarray(u) - uo)[np.ix_(gi, gi)]).max() < 1e-12
        assert unitarity_defect(u) < 1e-12


def test_subsystem_block_embeds():
    g, d, t = 0.8, 1.1, 2.7
    u = np.asarray(evolution_detuned(ModelParams(coupling=g, detuning=d, cutoff=CUTOFF), t))
    for n in (0, 2, 5):
        blk = subsystem_block(n, g * t, 0.5 * d * t)
        rows = [2 * n, 2 * (n + 1) + 1]
        sub = u[np.ix_(rows, rows)]
        assert np.abs(blk - sub).max() < 1e-14
    assert np.abs(subsystem_block(0, 0.0, 0.0) - np.eye(2)).max() == 0.0
    with pytest.raises(ValueError):
        subsystem_block(-1, 1.0)


def test_oracle_rejects_nonhermitian():
    m = np.zeros((4, 4), dtype=complex)
    m[0, 1] = 1.0
    with pytest.raises(ValueError):
        matrix_exponential_oracle(m)
    with pytest.raises(ValueError):
        matrix_exponential_oracle(np.eye(3))


def test_amplitude_frozen_values():
    # sin(g0*sqrt(2)) at the branch-(0,+) coupling fixed by P0 = 0.1
    g0 = 0.3217505543966422
    assert abs(amplitude(1, g0) - 0.43948386990385013) < 1e-15
    assert amplitude(0, math.pi / 2) == 1.0
    assert abs(amplitude(3, math.pi)) < 1e-15
    with pytest.raises(ValueError):
        amplitude(-1, 1.0)


def test_json_dump_shape():
    op = build_operators(ModelParams(coupling=1.0, cutoff=3))["tau_3"]
    d = op.to_json_dict()
    assert d["dim"] == 8
    assert d["lambda_cutoff"] == 3
    assert len(d["entries"]) == 64
    assert d["entries"][0] == [0.5, 0.0]
    assert "2*j + s" in d["basis_order"]
