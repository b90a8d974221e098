import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from wnchaos.errors import DomainError
from wnchaos.gaussian_field import (
    brownian_increments,
    brownian_increments_batch,
    noise_grid,
    noise_grid_batch,
    sheet_from_grid,
)
from wnchaos.ito import AdaptedGridProcess, ito_1d, ito_2d, wick_ito_demo


def within_3se(x, target):
    return abs(x.mean() - target) < 3 * x.std(ddof=1) / math.sqrt(x.size)


def test_ito_1d_constant_and_zero():
    dB = brownian_increments(0, 0, 64)
    assert ito_1d(AdaptedGridProcess.deterministic(np.ones(64)), dB) == pytest.approx(dB.sum(), abs=1e-14)
    assert ito_1d(AdaptedGridProcess.deterministic(np.zeros(64)), dB) == 0.0


def test_shape_mismatch():
    with pytest.raises(DomainError):
        ito_1d(AdaptedGridProcess.deterministic(np.ones(3)), np.ones(4))
    g = noise_grid(0, 0, 4, 4)
    with pytest.raises(DomainError):
        ito_2d(AdaptedGridProcess.deterministic(np.ones((4, 3))), g)
    with pytest.raises(DomainError):
        ito_2d(AdaptedGridProcess.deterministic(np.ones(16)), g)


def test_path_integrand_uses_left_endpoints():
    dB = np.array([1.0, 2.0, -0.5])
    assert np.array_equal(AdaptedGridProcess.path(dB).values, [0.0, 1.0, 3.0])


def test_ito_formula_gap_halves():
    fine = brownian_increments_batch(5, range(10_000), 2048)
    ms = []
    for steps in (256, 512, 1024, 2048):
        dB = fine.reshape(10_000, steps, -1).sum(axis=2)
        ito = ito_1d(AdaptedGridProcess.path(dB), dB)
        gap = ito - (0.5 * dB.sum(axis=1) ** 2 - 0.5)
        ms.append(np.mean(gap * gap))
    ratios = [b / a for a, b in zip(ms, ms[1:])]
    assert all(0.4 <= r <= 0.6 for r in ratios), ratios


def test_ito_2d_constant_integrand():
    g = noise_grid(1, 0, 16, 16)
    one = AdaptedGridProcess.deterministic(np.ones((16, 16)))
    assert ito_2d(one, g) == pytest.approx(sheet_from_grid(g, 16, 16), abs=1e-13)


def test_ito_2d_isometry_deterministic():
    n = 8
    t = (np.arange(n) + 0.5) / n
    sigma = np.outer(1 + t, np.cos(t))
    dB = noise_grid_batch(2, range(100_000), n, n)
    v = ito_2d(AdaptedGridProcess.deterministic(sigma), dB)
    assert within_3se(v * v, float((sigma ** 2).sum() / n ** 2))
    assert within_3se(v, 0.0)


def test_ito_2d_adapted_zero_mean():
    dB = noise_grid_batch(3, range(100_000), 8, 8)
    B = AdaptedGridProcess.sheet(dB).values
    v = ito_2d(AdaptedGridProcess(B * B + B, 2), dB)
    assert within_3se(v, 0.0)


def test_sheet_integrand_is_strictly_lower_left():
    dB = np.arange(1.0, 10.0).reshape(3, 3)
    Y = AdaptedGridProcess.sheet(dB).values
    assert Y[0].tolist() == [0, 0, 0] and Y[:, 0].tolist() == [0, 0, 0]
    assert Y[2, 2] == dB[:2, :2].sum()


@given(st.floats(-3, 3), st.floats(-3, 3))
def test_ito_2d_linear(a, b):
    g = noise_grid(4, 0, 6, 6)
    Y1 = AdaptedGridProcess.sheet(g.dB)
    Y2 = AdaptedGridProcess.deterministic(np.linspace(-1, 1, 36).reshape(6, 6))
    lhs = ito_2d(Y1 * a + Y2 * b, g)
    rhs = a * ito_2d(Y1, g) + b * ito_2d(Y2, g)
    assert lhs == pytest.approx(rhs, abs=1e-12)


def test_wick_ito_demo_identity():
    for seed in range(5):
        rep = wick_ito_demo(T=0.7, steps=512, seed=seed)
        assert abs(rep.gap_formula_wick) <= 1e-9 * max(1.0, abs(rep.ito_formula))


def test_wick_ito_demo_refines():
    fine = brownian_increments(0, 1, 4096)
    gaps = [abs(wick_ito_demo(dB=fine.reshape(s, -1).sum(axis=1)).gap_ito_formula)
            for s in (16, 4096)]
    # single path: exact telescoping gives gap = (T - sum dB^2)/2
    for s, gap in zip((16, 4096), gaps):
        dB = fine.reshape(s, -1).sum(axis=1)
        assert gap == pytest.approx(abs(0.5 * (1.0 - np.sum(dB * dB))), abs=1e-12)


def test_wick_ito_demo_degenerate():
    rep = wick_ito_demo(T=0.0, steps=8)
    assert (rep.ito, rep.ito_formula, rep.wick) == (0.0, 0.0, 0.0)
