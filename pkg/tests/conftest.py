import numpy as np
import pytest

from qfpsim import (QfpParams, build_superoperator, gaussian_reference,
                    solve_steady)


def canonical():
    """Strict-Lindblad reference set used throughout (delta = 0.4375)."""
    return QfpParams(omega=1.0, gamma=0.5, d_pp=1.0, d_qq=0.5, d_pq=0.0)


def purity_point():
    """Lemma-forced pure limiting point: omega=1, gamma=0.6 gives
    d_qq = gamma/(2 sqrt(omega^2-gamma^2)) = 0.375, d_pq = -gamma*d_qq,
    d_pp = omega^2*d_qq, so delta = 0.140625 - 0.050625 - 0.09 = 0."""
    om, ga = 1.0, 0.6
    d_qq = ga / (2.0 * np.sqrt(om**2 - ga**2))
    return QfpParams(omega=om, gamma=ga, d_pp=om**2 * d_qq, d_qq=d_qq,
                     d_pq=-ga * d_qq)


def random_strict_params(rng, max_moment=3.2):
    """Seeded StrictLindblad sets whose steady state fits n = 40 comfortably."""
    from qfpsim import gaussian_steady_params

    while True:
        p = QfpParams(
            omega=rng.uniform(0.8, 1.4),
            gamma=rng.uniform(0.3, 0.8),
            d_pp=rng.uniform(0.5, 1.2),
            d_qq=rng.uniform(0.2, 0.6),
            d_pq=rng.uniform(-0.1, 0.1),
        )
        if p.delta() < 0.05:
            continue
        gs = gaussian_steady_params(p)
        q2 = gs.q22 / (2 * p.gamma * p.omega**2)
        v2 = gs.q11 / (2 * p.gamma)
        if max(q2, v2) <= max_moment:
            return p


@pytest.fixture(scope="session")
def canonical_params():
    return canonical()


@pytest.fixture(scope="session")
def purity_params():
    return purity_point()


@pytest.fixture(scope="session")
def canonical_steady_40(canonical_params):
    superop = build_superoperator(canonical_params, 40)
    return solve_steady(superop)


@pytest.fixture(scope="session")
def canonical_gaussian_40(canonical_params):
    return gaussian_reference(canonical_params, 40)


@pytest.fixture(scope="session")
def purity_steady_40(purity_params):
    superop = build_superoperator(purity_params, 40)
    return solve_steady(superop)
