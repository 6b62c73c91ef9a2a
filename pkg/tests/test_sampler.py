import numpy as np
import pytest
from scipy import stats

from isingmix import ComponentParams, Dataset, MixtureModel, SamplerConfig, gibbs_sample, sample_mixture
from isingmix.errors import InvalidInputError, InvalidModelError
from isingmix.exact import partition_function
from isingmix.sampler import ALL_SAME
from oracles import random_component, random_ising, total_variation


def empirical_distribution(data):
    q, N = data.q, data.N
    idx = data.states @ (q ** np.arange(N - 1, -1, -1))
    return np.bincount(idx, minlength=q ** N) / data.B


@pytest.mark.parametrize("kw", [dict(burn_in=-1), dict(thin=0), dict(init="checkerboard")])
def test_config_validation(kw):
    with pytest.raises(InvalidInputError):
        SamplerConfig(**kw)


def test_count_must_be_positive():
    with pytest.raises(InvalidInputError):
        gibbs_sample(ComponentParams.zeros(3), 0)


def test_zero_model_gives_unbiased_spins():
    B = 20000
    d = gibbs_sample(ComponentParams.zeros(6), B, SamplerConfig(seed=1, burn_in=10, thin=1))
    assert d.B == B and d.N == 6
    assert np.all(np.abs(d.spins().mean(axis=0)) <= 4 / np.sqrt(B))


@pytest.mark.invariant
@pytest.mark.parametrize("q", [2, 3])
def test_determinism(q):
    p, _ = random_component(np.random.default_rng(0), 5, q)
    cfg = SamplerConfig(seed=42, burn_in=20, thin=3)
    a, b = gibbs_sample(p, 300, cfg), gibbs_sample(p, 300, cfg)
    assert a.states.tobytes() == b.states.tobytes()
    c = gibbs_sample(p, 300, SamplerConfig(seed=43, burn_in=20, thin=3))
    assert a != c


def test_all_same_start_and_short_chains():
    p = ComponentParams.infinite_range(50, 3.0, 0.05)
    d = gibbs_sample(p, 3, SamplerConfig(seed=0, burn_in=0, thin=1, init=ALL_SAME))
    assert d.B == 3


def test_long_runs_span_several_random_blocks():
    # 600 sweeps cross the internal block boundary; thinning must stay aligned
    p, _ = random_ising(np.random.default_rng(2), 4)
    full = gibbs_sample(p, 600, SamplerConfig(seed=3, burn_in=7, thin=1))
    thinned = gibbs_sample(p, 200, SamplerConfig(seed=3, burn_in=7, thin=3))
    assert np.array_equal(full.states[2::3], thinned.states)


@pytest.mark.parametrize("q,N", [(2, 5), (3, 3)])
def test_matches_exact_distribution(q, N):
    p, _ = random_component(np.random.default_rng(7), N, q)
    d = gibbs_sample(p, 60000, SamplerConfig(seed=5, burn_in=200, thin=2))
    assert total_variation(empirical_distribution(d), partition_function(p).state_probabilities) <= 0.03


@pytest.mark.invariant
def test_total_variation_shrinks_with_budget():
    p, _ = random_ising(np.random.default_rng(11), 6)
    exact = partition_function(p).state_probabilities
    tv = [total_variation(empirical_distribution(gibbs_sample(p, B, SamplerConfig(seed=9, burn_in=100, thin=2))),
                          exact) for B in (1000, 10000, 100000)]
    assert tv[0] > tv[1] > tv[2]


def test_infinite_range_ordering():
    mags = {}
    for J in (1.0, 3.0):
        d = gibbs_sample(ComponentParams.infinite_range(1000, J, 0.001), 100, SamplerConfig(seed=0))
        mags[J] = np.abs(d.spins().mean(axis=1)).mean()
    # reference run: about 0.16 at J=1 and 0.99 at J=3
    assert mags[1.0] < 0.35
    assert mags[3.0] > 0.9


def test_infinite_range_kernel_matches_generic_kernel():
    rng = np.random.default_rng(4)
    h = rng.normal(0, 0.3, 6)
    tied = ComponentParams.infinite_range(6, 0.4, 0.8, h)
    free = ComponentParams.ising(h, np.triu(np.full((6, 6), 0.4), 1), 0.8)
    cfg = SamplerConfig(seed=1, burn_in=5, thin=2)
    assert np.array_equal(gibbs_sample(tied, 200, cfg).states, gibbs_sample(free, 200, cfg).states)


# -- mixtures ----------------------------------------------------------------------

def test_degenerate_mixing_gives_one_label():
    m = MixtureModel([1.0, 0.0], [ComponentParams.zeros(4), ComponentParams.zeros(4)])
    out = sample_mixture(m, 50, SamplerConfig(seed=0, burn_in=5, thin=1))
    assert np.all(out.labels == 0)


def test_label_frequencies():
    B = 10000
    m = MixtureModel([0.5, 0.5], [ComponentParams.zeros(3), ComponentParams.zeros(3)])
    out = sample_mixture(m, B, SamplerConfig(seed=4, burn_in=2, thin=1))
    assert abs(np.mean(out.labels == 0) - 0.5) <= 4 * np.sqrt(0.25 / B)
    assert set(np.unique(out.labels)) <= {0, 1}


def test_mixture_rejects_invalid_pi():
    m = MixtureModel([0.5, 0.5], [ComponentParams.zeros(3)] * 2)
    object.__setattr__(m, "pi", np.array([0.7, 0.7]))
    with pytest.raises(InvalidModelError):
        sample_mixture(m, 10)


def test_mixture_sampling_is_deterministic():
    rng = np.random.default_rng(0)
    m = MixtureModel([0.3, 0.7], [random_component(rng, 4, 3)[0], random_component(rng, 4, 3)[0]])
    cfg = SamplerConfig(seed=8, burn_in=10, thin=2)
    a, b = sample_mixture(m, 200, cfg), sample_mixture(m, 200, cfg)
    assert a.data == b.data and np.array_equal(a.labels, b.labels)


def test_mixture_matches_concatenated_components():
    beta, N, B = 0.001, 1000, 200
    comps = [ComponentParams.infinite_range(N, J, beta) for J in (1.0, 3.0)]
    mixed = sample_mixture(MixtureModel([0.5, 0.5], comps), B, SamplerConfig(seed=21))
    concat = Dataset.concatenate(gibbs_sample(comps[0], B // 2, SamplerConfig(seed=22)),
                                 gibbs_sample(comps[1], B // 2, SamplerConfig(seed=23)))
    m1 = np.abs(mixed.data.spins().mean(axis=1))
    m2 = np.abs(concat.spins().mean(axis=1))
    assert stats.ks_2samp(m1, m2).pvalue > 0.01
