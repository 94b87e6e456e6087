import numpy as np
import pytest
from hypothesis import strategies as st

from mrfselect import ProblemDims, Sample, joint_from_potentials
from mrfselect.truth import chain_spec, random_pairwise_spec

CHAIN_FIELDS = (0.2, -0.1, 0.3)


@pytest.fixture(scope="session")
def chain_model():
    return joint_from_potentials(chain_spec(3, 2, 1.0, fields=CHAIN_FIELDS))


def random_sample(rng, n, d, A):
    return Sample(ProblemDims(d, A), rng.integers(0, A, size=(n, d)))


def model_sample(rng, d, A, n, edge_prob=0.5, scale=1.0):
    from mrfselect import exact_sample

    spec = random_pairwise_spec(ProblemDims(d, A), rng, edge_prob, scale)
    return exact_sample(joint_from_potentials(spec), n, int(rng.integers(2**32)))


@st.composite
def samples(draw, max_d=4, max_A=3, max_n=60):
    d = draw(st.integers(1, max_d))
    A = draw(st.integers(2, max_A))
    n = draw(st.integers(2, max_n))
    rows = draw(st.lists(st.lists(st.integers(0, A - 1), min_size=d, max_size=d), min_size=n, max_size=n))
    return Sample(ProblemDims(d, A), np.array(rows))
