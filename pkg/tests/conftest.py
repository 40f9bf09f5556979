import numpy as np
import pytest
from threadpoolctl import threadpool_limits

from cdrsim import model, reformulation


@pytest.fixture(autouse=True, scope="session")
def _single_threaded_blas():
    # threaded BLAS kernels lose badly on the tiny matrices used throughout
    with threadpool_limits(limits=1, user_api="blas"):
        yield


def make_instance(antennas, power, seed, relay_budget=None):
    """One seeded channel draw plus its quadratic forms."""
    p_r = relay_budget if relay_budget is not None else power
    rng = np.random.default_rng(seed)
    cs = model.sample_channels(model.SystemParams(antennas, power, p_r), rng)
    forms = reformulation.build_forms(cs, power, p_r)
    return cs, forms, rng


def batch_objective(forms, vecs):
    """Rate-product objective G for a (N, M^2) batch of vectors."""

    def quad(X):
        return np.einsum("ni,ij,nj->n", vecs.conj(), X, vecs).real

    return (quad(forms.A) / quad(forms.B)) * (quad(forms.C) / quad(forms.D))


def random_unit(rng, n, count=1):
    v = rng.standard_normal((count, n)) + 1j * rng.standard_normal((count, n))
    return v / np.linalg.norm(v, axis=1, keepdims=True)
