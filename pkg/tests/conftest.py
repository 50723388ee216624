"""Shared fixtures: the large deterministic instance is built once per session."""
import numpy as np
import pytest

from msmlab.model import ModelParams, expected_matrix, gen_fitness


@pytest.fixture(scope="session")
def det_instance_n1e4():
    """(params, fitness, P) for the n = 10^4, alpha = 0.5 deterministic model."""
    params = ModelParams(n=10**4, alpha=0.5)
    fv = gen_fitness(params)
    P = expected_matrix(fv, params.epsilon_n)
    return params, fv, P


@pytest.fixture(scope="session")
def eig_P_n1e4(det_instance_n1e4):
    """Full eigendecomposition of the n = 10^4 expected matrix (~2.5 min)."""
    _, _, P = det_instance_n1e4
    return np.linalg.eigh(P.entries)


@pytest.fixture(scope="session")
def eigvals_P_n1e4(eig_P_n1e4):
    return eig_P_n1e4[0]
