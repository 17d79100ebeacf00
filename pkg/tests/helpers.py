"""Scenario builders and hypothesis strategies shared by the test modules."""

from __future__ import annotations

import numpy as np
from hypothesis import strategies as st

from corrbc.measures import JointPmf
from corrbc.regions import AuxiliarySpec, ScenarioSpec


def noiseless(k: int = 2) -> np.ndarray:
    ch = np.zeros((k, k, k))
    for i in range(k):
        ch[i, i, i] = 1.0
    return ch


def identity_scenario(k: int = 2) -> tuple[ScenarioSpec, AuxiliarySpec]:
    """S1 = S2 = U0 = X uniform on k symbols, Y1 = Y2 = X, U1 and U2 constant."""
    aux = np.zeros((k, k, k, 1, 1))
    xm = np.zeros(aux.shape, dtype=int)
    for a in range(k):
        for b in range(k):
            aux[a, b, a if a == b else 0, 0, 0] = 1.0
    for i in range(k):
        xm[:, :, i, 0, 0] = i
    return ScenarioSpec.from_arrays(np.eye(k) / k, noiseless(k)), AuxiliarySpec(aux, xm)


def ber02_scenario() -> tuple[ScenarioSpec, AuxiliarySpec]:
    """S1 ~ Ber(0.2), S2 constant, U0 constant, U1 = U2 = S1 xor Z with Z a fair bit, X = U1."""
    aux = np.zeros((2, 1, 1, 2, 2))
    xm = np.zeros(aux.shape, dtype=int)
    for s1 in range(2):
        for z in range(2):
            u = s1 ^ z
            aux[s1, 0, 0, u, u] += 0.5
    for idx in np.ndindex(xm.shape):
        xm[idx] = idx[3]
    return ScenarioSpec.from_arrays([[0.8], [0.2]], noiseless(2)), AuxiliarySpec(aux, xm)


def constant_aux(n1: int, n2: int) -> AuxiliarySpec:
    return AuxiliarySpec(np.ones((n1, n2, 1, 1, 1)), np.zeros((n1, n2, 1, 1, 1), dtype=int))


def dirichlet(rng: np.random.Generator, shape, axis_from: int) -> np.ndarray:
    """Random array normalised over the trailing axes starting at `axis_from`."""
    a = rng.gamma(1.0, size=shape)
    axes = tuple(range(axis_from, len(shape)))
    return a / a.sum(axis=axes, keepdims=True)


def random_scenario(rng: np.random.Generator, sizes=(2, 2), cards=(2, 2, 2), nx: int = 2,
                    ny=(2, 2)) -> tuple[ScenarioSpec, AuxiliarySpec]:
    n1, n2 = sizes
    src = dirichlet(rng, (n1, n2), 0)
    ch = dirichlet(rng, (nx,) + tuple(ny), 1)
    aux = dirichlet(rng, (n1, n2) + tuple(cards), 2)
    xm = rng.integers(0, nx, size=aux.shape)
    return ScenarioSpec.from_arrays(src, ch), AuxiliarySpec(aux, xm)


def block_scenario(rng: np.random.Generator) -> tuple[ScenarioSpec, AuxiliarySpec]:
    """A source with two disconnected support blocks, so the common part has two values."""
    src = np.zeros((4, 4))
    src[:2, :2] = rng.gamma(1.0, size=(2, 2))
    src[2:, 2:] = rng.gamma(1.0, size=(2, 2))
    src /= src.sum()
    ch = dirichlet(rng, (2, 2, 2), 1)
    aux = dirichlet(rng, (4, 4, 2, 2, 2), 2)
    xm = rng.integers(0, 2, size=aux.shape)
    return ScenarioSpec.from_arrays(src, ch), AuxiliarySpec(aux, xm)


def random_pmf(rng: np.random.Generator, names, size: int = 2, sparsity: float = 0.0) -> JointPmf:
    shape = (size,) * len(names)
    a = rng.gamma(1.0, size=shape)
    if sparsity:
        a[rng.random(shape) < sparsity] = 0.0
        if a.sum() == 0:
            a.flat[0] = 1.0
    return JointPmf.from_array(tuple(names), a / a.sum())


seeds = st.integers(min_value=0, max_value=2**32 - 1)
