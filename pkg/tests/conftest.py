"""Shared strategies and builders for the test suite."""

import numpy as np
from hypothesis import strategies as st

from pgl import GeneratedSpace

EXPONENTS = [(1, 2), (2, 3), (1, 1)]


@st.composite
def generated_spaces(draw, max_dim=3, max_extra=2, exponents=EXPONENTS):
    """Small, well-conditioned spaces with integer generators."""
    p = draw(st.sampled_from(exponents))
    dim = draw(st.integers(1, max_dim))
    k = dim + draw(st.integers(0, max_extra))
    entry = st.integers(-3, 3)
    rows = []
    for i in range(dim):
        # triangular first block: always spanning, never degenerate
        row = [0] * dim
        row[i] = draw(st.integers(1, 3))
        for j in range(i + 1, dim):
            row[j] = draw(entry)
        rows.append(row)
    for _ in range(k - dim):
        row = [draw(entry) for _ in range(dim)]
        if not any(row):
            row[draw(st.integers(0, dim - 1))] = 1
        rows.append(row)
    gens = np.array(rows, dtype=float)
    return GeneratedSpace(p, dim, gens)


@st.composite
def space_vectors(draw, space):
    return np.array(
        [draw(st.integers(-5, 5)) for _ in range(space.dim)], dtype=float
    )


@st.composite
def spaces_with_vectors(draw, max_dim=3, max_extra=2, n_vectors=1):
    space = draw(generated_spaces(max_dim=max_dim, max_extra=max_extra))
    vectors = [draw(space_vectors(space)) for _ in range(n_vectors)]
    return (space, *vectors)
