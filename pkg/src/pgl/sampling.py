"""Seeded random instances for invariant checks and acceptance sweeps.

Everything here is driven by an explicit ``numpy`` generator so runs are
reproducible; nothing draws from global state.  Spaces are redrawn until the
generator matrix is comfortably well conditioned, keeping them inside the
norm engine's conditioning gates.  Almost-isometries are built as scaled
images of a space under an orthogonal change of coordinates: the image space
carries exactly the transported generators, so the map's operator norm and
co-norm are known by construction rather than estimated.
"""

from __future__ import annotations

import numpy as np

from .constructions import lp_sum
from .core import GeneratedSpace
from .maps import LinearMap, op_norm

EXPONENTS = ((1, 2), (2, 3), (1, 1))


def default_rng(seed: int = 0) -> np.random.Generator:
    return np.random.default_rng(int(seed))


def random_space(rng: np.random.Generator, p=None, max_dim: int = 2,
                 max_generators: int = 4,
                 min_singular: float = 0.25) -> GeneratedSpace:
    """A random space with unit-scale generators and a well-spread basis."""
    if p is None:
        p = EXPONENTS[int(rng.integers(0, len(EXPONENTS)))]
    dim = int(rng.integers(1, max_dim + 1))
    k = int(rng.integers(dim, max_generators + 1))
    while True:
        gens = rng.uniform(-1.0, 1.0, size=(k, dim))
        lengths = np.linalg.norm(gens, axis=1)
        if lengths.min(initial=1.0) < 0.3:
            continue
        gens = gens / lengths[:, None]
        if np.linalg.svd(gens, compute_uv=False).min() >= min_singular:
            return GeneratedSpace(p, dim, gens)


def random_vector(rng: np.random.Generator, space: GeneratedSpace,
                  scale: float = 1.0) -> np.ndarray:
    return rng.uniform(-scale, scale, size=space.dim)


def random_orthogonal(rng: np.random.Generator, dim: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.normal(size=(dim, dim)))
    return q * np.sign(np.diag(r))


def image_space(space: GeneratedSpace,
                matrix: np.ndarray) -> tuple[GeneratedSpace, LinearMap]:
    """The space carrying the transported generators, with the exact isometry.

    The image space's generators are literally ``matrix @ g`` for each
    generator g, so representations correspond one-to-one and the returned
    map preserves the generated norm exactly.
    """
    matrix = np.asarray(matrix, dtype=float)
    target = GeneratedSpace(space.p, space.dim,
                            space.generators @ matrix.T)
    return target, LinearMap(space, target, matrix)


def perturbed_isometry(rng: np.random.Generator, space: GeneratedSpace,
                       eps: float) -> LinearMap:
    """A certified eps-isometry out of the space, strict for eps > 0.

    An orthogonal change of coordinates gives an exact isometry onto the
    transported space; scaling by 1 + a with |a| <= eps / 2 then realizes
    defect |a| on both sides.
    """
    _, iso = image_space(space, random_orthogonal(rng, space.dim))
    if eps == 0.0:
        return iso
    a = float(rng.uniform(-0.5 * eps, 0.5 * eps))
    return iso.scale(1.0 + a)


def random_nonexpansive(rng: np.random.Generator, domain: GeneratedSpace,
                        codomain: GeneratedSpace,
                        floor: float = 0.2) -> LinearMap:
    """A random map scaled into the nonexpansive ball."""
    raw = LinearMap(domain, codomain,
                    rng.uniform(-1.0, 1.0,
                                size=(codomain.dim, domain.dim)))
    o = op_norm(raw)
    if o == 0.0:
        return raw
    return raw.scale(float(rng.uniform(floor, 0.95)) / o)


def padded_inclusion(space: GeneratedSpace,
                     extra: int = 1) -> tuple[GeneratedSpace, LinearMap]:
    """The sum with extra one-dimensional axes and its coordinate inclusion."""
    parts = [space] + [GeneratedSpace.lp(space.p, 1)] * extra
    s = lp_sum(parts)
    return s.space, s.inclusions[0]
