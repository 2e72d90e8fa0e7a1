"""Random smooth forms with exact derivatives, shared by the property tests."""

from itertools import combinations

import numpy as np

from msem.mimetic import AnalyticForm, canonical_monomial


def _term_value(term, coords, deriv_axis=None):
    c, omega, phase = term
    out = c
    for a, x in enumerate(coords):
        arg = omega[a] * x + phase[a]
        out = out * (omega[a] * np.cos(arg) if a == deriv_axis else np.sin(arg))
    return out


def _component(terms, deriv_axis=None):
    return lambda *x: sum(_term_value(t, x, deriv_axis) for t in terms)


def random_terms(rng, n, count=2, max_frequency=2.5):
    return [
        (rng.normal(), rng.uniform(0.3, max_frequency, n), rng.uniform(0, 2 * np.pi, n))
        for _ in range(count)
    ]


def random_form(rng, n, k, count=2, max_frequency=2.5):
    """Sum of separable sine products per component, with its exact derivative."""
    comps = list(combinations(range(n), k))
    terms = [random_terms(rng, n, count, max_frequency) for _ in comps]
    derivative = None
    if k < n:
        targets = list(combinations(range(n), k + 1))
        parts = [[] for _ in targets]
        for c, S in enumerate(comps):
            for a in range(n):
                if a in S:
                    continue
                sign, T = canonical_monomial((a,) + S)
                parts[targets.index(T)].append((sign, _component(terms[c], a)))
        derivative = AnalyticForm(
            n, k + 1, tuple((lambda *x, p=p: sum(s * f(*x) for s, f in p)) for p in parts)
        )
    return AnalyticForm(n, k, tuple(_component(t) for t in terms), derivative)
