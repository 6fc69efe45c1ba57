"""Sawyer-type testing constants, direct and adjoint.

Every constant is a supremum over all atoms J of a ratio

    ( integral over J of (chain sum restricted to J)^power  ) / mass(J).

The chain sums for all J are produced in O(atoms * depth) by accumulating
suffix sums along leaf ancestor chains, so no per-J rescan is needed.

Degenerate two-weight pairs are legitimate inputs: a zero-mass J whose
numerator is positive makes the constant +inf (``math.inf``), which compares
larger than every finite float downstream.
"""

from __future__ import annotations

import math

import numpy as np

from .lattice import Atom, Lattice
from .measure import Measure, conjugate, safe_divide
from .paraproduct import EdgeCoefficients, NonnegativeCoefficients, Symbol


def _sup_ratio(
    lat: Lattice,
    numerators: list[np.ndarray],
    denom_levels: list[np.ndarray],
) -> float:
    """sup over atoms of numerator/denominator with the +inf convention."""
    best = 0.0
    for d in range(lat.depth + 1):
        num, den = numerators[d], denom_levels[d]
        if np.any((den == 0.0) & (num > 0.0)):
            return math.inf
        ratios = safe_divide(num, den)
        if ratios.size:
            best = max(best, float(ratios.max()))
    return best


def _child_attached_numerators(
    lat: Lattice, child_vals: list[np.ndarray], power: float, weight: np.ndarray
) -> list[np.ndarray]:
    """Numerators for sums whose terms sit on child atoms (generations 1..N).

    For the cut at generation d the leaf value is the chain sum over
    generations > d; the numerator of atom J at depth d integrates
    (chain sum)^power against ``weight`` over J's leaf block.
    """
    suffix = [np.zeros(lat.n_leaves) for _ in range(lat.depth + 1)]
    for d in range(lat.depth - 1, -1, -1):
        suffix[d] = suffix[d + 1] + lat.spread(child_vals[d + 1], d + 1)
    numerators = []
    for d in range(lat.depth + 1):
        integrand = suffix[d] ** power * weight
        numerators.append(lat.block_sums(integrand)[d])
    return numerators


def _parent_attached_numerators(
    lat: Lattice, parent_vals: list[np.ndarray], power: float, weight: np.ndarray
) -> list[np.ndarray]:
    """Same as above for sums whose terms sit on internal atoms (0..N-1);
    the cut at depth d includes the atom J itself when J is internal."""
    suffix = [np.zeros(lat.n_leaves) for _ in range(lat.depth + 1)]
    for d in range(lat.depth - 1, -1, -1):
        suffix[d] = suffix[d + 1] + lat.spread(parent_vals[d], d)
    numerators = []
    for d in range(lat.depth + 1):
        integrand = suffix[d] ** power * weight
        numerators.append(lat.block_sums(integrand)[d])
    return numerators


def direct_testing_symbol(symbol: Symbol, p: float, mu: Measure) -> float:
    """Direct testing constant of the paraproduct itself: for each J,
    integrate |sum over internal I inside J of b_I|^p against the symbol's
    reference measure and compare with mu(J)."""
    if p <= 1:
        raise ValueError(f"p must be > 1, got {p}")
    lat = symbol.lattice
    nu = symbol.nu
    child_vals = [None] + [symbol.beta.child_values(e) for e in range(1, lat.depth + 1)]
    # signed chain: accumulate the raw values, take |.|^p afterwards
    suffix = [np.zeros(lat.n_leaves) for _ in range(lat.depth + 1)]
    for d in range(lat.depth - 1, -1, -1):
        suffix[d] = suffix[d + 1] + lat.spread(child_vals[d + 1], d + 1)
    numerators = []
    for d in range(lat.depth + 1):
        integrand = np.abs(suffix[d]) ** p * nu.leaf_mass
        numerators.append(lat.block_sums(integrand)[d])
    sup = _sup_ratio(lat, numerators, mu.level_mass)
    return sup ** (1.0 / p) if math.isfinite(sup) else math.inf


def direct_testing(
    beta: EdgeCoefficients, p: float, q: float, mu: Measure, nu: Measure
) -> float:
    """Direct testing constant of the vector paraproduct:

        B = sup_J [ int_J (sum_{I in J, internal} |b_I|^q)^(p/q) d nu / mu(J) ]^(1/p).
    """
    if p <= 1 or q <= 1:
        raise ValueError(f"p and q must be > 1, got p={p}, q={q}")
    lat = beta.lattice
    child_vals = [None] + [
        np.abs(beta.child_values(e)) ** q for e in range(1, lat.depth + 1)
    ]
    numerators = _child_attached_numerators(lat, child_vals, p / q, nu.leaf_mass)
    sup = _sup_ratio(lat, numerators, mu.level_mass)
    return sup ** (1.0 / p) if math.isfinite(sup) else math.inf


def _adjoint_parent_terms(
    beta: EdgeCoefficients, q: float, mu: Measure, nu: Measure
) -> list[np.ndarray]:
    """Per internal atom, the constant mass(I)^(-1) * int_I |b_I|^q d nu.

    A massless atom whose component still carries nu-mass has no finite
    term; the caller turns that into +inf.
    """
    lat = beta.lattice
    terms = []
    for d in range(lat.depth):
        nu_child = nu.level_mass[d + 1].reshape(-1, lat.arity)
        integ = (np.abs(beta.level(d)) ** q * nu_child).sum(axis=1)
        dead = (mu.level_mass[d] == 0.0) & (integ > 0.0)
        if np.any(dead):
            return None  # type: ignore[return-value]
        terms.append(safe_divide(integ, mu.level_mass[d]))
    return terms


def adjoint_testing(
    beta: EdgeCoefficients, p: float, q: float, mu: Measure, nu: Measure
) -> float:
    """Adjoint testing constant (requires p > q so that r = p/q has a conjugate):

        B* = sup_J [ int_J (sum_{I in J, internal} t_I 1_I)^(r') d mu / nu(J) ]^(1/r'),

    with t_I = (nu(I)/mu(I)) * nu-average over I of |b_I|^q, i.e.
    mass_mu(I)^(-1) int_I |b_I|^q d nu.
    """
    if q <= 1:
        raise ValueError(f"q must be > 1, got {q}")
    if p <= q:
        raise ValueError(f"adjoint testing needs p > q, got p={p}, q={q}")
    r = p / q
    r_prime = r / (r - 1.0)
    lat = beta.lattice
    terms = _adjoint_parent_terms(beta, q, mu, nu)
    if terms is None:
        return math.inf
    numerators = _parent_attached_numerators(lat, terms, r_prime, mu.leaf_mass)
    sup = _sup_ratio(lat, numerators, nu.level_mass)
    return sup ** (1.0 / r_prime) if math.isfinite(sup) else math.inf


def adjoint_witness_data(
    beta: EdgeCoefficients, p: float, q: float, mu: Measure, nu: Measure, top: int = 3
) -> tuple[float, list[tuple[Atom, np.ndarray]]]:
    """Adjoint constant together with the atoms attaining the largest ratios
    and their restricted chain-sum leaf profiles (used as certificate inputs
    by the norm estimator)."""
    if p <= q:
        raise ValueError(f"adjoint testing needs p > q, got p={p}, q={q}")
    r = p / q
    r_prime = r / (r - 1.0)
    lat = beta.lattice
    terms = _adjoint_parent_terms(beta, q, mu, nu)
    if terms is None:
        return math.inf, []
    suffix = [np.zeros(lat.n_leaves) for _ in range(lat.depth + 1)]
    for d in range(lat.depth - 1, -1, -1):
        suffix[d] = suffix[d + 1] + lat.spread(terms[d], d)
    scored: list[tuple[float, Atom, np.ndarray]] = []
    best = 0.0
    for d in range(lat.depth + 1):
        integrand = suffix[d] ** r_prime * mu.leaf_mass
        nums = lat.block_sums(integrand)[d]
        dens = nu.level_mass[d]
        if np.any((dens == 0.0) & (nums > 0.0)):
            return math.inf, []
        ratios = safe_divide(nums, dens)
        best = max(best, float(ratios.max()) if ratios.size else 0.0)
        order = np.argsort(ratios)[::-1][:top]
        for i in order:
            if ratios[i] <= 0.0:
                continue
            atom = Atom(d, int(i))
            profile = np.zeros(lat.n_leaves)
            sl = lat.leaf_slice(atom)
            profile[sl] = suffix[d][sl]
            scored.append((float(ratios[i]), atom, profile))
    scored.sort(key=lambda t: -t[0])
    witnesses = [(atom, profile) for _, atom, profile in scored[:top]]
    return best ** (1.0 / r_prime), witnesses


def positive_operator_testing(
    alpha: NonnegativeCoefficients, p: float, mu: Measure, nu: Measure
) -> tuple[float, float]:
    """Both testing constants of the shifted positive operator.

    Direct:  B^p  = sup_J int_J (sum_{I in J} mu(I) a_I)^p d nu / mu(J).
    Adjoint: B*^(p') = sup_J int_J (sum_{I in J} (int_I a_I d nu) 1_I)^(p') d mu / nu(J).

    The adjoint sum integrates each coefficient step function against nu; that
    is the quantity produced by applying the formal adjoint to an indicator,
    and the one the decomposition proof consumes.
    """
    if p <= 1:
        raise ValueError(f"p must be > 1, got {p}")
    p_prime = conjugate(p)
    lat = alpha.lattice

    child_vals = [None] + [
        alpha.child_values(e) * np.repeat(mu.level_mass[e - 1], lat.arity)
        for e in range(1, lat.depth + 1)
    ]
    nums_direct = _child_attached_numerators(lat, child_vals, p, nu.leaf_mass)
    sup_direct = _sup_ratio(lat, nums_direct, mu.level_mass)

    parent_vals = [
        (alpha.level(d) * nu.level_mass[d + 1].reshape(-1, lat.arity)).sum(axis=1)
        for d in range(lat.depth)
    ]
    nums_adj = _parent_attached_numerators(lat, parent_vals, p_prime, mu.leaf_mass)
    sup_adj = _sup_ratio(lat, nums_adj, nu.level_mass)

    b = sup_direct ** (1.0 / p) if math.isfinite(sup_direct) else math.inf
    b_star = sup_adj ** (1.0 / p_prime) if math.isfinite(sup_adj) else math.inf
    return b, b_star
