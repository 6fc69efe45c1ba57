"""Naive reference implementations, straight from the definitions.

Everything here is plain Python loops over subtree leaves and atoms; no
shared kernels with the production code.  These are the independent oracles
the vectorized implementations are checked against.
"""

from __future__ import annotations

import math

import numpy as np

from martpara.lattice import Atom, Lattice


def leaves_of(lat: Lattice, atom: Atom) -> range:
    width = lat.arity ** (lat.depth - atom.depth)
    return range(atom.index * width, (atom.index + 1) * width)


def naive_mass(lat: Lattice, mass: np.ndarray, atom: Atom) -> float:
    return sum(mass[j] for j in leaves_of(lat, atom))


def naive_integral(lat: Lattice, f, mass, atom: Atom) -> float:
    return sum(f[j] * mass[j] for j in leaves_of(lat, atom))


def naive_average(lat: Lattice, f, mass, atom: Atom) -> float:
    m = naive_mass(lat, mass, atom)
    if m == 0.0:
        return 0.0
    return naive_integral(lat, f, mass, atom) / m


def internal_atoms(lat: Lattice):
    for d in range(lat.depth):
        for i in range(lat.arity ** d):
            yield Atom(d, i)


def child_slot(lat: Lattice, child: Atom) -> int:
    return child.index % lat.arity


def beta_value(beta, atom: Atom, slot: int) -> float:
    return float(beta.level(atom.depth)[atom.index, slot])


def component_leaves(lat: Lattice, beta, atom: Atom) -> np.ndarray:
    out = np.zeros(lat.n_leaves)
    for k in range(lat.arity):
        child = Atom(atom.depth + 1, atom.index * lat.arity + k)
        for j in leaves_of(lat, child):
            out[j] = beta_value(beta, atom, k)
    return out


def naive_paraproduct(lat: Lattice, beta, f, mu_mass) -> np.ndarray:
    out = np.zeros(lat.n_leaves)
    for atom in internal_atoms(lat):
        avg = naive_average(lat, f, mu_mass, atom)
        out += avg * component_leaves(lat, beta, atom)
    return out


def naive_vector_paraproduct(lat: Lattice, beta, f, mu_mass) -> dict[Atom, float]:
    out = {}
    for atom in internal_atoms(lat):
        avg = naive_average(lat, f, mu_mass, atom)
        for k in range(lat.arity):
            child = Atom(atom.depth + 1, atom.index * lat.arity + k)
            out[child] = avg * beta_value(beta, atom, k)
    return out


def naive_sequence_norm(lat: Lattice, field: dict[Atom, float], p, q, nu_mass) -> float:
    total = 0.0
    for j in range(lat.n_leaves):
        chain = 0.0
        for d in range(1, lat.depth + 1):
            atom = Atom(d, j // lat.arity ** (lat.depth - d))
            chain += abs(field.get(atom, 0.0)) ** q
        total += chain ** (p / q) * nu_mass[j]
    return total ** (1.0 / p)


def naive_power(lat: Lattice, beta, f, q, mu_mass) -> np.ndarray:
    out = np.zeros(lat.n_leaves)
    for atom in internal_atoms(lat):
        avg = naive_average(lat, f, mu_mass, atom)
        out += abs(avg) ** q * np.abs(component_leaves(lat, beta, atom)) ** q
    return out


def naive_shifted(lat: Lattice, beta, g, q, mu_mass) -> np.ndarray:
    out = np.zeros(lat.n_leaves)
    for atom in internal_atoms(lat):
        avg = naive_average(lat, g, mu_mass, atom)
        out += avg * np.abs(component_leaves(lat, beta, atom)) ** q
    return out


def naive_positive(lat: Lattice, alpha, f, mu_mass) -> np.ndarray:
    out = np.zeros(lat.n_leaves)
    for atom in internal_atoms(lat):
        integ = naive_integral(lat, f, mu_mass, atom)
        out += integ * component_leaves(lat, alpha, atom)
    return out


def naive_square_function(lat: Lattice, f, mass) -> np.ndarray:
    acc = np.zeros(lat.n_leaves)
    for atom in internal_atoms(lat):
        base = naive_average(lat, f, mass, atom)
        for k in range(lat.arity):
            child = Atom(atom.depth + 1, atom.index * lat.arity + k)
            jump = naive_average(lat, f, mass, child) - base
            for j in leaves_of(lat, child):
                acc[j] += jump ** 2
    return np.sqrt(acc)


def naive_maximal(lat: Lattice, f, mass) -> np.ndarray:
    out = np.zeros(lat.n_leaves)
    for j in range(lat.n_leaves):
        best = 0.0
        for d in range(lat.depth + 1):
            atom = Atom(d, j // lat.arity ** (lat.depth - d))
            best = max(best, abs(naive_average(lat, f, mass, atom)))
        out[j] = best
    return out


def _atoms_inside(lat: Lattice, top: Atom):
    for d in range(top.depth, lat.depth + 1):
        lo = top.index * lat.arity ** (d - top.depth)
        for i in range(lo, lo + lat.arity ** (d - top.depth)):
            yield Atom(d, i)


def naive_direct_testing(lat: Lattice, beta, p, q, mu_mass, nu_mass, tops=None) -> float:
    """Restricting ``tops`` to a subset of atoms gives the restricted sup."""
    best = 0.0
    tops = list(tops) if tops is not None else [
        Atom(d, i) for d in range(lat.depth + 1) for i in range(lat.arity ** d)
    ]
    for top in tops:
        num = 0.0
        for j in leaves_of(lat, top):
            chain = 0.0
            for atom in _atoms_inside(lat, top):
                if atom.depth == lat.depth:
                    continue
                if j in leaves_of(lat, atom):
                    slot = (j // lat.arity ** (lat.depth - atom.depth - 1)) % lat.arity
                    chain += abs(beta_value(beta, atom, slot)) ** q
            num += chain ** (p / q) * nu_mass[j]
        den = naive_mass(lat, mu_mass, top)
        if den == 0.0:
            if num > 0.0:
                return math.inf
            continue
        best = max(best, num / den)
    return best ** (1.0 / p)


def naive_adjoint_testing(lat: Lattice, beta, p, q, mu_mass, nu_mass) -> float:
    r = p / q
    rp = r / (r - 1.0)
    terms = {}
    for atom in internal_atoms(lat):
        integ = 0.0
        for k in range(lat.arity):
            child = Atom(atom.depth + 1, atom.index * lat.arity + k)
            integ += abs(beta_value(beta, atom, k)) ** q * naive_mass(lat, nu_mass, child)
        m = naive_mass(lat, mu_mass, atom)
        if m == 0.0:
            if integ > 0.0:
                return math.inf
            terms[atom] = 0.0
        else:
            terms[atom] = integ / m
    best = 0.0
    for d in range(lat.depth + 1):
        for i in range(lat.arity ** d):
            top = Atom(d, i)
            num = 0.0
            for j in leaves_of(lat, top):
                chain = 0.0
                for atom in _atoms_inside(lat, top):
                    if atom.depth == lat.depth:
                        continue
                    if j in leaves_of(lat, atom):
                        chain += terms[atom]
                num += chain ** rp * mu_mass[j]
            den = naive_mass(lat, nu_mass, top)
            if den == 0.0:
                if num > 0.0:
                    return math.inf
                continue
            best = max(best, num / den)
    return best ** (1.0 / rp)


def naive_positive_testing(lat: Lattice, alpha, p, mu_mass, nu_mass) -> tuple[float, float]:
    pp = p / (p - 1.0)
    best_direct = 0.0
    best_adjoint = 0.0
    for d in range(lat.depth + 1):
        for i in range(lat.arity ** d):
            top = Atom(d, i)
            num_d = 0.0
            num_a = 0.0
            for j in leaves_of(lat, top):
                chain_d = 0.0
                chain_a = 0.0
                for atom in _atoms_inside(lat, top):
                    if atom.depth == lat.depth or j not in leaves_of(lat, atom):
                        continue
                    slot = (j // lat.arity ** (lat.depth - atom.depth - 1)) % lat.arity
                    chain_d += naive_mass(lat, mu_mass, atom) * beta_value(alpha, atom, slot)
                    integ = 0.0
                    for k in range(lat.arity):
                        child = Atom(atom.depth + 1, atom.index * lat.arity + k)
                        integ += beta_value(alpha, atom, k) * naive_mass(lat, nu_mass, child)
                    chain_a += integ
                num_d += chain_d ** p * nu_mass[j]
                num_a += chain_a ** pp * mu_mass[j]
            den_d = naive_mass(lat, mu_mass, top)
            den_a = naive_mass(lat, nu_mass, top)
            if den_d > 0.0:
                best_direct = max(best_direct, num_d / den_d)
            if den_a > 0.0:
                best_adjoint = max(best_adjoint, num_a / den_a)
    return best_direct ** (1.0 / p), best_adjoint ** (1.0 / pp)


def naive_carleson_constant(lat: Lattice, weights, mu_mass) -> float:
    best = 0.0
    for d in range(lat.depth + 1):
        for i in range(lat.arity ** d):
            top = Atom(d, i)
            total = sum(
                w for atom, w in weights.items()
                if atom.depth >= top.depth
                and atom.index // lat.arity ** (atom.depth - top.depth) == top.index
            )
            den = naive_mass(lat, mu_mass, top)
            if den == 0.0:
                if total > 0.0:
                    return math.inf
                continue
            best = max(best, total / den)
    return best
