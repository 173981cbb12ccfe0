"""Cone program IR and extended-representation rewriting.

A ConeProgram is a flat list of atoms over named variables:

* power:     vars = (x, z_1, ..., z_k), weights w_i > 0 summing to 1,
             meaning x <= z_1^{w_1} * ... * z_k^{w_k}
* porder:    vars = (x_1, ..., x_k, t), meaning ||x||_p <= t
* soc3:      vars = (w, u, v), meaning w^2 <= u * v (rotated 3-dim cone)
* halfspace: vars = (x_1, ..., x_k, t), meaning x_1 + ... + x_k <= t
* affine_eq: terms c_i * v_i plus a constant summing to zero

Complexity of a program is (m_E, L_E): the number of auxiliary variables
and the number of conic/half-space atoms (affine equations are bookkeeping
and are not counted in L_E).

The rewriting catalogue turns a p-norm bound against a weighted geometric
mean into power cones, and rationalize_to_soc grounds every power cone into
rotated 3-dim cones through a mediated graph supplied per weight vector.
"""
from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .core import AlphaWeight, DomainError, InvalidInputError, barycentric, weights_to_alpha
from .mediated import MediatedGraph, node_names, to_soc, validate
from .search import SearchBudget, solve_exact
from . import mediated as _mediated

POWER = "power"
PORDER = "porder"
SOC3 = "soc3"
HALFSPACE = "halfspace"
AFFINE_EQ = "affine_eq"

CONIC_KINDS = (POWER, PORDER, SOC3, HALFSPACE)


class UnrationalizableAtomError(DomainError):
    """An atom cannot be ground into rotated second-order cones."""


@dataclass(frozen=True)
class Atom:
    kind: str
    vars: tuple[str, ...]
    weights: tuple[Fraction, ...] | None = None   # power
    p: Fraction | None = None                     # porder; None elsewhere
    coeffs: tuple[Fraction, ...] | None = None    # affine_eq coefficients
    const: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "vars", tuple(self.vars))
        if self.kind == POWER:
            if self.weights is None or len(self.weights) != len(self.vars) - 1:
                raise InvalidInputError("power atom needs one weight per factor")
            w = tuple(Fraction(v) for v in self.weights)
            if any(v <= 0 for v in w) or sum(w) != 1:
                raise InvalidInputError(f"power weights must be positive and sum to 1: {w!r}")
            object.__setattr__(self, "weights", w)
        elif self.kind == PORDER:
            if self.p is None or Fraction(self.p) <= 1:
                raise InvalidInputError("porder atom needs rational p > 1")
            object.__setattr__(self, "p", Fraction(self.p))
            if len(self.vars) < 2:
                raise InvalidInputError("porder atom needs at least one norm entry")
        elif self.kind == SOC3:
            if len(self.vars) != 3:
                raise InvalidInputError("soc3 atom has exactly three variables")
        elif self.kind == HALFSPACE:
            if len(self.vars) < 2:
                raise InvalidInputError("halfspace atom needs at least two variables")
        elif self.kind == AFFINE_EQ:
            if self.coeffs is None or len(self.coeffs) != len(self.vars):
                raise InvalidInputError("affine_eq needs one coefficient per variable")
            object.__setattr__(self, "coeffs", tuple(Fraction(v) for v in self.coeffs))
            object.__setattr__(self, "const", Fraction(self.const))
        else:
            raise InvalidInputError(f"unknown atom kind {self.kind!r}")


@dataclass(frozen=True)
class SocBlock:
    """Verification metadata for one rationalized power cone.

    head is the bounded variable, basis the geometric-mean factors, weights
    the exponents of the head, and exponents maps every internal node
    variable to its exponent vector over the basis.
    """

    head: str
    basis: tuple[str, ...]
    weights: tuple[Fraction, ...]
    exponents: tuple[tuple[str, tuple[Fraction, ...]], ...]
    atoms: tuple[Atom, ...]


@dataclass(frozen=True)
class ConeProgram:
    original_vars: tuple[str, ...]
    aux_vars: tuple[str, ...]
    atoms: tuple[Atom, ...]
    blocks: tuple[SocBlock, ...] = ()

    def __post_init__(self):
        names = list(self.original_vars) + list(self.aux_vars)
        if len(set(names)) != len(names):
            raise InvalidInputError("variable names must be unique")
        known = set(names)
        for atom in self.atoms:
            missing = [v for v in atom.vars if v not in known]
            if missing:
                raise InvalidInputError(f"atom references unknown variables {missing}")

    @property
    def m_e(self) -> int:
        return len(self.aux_vars)

    @property
    def l_e(self) -> int:
        return sum(1 for a in self.atoms if a.kind in CONIC_KINDS)

    def kind_counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for a in self.atoms:
            out[a.kind] = out.get(a.kind, 0) + 1
        return out


def complexity(program: ConeProgram) -> tuple[int, int]:
    """(extended dimension m_E, cardinality L_E)."""
    return program.m_e, program.l_e


class NameAllocator:
    def __init__(self, taken: Iterable[str] = ()):
        self.taken = set(taken)

    def fresh(self, stem: str) -> str:
        if stem not in self.taken:
            self.taken.add(stem)
            return stem
        i = 2
        while f"{stem}_{i}" in self.taken:
            i += 1
        name = f"{stem}_{i}"
        self.taken.add(name)
        return name


def _conjugate(p: Fraction) -> Fraction:
    p = Fraction(p)
    return p / (p - 1)


def _default_names(prefix: str, n: int) -> list[str]:
    return [f"{prefix}{i}" for i in range(1, n + 1)]


def split_norm_power(p: Fraction, d1: int, alpha: AlphaWeight) -> ConeProgram:
    """Split ||x||_p <= z^alpha into a p-order cone chained to a power cone."""
    if d1 < 1:
        raise InvalidInputError("need at least one norm entry")
    p = Fraction(p)
    if p <= 1:
        raise InvalidInputError("p must exceed 1")
    xs = _default_names("x", d1)
    zs = _default_names("z", alpha.d)
    atoms = (
        Atom(PORDER, tuple(xs) + ("w",), p=p),
        Atom(POWER, ("w",) + tuple(zs), weights=alpha.alpha),
    )
    return ConeProgram(tuple(xs + zs), ("w",), atoms)


def _tower_partition(labels: Sequence, published_shape: bool) -> list[tuple]:
    """Recursive split of the norm entries; returns (left, right) partitions.

    The default split is balanced.  The published-example shape halves the
    root and then peels the last entry at every inner node, matching the
    seven-entry tree used as a regression fixture.
    """
    splits = []

    def rec(seq: tuple, is_root: bool):
        if len(seq) == 1:
            return
        if published_shape:
            cut = len(seq) // 2 if is_root else len(seq) - 1
        else:
            cut = (len(seq) + 1) // 2
        left, right = seq[:cut], seq[cut:]
        splits.append((seq, left, right))
        rec(left, False)
        rec(right, False)

    rec(tuple(labels), True)
    return splits


def tower_of_variables(p: Fraction, d: int, published_shape: bool = False
                       ) -> ConeProgram:
    """Rewrite ||x||_p <= t over d entries into d - 1 three-entry p-order cones.

    Each inner node of a binary split tree over the entries receives an
    auxiliary variable bounding the p-norm of its children.
    """
    if d < 2:
        raise InvalidInputError("tower needs at least two norm entries")
    p = Fraction(p)
    if p <= 1:
        raise InvalidInputError("p must exceed 1")
    xs = _default_names("x", d)
    splits = _tower_partition(range(d), published_shape)
    names = NameAllocator(xs + ["t"])
    var_of: dict[tuple, str] = {tuple(range(d)): "t"}
    for i, (seq, _, _) in enumerate(splits[1:], start=1):
        var_of[seq] = names.fresh(f"u{i}")
    for i in range(d):
        var_of[(i,)] = xs[i]
    atoms = []
    for seq, left, right in splits:
        atoms.append(Atom(PORDER, (var_of[left], var_of[right], var_of[seq]), p=p))
    aux = tuple(var_of[seq] for seq, _, _ in splits[1:])
    return ConeProgram(tuple(xs) + ("t",), aux, tuple(atoms))


def tower_partitions(d: int, published_shape: bool = False) -> list[tuple[tuple, tuple]]:
    """The (left, right) index partitions used by tower_of_variables."""
    return [(left, right) for _, left, right in _tower_partition(range(d), published_shape)]


def conjugate_split(p: Fraction, d: int) -> ConeProgram:
    """Rewrite ||x||_p <= t into d two-factor power cones and one half-space.

    Uses x_j <= s_j^{1/p} * t^{1/q} with sum(s_j) <= t, where q is the
    conjugate exponent of p.
    """
    if d < 1:
        raise InvalidInputError("need at least one norm entry")
    p = Fraction(p)
    if p <= 1:
        raise InvalidInputError(
            "p must exceed 1; p = 1 reduces to half-spaces (expand_linear_norms)")
    q = _conjugate(p)
    xs = _default_names("x", d)
    ss = _default_names("s", d)
    atoms = [
        Atom(POWER, (xs[j], ss[j], "t"), weights=(1 / p, 1 / q))
        for j in range(d)
    ]
    atoms.append(Atom(HALFSPACE, tuple(ss) + ("t",)))
    return ConeProgram(tuple(xs) + ("t",), tuple(ss), tuple(atoms))


def nested_tower_construction(p: Fraction, d1: int, alpha: AlphaWeight) -> ConeProgram:
    """Full expansion: norm/power split, tower, then conjugate splits.

    Yields 2(d1 - 1) two-factor power cones, d1 - 1 half-spaces and the
    weight power cone: complexity (3 d1 - 3, 3 d1 - 2).
    """
    p = Fraction(p)
    if p <= 1:
        raise InvalidInputError("p must exceed 1")
    if d1 < 1:
        raise InvalidInputError("need at least one norm entry")
    xs = _default_names("x", d1)
    zs = _default_names("z", alpha.d)
    if d1 == 1:
        # A single norm entry: the bound is the power cone itself.
        atoms = (Atom(POWER, (xs[0],) + tuple(zs), weights=alpha.alpha),)
        return ConeProgram(tuple(xs + zs), (), atoms)
    q = _conjugate(p)
    names = NameAllocator(xs + zs + ["w"])
    atoms: list[Atom] = [Atom(POWER, ("w",) + tuple(zs), weights=alpha.alpha)]
    aux: list[str] = ["w"]
    # Tower over the norm entries, each inner cone conjugate-split in place.
    splits = _tower_partition(range(d1), False)
    var_of: dict[tuple, str] = {tuple(range(d1)): "w"}
    for i in range(d1):
        var_of[(i,)] = xs[i]
    for i, (seq, _, _) in enumerate(splits[1:], start=1):
        name = names.fresh(f"u{i}")
        var_of[seq] = name
        aux.append(name)
    for seq, left, right in splits:
        head = var_of[seq]
        sl = names.fresh(f"s{head}a")
        sr = names.fresh(f"s{head}b")
        aux.extend([sl, sr])
        atoms.append(Atom(POWER, (var_of[left], sl, head), weights=(1 / p, 1 / q)))
        atoms.append(Atom(POWER, (var_of[right], sr, head), weights=(1 / p, 1 / q)))
        atoms.append(Atom(HALFSPACE, (sl, sr, head)))
    return ConeProgram(tuple(xs + zs), tuple(aux), tuple(atoms))


def merged_conjugate_construction(p: Fraction, d1: int, alpha: AlphaWeight
                                  ) -> ConeProgram:
    """Conjugate split with the geometric mean substituted into each cone.

    Yields d1 power cones with weights (1/p, alpha/q), one half-space and
    the weight power cone: complexity (d1 + 1, d1 + 2).
    """
    p = Fraction(p)
    if p <= 1:
        raise InvalidInputError("p must exceed 1")
    if d1 < 1:
        raise InvalidInputError("need at least one norm entry")
    q = _conjugate(p)
    xs = _default_names("x", d1)
    zs = _default_names("z", alpha.d)
    ss = _default_names("s", d1)
    merged = tuple([Fraction(1) / p] + [a / q for a in alpha.alpha])
    atoms = [
        Atom(POWER, (xs[j], ss[j]) + tuple(zs), weights=merged)
        for j in range(d1)
    ]
    atoms.append(Atom(HALFSPACE, tuple(ss) + ("w",)))
    atoms.append(Atom(POWER, ("w",) + tuple(zs), weights=alpha.alpha))
    return ConeProgram(tuple(xs + zs), tuple(ss) + ("w",), tuple(atoms))


def direct_construction(p: Fraction, d1: int, alpha: AlphaWeight) -> ConeProgram:
    """Conjugate split against an auxiliary geometric-mean bound.

    Yields d1 two-factor power cones, one half-space and the weight power
    cone: complexity (d1 + 1, d1 + 2).
    """
    p = Fraction(p)
    if p <= 1:
        raise InvalidInputError("p must exceed 1")
    if d1 < 1:
        raise InvalidInputError("need at least one norm entry")
    q = _conjugate(p)
    xs = _default_names("x", d1)
    zs = _default_names("z", alpha.d)
    ss = _default_names("s", d1)
    atoms = [
        Atom(POWER, (xs[j], ss[j], "w"), weights=(1 / p, 1 / q))
        for j in range(d1)
    ]
    atoms.append(Atom(HALFSPACE, tuple(ss) + ("w",)))
    atoms.append(Atom(POWER, ("w",) + tuple(zs), weights=alpha.alpha))
    return ConeProgram(tuple(xs + zs), tuple(ss) + ("w",), tuple(atoms))


CONSTRUCTIONS: dict[str, Callable[[Fraction, int, AlphaWeight], ConeProgram]] = {
    "nested": nested_tower_construction,
    "merged": merged_conjugate_construction,
    "direct": direct_construction,
}


@dataclass(frozen=True)
class AffineMap:
    """An affine expression per output: rows of (coeffs over inputs, const)."""

    inputs: tuple[str, ...]
    rows: tuple[tuple[tuple[Fraction, ...], Fraction], ...]


def affine_generalized(p: Fraction, alpha: AlphaWeight, f: AffineMap,
                       h: AffineMap, g: AffineMap | None = None) -> ConeProgram:
    """Represent ||f(x)||_p <= h(z)^alpha + g(t) with affine maps.

    Introduces one variable and one linear equation per affine output
    (f rows, h rows and the additive offset), then applies the direct
    construction to the lifted variables.  The geometric-mean bound and the
    cone head are linked through one extra affine equation because the
    additive offset shifts the half-space budget.
    """
    p = Fraction(p)
    if p <= 1:
        raise InvalidInputError("p must exceed 1")
    d1 = len(f.rows)
    if len(h.rows) != alpha.d:
        raise InvalidInputError("h must produce one output per weight")
    base = direct_construction(p, d1, alpha)
    names = NameAllocator()
    inputs = list(dict.fromkeys(f.inputs + h.inputs + (g.inputs if g else ())))
    for v in inputs:
        names.fresh(v)
    rename = {}
    for v in base.original_vars + base.aux_vars:
        rename[v] = names.fresh("u" + v if v in inputs else v)
    atoms = [replace(a, vars=tuple(rename[v] for v in a.vars)) for a in base.atoms]
    aux = [rename[v] for v in base.original_vars + base.aux_vars]

    def eq_atoms(mapping: AffineMap, outs: list[str]) -> list[Atom]:
        eqs = []
        for out, (coeffs, const) in zip(outs, mapping.rows):
            vars_ = (out,) + tuple(mapping.inputs)
            eqs.append(Atom(AFFINE_EQ, vars_,
                            coeffs=(Fraction(-1),) + tuple(coeffs), const=const))
        return eqs

    xs = [rename[v] for v in base.original_vars[:d1]]
    zs = [rename[v] for v in base.original_vars[d1:]]
    link: list[Atom] = []
    link += eq_atoms(f, xs)
    link += eq_atoms(h, zs)
    if g is not None:
        if len(g.rows) != 1:
            raise InvalidInputError("the additive offset must be scalar")
        off = names.fresh("g0")
        wcap = names.fresh("wcap")
        aux += [off, wcap]
        link += eq_atoms(g, [off])
        # The conjugate-split budget may use the shifted bound wcap = w + g0.
        old_w = rename["w"]
        link.append(Atom(AFFINE_EQ, (wcap, old_w, off),
                         coeffs=(Fraction(-1), Fraction(1), Fraction(1))))
        patched = []
        for a in atoms:
            if a.kind == HALFSPACE and a.vars[-1] == old_w:
                patched.append(replace(a, vars=a.vars[:-1] + (wcap,)))
            elif a.kind == POWER and len(a.vars) == 3 and a.vars[2] == old_w:
                patched.append(replace(a, vars=a.vars[:2] + (wcap,)))
            else:
                patched.append(a)
        atoms = patched
    return ConeProgram(tuple(inputs), tuple(aux), tuple(atoms) + tuple(link))


def l1_norm_bound(entries: Sequence[str], t: str) -> ConeProgram:
    """Atoms for ||x||_1 <= t via sign-split variables."""
    names = NameAllocator(list(entries) + [t])
    atoms: list[Atom] = []
    aux: list[str] = []
    sum_vars: list[str] = []
    for x in entries:
        xp, xm = names.fresh(f"{x}_pos"), names.fresh(f"{x}_neg")
        aux += [xp, xm]
        sum_vars += [xp, xm]
        atoms.append(Atom(AFFINE_EQ, (x, xp, xm),
                          coeffs=(Fraction(-1), Fraction(1), Fraction(-1))))
    atoms.append(Atom(HALFSPACE, tuple(sum_vars) + (t,)))
    return ConeProgram(tuple(entries) + (t,), tuple(aux), tuple(atoms))


def linf_norm_bound(entries: Sequence[str], t: str) -> ConeProgram:
    """Atoms for ||x||_inf <= t: one half-space pair per entry."""
    names = NameAllocator(list(entries) + [t])
    atoms: list[Atom] = []
    aux: list[str] = []
    for x in entries:
        neg = names.fresh(f"{x}_neg")
        aux.append(neg)
        atoms.append(Atom(AFFINE_EQ, (x, neg), coeffs=(Fraction(1), Fraction(1))))
        atoms.append(Atom(HALFSPACE, (x, t)))
        atoms.append(Atom(HALFSPACE, (neg, t)))
    return ConeProgram(tuple(entries) + (t,), tuple(aux), tuple(atoms))


class GraphSupplier:
    """Caching supplier of mediated graphs keyed on the exact weight tuple."""

    def __init__(self, fn: Callable[[AlphaWeight], MediatedGraph]):
        self._fn = fn
        self._cache: dict[tuple[int, ...], MediatedGraph] = {}
        self._lock = threading.Lock()

    def __call__(self, ctx: AlphaWeight) -> MediatedGraph:
        key = ctx.s
        with self._lock:
            hit = self._cache.get(key)
        if hit is not None:
            return hit
        graph = self._fn(ctx)
        errs = validate(graph)
        if errs:
            raise DomainError("supplier returned an invalid graph: " + "; ".join(errs))
        with self._lock:
            self._cache.setdefault(key, graph)
        return graph


def optimal_supplier(budget: SearchBudget | None = None) -> GraphSupplier:
    """Supplier backed by the exact search (best graph within budget)."""
    return GraphSupplier(lambda ctx: solve_exact(ctx, budget).graph)


def binary_supplier() -> GraphSupplier:
    """Supplier backed by the binary-decomposition construction."""
    return GraphSupplier(_mediated.binary_decomposition_graph)


def _power_weights_alpha(weights: Sequence[Fraction]) -> AlphaWeight:
    return weights_to_alpha(weights)


def rationalize_to_soc(program: ConeProgram,
                       supplier: GraphSupplier | Callable[[AlphaWeight], MediatedGraph] | None = None
                       ) -> ConeProgram:
    """Ground every power and p-order atom into rotated 3-dim cones.

    Each power cone with weights alpha is replaced by the SOC system of a
    mediated graph for alpha; p-order cones of width two are conjugate-split
    first, wider ones go through the tower.  The output contains only soc3,
    halfspace and affine_eq atoms plus verification blocks.
    """
    if supplier is None:
        supplier = optimal_supplier()
    if not isinstance(supplier, GraphSupplier):
        supplier = GraphSupplier(supplier)
    names = NameAllocator(program.original_vars + program.aux_vars)
    out_atoms: list[Atom] = []
    aux = list(program.aux_vars)
    blocks = list(program.blocks)
    queue = list(program.atoms)
    while queue:
        atom = queue.pop(0)
        if atom.kind in (SOC3, HALFSPACE, AFFINE_EQ):
            out_atoms.append(atom)
            continue
        if atom.kind == PORDER:
            p = atom.p
            if p is None or p <= 1:
                raise UnrationalizableAtomError(f"cannot rationalize p-order atom with p={p}")
            entries, head = atom.vars[:-1], atom.vars[-1]
            sub = conjugate_split(p, len(entries)) if len(entries) <= 2 else \
                tower_of_variables(p, len(entries))
            mapping = dict(zip(sub.original_vars, entries + (head,)))
            for v in sub.aux_vars:
                fresh = names.fresh(v)
                mapping[v] = fresh
                aux.append(fresh)
            queue = [replace(a, vars=tuple(mapping[x] for x in a.vars))
                     for a in sub.atoms] + queue
            continue
        if atom.kind == POWER:
            head, factors = atom.vars[0], atom.vars[1:]
            ctx = _power_weights_alpha(atom.weights)
            if ctx.d != len(factors):
                # Weights were reduced away (cannot happen: weights positive).
                raise UnrationalizableAtomError("weight/factor mismatch")
            if ctx.s == (1, 1):
                soc = Atom(SOC3, (head, factors[0], factors[1]))
                out_atoms.append(soc)
                blocks.append(SocBlock(
                    head, tuple(factors), atom.weights,
                    ((head, atom.weights),), (soc,)))
                continue
            graph = supplier(ctx)
            system = to_soc(graph)
            gnames = node_names(graph)
            mapping = {"x": head}
            for j in range(1, ctx.d + 1):
                mapping[f"z_{j}"] = factors[j - 1]
            for i in range(1, len(graph.X)):
                fresh = names.fresh(f"{head}_m{i}")
                mapping[f"w_{i}"] = fresh
                aux.append(fresh)
            socs = tuple(
                Atom(SOC3, (mapping[c.lhs], mapping[c.factors[0]], mapping[c.factors[1]]))
                for c in system.constraints)
            out_atoms.extend(socs)
            exps = tuple(
                (mapping[gnames[pt]], barycentric(pt, ctx))
                for pt in graph.X)
            blocks.append(SocBlock(head, tuple(factors), atom.weights, exps, socs))
            continue
        raise UnrationalizableAtomError(f"unknown atom kind {atom.kind!r}")
    return ConeProgram(program.original_vars, tuple(aux), tuple(out_atoms),
                       tuple(blocks))


def compose(outer: ConeProgram, inner: dict[str, ConeProgram]) -> ConeProgram:
    """Inline sub-representations for selected outer variables.

    inner maps an outer variable name to a program whose first original
    variable plays that role; auxiliary names are freshened, so the
    extended dimension is the sum of the parts.
    """
    names = NameAllocator(outer.original_vars + outer.aux_vars)
    atoms = list(outer.atoms)
    aux = list(outer.aux_vars)
    for target, sub in inner.items():
        mapping = {sub.original_vars[0]: target}
        for v in sub.original_vars[1:]:
            mapping[v] = names.fresh(v)
            aux.append(mapping[v])
        for v in sub.aux_vars:
            mapping[v] = names.fresh(v)
            aux.append(mapping[v])
        atoms.extend(replace(a, vars=tuple(mapping[x] for x in a.vars))
                     for a in sub.atoms)
    return ConeProgram(outer.original_vars, tuple(aux), tuple(atoms))


@dataclass(frozen=True)
class VerificationReport:
    ok: bool
    mode: str
    checked: int
    failures: tuple[str, ...] = ()


def verify_structural(program: ConeProgram) -> VerificationReport:
    """Exact check of the exponent bookkeeping for every SOC block.

    Basis variables carry unit exponent vectors; every rotated cone must
    relate a node to the half-sum of its factors' exponent vectors, and the
    block head must carry exactly the block weights.
    """
    failures: list[str] = []
    checked = 0
    for bi, blk in enumerate(program.blocks):
        mu: dict[str, tuple[Fraction, ...]] = {}
        k = len(blk.basis)
        for j, v in enumerate(blk.basis):
            mu[v] = tuple(Fraction(1 if i == j else 0) for i in range(k))
        for v, vec in blk.exponents:
            mu[v] = tuple(Fraction(e) for e in vec)
        head_mu = mu.get(blk.head)
        if head_mu != tuple(Fraction(w) for w in blk.weights):
            failures.append(
                f"block {bi}: head {blk.head} has exponents {head_mu}, "
                f"expected {blk.weights}")
        for atom in blk.atoms:
            checked += 1
            if atom.kind != SOC3:
                failures.append(f"block {bi}: non-soc3 atom {atom.kind}")
                continue
            lhs, u, v = atom.vars
            if lhs not in mu or u not in mu or v not in mu:
                failures.append(f"block {bi}: atom {atom.vars} has untagged variables")
                continue
            want = tuple((a + b) / 2 for a, b in zip(mu[u], mu[v]))
            if mu[lhs] != want:
                failures.append(
                    f"block {bi}: {lhs}^2 <= {u}*{v} breaks the half-sum identity")
    return VerificationReport(not failures, "structural", checked, tuple(failures))


def verify_sampling(program: ConeProgram, trials: int = 100, seed: int = 0,
                    rel_tol: float = 1e-9, bump: float = 1e-6) -> VerificationReport:
    """Numeric check of every SOC block on random positive basis points.

    Basis values are drawn log-uniformly from [1e-2, 1e2]; node values are
    set from their exponent vectors, making every rotated cone an identity
    up to rounding.  Inflating the head by (1 + bump) must then violate at
    least one cone of the block, certifying the representation is tight.
    """
    import random

    rng = random.Random(seed)
    failures: list[str] = []
    checked = 0
    for bi, blk in enumerate(program.blocks):
        exps = dict(blk.exponents)
        for t in range(trials):
            vals: dict[str, float] = {}
            for v in blk.basis:
                vals[v] = 10.0 ** rng.uniform(-2.0, 2.0)
            for v, vec in blk.exponents:
                acc = 1.0
                for base, e in zip(blk.basis, vec):
                    acc *= vals[base] ** float(e)
                vals[v] = acc
            checked += 1
            ok = True
            for atom in blk.atoms:
                lhs, u, v = atom.vars
                lhs2, prod = vals[lhs] ** 2, vals[u] * vals[v]
                if abs(lhs2 - prod) > rel_tol * max(abs(lhs2), abs(prod), 1e-300):
                    failures.append(
                        f"block {bi} trial {t}: {lhs}^2 <= {u}*{v} "
                        f"not tight ({lhs2!r} vs {prod!r})")
                    ok = False
            if not ok:
                continue
            bumped = dict(vals)
            bumped[blk.head] = vals[blk.head] * (1.0 + bump)
            violated = False
            for atom in blk.atoms:
                lhs, u, v = atom.vars
                lhs2, prod = bumped[lhs] ** 2, bumped[u] * bumped[v]
                if lhs2 > prod * (1.0 + rel_tol):
                    violated = True
                    break
            if not violated:
                failures.append(
                    f"block {bi} trial {t}: inflating {blk.head} by {bump} "
                    "violates no cone; representation is slack")
    return VerificationReport(not failures, "sampling", checked, tuple(failures))


def verify_representation(program: ConeProgram, mode: str = "structural",
                          trials: int = 100, seed: int = 0) -> VerificationReport:
    if mode == "structural":
        return verify_structural(program)
    if mode == "sampling":
        return verify_sampling(program, trials=trials, seed=seed)
    raise InvalidInputError(f"unknown verification mode {mode!r}")


def _frac_to_json(v: Fraction):
    v = Fraction(v)
    return v.numerator if v.denominator == 1 else [v.numerator, v.denominator]


def _frac_from_json(v) -> Fraction:
    if isinstance(v, list):
        return Fraction(v[0], v[1])
    return Fraction(v)


def to_json_dict(program: ConeProgram) -> dict:
    def atom_dict(a: Atom) -> dict:
        d: dict = {"kind": a.kind, "vars": list(a.vars)}
        if a.weights is not None:
            d["weights"] = [_frac_to_json(w) for w in a.weights]
        if a.p is not None:
            d["p"] = _frac_to_json(a.p)
        if a.coeffs is not None:
            d["coeffs"] = [_frac_to_json(c) for c in a.coeffs]
            d["const"] = _frac_to_json(a.const)
        return d

    return {
        "vars": list(program.original_vars),
        "aux": list(program.aux_vars),
        "atoms": [atom_dict(a) for a in program.atoms],
        "blocks": [
            {
                "head": blk.head,
                "basis": list(blk.basis),
                "weights": [_frac_to_json(w) for w in blk.weights],
                "exponents": [[v, [_frac_to_json(e) for e in mu]]
                              for v, mu in blk.exponents],
                "atoms": [atom_dict(a) for a in blk.atoms],
            }
            for blk in program.blocks
        ],
    }


def from_json_dict(data: dict) -> ConeProgram:
    def atom_from(d: dict) -> Atom:
        return Atom(
            d["kind"], tuple(d["vars"]),
            weights=tuple(_frac_from_json(w) for w in d["weights"]) if "weights" in d else None,
            p=_frac_from_json(d["p"]) if "p" in d else None,
            coeffs=tuple(_frac_from_json(c) for c in d["coeffs"]) if "coeffs" in d else None,
            const=_frac_from_json(d.get("const", 0)) if "coeffs" in d else Fraction(0))

    try:
        blocks = tuple(
            SocBlock(
                blk["head"], tuple(blk["basis"]),
                tuple(_frac_from_json(w) for w in blk["weights"]),
                tuple((v, tuple(_frac_from_json(e) for e in mu))
                      for v, mu in blk["exponents"]),
                tuple(atom_from(a) for a in blk["atoms"]))
            for blk in data.get("blocks", ()))
        return ConeProgram(
            tuple(data["vars"]), tuple(data["aux"]),
            tuple(atom_from(a) for a in data["atoms"]), blocks)
    except (KeyError, TypeError, IndexError) as exc:
        raise InvalidInputError(f"malformed cone program JSON: {exc}") from exc


def dumps(program: ConeProgram, **kwargs) -> str:
    return json.dumps(to_json_dict(program), **kwargs)


def loads(text: str) -> ConeProgram:
    return from_json_dict(json.loads(text))
