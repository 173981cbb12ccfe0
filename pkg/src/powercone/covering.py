"""Maximal covering location instances with distance-decay coverage radii.

A facility j covers demand point i when the l_p distance between them is at
most a gravity constant times a geometric mean of per-pair service features,
relaxed by a big-M term when the assignment binary is off:

    ||x_j - a_i||_p <= G * m_ij1^{alpha_1} * ... * m_ijl^{alpha_l} + M (1 - y_ij)

Each such constraint is a power cone with affine inputs; grounding it
through mediated graphs yields a mixed-integer SOC program whose size
depends directly on the graph cardinalities, which is what the counting
report exposes.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass
from fractions import Fraction

from .core import AlphaWeight, InvalidInputError
from .rewrite import (
    AFFINE_EQ,
    HALFSPACE,
    SOC3,
    AffineMap,
    Atom,
    ConeProgram,
    GraphSupplier,
    SocBlock,
    affine_generalized,
    rationalize_to_soc,
)

DEFAULT_WEIGHT_CAP = 10
DEFAULT_BUDGET_SHARE = Fraction(1, 4)
BIG_M_SLACK = 1e-3


@dataclass(frozen=True)
class CoveringInstance:
    demand: tuple[tuple[float, float], ...]
    weights: tuple[int, ...]
    facilities: int
    p: Fraction
    alpha: AlphaWeight
    gravity: Fraction
    budget: Fraction
    big_m: float
    seed: int


def _lp_distance(a: tuple[float, float], b: tuple[float, float], p: Fraction) -> float:
    return (abs(a[0] - b[0]) ** float(p) + abs(a[1] - b[1]) ** float(p)) ** (1.0 / float(p))


def generate_instance(n_demand: int, n_facilities: int, p: Fraction,
                      alpha: AlphaWeight, seed: int,
                      gravity: Fraction = Fraction(1)) -> CoveringInstance:
    """Seeded instance: demand uniform on the unit square, integer weights.

    The feature budget is a quarter of 2|I| + |J| and the big-M constant is
    just above the largest pairwise demand distance.
    """
    if n_demand < 1 or n_facilities < 1:
        raise InvalidInputError("need at least one demand point and one facility")
    p = Fraction(p)
    if p <= 1:
        raise InvalidInputError("p must exceed 1")
    rng = random.Random(seed)
    demand = tuple((rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0))
                   for _ in range(n_demand))
    weights = tuple(rng.randint(0, DEFAULT_WEIGHT_CAP) for _ in range(n_demand))
    budget = DEFAULT_BUDGET_SHARE * (2 * n_demand + n_facilities)
    worst = max(
        (_lp_distance(demand[i], demand[j], p)
         for i in range(n_demand) for j in range(i + 1, n_demand)),
        default=1.0)
    big_m = (1.0 + BIG_M_SLACK) * worst
    return CoveringInstance(demand, weights, n_facilities, p, alpha,
                            gravity, budget, big_m, seed)


@dataclass(frozen=True)
class CoveringModel:
    instance: CoveringInstance
    objective: tuple[tuple[str, Fraction], ...]
    binaries: tuple[str, ...]
    unit_vars: tuple[str, ...]      # feature levels in [0, 1]
    free_vars: tuple[str, ...]      # facility coordinates
    linear: tuple[tuple[str, tuple[tuple[str, Fraction], ...], str, Fraction], ...]
    programs: tuple[ConeProgram, ...]

    def counts(self) -> dict[str, int]:
        soc = sum(1 for prog in self.programs for a in prog.atoms if a.kind == SOC3)
        lin = len(self.linear)
        lin += sum(1 for prog in self.programs for a in prog.atoms
                   if a.kind in (HALFSPACE, AFFINE_EQ))
        variables = set(self.binaries) | set(self.unit_vars) | set(self.free_vars)
        for prog in self.programs:
            variables.update(prog.original_vars)
            variables.update(prog.aux_vars)
        return {
            "soc": soc,
            "lin": lin,
            "bin": len(self.binaries),
            "vars": len(variables),
        }


def build_covering_model(instance: CoveringInstance,
                         supplier: GraphSupplier) -> CoveringModel:
    """Assemble the mixed-integer SOC covering model.

    One coverage block per demand-facility pair, one assignment row per
    demand point and a single feature budget row.
    """
    inst = instance
    n, m = len(inst.demand), inst.facilities
    l = inst.alpha.d
    p = inst.p
    big_m = Fraction(inst.big_m).limit_denominator(10 ** 9)
    gravity = Fraction(inst.gravity)

    objective = tuple(
        (f"y_{i}_{j}", Fraction(inst.weights[i]))
        for i in range(n) for j in range(m))
    binaries = tuple(f"y_{i}_{j}" for i in range(n) for j in range(m))
    unit_vars = tuple(f"m_{i}_{j}_{k}" for i in range(n) for j in range(m)
                      for k in range(l))
    free_vars = tuple(f"xf_{j}_{r}" for j in range(m) for r in range(2))

    linear = []
    for i in range(n):
        terms = tuple((f"y_{i}_{j}", Fraction(1)) for j in range(m))
        linear.append((f"assign_{i}", terms, "<=", Fraction(1)))
    budget_terms = tuple((v, Fraction(1)) for v in unit_vars)
    linear.append(("budget", budget_terms, "<=", inst.budget))

    # The grounded cone is identical for every pair up to variable names and
    # the demand-point constants, so rationalize a template once and only
    # rename and patch per pair.
    f0 = AffineMap(("xf#0", "xf#1"),
                   (((Fraction(1), Fraction(0)), Fraction(0)),
                    ((Fraction(0), Fraction(1)), Fraction(0))))
    h_rows = []
    for k in range(l):
        coeffs = tuple(gravity if kk == k else Fraction(0) for kk in range(l))
        h_rows.append((coeffs, Fraction(0)))
    h0 = AffineMap(tuple(f"m#{k}" for k in range(l)), tuple(h_rows))
    g0 = AffineMap(("y#",), (((-big_m,), big_m),))
    template = rationalize_to_soc(affine_generalized(p, inst.alpha, f0, h0, g0),
                                  supplier)
    f_inputs = set(f0.inputs)

    programs = []
    for i in range(n):
        a_i = (Fraction(inst.demand[i][0]).limit_denominator(10 ** 9),
               Fraction(inst.demand[i][1]).limit_denominator(10 ** 9))
        for j in range(m):
            inputs = ((f"xf_{j}_0", f"xf_{j}_1")
                      + tuple(f"m_{i}_{j}_{k}" for k in range(l))
                      + (f"y_{i}_{j}",))
            consts = {f0.inputs[0]: -a_i[0], f0.inputs[1]: -a_i[1]}
            cone = _instantiate_template(template, inputs, f_inputs, consts,
                                         f"c{i}_{j}_")
            programs.append(cone)
    return CoveringModel(inst, objective, binaries, unit_vars, free_vars,
                         tuple(linear), tuple(programs))


def _clone_atom(atom: Atom, vars_: tuple[str, ...], const=None) -> Atom:
    """Copy a validated template atom with new variable names.

    Skips __post_init__ on purpose: the fields are taken verbatim from an
    atom that already passed validation, and the renaming loop is hot.
    """
    new = object.__new__(Atom)
    object.__setattr__(new, "kind", atom.kind)
    object.__setattr__(new, "vars", vars_)
    object.__setattr__(new, "weights", atom.weights)
    object.__setattr__(new, "p", atom.p)
    object.__setattr__(new, "coeffs", atom.coeffs)
    object.__setattr__(new, "const", atom.const if const is None else const)
    return new


def _instantiate_template(template: ConeProgram, inputs: tuple[str, ...],
                          f_inputs: set, consts: dict,
                          prefix: str) -> ConeProgram:
    """Rename a grounded coverage template onto one demand-facility pair."""
    mapping = dict(zip(template.original_vars, inputs))
    aux = tuple(prefix + v for v in template.aux_vars)
    mapping.update(zip(template.aux_vars, aux))

    atoms = []
    for atom in template.atoms:
        vars_ = tuple(mapping[x] for x in atom.vars)
        const = None
        if atom.kind == AFFINE_EQ and len(atom.vars) == 3 \
                and atom.vars[1] in consts and set(atom.vars[1:]) <= f_inputs:
            k = next(i for i, c in enumerate(atom.coeffs[1:], start=1) if c != 0)
            const = consts[atom.vars[k]]
        atoms.append(_clone_atom(atom, vars_, const))
    blocks = tuple(
        SocBlock(mapping.get(blk.head, blk.head),
                 tuple(mapping.get(v, v) for v in blk.basis),
                 blk.weights,
                 tuple((mapping.get(v, v), mu) for v, mu in blk.exponents),
                 tuple(_clone_atom(a, tuple(mapping[x] for x in a.vars))
                       for a in blk.atoms))
        for blk in template.blocks)
    return ConeProgram(inputs, aux, tuple(atoms), blocks)


def _fmt(v: Fraction) -> str:
    v = Fraction(v)
    return str(v.numerator) if v.denominator == 1 else repr(float(v))


def _fmt_terms(terms) -> str:
    parts = []
    for name, coef in terms:
        coef = Fraction(coef)
        if coef == 0:
            continue
        sign = "-" if coef < 0 else "+"
        mag = abs(coef)
        parts.append(f"{sign} " + (name if mag == 1 else f"{_fmt(mag)} {name}"))
    text = " ".join(parts)
    return text[2:] if text.startswith("+ ") else (text or "0")


def emit_covering(model: CoveringModel) -> str:
    """LP-format text with one quadratic row per rotated cone."""
    inst = model.instance
    lines = [f"\\ covering model: n={len(inst.demand)} facilities={inst.facilities} "
             f"p={inst.p} alpha={list(inst.alpha.s)} seed={inst.seed}"]
    lines.append("Maximize")
    lines.append(" obj: " + _fmt_terms(model.objective))
    lines.append("Subject To")
    for name, terms, sense, rhs in model.linear:
        lines.append(f" {name}: {_fmt_terms(terms)} {sense} {_fmt(rhs)}")
    qc = 0
    for pi, prog in enumerate(model.programs):
        for a in prog.atoms:
            if a.kind == HALFSPACE:
                terms = [(v, Fraction(1)) for v in a.vars[:-1]]
                terms.append((a.vars[-1], Fraction(-1)))
                lines.append(f" hs_{pi}_{qc}: {_fmt_terms(terms)} <= 0")
                qc += 1
            elif a.kind == AFFINE_EQ:
                terms = list(zip(a.vars, a.coeffs))
                lines.append(f" eq_{pi}_{qc}: {_fmt_terms(terms)} = {_fmt(-a.const)}")
                qc += 1
            elif a.kind == SOC3:
                w, u, v = a.vars
                lines.append(f" qc_{pi}_{qc}: [ {w} ^ 2 - {u} * {v} ] <= 0")
                qc += 1
    lines.append("Bounds")
    for v in model.unit_vars:
        lines.append(f" 0 <= {v} <= 1")
    for v in model.free_vars:
        lines.append(f" {v} free")
    lines.append("Binaries")
    bins = list(model.binaries)
    for i in range(0, len(bins), 8):
        lines.append(" " + " ".join(bins[i:i + 8]))
    lines.append("End")
    return "\n".join(lines) + "\n"


def counts_report(model: CoveringModel) -> str:
    return json.dumps(model.counts(), sort_keys=True)
