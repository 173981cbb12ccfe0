"""Mixed-integer model generation for minimum-cardinality mediated graphs.

The model places Delta candidate mediated nodes alongside the d + 1 fixed
nodes (the goal point b and the anchors).  Binary z_j activates candidate j,
binary y_i_j selects node j as a witness of node i, and continuous x_j_r are
node coordinates.  Activated nodes must be the midpoint of their two
selected witnesses, and any two active nodes must be separated by at least
eps in the l1 norm (linearized with indicator binaries).  The objective
minimizes the number of active nodes including the goal, which equals |X|.

No solver is embedded: the model is emitted in LP format and solutions are
read back from "name value" solution files.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from .core import AlphaWeight, InvalidInputError, canon_coord
from .mediated import MediatedGraph, lower_bound, upper_bound, validate


@dataclass(frozen=True)
class ModelOptions:
    """Formulation switches.

    eps is the minimum l1 separation between active nodes; simplex_box
    big-M values are derived from shat.  vi1..vi3 are optional valid
    inequalities, tree restricts witness arcs between candidate nodes to a
    forest (each candidate witnesses at most one other candidate).
    """

    eps: int = 1
    vi1: bool = False
    vi2: bool = False
    vi3: bool = False
    tree: bool = False
    sort_coordinate: int = 1


@dataclass(frozen=True)
class Constraint:
    name: str
    terms: tuple[tuple[str, Fraction], ...]  # (variable, coefficient)
    sense: str  # "<=", ">=", "="
    rhs: Fraction


@dataclass
class MilpModel:
    ctx: AlphaWeight
    delta: int
    options: ModelOptions
    objective: tuple[tuple[str, Fraction], ...] = ()
    constraints: list[Constraint] = field(default_factory=list)
    binaries: list[str] = field(default_factory=list)
    bounds: dict[str, tuple[Fraction | None, Fraction | None]] = field(default_factory=dict)
    fixed: dict[str, Fraction] = field(default_factory=dict)

    @property
    def variable_names(self) -> list[str]:
        seen: dict[str, None] = {}
        for name, _ in self.objective:
            seen.setdefault(name)
        for con in self.constraints:
            for name, _ in con.terms:
                seen.setdefault(name)
        for name in self.binaries:
            seen.setdefault(name)
        for name in list(self.bounds) + list(self.fixed):
            seen.setdefault(name)
        return list(seen)

    @property
    def counts(self) -> dict[str, int]:
        free_z = sum(1 for v in self.binaries if v.startswith("z_") and v not in self.fixed)
        y = sum(1 for v in self.binaries if v.startswith("y_"))
        sep = sum(1 for v in self.binaries if v.startswith("d_"))
        return {
            "binaries": len(self.binaries),
            "z_free": free_z,
            "y": y,
            "separation": sep,
            "constraints": len(self.constraints),
            "variables": len(self.variable_names),
        }


def _frac(v) -> Fraction:
    return Fraction(v)


def build_model(ctx: AlphaWeight, delta: int,
                options: ModelOptions | None = None) -> MilpModel:
    """Assemble the midpoint-selection model with Delta candidate nodes."""
    if ctx.d < 2:
        raise InvalidInputError("mediated graphs need at least two weights")
    if delta < 0:
        raise InvalidInputError("delta must be non-negative")
    options = options or ModelOptions()
    d = ctx.d
    shat = ctx.shat
    dim = d - 1
    idx_all = list(range(d + delta + 1))          # I: 0..d fixed, d+1.. candidates
    idx_fixed = list(range(d + 1))
    idx_cand = list(range(d + 1, d + delta + 1))  # I_M
    idx_med = [0] + idx_cand                      # nodes that need witnesses

    model = MilpModel(ctx, delta, options)
    cons = model.constraints

    def y(i: int, j: int) -> str:
        return f"y_{i}_{j}"

    def z(j: int) -> str:
        return f"z_{j}"

    def xr(j: int, r: int) -> str:
        return f"x_{j}_{r}"

    model.objective = tuple((z(j), _frac(1)) for j in idx_med)

    # Variable declarations via bounds and binaries.
    for j in idx_all:
        model.binaries.append(z(j))
        for r in range(dim):
            model.bounds[xr(j, r)] = (_frac(0), _frac(shat))
    for i in idx_med:
        for j in idx_all:
            if j != i:
                model.binaries.append(y(i, j))

    # Fixed nodes: goal at index 0, anchors shat*e_j, origin at index d.
    b = ctx.goal
    for r in range(dim):
        model.fixed[xr(0, r)] = _frac(b[r])
    for j in range(1, d):
        for r in range(dim):
            model.fixed[xr(j, r)] = _frac(shat if r == j - 1 else 0)
    for r in range(dim):
        model.fixed[xr(d, r)] = _frac(0)
    for j in idx_fixed:
        model.fixed[z(j)] = _frac(1)

    # Each active mediated node selects exactly two witnesses.
    for i in idx_med:
        terms = [(y(i, j), _frac(1)) for j in idx_all if j != i]
        terms.append((z(i), _frac(-2)))
        cons.append(Constraint(f"wit_{i}", tuple(terms), "=", _frac(0)))

    # A witness must be an active node.
    for i in idx_med:
        for j in idx_all:
            if j != i:
                cons.append(Constraint(
                    f"act_{i}_{j}", ((y(i, j), _frac(1)), (z(j), _frac(-1))),
                    "<=", _frac(0)))

    # Midpoint link: when y_ij = y_ik = 1, x_i = (x_j + x_k) / 2.
    big = _frac(2 * shat)
    for i in idx_med:
        others = [j for j in idx_all if j != i]
        for j, k in combinations(others, 2):
            for r in range(dim):
                base = ((xr(i, r), _frac(2)), (xr(j, r), _frac(-1)),
                        (xr(k, r), _frac(-1)))
                cons.append(Constraint(
                    f"mid_lo_{i}_{j}_{k}_{r}",
                    base + ((y(i, j), _frac(-big)), (y(i, k), _frac(-big))),
                    ">=", _frac(-2) * big))
                cons.append(Constraint(
                    f"mid_hi_{i}_{j}_{k}_{r}",
                    base + ((y(i, j), _frac(big)), (y(i, k), _frac(big))),
                    "<=", _frac(2) * big))

    # Pairwise l1 separation of eps between active nodes, linearized with
    # one indicator per pair, coordinate and sign.
    eps = _frac(options.eps)
    sep_m = _frac(dim * shat)
    for i, j in combinations(idx_all, 2):
        delta_terms = []
        for r in range(dim):
            dp = f"d_{i}_{j}_{r}_p"
            dm = f"d_{i}_{j}_{r}_m"
            model.binaries.extend([dp, dm])
            delta_terms.extend([(dp, _frac(1)), (dm, _frac(1))])
            cons.append(Constraint(
                f"sep_p_{i}_{j}_{r}",
                ((xr(i, r), _frac(1)), (xr(j, r), _frac(-1)), (dp, _frac(-sep_m))),
                ">=", eps - sep_m))
            cons.append(Constraint(
                f"sep_m_{i}_{j}_{r}",
                ((xr(j, r), _frac(1)), (xr(i, r), _frac(-1)), (dm, _frac(-sep_m))),
                ">=", eps - sep_m))
        cons.append(Constraint(
            f"sep_{i}_{j}",
            tuple(delta_terms) + ((z(i), _frac(-1)), (z(j), _frac(-1))),
            ">=", _frac(-1)))

    if options.vi1:
        for j in idx_cand:
            for r in range(dim):
                cons.append(Constraint(
                    f"vi1_lo_{j}_{r}",
                    ((xr(j, r), _frac(1)), (z(j), _frac(shat))),
                    ">=", _frac(shat)))
                cons.append(Constraint(
                    f"vi1_hi_{j}_{r}",
                    ((xr(j, r), _frac(1)), (z(j), _frac(-shat))),
                    "<=", _frac(shat)))
    if options.vi2:
        for j in idx_all[1:]:
            cons.append(Constraint(
                f"vi2_{j}", ((z(j), _frac(1)), (z(j - 1), _frac(-1))),
                "<=", _frac(0)))
    if options.vi3:
        r = options.sort_coordinate - 1
        if not 0 <= r < dim:
            raise InvalidInputError("sort coordinate out of range")
        for j in idx_cand[1:]:
            cons.append(Constraint(
                f"vi3_{j}",
                ((xr(j, r), _frac(1)), (xr(j - 1, r), _frac(-1))),
                "<=", _frac(0)))
    if options.tree:
        for j in idx_cand:
            terms = [(y(i, j), _frac(1)) for i in idx_cand if i != j]
            terms.append((z(j), _frac(-1)))
            cons.append(Constraint(f"tree_{j}", tuple(terms), "<=", _frac(0)))

    return model


def _fmt_num(v: Fraction) -> str:
    v = Fraction(v)
    if v.denominator == 1:
        return str(v.numerator)
    return repr(float(v))


def _fmt_terms(terms) -> str:
    parts = []
    for name, coef in terms:
        coef = Fraction(coef)
        if coef == 0:
            continue
        sign = "-" if coef < 0 else "+"
        mag = abs(coef)
        chunk = name if mag == 1 else f"{_fmt_num(mag)} {name}"
        parts.append(f"{sign} {chunk}")
    if not parts:
        return "0 one_dummy"
    text = " ".join(parts)
    return text[2:] if text.startswith("+ ") else text


def emit_lp(model: MilpModel) -> str:
    """Render the model in LP format, deterministically."""
    sense_map = {"<=": "<=", ">=": ">=", "=": "="}
    lines = [f"\\ mediated-graph model: s={list(model.ctx.s)} delta={model.delta}"]
    lines.append("Minimize")
    lines.append(" obj: " + _fmt_terms(model.objective))
    lines.append("Subject To")
    for con in model.constraints:
        lines.append(f" {con.name}: {_fmt_terms(con.terms)} {sense_map[con.sense]} {_fmt_num(con.rhs)}")
    lines.append("Bounds")
    for name, value in model.fixed.items():
        lines.append(f" {name} = {_fmt_num(value)}")
    for name, (lo, hi) in model.bounds.items():
        if name in model.fixed:
            continue
        lines.append(f" {_fmt_num(lo)} <= {name} <= {_fmt_num(hi)}")
    lines.append("Binaries")
    free_bin = [v for v in model.binaries if v not in model.fixed]
    for i in range(0, len(free_bin), 8):
        lines.append(" " + " ".join(free_bin[i:i + 8]))
    lines.append("End")
    return "\n".join(lines) + "\n"


def parse_solution(model: MilpModel, text: str, tol: float = 1e-6) -> MediatedGraph:
    """Reconstruct a mediated graph from a solver solution file.

    The file holds "name value" lines; comment lines starting with # and
    unknown variables are skipped with a warning.  Coordinates are snapped
    to integers when within tol, otherwise reinterpreted as exact rationals
    of the nearest simple fraction.
    """
    known = set(model.variable_names)
    values: dict[str, float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#") or line.startswith("\\"):
            continue
        parts = line.split()
        if len(parts) < 2:
            warnings.warn(f"solution line {lineno} is malformed: {raw!r}")
            continue
        name, val = parts[0], parts[1]
        if name == "Objective" or "=" in name:
            continue
        if name not in known:
            warnings.warn(f"solution line {lineno} names unknown variable {name!r}")
            continue
        try:
            values[name] = float(val)
        except ValueError:
            warnings.warn(f"solution line {lineno} has non-numeric value: {raw!r}")
    return _graph_from_values(model, values, tol)


def _snap(value: float, tol: float):
    near = round(value)
    if abs(value - near) <= tol:
        return int(near)
    frac = Fraction(value).limit_denominator(64)
    if abs(float(frac) - value) <= tol:
        return canon_coord(frac)
    warnings.warn(f"coordinate {value!r} is not a simple rational; keeping exact float")
    return canon_coord(Fraction(value))


def _graph_from_values(model: MilpModel, values: dict[str, float],
                       tol: float) -> MediatedGraph:
    ctx = model.ctx
    d = ctx.d
    dim = d - 1
    idx_all = list(range(d + model.delta + 1))
    idx_cand = list(range(d + 1, d + model.delta + 1))
    idx_med = [0] + idx_cand

    def val(name: str) -> float:
        if name in model.fixed:
            return float(model.fixed[name])
        return values.get(name, 0.0)

    def is_one(name: str) -> bool:
        return abs(val(name) - 1.0) <= tol

    active = [j for j in idx_all if is_one(f"z_{j}")]
    active_med = [j for j in idx_med if j in active]
    if 0 not in active:
        raise InvalidInputError("solution does not activate the goal node")

    coords: dict[int, tuple] = {}
    for j in idx_all:
        coords[j] = tuple(_snap(val(f"x_{j}_{r}"), tol) for r in range(dim))

    # Coincident active candidates collapse onto one representative point.
    rep: dict[int, tuple] = {j: coords[j] for j in active}

    pairs: dict[tuple, tuple] = {}
    order: list[tuple] = []
    for i in active_med:
        witnesses = [j for j in idx_all if j != i and is_one(f"y_{i}_{j}")]
        if len(witnesses) != 2:
            raise InvalidInputError(
                f"node {i} selects {len(witnesses)} witnesses instead of 2")
        point = rep[i]
        pair = (rep.get(witnesses[0], coords[witnesses[0]]),
                rep.get(witnesses[1], coords[witnesses[1]]))
        if point not in pairs:
            pairs[point] = pair
            order.append(point)
    anchors = set(ctx.anchors())
    node_points = [p for p in order if p not in anchors]
    graph = MediatedGraph(ctx, tuple(node_points),
                          tuple(pairs[p] for p in node_points))
    errs = validate(graph)
    if errs:
        raise InvalidInputError("solution does not decode to a valid graph: "
                                + "; ".join(errs))
    return graph


def next_delta(ctx: AlphaWeight, delta: int, feasible: bool) -> int | None:
    """Search protocol on Delta: grow while infeasible, stop once feasible."""
    if feasible:
        return None
    ub = upper_bound(ctx)
    nxt = delta + 1
    return nxt if nxt <= ub else None


def delta_range(ctx: AlphaWeight) -> tuple[int, int]:
    """Candidate-count window implied by the cardinality bounds.

    The goal node is counted by the objective but not by Delta, so Delta
    ranges from lower_bound - 1 to upper_bound - 1.
    """
    return max(0, lower_bound(ctx) - 1), max(0, upper_bound(ctx) - 1)
