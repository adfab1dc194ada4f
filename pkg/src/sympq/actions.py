"""Linear Hamiltonian actions of tori and finite groups on ``R^{2n}``.

Coordinates are ordered ``x_1, y_1, …, x_n, y_n`` and the symplectic form is
``ω = Σ dx_i ∧ dy_i``.  A torus acts through an integer weight matrix ``W``
(rows = circle factors, columns = complex planes); ``ξ`` in the Lie algebra
rotates plane ``i`` with angular speed ``(ξ·W)_i``.  Moment maps satisfy
``dΦ^ξ = i(ξ_M) ω`` with no extra sign, which makes them negative definite on
positive weights: ``Φ^ξ(v) = ½ ω(ξv, v) − ⟨level, ξ⟩``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .forms import (
    DifferentialForm,
    PolyMap,
    PolyVectorField,
    exterior_derivative,
    interior_product,
    lie_derivative,
    pullback,
    symplectic_form,
)
from .poly import Poly, as_fraction

Matrix = tuple[tuple[Fraction, ...], ...]

DEFAULT_ORDER_CAP = 10_000


class ActionError(ValueError):
    pass


def _matrix(rows: Sequence[Sequence]) -> Matrix:
    return tuple(tuple(as_fraction(x) for x in r) for r in rows)


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    n, m = len(a), len(b[0])
    return tuple(
        tuple(sum((a[i][k] * b[k][j] for k in range(len(b)) if a[i][k]), Fraction(0)) for j in range(m))
        for i in range(n)
    )


def identity(n: int) -> Matrix:
    return tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))


def transpose(a: Matrix) -> Matrix:
    return tuple(zip(*a))


@dataclass(frozen=True)
class SymplecticVectorSpace:
    n: int

    @property
    def dim(self) -> int:
        return 2 * self.n

    def coordinate_names(self) -> list[str]:
        names = []
        for i in range(1, self.n + 1):
            names += [f"x{i}", f"y{i}"]
        return names

    def omega(self) -> DifferentialForm:
        return symplectic_form(self.n)

    def gram(self) -> Matrix:
        """Matrix ``Ω`` with ``ω(u, v) = uᵀ Ω v``."""
        rows = [[0] * self.dim for _ in range(self.dim)]
        for i in range(self.n):
            rows[2 * i][2 * i + 1] = 1
            rows[2 * i + 1][2 * i] = -1
        return _matrix(rows)

    def complex_structure(self) -> Matrix:
        """``J`` rotating each ``(x_i, y_i)`` plane by a quarter turn, ``J e_x = e_y``."""
        rows = [[0] * self.dim for _ in range(self.dim)]
        for i in range(self.n):
            rows[2 * i + 1][2 * i] = 1
            rows[2 * i][2 * i + 1] = -1
        return _matrix(rows)

    def pairing(self, u: Sequence, v: Sequence) -> Fraction:
        return sum((u[2 * i] * v[2 * i + 1] - u[2 * i + 1] * v[2 * i] for i in range(self.n)), Fraction(0))


@dataclass(frozen=True)
class TorusGroup:
    weights: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        for row in self.weights:
            for w in row:
                if not isinstance(w, int):
                    raise ActionError(f"torus weights must be integers, got {w!r}")

    @property
    def rank(self) -> int:
        return len(self.weights)

    def speeds(self, xi: Sequence) -> list[Fraction]:
        n = len(self.weights[0]) if self.weights else 0
        return [sum((as_fraction(xi[j]) * self.weights[j][i] for j in range(self.rank)), Fraction(0)) for i in range(n)]


@dataclass(frozen=True)
class FiniteGroup:
    generators: tuple[Matrix, ...]
    order_cap: int = DEFAULT_ORDER_CAP
    elements: tuple[Matrix, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if not self.generators:
            raise ActionError("a finite group needs at least one generator")
        object.__setattr__(self, "generators", tuple(_matrix(g) for g in self.generators))
        object.__setattr__(self, "elements", closure(self.generators, self.order_cap))

    @property
    def order(self) -> int:
        return len(self.elements)


def closure(generators: Sequence[Matrix], cap: int = DEFAULT_ORDER_CAP) -> tuple[Matrix, ...]:
    """Breadth-first saturation of the generated matrix group; raises beyond ``cap`` elements."""
    n = len(generators[0])
    ident = identity(n)
    seen = {ident}
    queue = deque([ident])
    while queue:
        g = queue.popleft()
        for s in generators:
            h = mat_mul(s, g)
            if h not in seen:
                seen.add(h)
                if len(seen) > cap:
                    raise ActionError(f"group generated exceeds the order cap {cap}; is it finite?")
                queue.append(h)
    return tuple(sorted(seen))


@dataclass(frozen=True)
class LinearAction:
    space: SymplecticVectorSpace
    group: TorusGroup | FiniteGroup
    level: tuple[Fraction, ...] = ()
    name: str = field(default="", compare=False)

    def __post_init__(self):
        level = tuple(as_fraction(x) for x in self.level)
        if isinstance(self.group, FiniteGroup):
            if any(level):
                raise ActionError("finite groups have a trivial Lie algebra; the level must be zero")
            level = ()
            omega = self.space.gram()
            for g in self.group.generators:
                if len(g) != self.space.dim:
                    raise ActionError("generator size does not match the space")
                if mat_mul(mat_mul(transpose(g), omega), g) != omega:
                    raise ActionError("generator is not symplectic")
        else:
            if any(len(row) != self.space.n for row in self.group.weights):
                raise ActionError("weight matrix must have one column per complex plane")
            if not level:
                level = (Fraction(0),) * self.group.rank
            if len(level) != self.group.rank:
                raise ActionError(f"level needs {self.group.rank} entries")
        object.__setattr__(self, "level", level)

    @property
    def dim(self) -> int:
        return self.space.dim

    @property
    def is_torus(self) -> bool:
        return isinstance(self.group, TorusGroup)

    @property
    def lie_rank(self) -> int:
        return self.group.rank if self.is_torus else 0

    @property
    def at_zero_level(self) -> bool:
        return not any(self.level)

    def to_json(self) -> dict:
        data = {"type": "torus" if self.is_torus else "finite", "n": self.space.n}
        if self.is_torus:
            data["weights"] = [list(r) for r in self.group.weights]
            data["level"] = [str(x) for x in self.level]
        else:
            data["generators"] = [[[str(x) for x in row] for row in g] for g in self.group.generators]
            data["level"] = []
        if self.name:
            data["name"] = self.name
        return data

    @classmethod
    def from_json(cls, data: dict) -> "LinearAction":
        space = SymplecticVectorSpace(int(data["n"]))
        if data["type"] == "torus":
            group = TorusGroup(tuple(tuple(int(w) for w in row) for row in data["weights"]))
            level = tuple(Fraction(x) for x in data.get("level", [])) or ()
            return cls(space, group, level, name=data.get("name", ""))
        if data["type"] == "finite":
            gens = tuple(_matrix([[Fraction(x) for x in row] for row in g]) for g in data["generators"])
            return cls(space, FiniteGroup(gens), (), name=data.get("name", ""))
        raise ActionError(f"unknown action type {data['type']!r}")


@dataclass(frozen=True)
class MomentMapData:
    components: tuple[Poly, ...]


@dataclass
class MomentReport:
    passed: bool
    failures: list[int]


def torus_action(weights: Sequence[Sequence[int]], level: Sequence = (), name: str = "") -> LinearAction:
    weights = tuple(tuple(int(w) for w in row) for row in weights)
    n = len(weights[0]) if weights else 0
    return LinearAction(SymplecticVectorSpace(n), TorusGroup(weights), tuple(level), name=name)


def finite_action(generators: Sequence, n: int | None = None, name: str = "", order_cap: int = DEFAULT_ORDER_CAP) -> LinearAction:
    gens = tuple(_matrix(g) for g in generators)
    n = n or len(gens[0]) // 2
    return LinearAction(SymplecticVectorSpace(n), FiniteGroup(gens, order_cap), (), name=name)


# rational symplectic matrices of order k on R^2 exist only for these k
CYCLIC_GENERATORS = {
    1: ((1, 0), (0, 1)),
    2: ((-1, 0), (0, -1)),
    3: ((0, -1), (1, -1)),
    4: ((0, -1), (1, 0)),
    6: ((1, -1), (1, 0)),
}


def cyclic_action(k: int) -> LinearAction:
    if k not in CYCLIC_GENERATORS:
        raise ActionError(f"Z_{k} has no rational symplectic representation on C; use k in {sorted(CYCLIC_GENERATORS)}")
    return finite_action([CYCLIC_GENERATORS[k]], n=1, name=f"zk-cone:{k}")


def builtin(name: str, k: int = 3) -> LinearAction:
    """Named examples.  Levels are written in the ``dΦ = i(ξ_M)ω`` convention."""
    if name == "cp1":
        return torus_action([[1, 1]], [-1], name="cp1")
    if name == "teardrop":
        return torus_action([[1, 2]], [-1], name="teardrop")
    if name == "cone11":
        return torus_action([[1, -1]], [0], name="cone11")
    if name == "zk-cone":
        return cyclic_action(k)
    if name.startswith("zk-cone:"):
        return cyclic_action(int(name.split(":", 1)[1]))
    raise ActionError(f"unknown example {name!r}")


BUILTIN_NAMES = ("cp1", "teardrop", "cone11", "zk-cone")


def all_builtins(k: int = 3) -> list[LinearAction]:
    return [builtin(n, k) for n in BUILTIN_NAMES]


# -- operations ------------------------------------------------------------------------


def _require_torus(action: LinearAction) -> TorusGroup:
    if not action.is_torus:
        raise ActionError("finite groups have no Lie algebra")
    return action.group


def induced_vector_field(action: LinearAction, xi: Sequence) -> PolyVectorField:
    group = _require_torus(action)
    if len(xi) != group.rank:
        raise ActionError(f"Lie algebra element needs {group.rank} entries")
    dim = action.dim
    comps = [Poly.zero(dim)] * dim
    for i, s in enumerate(group.speeds(xi)):
        if s:
            comps[2 * i] = Poly.var(dim, 2 * i + 1) * (-s)
            comps[2 * i + 1] = Poly.var(dim, 2 * i) * s
    if dim == 0:
        raise ActionError("zero-dimensional space")
    return PolyVectorField(comps)


def basis_vector_fields(action: LinearAction) -> list[PolyVectorField]:
    if not action.is_torus:
        return []
    r = action.group.rank
    return [induced_vector_field(action, [int(i == j) for i in range(r)]) for j in range(r)]


def moment_map(action: LinearAction) -> MomentMapData:
    group = _require_torus(action)
    dim = action.dim
    comps = []
    for j in range(group.rank):
        phi = Poly.zero(dim)
        for i in range(action.space.n):
            w = group.weights[j][i]
            if w:
                r2 = Poly.var(dim, 2 * i) ** 2 + Poly.var(dim, 2 * i + 1) ** 2
                phi = phi + r2 * Fraction(-w, 2)
        comps.append(phi - action.level[j])
    return MomentMapData(tuple(comps))


def verify_moment_condition(action: LinearAction, moment: MomentMapData | None = None) -> MomentReport:
    """Check ``dΦ^{ξ_j} = i((ξ_j)_M) ω`` exactly for each basis element."""
    if not action.is_torus:
        return MomentReport(True, [])
    moment = moment or moment_map(action)
    omega = action.space.omega()
    failures = []
    for j, field_j in enumerate(basis_vector_fields(action)):
        lhs = exterior_derivative(DifferentialForm.function(moment.components[j]))
        rhs = interior_product(field_j, omega)
        if lhs != rhs:
            failures.append(j)
    return MomentReport(not failures, failures)


def act(g: Matrix, form: DifferentialForm) -> DifferentialForm:
    """``g^* form`` for the linear map ``v ↦ g v``."""
    return pullback(PolyMap.linear(g), form)


def is_invariant(action: LinearAction, form: DifferentialForm) -> bool:
    if not form:
        return True
    if action.is_torus:
        return all(not lie_derivative(v, form) for v in basis_vector_fields(action))
    return all(act(g, form) == form for g in action.group.generators)


def average(action: LinearAction, form: DifferentialForm) -> DifferentialForm:
    """Reynolds projection ``|G|⁻¹ Σ_g g^* form`` for a finite group."""
    if action.is_torus:
        raise ActionError("averaging over a torus is not implemented symbolically")
    total = DifferentialForm.zero(form.dim, form.degree)
    for g in action.group.elements:
        total = total + act(g, form)
    return total.scale(Fraction(1, action.group.order))


def zero_fibre_quadrics(action: LinearAction) -> list[Poly]:
    if not action.is_torus:
        return []
    return list(moment_map(action).components)
