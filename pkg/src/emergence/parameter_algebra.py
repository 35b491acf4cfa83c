"""Carriers of fundamental parameters and their actions on operators.

A parameter algebra supplies addition, multiplication, scalar rescaling, a
selected square root, and an action ``act(eps, A)`` on operators.  The
engine leans on three facts that are verified, not assumed, for each shipped
instance:

* the action is additive and multiplicative in the parameter (the two
  required compatibility identities, plus an optional product-composition
  identity whose joint validity forces commutative multiplication);
* the orbit map ``eps -> act(eps, I)`` is injective, so parameters can be
  recovered from operators by a least-squares solve over the algebra basis;
* square roots split a parameter across a composition, halves split it
  across a sum.

Coefficient functions (the parameter-dependent weights of polynomial
theories) live here too, with analytic preimages per kind and a bisection
fallback for monotone real kinds.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import (BadSpec, DegreeMismatch, NoPreimage, NoSquareRoot,
                     NotInIdentityOrbit, NotWellDefined)
from .operator_core import Operator, identity_operator

# --- algebra instances --------------------------------------------------------


class ParameterAlgebra:
    """Base interface; see module docstring for the contract."""

    name: str = "abstract"
    scalar_kind: str = "complex"
    #: maximum tuple power the background declares usable, None = unbounded
    max_power: int | None = None
    #: whether act(eps, A) is linear in eps (true for every base carrier,
    #: false for tuple/product carriers whose action is successive)
    action_linear: bool = True

    def zero(self):
        raise NotImplementedError

    def one(self):
        raise NotImplementedError

    def add(self, a, b):
        raise NotImplementedError

    def mul(self, a, b):
        raise NotImplementedError

    def scale(self, c, a):
        raise NotImplementedError

    def sqrt_select(self, a):
        raise NotImplementedError

    def act(self, a, op: Operator) -> Operator:
        raise NotImplementedError

    def basis(self) -> list:
        """Elements whose orbit at the identity spans the action image."""
        raise BadSpec(f"{self.name} has no identity-orbit basis")

    def from_coords(self, coords: np.ndarray):
        raise BadSpec(f"{self.name} has no identity-orbit basis")

    def sample(self, rng: np.random.Generator):
        raise NotImplementedError

    def sample_nonnegative(self, rng: np.random.Generator):
        """A sample in the square-root-closed part of the carrier."""
        return self.sample(rng)

    def to_vector(self, a) -> np.ndarray:
        raise NotImplementedError

    def distance(self, a, b) -> float:
        return float(np.linalg.norm(self.to_vector(a) - self.to_vector(b)))

    def to_json(self, a):
        v = self.to_vector(a)
        if np.iscomplexobj(v):
            return {"real": np.real(v).tolist(), "imag": np.imag(v).tolist()}
        return {"real": v.tolist(), "imag": None}


class ComplexScalars(ParameterAlgebra):
    """The complex numbers with the principal square root."""

    name = "complex_scalars"
    scalar_kind = "complex"

    def zero(self):
        return 0j

    def one(self):
        return 1 + 0j

    def add(self, a, b):
        return complex(a) + complex(b)

    def mul(self, a, b):
        return complex(a) * complex(b)

    def scale(self, c, a):
        return complex(c) * complex(a)

    def sqrt_select(self, a):
        return cmath.sqrt(complex(a))

    def act(self, a, op: Operator) -> Operator:
        return Operator(complex(a) * op.matrix, op.space)

    def basis(self):
        return [1 + 0j]

    def from_coords(self, coords):
        return complex(coords[0])

    def sample(self, rng):
        return complex(rng.standard_normal() + 1j * rng.standard_normal())

    def sample_nonnegative(self, rng):
        # any complex number has a principal square root
        return self.sample(rng)

    def to_vector(self, a):
        return np.array([complex(a)])


class RealScalars(ParameterAlgebra):
    """The real numbers; square roots exist only on the nonnegative half."""

    name = "real_scalars"
    scalar_kind = "real"

    def zero(self):
        return 0.0

    def one(self):
        return 1.0

    def add(self, a, b):
        return float(a) + float(b)

    def mul(self, a, b):
        return float(a) * float(b)

    def scale(self, c, a):
        return float(c) * float(a)

    def sqrt_select(self, a):
        a = float(a)
        if a < 0:
            raise NoSquareRoot("negative real parameters have no real "
                               "square root")
        return math.sqrt(a)

    def act(self, a, op: Operator) -> Operator:
        return Operator(float(a) * op.matrix, op.space)

    def basis(self):
        return [1.0]

    def from_coords(self, coords):
        return float(np.real(coords[0]))

    def sample(self, rng):
        return float(rng.standard_normal())

    def sample_nonnegative(self, rng):
        return float(rng.uniform(0.05, 3.0))

    def to_vector(self, a):
        return np.array([float(a)])


class NonnegativeReals(ParameterAlgebra):
    """The cone of nonnegative reals: a semiring, no subtraction."""

    name = "nonnegative_reals"
    scalar_kind = "real"

    @staticmethod
    def _check(x):
        x = float(x)
        if x < 0:
            raise BadSpec("nonnegative-real carrier got a negative value")
        return x

    def zero(self):
        return 0.0

    def one(self):
        return 1.0

    def add(self, a, b):
        return self._check(a) + self._check(b)

    def mul(self, a, b):
        return self._check(a) * self._check(b)

    def scale(self, c, a):
        return self._check(c) * self._check(a)

    def sqrt_select(self, a):
        return math.sqrt(self._check(a))

    def act(self, a, op: Operator) -> Operator:
        return Operator(self._check(a) * op.matrix, op.space)

    def basis(self):
        return [1.0]

    def from_coords(self, coords):
        x = float(np.real(coords[0]))
        # clamp to the cone; the orbit solve reports the residual honestly
        return max(x, 0.0)

    def sample(self, rng):
        return float(rng.uniform(0.05, 3.0))

    def to_vector(self, a):
        return np.array([float(a)])


class TuplePower(ParameterAlgebra):
    """Componentwise tuple power of a base algebra.

    The action on operators is the successive action of the components
    (rightmost first), i.e. the product action for scalar bases.  Identity-
    orbit recovery is deliberately slot-by-slot: the product action alone is
    not injective, the per-slot probes are.
    """

    action_linear = False

    def __init__(self, base: ParameterAlgebra, degree: int):
        if degree < 1:
            raise BadSpec("tuple power needs degree >= 1")
        self.base = base
        self.degree = int(degree)
        self.name = f"{base.name}^{degree}"
        self.scalar_kind = base.scalar_kind

    def _as_tuple(self, a):
        a = tuple(a)
        if len(a) != self.degree:
            raise BadSpec(f"{self.name} expects {self.degree}-tuples")
        return a

    def zero(self):
        return (self.base.zero(),) * self.degree

    def one(self):
        return (self.base.one(),) * self.degree

    def add(self, a, b):
        return tuple(self.base.add(x, y)
                     for x, y in zip(self._as_tuple(a), self._as_tuple(b)))

    def mul(self, a, b):
        return tuple(self.base.mul(x, y)
                     for x, y in zip(self._as_tuple(a), self._as_tuple(b)))

    def scale(self, c, a):
        return tuple(self.base.scale(c, x) for x in self._as_tuple(a))

    def sqrt_select(self, a):
        return tuple(self.base.sqrt_select(x) for x in self._as_tuple(a))

    def act(self, a, op: Operator) -> Operator:
        out = op
        for x in reversed(self._as_tuple(a)):
            out = self.base.act(x, out)
        return out

    def sample(self, rng):
        return tuple(self.base.sample(rng) for _ in range(self.degree))

    def sample_nonnegative(self, rng):
        return tuple(self.base.sample_nonnegative(rng) for _ in range(self.degree))

    def to_vector(self, a):
        return np.concatenate([self.base.to_vector(x) for x in self._as_tuple(a)])


class ProductAlgebra(ParameterAlgebra):
    """Heterogeneous product of parameter algebras; elements are tuples.

    This is the carrier of sum and composition family trees: one component
    per branch, componentwise arithmetic, successive action.
    """

    action_linear = False

    def __init__(self, components: tuple[ParameterAlgebra, ...]):
        if not components:
            raise BadSpec("product algebra needs at least one component")
        self.components = tuple(components)
        self.name = "product(" + ", ".join(c.name for c in self.components) + ")"
        kinds = {c.scalar_kind for c in self.components}
        self.scalar_kind = "complex" if "complex" in kinds else "real"

    def _as_tuple(self, a):
        a = tuple(a)
        if len(a) != len(self.components):
            raise BadSpec(f"{self.name} expects {len(self.components)}-tuples")
        return a

    def zero(self):
        return tuple(c.zero() for c in self.components)

    def one(self):
        return tuple(c.one() for c in self.components)

    def add(self, a, b):
        return tuple(c.add(x, y) for c, x, y in
                     zip(self.components, self._as_tuple(a), self._as_tuple(b)))

    def mul(self, a, b):
        return tuple(c.mul(x, y) for c, x, y in
                     zip(self.components, self._as_tuple(a), self._as_tuple(b)))

    def scale(self, s, a):
        return tuple(c.scale(s, x) for c, x in
                     zip(self.components, self._as_tuple(a)))

    def sqrt_select(self, a):
        return tuple(c.sqrt_select(x) for c, x in
                     zip(self.components, self._as_tuple(a)))

    def act(self, a, op: Operator) -> Operator:
        out = op
        for c, x in zip(reversed(self.components), reversed(self._as_tuple(a))):
            out = c.act(x, out)
        return out

    def sample(self, rng):
        return tuple(c.sample(rng) for c in self.components)

    def sample_nonnegative(self, rng):
        return tuple(c.sample_nonnegative(rng) for c in self.components)

    def to_vector(self, a):
        return np.concatenate([c.to_vector(x) for c, x in
                               zip(self.components, self._as_tuple(a))])


class CentralizerDiagonal(ParameterAlgebra):
    """Real diagonals commuting with a fixed idempotent-power operator.

    ``diag(d)`` commutes with ``P`` exactly when ``d`` is constant on the
    connected components of the nonzero pattern of ``P``; those component
    indicators are the basis.  Square roots are componentwise and exist only
    on the nonnegative part of the carrier.
    """

    name = "centralizer_diagonal"
    scalar_kind = "real"

    def __init__(self, projector, tol: float = 1e-12):
        p = projector.matrix if isinstance(projector, Operator) else np.asarray(projector)
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise BadSpec("centralizer needs a square operator")
        self.dim = p.shape[0]
        self.components = self._pattern_components(p, tol)

    @staticmethod
    def _pattern_components(p: np.ndarray, tol: float) -> list[list[int]]:
        n = p.shape[0]
        scale_ = max(1.0, float(np.max(np.abs(p))))
        parent = list(range(n))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for i in range(n):
            for j in range(i + 1, n):
                if max(abs(p[i, j]), abs(p[j, i])) > tol * scale_:
                    parent[find(i)] = find(j)
        groups: dict[int, list[int]] = {}
        for i in range(n):
            groups.setdefault(find(i), []).append(i)
        return sorted(groups.values())

    def _as_array(self, a):
        d = np.asarray(a, dtype=float)
        if d.shape != (self.dim,):
            raise BadSpec("centralizer element has the wrong length")
        for comp in self.components:
            if np.max(d[comp]) - np.min(d[comp]) > 1e-12 * max(1.0, np.max(np.abs(d))):
                raise BadSpec("diagonal is not constant on a coupled component")
        return d

    def zero(self):
        return np.zeros(self.dim)

    def one(self):
        return np.ones(self.dim)

    def add(self, a, b):
        return self._as_array(a) + self._as_array(b)

    def mul(self, a, b):
        return self._as_array(a) * self._as_array(b)

    def scale(self, c, a):
        return float(c) * self._as_array(a)

    def sqrt_select(self, a):
        d = self._as_array(a)
        if np.any(d < 0):
            raise NoSquareRoot("diagonal has a negative entry; no real square root")
        return np.sqrt(d)

    def act(self, a, op: Operator) -> Operator:
        return Operator(self._as_array(a)[:, None] * op.matrix, op.space)

    def basis(self):
        out = []
        for comp in self.components:
            e = np.zeros(self.dim)
            e[comp] = 1.0
            out.append(e)
        return out

    def from_coords(self, coords):
        d = np.zeros(self.dim)
        for comp, c in zip(self.components, coords):
            d[comp] = float(np.real(c))
        return d

    def sample(self, rng):
        return self.from_coords(rng.uniform(0.1, 2.5, size=len(self.components)))

    def to_vector(self, a):
        return self._as_array(a)


class BooleanComplex(ParameterAlgebra):
    """Pointwise ``C^m`` containing the 0/1 idempotent masks.

    The principal componentwise square root fixes every idempotent, and the
    faithful representation expands each component over a block of the field
    space: ``rho(eps) = diag(eps_1 I_b, ..., eps_m I_b)``.
    """

    name = "boolean_complex"
    scalar_kind = "complex"

    def __init__(self, masks: int, block: int = 1):
        if masks < 1 or block < 1:
            raise BadSpec("boolean algebra needs masks >= 1 and block >= 1")
        self.masks = int(masks)
        self.block = int(block)

    def _as_array(self, a):
        v = np.asarray(a, dtype=complex)
        if v.shape != (self.masks,):
            raise BadSpec("boolean element has the wrong length")
        return v

    def zero(self):
        return np.zeros(self.masks, dtype=complex)

    def one(self):
        return np.ones(self.masks, dtype=complex)

    def add(self, a, b):
        return self._as_array(a) + self._as_array(b)

    def mul(self, a, b):
        return self._as_array(a) * self._as_array(b)

    def scale(self, c, a):
        return complex(c) * self._as_array(a)

    def sqrt_select(self, a):
        return np.sqrt(self._as_array(a))

    def representation_matrix(self, a) -> np.ndarray:
        return np.diag(np.repeat(self._as_array(a), self.block))

    def act(self, a, op: Operator) -> Operator:
        if op.space.dim != self.masks * self.block:
            raise BadSpec("operator dimension disagrees with masks*block")
        return Operator(self.representation_matrix(a) @ op.matrix, op.space)

    def basis(self):
        return [np.eye(self.masks, dtype=complex)[i] for i in range(self.masks)]

    def from_coords(self, coords):
        return np.asarray(coords, dtype=complex)

    def sample(self, rng):
        return rng.standard_normal(self.masks) + 1j * rng.standard_normal(self.masks)

    def sample_idempotent(self, rng):
        return rng.integers(0, 2, size=self.masks).astype(complex)

    def to_vector(self, a):
        return self._as_array(a)


# --- compatibility and recovery ------------------------------------------------


@dataclass(frozen=True)
class CompatibilityReport:
    """Outcome of sampling the action-compatibility identities."""

    ok: bool
    vacuous: bool
    samples: int
    required_residual: float
    optional_residual: float
    optional_ok: bool
    commutativity_residual: float | None


def check_action_compatibility(algebra: ParameterAlgebra, operators,
                               n_samples: int, seed: int = 0,
                               tol: float = 1e-12) -> CompatibilityReport:
    """Verify additivity and multiplicativity of the action by sampling.

    The optional third identity ``act(ab, X o Y) = act(a, X) o act(b, Y)``
    is reported separately; when it passes alongside the required two, the
    multiplication must be commutative (the standard two-products argument)
    and the observed commutator residual is included.
    """
    operators = list(operators)
    if n_samples <= 0 or not operators:
        return CompatibilityReport(True, True, 0, 0.0, 0.0, True, None)
    rng = np.random.default_rng(seed)
    req = 0.0
    opt = 0.0
    comm = 0.0
    for _ in range(n_samples):
        a, b = algebra.sample(rng), algebra.sample(rng)
        x = operators[int(rng.integers(len(operators)))]
        y = operators[int(rng.integers(len(operators)))]
        lhs = algebra.act(algebra.add(a, b), x).matrix
        rhs = algebra.act(a, x).matrix + algebra.act(b, x).matrix
        req = max(req, float(np.linalg.norm(lhs - rhs, "fro")))
        lhs = algebra.act(algebra.mul(a, b), x).matrix
        rhs = algebra.act(a, algebra.act(b, x)).matrix
        req = max(req, float(np.linalg.norm(lhs - rhs, "fro")))
        lhs = algebra.act(algebra.mul(a, b), Operator(x.matrix @ y.matrix, x.space)).matrix
        rhs = algebra.act(a, x).matrix @ algebra.act(b, y).matrix
        opt = max(opt, float(np.linalg.norm(lhs - rhs, "fro")))
        comm = max(comm, algebra.distance(algebra.mul(a, b), algebra.mul(b, a)))
    optional_ok = opt <= tol
    return CompatibilityReport(req <= tol, False, n_samples, req, opt,
                               optional_ok, comm if optional_ok else None)


def solve_action_on_identity(algebra: ParameterAlgebra, target,
                             tol: float = 1e-10):
    """Recover ``c`` with ``act(c, I) = target`` by least squares.

    ``target`` is an operator (or matrix).  For tuple algebras pass a list
    with one probe operator per slot; recovery is slot-by-slot because the
    product action alone cannot separate the components.

    Raises
    ------
    NotInIdentityOrbit
        If the residual of the best orbit element exceeds ``tol`` relative
        to the target norm.
    """
    if isinstance(algebra, TuplePower):
        if not isinstance(target, (list, tuple)):
            raise BadSpec("tuple recovery needs one probe operator per slot")
        probes = list(target)
        if len(probes) != algebra.degree:
            raise DegreeMismatch("probe count disagrees with the tuple degree")
        return tuple(solve_action_on_identity(algebra.base, p, tol) for p in probes)

    matrix = target.matrix if isinstance(target, Operator) else np.asarray(target)
    space = target.space if isinstance(target, Operator) else None
    if space is None:
        from .operator_core import plain_space
        space = plain_space(matrix.shape[0],
                            "complex" if np.iscomplexobj(matrix) else "real")
    ident = identity_operator(space)
    if isinstance(algebra, BooleanComplex):
        # the indicator basis has disjoint supports, so the least-squares
        # minimizer is the per-block mean of the diagonal; exact arithmetic
        # for idempotent masks (the general routine would round)
        diag = np.diagonal(matrix).astype(complex)
        coords = diag.reshape(algebra.masks, algebra.block).mean(axis=1)
    else:
        basis = algebra.basis()
        columns = np.column_stack(
            [algebra.act(e, ident).matrix.ravel() for e in basis])
        rhs = matrix.ravel()
        if np.iscomplexobj(columns) or np.iscomplexobj(rhs):
            columns = columns.astype(complex)
            rhs = rhs.astype(complex)
        coords, *_ = np.linalg.lstsq(columns, rhs, rcond=None)
    candidate = algebra.from_coords(coords)
    residual = float(np.linalg.norm(
        algebra.act(candidate, ident).matrix - matrix, "fro"))
    scale_ = max(1.0, float(np.linalg.norm(matrix, "fro")))
    if residual > tol * scale_:
        raise NotInIdentityOrbit(
            f"operator is not in the identity orbit of {algebra.name}",
            residual=residual)
    return candidate


# --- coefficient functions ------------------------------------------------------


@dataclass(frozen=True)
class CoefficientFunction:
    """A parameter-dependent coefficient with a partial analytic preimage.

    ``kind`` is one of ``constant | linear | affine | exp | power``;
    ``params`` holds the kind's numbers.  ``nowhere_vanishing`` is the
    instance author's claim that the function does not vanish on the working
    parameter range; synthesis preconditions consult it.
    """

    kind: str
    params: tuple
    nowhere_vanishing: bool
    domain: str = "complex"  # "complex" | "real" | "nonneg"

    # -- constructors

    @classmethod
    def constant(cls, value, domain="complex"):
        return cls("constant", (value,), value != 0, domain)

    @classmethod
    def linear(cls, slope, domain="complex"):
        if slope == 0:
            raise BadSpec("linear coefficient needs a nonzero slope")
        return cls("linear", (slope,), True, domain)

    @classmethod
    def affine(cls, slope, offset, domain="complex"):
        if slope == 0:
            raise BadSpec("affine coefficient needs a nonzero slope")
        return cls("affine", (slope, offset), True, domain)

    @classmethod
    def exponential(cls, domain="real"):
        return cls("exp", (), True, domain)

    @classmethod
    def monomial_power(cls, exponent: int, domain="complex"):
        if int(exponent) < 1:
            raise BadSpec("power coefficient needs exponent >= 1")
        return cls("power", (int(exponent),), False, domain)

    # -- evaluation / inversion

    @property
    def is_constant(self) -> bool:
        return self.kind == "constant"

    def __call__(self, delta):
        if self.kind == "constant":
            return self.params[0]
        if self.kind == "linear":
            return self.params[0] * delta
        if self.kind == "affine":
            return self.params[0] * delta + self.params[1]
        if self.kind == "exp":
            return math.exp(delta) if not isinstance(delta, complex) else cmath.exp(delta)
        if self.kind == "power":
            return delta ** self.params[0]
        raise BadSpec(f"unknown coefficient kind {self.kind!r}")

    def _check_domain(self, delta):
        if isinstance(delta, np.ndarray):
            if self.domain == "nonneg":
                if np.any(np.real(delta) < -1e-15) or np.max(np.abs(np.imag(delta))) > 1e-12:
                    raise NoPreimage("preimage falls outside the nonnegative cone")
                return np.maximum(np.real(delta), 0.0)
            if self.domain == "real":
                if np.max(np.abs(np.imag(delta))) > 1e-12:
                    raise NoPreimage("preimage falls outside the real carrier")
                return np.real(delta).astype(float)
            return np.asarray(delta, dtype=complex)
        if self.domain == "nonneg":
            d = float(np.real(delta))
            if d < -1e-15 or abs(np.imag(complex(delta))) > 1e-12:
                raise NoPreimage("preimage falls outside the nonnegative cone")
            return max(d, 0.0)
        if self.domain == "real":
            if abs(np.imag(complex(delta))) > 1e-12:
                raise NoPreimage("preimage falls outside the real carrier")
            return float(np.real(delta))
        return complex(delta)

    def preimage(self, value):
        """A ``delta`` with ``f(delta) = value``; raises NoPreimage."""
        if self.kind == "constant":
            ref = max(1.0, abs(self.params[0]))
            if abs(value - self.params[0]) > 1e-12 * ref:
                raise NoPreimage("constant coefficient cannot reach the value")
            return self._check_domain(0.0)
        if self.kind == "linear":
            return self._check_domain(value / self.params[0])
        if self.kind == "affine":
            return self._check_domain((value - self.params[1]) / self.params[0])
        if self.kind == "exp":
            v = complex(value)
            if abs(v.imag) > 1e-12 or v.real <= 0:
                raise NoPreimage("exponential preimage needs a positive value")
            return self._check_domain(math.log(v.real))
        if self.kind == "power":
            p = self.params[0]
            v = complex(value)
            if v == 0:
                return self._check_domain(0.0)
            root = cmath.exp(cmath.log(v) / p)
            return self._check_domain(root)
        raise BadSpec(f"unknown coefficient kind {self.kind!r}")

    def describe(self) -> dict:
        return {"kind": self.kind, "domain": self.domain,
                "nowhere_vanishing": self.nowhere_vanishing,
                "params": [[float(np.real(p)), float(np.imag(complex(p)))]
                           for p in self.params]}


def coefficient_preimage(f: CoefficientFunction, value):
    """Module-level alias for the preimage solve (kept for API symmetry)."""
    return f.preimage(value)


def bisect_preimage(f, value: float, lo: float, hi: float,
                    tol: float = 1e-12, max_iter: int = 200) -> float:
    """Bracketing bisection for monotone real coefficient functions.

    A generic fallback: callers supply a bracket with a sign change of
    ``f(x) - value``.
    """
    flo, fhi = f(lo) - value, f(hi) - value
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if flo * fhi > 0:
        raise NoPreimage("bisection bracket does not straddle the value")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = f(mid) - value
        if fm == 0 or hi - lo < tol:
            return mid
        if flo * fm < 0:
            hi = mid
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi)


# --- functional calculus ---------------------------------------------------------


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    vacuous: bool
    samples: int
    max_residual: float
    warning: str | None = None


def canonical_calculus(algebra: ParameterAlgebra, f: CoefficientFunction,
                       space, seed: int = 0, n_probes: int = 4,
                       tol: float = 1e-10) -> Operator:
    """The canonical assigned operator ``act(eps, I) / f(eps)`` when well defined.

    Well-definedness means the quotient is independent of the probe
    parameter; only the thin family of coefficient functions proportional to
    the parameter admits it, everything else raises NotWellDefined.
    """
    rng = np.random.default_rng(seed)
    ident = identity_operator(space)
    candidates = []
    for _ in range(n_probes):
        eps = algebra.sample(rng)
        val = f(eps)
        if abs(complex(val)) < 1e-14:
            continue
        candidates.append(algebra.act(eps, ident).matrix / val)
    if not candidates:
        raise NotWellDefined("no usable probe parameters")
    ref = candidates[0]
    worst = max(float(np.linalg.norm(c - ref, "fro")) for c in candidates)
    if worst > tol * max(1.0, float(np.linalg.norm(ref, "fro"))):
        raise NotWellDefined(
            "assigned operator depends on the probe parameter "
            f"(spread {worst:.3e})")
    matrix = ref.real if (space.scalar_kind == "real"
                          and np.max(np.abs(np.imag(ref))) <= 1e-13) else ref
    return Operator(matrix, space)


def validate_functional_calculus(algebra: ParameterAlgebra,
                                 f: CoefficientFunction, assigned: Operator,
                                 operators, n_samples: int, seed: int = 0,
                                 tol: float = 1e-10) -> ValidationReport:
    """Check the defining identity ``assigned o (f(eps) X) = act(eps, X)``."""
    operators = list(operators)
    if n_samples <= 0 or not operators:
        return ValidationReport(True, True, 0, 0.0,
                                warning="no samples drawn; identity unchecked")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_samples):
        eps = algebra.sample(rng)
        x = operators[int(rng.integers(len(operators)))]
        lhs = assigned.matrix @ (f(eps) * x.matrix)
        rhs = algebra.act(eps, x).matrix
        worst = max(worst, float(np.linalg.norm(lhs - rhs, "fro"))
                    / max(1.0, float(np.linalg.norm(rhs, "fro"))))
    return ValidationReport(worst <= tol, False, n_samples, worst)


# --- degree embedding -------------------------------------------------------------


def embed_parameters(base: ParameterAlgebra, element, to_degree: int):
    """Zero-pad a parameter tuple into a higher tuple power.

    A bare element counts as degree 1.  Shrinking raises DegreeMismatch.
    """
    current = element if isinstance(element, tuple) else (element,)
    if to_degree < len(current):
        raise DegreeMismatch(
            f"cannot embed degree {len(current)} into degree {to_degree}")
    return current + (base.zero(),) * (to_degree - len(current))


def pullback_coefficient(f, embedding):
    """Restrict a many-variable coefficient along an embedding map."""
    return lambda a: f(embedding(a))
