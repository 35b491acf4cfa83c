"""Synthesis of emergence maps between parameterized theories.

Given a source family ``eps -> Psi1(eps)`` and a target polynomial family,
the engine constructs a parameter map ``F`` such that both Lagrangians agree
on every field: ``<phi, Psi1(eps) phi> = <phi, Psi2(F(eps)) phi>``.  Maps are
built per term: constant-coefficient terms are split off as a fixed offset,
the remainder is distributed over the active terms by dyadic halving (exact
in binary floating point), single terms are solved through the identity
orbit of the parameter action, and higher slot variables are removed by
right-inverse transport.

Every constructor samples its own result and attaches a
:class:`Certificate`; a constructor never returns an uncertified map, it
raises ``HypothesisViolated`` with the failing certificate as evidence.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import (BadSpec, DegreeMismatch, DimensionTooLarge,
                     EmergenceError, EmptyAccumulation, HypothesisViolated,
                     NoPreimage, NotInIdentityOrbit, NotMultiplicative,
                     NotRightInvertible, NotScalarForm, NotScalarInvariant,
                     SpaceMismatch)
from .operator_core import (Operator, lagrangian_value, operator_residual,
                            right_inverse, sym_part)
from .parameter_algebra import (CoefficientFunction, NonnegativeReals,
                                solve_action_on_identity)
from .theories import (DerivedForm, OperatorFamily, PolynomialFamily,
                       ScalarTimesFixed, compose_families, evaluate_family,
                       evaluate_polynomial, factor_last_variable,
                       monomial_operator, polynomial_family, scalar_family,
                       sum_families)

DEFAULT_SAMPLES = 40
DEFAULT_TOL = 1e-8

# --- certificates and provenance ------------------------------------------------


@dataclass(frozen=True)
class Certificate:
    """Sampled evidence that the two Lagrangians agree under the map.

    The functional residual is relative (denominator ``max(1, |L1|)``), the
    operator residual is the raw Frobenius norm of the symmetric-part
    difference.  ``passed`` holds exactly when both maxima are within
    tolerance.
    """

    samples: int
    max_functional_residual: float
    max_operator_residual: float
    tolerance: float
    passed: bool
    seed: int

    def to_json_dict(self) -> dict:
        return {
            "samples": self.samples,
            "max_functional_residual": self.max_functional_residual,
            "max_operator_residual": self.max_operator_residual,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class ProvenanceNode:
    """One step of the construction; leaves are always monomial solves."""

    kind: str  # monomial | composition | sum | univariate | accumulate | multivariate
    detail: str = ""
    data: tuple = ()
    children: tuple = ()

    def to_json_dict(self) -> dict:
        out = {"kind": self.kind}
        if self.detail:
            out["detail"] = self.detail
        for key, value in self.data:
            out[key] = value
        if self.children:
            out["children"] = [c.to_json_dict() for c in self.children]
        return out

    def digest(self) -> str:
        blob = json.dumps(self.to_json_dict(), sort_keys=True,
                          separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    def leaves(self):
        if not self.children:
            return (self,)
        out = []
        for c in self.children:
            out.extend(c.leaves())
        return tuple(out)


def _monomial_node(alpha, coefficient, weight, detail="") -> ProvenanceNode:
    data = (("exponents", list(alpha)),
            ("coefficient", coefficient.describe() if coefficient is not None
             else "unital"),
            ("weight", weight))
    return ProvenanceNode("monomial", detail, data)


# --- the map record ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class EmergenceMap:
    """A certified parameter map from the source carrier to the target's.

    ``parameter_map`` returns either a shared parameter, a per-term dict
    keyed by multi-index (covering every coefficient occurrence exactly
    once), or a nested pair for sum/composition targets.
    """

    source: OperatorFamily
    target: object  # PolynomialFamily or OperatorFamily
    parameter_map: object  # callable eps -> assignment
    assignment_kind: str  # "shared" | "per_term" | "pair"
    provenance: ProvenanceNode
    certificate: Certificate
    label: str = ""

    def __call__(self, eps):
        return self.parameter_map(eps)

    def target_operator(self, eps) -> Operator:
        return _evaluate_target(self.target, self.parameter_map(eps))

    def to_json_dict(self, n_probes: int = 3) -> dict:
        rng = np.random.default_rng(self.certificate.seed)
        probes = []
        for _ in range(n_probes):
            eps = self.source.algebra.sample(rng)
            probes.append({"parameter": _param_json(eps),
                           "assignment": _param_json(self.parameter_map(eps))})
        return {
            "label": self.label,
            "assignment_kind": self.assignment_kind,
            "certificate": self.certificate.to_json_dict(),
            "provenance": self.provenance.to_json_dict(),
            "provenance_digest": self.provenance.digest(),
            "probes": probes,
        }


def _evaluate_target(target, assignment) -> Operator:
    if isinstance(target, PolynomialFamily):
        return evaluate_polynomial(target, assignment)
    return evaluate_family(target, assignment)


def _param_json(value):
    if isinstance(value, dict):
        return {",".join(str(i) for i in key): _param_json(v)
                for key, v in value.items()}
    if isinstance(value, (tuple, list)):
        return [_param_json(v) for v in value]
    if isinstance(value, np.ndarray):
        if np.iscomplexobj(value):
            return {"real": value.real.tolist(), "imag": value.imag.tolist()}
        return value.tolist()
    if isinstance(value, complex):
        return {"real": value.real, "imag": value.imag}
    if isinstance(value, (np.floating, np.integer)):
        return float(value)
    return value


# --- verification -----------------------------------------------------------------


def verify_emergence(source: OperatorFamily, target, parameter_map,
                     n_samples: int = 100, tol: float = DEFAULT_TOL,
                     seed: int = 0, jobs: int | None = None) -> Certificate:
    """Sample parameters and fields; report both residual maxima.

    Deterministic for a given seed regardless of ``jobs``: the sample set is
    drawn up front and the reduction is a maximum.  Failure is a
    non-passing certificate, never an exception.
    """
    rng = np.random.default_rng(seed)
    draws = [(source.algebra.sample(rng), source.space.sample_field(rng))
             for _ in range(n_samples)]

    def one(draw):
        eps, phi = draw
        a = evaluate_family(source, eps)
        b = _evaluate_target(target, parameter_map(eps))
        l1 = lagrangian_value(a, phi)
        l2 = lagrangian_value(b, phi)
        fn_res = abs(l1 - l2) / max(1.0, abs(l1))
        return float(fn_res), operator_residual(a, b)

    if jobs is not None and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(one, draws))
    else:
        results = [one(d) for d in draws]
    fn_max = max((r[0] for r in results), default=0.0)
    op_max = max((r[1] for r in results), default=0.0)
    return Certificate(n_samples, fn_max, op_max, tol,
                       fn_max <= tol and op_max <= tol, seed)


def _certify(source, target, parameter_map, kind, provenance, label,
             n_samples, tol, seed, jobs=None) -> EmergenceMap:
    """Attach a certificate or refuse: constructors never return failures."""
    cert = verify_emergence(source, target, parameter_map, n_samples, tol,
                            seed, jobs)
    if not cert.passed:
        raise HypothesisViolated(
            f"synthesized map for {label!r} failed certification "
            f"(functional {cert.max_functional_residual:.3e}, operator "
            f"{cert.max_operator_residual:.3e}, tol {tol:.1e})",
            evidence={"certificate": cert})
    return EmergenceMap(source, target, parameter_map, kind, provenance,
                        cert, label)


# --- flag gates --------------------------------------------------------------------


def _has_verified(family: OperatorFamily, *flags: str) -> bool:
    return any(f in family.verified for f in flags)


def _gate_claims(family: OperatorFamily) -> None:
    missing = family.claimed - family.verified
    if missing:
        raise HypothesisViolated(
            f"claimed structure flags were never verified: {sorted(missing)}",
            evidence={"claimed": sorted(family.claimed),
                      "verified": sorted(family.verified)})


def _same_source(a: OperatorFamily, b: OperatorFamily, seed: int = 11) -> bool:
    if a is b:
        return True
    if not a.space.matches(b.space):
        return False
    rng = np.random.default_rng(seed)
    for _ in range(3):
        eps = a.algebra.sample(rng)
        try:
            if operator_residual(evaluate_family(a, eps),
                                 evaluate_family(b, eps)) > 1e-10:
                return False
        except EmergenceError:
            return False
    return True


# --- monomial emergence -------------------------------------------------------------


def emerge_monomial(source: OperatorFamily, coefficient: CoefficientFunction,
                    slot: Operator, exponent: int, tol: float = DEFAULT_TOL,
                    n_samples: int = DEFAULT_SAMPLES, seed: int = 0,
                    algebra=None) -> EmergenceMap:
    """Emerge the source from the single-term target ``g(delta) slot^l``.

    The parameter map solves ``Psi1(eps) R^l`` for an identity-orbit element
    and pulls it back through ``g``.  ``l = 0`` needs no inverse (the empty
    power is the identity).
    """
    _gate_claims(source)
    if not slot.space.matches(source.space):
        raise SpaceMismatch("target slot lives on a different field space")
    if exponent < 0:
        raise BadSpec("monomial exponent must be nonnegative")
    if not coefficient.nowhere_vanishing:
        raise HypothesisViolated(
            "monomial coefficient must be nowhere vanishing",
            evidence={"coefficient": coefficient.describe()})
    algebra = algebra if algebra is not None else source.algebra
    post = None
    if exponent > 0:
        method = "spectral" if ("circulant" in slot.tags
                                and slot.space.geometry is not None) \
            else "pseudoinverse"
        inv = right_inverse(slot, method=method)
        post = np.linalg.matrix_power(inv.matrix, exponent)
    target = scalar_family(algebra, slot, exponent, coefficient=coefficient,
                           label=f"{coefficient.kind} * slot^{exponent}")
    fmap = _monomial_solver(source, coefficient, post, algebra, source.space,
                            weight=1.0, offset=None,
                            term_label=f"slot^{exponent}", tol=tol)
    prov = _monomial_node((exponent,), coefficient, 1.0)
    return _certify(source, target, fmap, "shared", prov,
                    f"monomial[{exponent}] from {source.label}",
                    n_samples, tol, seed)


def _monomial_solver(source, coefficient, post, algebra, space, weight,
                     offset, term_label, tol):
    """Pointwise solver ``eps -> delta`` for one active term.

    Evaluates the (possibly weighted, offset-shifted, transported) source
    slice, reads it as an identity-orbit element of the target action, and
    pulls back through the coefficient.
    """

    def solve(eps, _w=weight, _post=post, _offset=offset, _g=coefficient):
        scaled = source.algebra.scale(_w, eps) if _w != 1.0 else eps
        m = evaluate_family(source, scaled).matrix
        if _offset is not None:
            m = m - _w * _offset
        if _post is not None:
            m = m @ _post
        try:
            c = solve_action_on_identity(algebra, Operator(m, space), tol=tol)
        except NotInIdentityOrbit as exc:
            raise NotScalarForm(
                f"term {term_label}: transported source slice is not in the "
                f"identity orbit of the parameter action",
                residual=exc.residual) from exc
        try:
            return _g.preimage(c)
        except NoPreimage as exc:
            raise NoPreimage(f"term {term_label}: {exc}") from exc

    return solve


# --- composition / sum / accumulation ----------------------------------------------


def _target_view(emap: EmergenceMap) -> OperatorFamily:
    """Present any map target as an operator family over its assignments."""
    target = emap.target
    if isinstance(target, OperatorFamily):
        return target
    return OperatorFamily(1, target.algebra,
                          DerivedForm(lambda a: evaluate_polynomial(target, a),
                                      "polynomial_view"),
                          target.space, label=target.label)


def _check_constituents(source, maps):
    for m in maps:
        if not m.certificate.passed:
            raise BadSpec("constituent map carries a failing certificate")
        if not _same_source(source, m.source):
            raise BadSpec("constituent map was certified against a "
                          "different source family")


def emerge_composition(source: OperatorFamily, map2: EmergenceMap,
                       map3: EmergenceMap, tol: float = DEFAULT_TOL,
                       n_samples: int = DEFAULT_SAMPLES,
                       seed: int = 0) -> EmergenceMap:
    """Emerge the source from the composition of two certified targets.

    ``H(eps) = (F2(sqrt(eps)), F3(sqrt(eps)))``: a multiplicative source
    splits across the square root, each factor is handled by the given maps.
    """
    _gate_claims(source)
    if not _has_verified(source, "multiplicative", "homomorphic"):
        raise NotMultiplicative(
            "composition split needs a verified multiplicative source")
    _check_constituents(source, (map2, map3))
    composed = compose_families(_target_view(map2), _target_view(map3))

    def fmap(eps, _f2=map2.parameter_map, _f3=map3.parameter_map):
        root = source.algebra.sqrt_select(eps)
        return (_f2(root), _f3(root))

    prov = ProvenanceNode("composition", "",
                          (("branch", "principal_sqrt"),),
                          (map2.provenance, map3.provenance))
    return _certify(source, composed, fmap, "pair", prov,
                    f"composition from {source.label}", n_samples, tol, seed)


def _sum_maps(source, map2, map3, justification, tol, n_samples, seed):
    _check_constituents(source, (map2, map3))
    summed = sum_families(_target_view(map2), _target_view(map3))

    def fmap(eps, _f2=map2.parameter_map, _f3=map3.parameter_map):
        half = source.algebra.scale(0.5, eps)
        return (_f2(half), _f3(half))

    prov = ProvenanceNode("sum", justification,
                          (("weights", [0.5, 0.5]),),
                          (map2.provenance, map3.provenance))
    return _certify(source, summed, fmap, "pair", prov,
                    f"sum from {source.label}", n_samples, tol, seed)


def emerge_sum(source: OperatorFamily, map2: EmergenceMap,
               map3: EmergenceMap, tol: float = DEFAULT_TOL,
               n_samples: int = DEFAULT_SAMPLES, seed: int = 0) -> EmergenceMap:
    """Emerge the source from the sum of two certified targets.

    ``H(eps) = (F2(eps/2), F3(eps/2))``: a scalar-invariant source splits as
    two halves of itself.
    """
    _gate_claims(source)
    if not _has_verified(source, "scalar_invariant"):
        raise NotScalarInvariant(
            "sum split needs a verified scalar-invariant source")
    return _sum_maps(source, map2, map3, "scalar_halving", tol, n_samples,
                     seed)


def emerge_accumulate(source: OperatorFamily, pairs, tol: float = DEFAULT_TOL,
                      n_samples: int = DEFAULT_SAMPLES,
                      seed: int = 0) -> EmergenceMap:
    """Emerge the source from a sum of pairwise compositions.

    Left fold: compose within each pair, then sum onto the running partial.
    A single pair reduces to the composition alone.  A homomorphic source
    justifies both splits (multiplicativity for the square roots, additivity
    for the dyadic halving).
    """
    pairs = list(pairs)
    if not pairs:
        raise EmptyAccumulation("accumulation needs at least one pair")
    _gate_claims(source)
    if not _has_verified(source, "homomorphic"):
        raise HypothesisViolated(
            "accumulation needs a verified homomorphic source",
            evidence={"verified": sorted(source.verified)})
    running = None
    for i, (ma, mb) in enumerate(pairs):
        try:
            comp = emerge_composition(source, ma, mb, tol, n_samples, seed)
            if running is None:
                running = comp
            else:
                running = _sum_maps(source, running, comp, "additive_halving",
                                    tol, n_samples, seed)
        except EmergenceError as exc:
            exc.args = (f"accumulation step {i}",) + exc.args
            raise
    if len(pairs) == 1:
        return running
    prov = ProvenanceNode("accumulate", "",
                          (("pairs", len(pairs)),),
                          (running.provenance,))
    return replace(running, provenance=prov,
                   label=f"accumulation[{len(pairs)}] from {source.label}")


# --- polynomial synthesis ------------------------------------------------------------


def _fold_weights(s: int) -> tuple:
    """Dyadic left-fold weights: exact halving, sums to 1.0 in binary."""
    if s <= 1:
        return (1.0,)
    w = [2.0 ** -(s - 1), 2.0 ** -(s - 1)]
    w.extend(2.0 ** -(s - k) for k in range(2, s))
    return tuple(w)


def _constant_offset(poly: PolynomialFamily, constants) -> np.ndarray | None:
    if not constants:
        return None
    total = np.zeros((poly.space.dim, poly.space.dim), dtype=poly.space.dtype)
    zero = poly.algebra.zero()
    for alpha, f in constants:
        value = f(zero)
        mono = monomial_operator(poly, alpha).matrix
        if np.isscalar(value):
            total = total + value * mono
        else:
            total = total + poly.algebra.act(value, Operator(mono, poly.space)).matrix
    return total


def _synthesize(source, poly, offset, weight, post, tol):
    """Core recursion: returns ``(solvers, provenance)``.

    ``solvers`` is a list of ``(alpha, eps -> delta)`` covering the active
    terms of ``poly``; the working source at this level is
    ``(Psi1(weight*eps) - weight*offset) @ post``.
    """
    if poly.slots == 1:
        return _synth_univariate(source, poly, offset, weight, post, tol)
    return _synth_multivariate(source, poly, offset, weight, post, tol)


def _synth_univariate(source, poly, offset, weight, post, tol):
    terms = poly.terms
    weights = _fold_weights(len(terms))
    solvers = []
    children = []
    for (alpha, f), w in zip(terms, weights):
        exponent = alpha[0]
        term_post = post
        if exponent > 0:
            if 0 not in poly.right_inverses:
                raise NotRightInvertible(
                    f"slot 0 has no right inverse: "
                    f"{poly.right_inverse_failures.get(0, 'not attempted')}")
            r_pow = np.linalg.matrix_power(
                poly.right_inverses[0].matrix, exponent)
            term_post = r_pow if post is None else post @ r_pow
        total_w = weight * w
        solvers.append((alpha, _monomial_solver(
            source, f, term_post, poly.algebra, poly.space, total_w, offset,
            term_label=f"{alpha} (power {exponent})", tol=tol)))
        children.append(_monomial_node(alpha, f, total_w))
    if len(terms) == 1:
        return solvers, children[0]
    prov = ProvenanceNode("univariate", "additive_halving",
                          (("weights", list(weights)),), tuple(children))
    return solvers, prov


def _synth_multivariate(source, poly, offset, weight, post, tol):
    last = poly.slots - 1
    groups = factor_last_variable(poly)
    weights = _fold_weights(len(groups))
    solvers = []
    children = []
    for (sub, j), w in zip(groups, weights):
        child_post = post
        if j > 0:
            if last not in poly.right_inverses:
                raise NotRightInvertible(
                    f"slot {last} has no right inverse: "
                    f"{poly.right_inverse_failures.get(last, 'not attempted')}")
            r_pow = np.linalg.matrix_power(
                poly.right_inverses[last].matrix, j)
            child_post = r_pow if post is None else post @ r_pow
        sub_solvers, sub_prov = _synthesize(source, sub, offset, weight * w,
                                            child_post, tol)
        solvers.extend((alpha + (j,), g) for alpha, g in sub_solvers)
        if j > 0:
            leaf = _monomial_node((j,), None, weight * w,
                                  detail="unital_identity")
            sub_prov = ProvenanceNode(
                "composition", "right_inverse_transport",
                (("slot", last), ("exponent", j)), (sub_prov, leaf))
        children.append(sub_prov)
    if len(groups) == 1:
        return solvers, children[0]
    prov = ProvenanceNode("multivariate", "additive_halving",
                          (("slot", last), ("weights", list(weights))),
                          tuple(children))
    return solvers, prov


def _split_constants(poly: PolynomialFamily):
    active = [(a, f) for a, f in poly.terms if not f.is_constant]
    constants = [(a, f) for a, f in poly.terms if f.is_constant]
    return active, constants


def _needs_fold(active_terms) -> bool:
    """True when the synthesis will split the source across several terms."""
    if len(active_terms) <= 1:
        return False
    return True


def _emerge_impl(source: OperatorFamily, poly: PolynomialFamily, tol,
                 n_samples, seed, jobs, label):
    _gate_claims(source)
    if not source.space.matches(poly.space):
        raise SpaceMismatch("source and target live on different field spaces")
    if poly.coefficient_degree <= 0 \
            or poly.coefficient_degree % source.degree != 0:
        raise DegreeMismatch(
            f"target coefficient degree {poly.coefficient_degree} is not a "
            f"positive multiple of the source degree {source.degree}")
    multiplier = poly.coefficient_degree // source.degree
    bound = poly.algebra.max_power
    if bound is not None and multiplier > bound:
        raise DegreeMismatch(
            f"degree multiplier {multiplier} exceeds the parameter "
            f"algebra's power bound {bound}")
    active, constants = _split_constants(poly)
    for alpha, f in active:
        if not f.nowhere_vanishing:
            raise HypothesisViolated(
                f"coefficient at {alpha} may vanish; preimages are not "
                f"defined everywhere", evidence={"term": list(alpha)})
    needed = set()
    for alpha, _ in active:
        needed.update(i for i, e in enumerate(alpha) if e > 0)
    for i in sorted(needed):
        if i not in poly.right_inverses:
            raise NotRightInvertible(
                f"slot {i} has no right inverse: "
                f"{poly.right_inverse_failures.get(i, 'not attempted')}")
    if _needs_fold(active) and not _has_verified(
            source, "additive", "homomorphic", "scalar_invariant"):
        raise HypothesisViolated(
            "distributing the source over several terms needs a verified "
            "additive (or homomorphic, or scalar-invariant) source",
            evidence={"verified": sorted(source.verified)})

    offset = _constant_offset(poly, constants)
    zero = poly.algebra.zero()
    if active:
        active_poly = PolynomialFamily(
            poly.operators, tuple(sorted(active)), poly.algebra,
            poly.coefficient_degree, poly.right_inverses,
            poly.right_inverse_failures, label=f"{poly.label}|active")
        solvers, core_prov = _synthesize(source, active_poly, offset, 1.0,
                                         None, tol)
    else:
        solvers, core_prov = [], None

    def parameter_map(eps, _solvers=tuple(solvers)):
        table = {alpha: g(eps) for alpha, g in _solvers}
        for alpha, _ in constants:
            table[alpha] = zero
        return table

    if constants:
        const_leaves = tuple(
            _monomial_node(alpha, f, 1.0, detail="constant_coefficient")
            for alpha, f in constants)
        children = ((core_prov,) if core_prov is not None else ()) + const_leaves
        prov = ProvenanceNode("sum", "constant_offset", (), children)
    else:
        prov = core_prov
    if prov is None:
        raise BadSpec("polynomial family has no terms")
    return _certify(source, poly, parameter_map, "per_term", prov, label,
                    n_samples, tol, seed, jobs)


def emerge_univariate(source: OperatorFamily, poly: PolynomialFamily,
                      tol: float = DEFAULT_TOL,
                      n_samples: int = DEFAULT_SAMPLES, seed: int = 0,
                      jobs: int | None = None) -> EmergenceMap:
    """Per-term synthesis for a single-variable polynomial target."""
    if poly.slots != 1:
        raise BadSpec("emerge_univariate needs a single-variable target")
    return _emerge_impl(source, poly, tol, n_samples, seed, jobs,
                        label=f"univariate from {source.label}")


def emerge(source: OperatorFamily, poly: PolynomialFamily,
           tol: float = DEFAULT_TOL, n_samples: int = DEFAULT_SAMPLES,
           seed: int = 0, jobs: int | None = None) -> EmergenceMap:
    """Synthesize a certified emergence map onto a polynomial family.

    Recursion on the number of slot variables: the last variable is factored
    out, each cofactor group is transported by a power of the last slot's
    right inverse, and the single-variable base case distributes the source
    over the active terms by exact dyadic halving.
    """
    return _emerge_impl(source, poly, tol, n_samples, seed, jobs,
                        label=f"emerge from {source.label}")


def identity_emergence(source: OperatorFamily, tol: float = DEFAULT_TOL,
                       n_samples: int = DEFAULT_SAMPLES,
                       seed: int = 0) -> EmergenceMap:
    """View a coefficient-free scalar family as its own polynomial target."""
    if not isinstance(source.form, ScalarTimesFixed) \
            or source.form.coefficient is not None:
        raise BadSpec("identity emergence needs a plain scalar-times-fixed "
                      "source")
    poly = polynomial_family([source.form.fixed],
                             {(1,): CoefficientFunction.linear(1.0)},
                             source.algebra, label="identity_view")
    prov = _monomial_node((1,), CoefficientFunction.linear(1.0), 1.0,
                          detail="identity_map")
    return _certify(source, poly, lambda eps: eps, "shared", prov,
                    f"identity on {source.label}", n_samples, tol, seed)


# --- brute-force oracle ---------------------------------------------------------------


def _vec_sym(matrix: np.ndarray, real_unknowns: bool) -> np.ndarray:
    sym = 0.5 * (matrix + matrix.T) if not np.iscomplexobj(matrix) \
        else 0.5 * (matrix + matrix.conj().T)
    flat = sym.ravel()
    if real_unknowns and np.iscomplexobj(flat):
        return np.concatenate([flat.real, flat.imag])
    return flat


def brute_force_emerge(source: OperatorFamily, poly: PolynomialFamily, eps,
                       solver: str = "least_squares",
                       tol: float = DEFAULT_TOL):
    """Independent oracle: fit the per-term parameters at one ``eps``.

    Linear and affine coefficients reduce to one dense least-squares solve
    over the symmetric parts; other coefficient kinds fall back to a nested
    grid search over at most two scalar parameters.  Returns the per-term
    assignment when the residual is within tolerance, ``None`` otherwise.
    """
    active, constants = _split_constants(poly)
    algebra = poly.algebra
    try:
        basis = algebra.basis()
    except Exception as exc:
        raise DimensionTooLarge(
            f"parameter carrier has no finite coordinate basis: {exc}")
    dim = len(basis) * len(active)
    if dim > 8:
        raise DimensionTooLarge(
            f"parameter dimension {dim} exceeds the oracle bound 8")
    real_unknowns = algebra.scalar_kind != "complex"
    target_mat = sym_part(evaluate_family(source, eps)).matrix
    fixed = np.zeros_like(target_mat)
    zero = algebra.zero()
    for alpha, f in constants:
        value = f(zero)
        mono = monomial_operator(poly, alpha)
        piece = value * mono.matrix if np.isscalar(value) \
            else algebra.act(value, mono).matrix
        fixed = fixed + sym_part(Operator(piece, poly.space)).matrix

    linear_kinds = all(f.kind in ("linear", "affine") for _, f in active)
    if solver == "least_squares" and linear_kinds:
        columns = []
        for alpha, f in active:
            mono = monomial_operator(poly, alpha)
            slope = f.params[0]
            off = f.params[1] if f.kind == "affine" else 0.0
            if off:
                fixed = fixed + off * sym_part(mono).matrix
            for e in basis:
                scaled = algebra.scale(slope, e)
                piece = algebra.act(scaled, mono).matrix
                columns.append(_vec_sym(piece, real_unknowns))
        rhs = _vec_sym(target_mat - fixed, real_unknowns)
        a = np.stack(columns, axis=1)
        x, *_ = np.linalg.lstsq(a, rhs, rcond=None)
        residual = float(np.linalg.norm(a @ x - rhs))
        if residual > tol:
            return None
        out = {}
        for i, (alpha, _) in enumerate(active):
            coords = x[i * len(basis):(i + 1) * len(basis)]
            out[alpha] = algebra.from_coords(coords)
        for alpha, _ in constants:
            out[alpha] = zero
        return out

    # grid search over scalar parameters for nonlinear coefficients
    if len(active) > 2 or len(basis) != 1:
        raise DimensionTooLarge(
            "grid search supports at most two scalar parameters")

    def objective(values):
        table = {alpha: values[i] for i, (alpha, _) in enumerate(active)}
        for alpha, _ in constants:
            table[alpha] = zero
        mat = sym_part(evaluate_polynomial(poly, table)).matrix
        return float(np.linalg.norm(mat - target_mat, "fro"))

    cone = isinstance(algebra, NonnegativeReals)
    lo = 0.0 if cone else -4.0
    boxes = [(lo, 4.0)] * len(active)
    best, best_val = None, np.inf
    for _ in range(4):
        axes = [np.linspace(a, b, 33) for a, b in boxes]
        grids = np.meshgrid(*axes, indexing="ij")
        coords = np.stack([g.ravel() for g in grids], axis=1)
        for row in coords:
            val = objective(tuple(row))
            if val < best_val:
                best, best_val = tuple(row), val
        boxes = [(c - (b - a) / 16.0, c + (b - a) / 16.0)
                 for c, (a, b) in zip(best, boxes)]
        if cone:
            boxes = [(max(0.0, a), b) for a, b in boxes]
    if best_val > tol:
        return None
    out = {alpha: best[i] for i, (alpha, _) in enumerate(active)}
    for alpha, _ in constants:
        out[alpha] = zero
    return out


# --- shared-parameter reconciliation ----------------------------------------------------


@dataclass(frozen=True)
class ReconcileReport:
    """Outcome of a failed shared-parameter search."""

    ok: bool
    residual: float
    samples: int
    message: str = ""


def reconcile_shared_parameter(emap: EmergenceMap, tol: float = DEFAULT_TOL):
    """Search for one shared parameter reproducing a per-term assignment.

    Least squares over the shared coordinates at sampled parameters; on
    success returns a shared-assignment map with a fresh certificate, on
    failure a report with the irreducibility residual.  The fit linearizes
    the coefficients, which is exact for linear and affine kinds.
    """
    if emap.assignment_kind != "per_term":
        raise BadSpec("reconciliation needs a per-term assignment")
    poly = emap.target
    algebra = poly.algebra
    basis = algebra.basis()
    real_unknowns = algebra.scalar_kind != "complex"
    zero_mat = sym_part(evaluate_polynomial(poly, algebra.zero())).matrix
    columns = []
    for e in basis:
        mat = sym_part(evaluate_polynomial(poly, e)).matrix
        columns.append(_vec_sym(mat - zero_mat, real_unknowns))
    a = np.stack(columns, axis=1)

    def solve_at(eps):
        per_term = sym_part(evaluate_polynomial(poly, emap(eps))).matrix
        rhs = _vec_sym(per_term - zero_mat, real_unknowns)
        x, *_ = np.linalg.lstsq(a, rhs, rcond=None)
        return x, float(np.linalg.norm(a @ x - rhs))

    cert = emap.certificate
    rng = np.random.default_rng(cert.seed)
    probes = min(max(cert.samples, 1), 16)
    worst = 0.0
    for _ in range(probes):
        _, res = solve_at(emap.source.algebra.sample(rng))
        worst = max(worst, res)
    if worst > tol:
        return ReconcileReport(False, worst, probes,
                               "per-term assignment is not reproducible by "
                               "a shared parameter")

    def shared_map(eps):
        x, _ = solve_at(eps)
        return algebra.from_coords(x)

    fresh = verify_emergence(emap.source, poly, shared_map, cert.samples,
                             cert.tolerance, cert.seed)
    if not fresh.passed:
        return ReconcileReport(False, max(fresh.max_functional_residual,
                                          fresh.max_operator_residual),
                               fresh.samples,
                               "shared fit found but failed certification")
    return EmergenceMap(emap.source, poly, shared_map, "shared",
                        emap.provenance, fresh,
                        label=f"{emap.label}|shared")
