"""
Exact symbolic expressions on the jet space of the reduced oscillator system

    u1'' + 2 u1 = 0,    u2' = 0

and the Lie point symmetry check for it: total derivatives, second
prolongation, on-shell determining-equation residuals and exact linear
solving for unknown generator coefficients.

A ``SymExpr`` is a finite sum of monomials

    c * exp(lam * th) * u1^a * u2^b * u1'^p * u1''^q * u1'''^m * u2'^n * u2''^k

with c and lam in Q(sqrt2, i) and natural exponents.
"""
import cmath
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, NamedTuple, Optional, Sequence, Tuple

from sympy.polys.matrices import DomainMatrix

from .exact import FIELD, ONE, ZERO, ExactScalar, Scalar

logger = logging.getLogger(__name__)

# Jet symbols in exponent-vector order
U1, U2, U1_1, U1_2, U1_3, U2_1, U2_2 = range(7)
JET_SYMBOLS = ("u1", "u2", "u1'", "u1''", "u1'''", "u2'", "u2''")
JET_SIZE = len(JET_SYMBOLS)

# The total derivative sends each jet symbol to the next one up
NEXT_JET = {U1: U1_1, U1_1: U1_2, U1_2: U1_3, U2: U2_1, U2_1: U2_2}

Exponents = Tuple[int, ...]
MonomialKey = Tuple[ExactScalar, Exponents]

NO_EXPONENTS = (0,) * JET_SIZE


def bump(exponents: Exponents, index: int, by: int) -> Exponents:
    values = list(exponents)
    values[index] += by
    return tuple(values)


class SymExpr:
    """
    An immutable sum of monomials held in canonical form: like monomials
    are merged and zero coefficients dropped, so an expression is zero
    exactly when it has no terms.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Optional[Mapping[MonomialKey, ExactScalar]] = None):
        canonical = {}
        for key, coefficient in (terms or {}).items():
            coefficient = ExactScalar.coerce(coefficient)
            if not coefficient.is_zero():
                canonical[key] = coefficient
        self.terms = canonical

    @classmethod
    def constant(cls, value: Scalar) -> "SymExpr":
        return cls({(ZERO, NO_EXPONENTS): value})

    @classmethod
    def symbol(cls, index: int) -> "SymExpr":
        return cls({(ZERO, bump(NO_EXPONENTS, index, 1)): ONE})

    @classmethod
    def exp(cls, lam: Scalar) -> "SymExpr":
        return cls({(ExactScalar.coerce(lam), NO_EXPONENTS): ONE})

    @staticmethod
    def _accumulate(target: Dict[MonomialKey, ExactScalar], key, coefficient):
        target[key] = target.get(key, ZERO) + coefficient

    def is_zero(self) -> bool:
        return not self.terms

    def uses(self, index: int) -> bool:
        return any(exponents[index] for _, exponents in self.terms)

    def sorted_terms(self) -> List[Tuple[MonomialKey, ExactScalar]]:
        return sorted(
            self.terms.items(), key=lambda item: (item[0][0].sort_key(), item[0][1])
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, SymExpr):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __add__(self, other: "SymExpr") -> "SymExpr":
        if not isinstance(other, SymExpr):
            other = SymExpr.constant(other)
        terms = dict(self.terms)
        for key, coefficient in other.terms.items():
            self._accumulate(terms, key, coefficient)
        return SymExpr(terms)

    __radd__ = __add__

    def __neg__(self) -> "SymExpr":
        return SymExpr({key: -c for key, c in self.terms.items()})

    def __sub__(self, other: "SymExpr") -> "SymExpr":
        if not isinstance(other, SymExpr):
            other = SymExpr.constant(other)
        return self + (-other)

    def __rsub__(self, other) -> "SymExpr":
        return SymExpr.constant(other) - self

    def __mul__(self, other) -> "SymExpr":
        if not isinstance(other, SymExpr):
            other = ExactScalar.coerce(other)
            return SymExpr({key: c * other for key, c in self.terms.items()})
        terms = {}
        for (lam_a, exps_a), c_a in self.terms.items():
            for (lam_b, exps_b), c_b in other.terms.items():
                key = (lam_a + lam_b, tuple(x + y for x, y in zip(exps_a, exps_b)))
                self._accumulate(terms, key, c_a * c_b)
        return SymExpr(terms)

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "SymExpr":
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError("SymExpr powers must be natural numbers")
        result = SymExpr.constant(ONE)
        for _ in range(exponent):
            result = result * self
        return result

    def partial(self, index: Optional[int]) -> "SymExpr":
        """
        The partial derivative with respect to th (``index=None``) or the
        jet symbol at ``index``.
        """
        terms = {}
        for (lam, exponents), c in self.terms.items():
            if index is None:
                self._accumulate(terms, (lam, exponents), c * lam)
            elif exponents[index]:
                key = (lam, bump(exponents, index, -1))
                self._accumulate(terms, key, c * exponents[index])
        return SymExpr(terms)

    def conjugate(self) -> "SymExpr":
        return SymExpr(
            {(lam.conjugate(), exps): c.conjugate() for (lam, exps), c in self.terms.items()}
        )

    def evaluate(self, theta: float, jets: Sequence[complex]) -> complex:
        """
        Numeric value at ``theta`` with jet symbol values ``jets`` (in
        ``JET_SYMBOLS`` order; a shorter sequence leaves the rest at 0).
        """
        values = list(jets) + [0.0] * (JET_SIZE - len(jets))
        total = 0j
        for (lam, exponents), c in self.terms.items():
            term = complex(c) * cmath.exp(complex(lam) * theta)
            for value, exponent in zip(values, exponents):
                if exponent:
                    term *= value ** exponent
            total += term
        return total

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        rendered = []
        for (lam, exponents), c in self.sorted_terms():
            factors = []
            if not lam.is_zero():
                factors.append(f"exp(({lam})*th)")
            for name, exponent in zip(JET_SYMBOLS, exponents):
                if exponent == 1:
                    factors.append(name)
                elif exponent:
                    factors.append(f"{name}^{exponent}")
            if not factors:
                rendered.append(f"({c})")
            elif c == ONE:
                rendered.append("*".join(factors))
            else:
                rendered.append(f"({c})*" + "*".join(factors))
        return " + ".join(rendered)

    def __repr__(self) -> str:
        return f"SymExpr({str(self)!r})"


ZERO_EXPR = SymExpr()


def total_derivative(e: SymExpr) -> SymExpr:
    """
    D = d_th + u1' d_u1 + u1'' d_u1' + u1''' d_u1'' + u2' d_u2 + u2'' d_u2'.
    """
    result = e.partial(None)
    for index, successor in NEXT_JET.items():
        if e.uses(index):
            result = result + e.partial(index) * SymExpr.symbol(successor)
    for index in (U1_3, U2_2):
        if e.uses(index):
            raise ValueError(f"{JET_SYMBOLS[index]} has no successor jet symbol")
    return result


def substitute_onshell(e: SymExpr) -> SymExpr:
    """
    Rewrites u1'' -> -2 u1, u1''' -> -2 u1' and drops every term containing
    u2' or u2''.
    """
    minus_two_u1 = SymExpr.symbol(U1) * -2
    minus_two_u1_1 = SymExpr.symbol(U1_1) * -2
    result = ZERO_EXPR
    for (lam, exponents), c in e.terms.items():
        if exponents[U2_1] or exponents[U2_2]:
            continue
        reduced = list(exponents)
        reduced[U1_2] = reduced[U1_3] = 0
        term = SymExpr({(lam, tuple(reduced)): c})
        term = term * minus_two_u1 ** exponents[U1_2]
        term = term * minus_two_u1_1 ** exponents[U1_3]
        result = result + term
    return result


POINT_SYMBOLS = (U1, U2)


@dataclass(frozen=True)
class GeneratorSym:
    """
    A point generator xi d_th + eta1 d_u1 + eta2 d_u2 whose coefficients
    depend on (th, u1, u2) only.
    """

    xi: SymExpr = field(default_factory=SymExpr)
    eta1: SymExpr = field(default_factory=SymExpr)
    eta2: SymExpr = field(default_factory=SymExpr)

    def __post_init__(self):
        for name, e in self.components():
            for index in range(JET_SIZE):
                if index not in POINT_SYMBOLS and e.uses(index):
                    raise ValueError(
                        f"{name} depends on {JET_SYMBOLS[index]}; "
                        "point generators may only depend on th, u1 and u2"
                    )

    def components(self):
        return (("xi", self.xi), ("eta1", self.eta1), ("eta2", self.eta2))

    def is_zero(self) -> bool:
        return all(e.is_zero() for _, e in self.components())

    def __add__(self, other: "GeneratorSym") -> "GeneratorSym":
        return GeneratorSym(self.xi + other.xi, self.eta1 + other.eta1, self.eta2 + other.eta2)

    def __sub__(self, other: "GeneratorSym") -> "GeneratorSym":
        return GeneratorSym(self.xi - other.xi, self.eta1 - other.eta1, self.eta2 - other.eta2)

    def scale(self, factor) -> "GeneratorSym":
        return GeneratorSym(self.xi * factor, self.eta1 * factor, self.eta2 * factor)

    def conjugate(self) -> "GeneratorSym":
        return GeneratorSym(self.xi.conjugate(), self.eta1.conjugate(), self.eta2.conjugate())

    def __str__(self) -> str:
        parts = [
            f"({e})*{basis}"
            for e, basis in ((self.xi, "d_th"), (self.eta1, "d_u1"), (self.eta2, "d_u2"))
            if not e.is_zero()
        ]
        return " + ".join(parts) or "0"


class Prolongation(NamedTuple):
    eta1_1: SymExpr
    eta1_2: SymExpr
    eta2_1: SymExpr


def prolong2(g: GeneratorSym) -> Prolongation:
    """
    Second prolongation of ``g`` through eta^(k) = D(eta^(k-1)) - u^(k) D(xi),
    computed off-shell.
    """
    d_xi = total_derivative(g.xi)
    eta1_1 = total_derivative(g.eta1) - SymExpr.symbol(U1_1) * d_xi
    eta1_2 = total_derivative(eta1_1) - SymExpr.symbol(U1_2) * d_xi
    eta2_1 = total_derivative(g.eta2) - SymExpr.symbol(U2_1) * d_xi
    return Prolongation(eta1_1, eta1_2, eta2_1)


class Residual(NamedTuple):
    R1: SymExpr
    R2: SymExpr

    def is_zero(self) -> bool:
        return self.R1.is_zero() and self.R2.is_zero()

    def conjugate(self) -> "Residual":
        return Residual(self.R1.conjugate(), self.R2.conjugate())


def symmetry_residual(g: GeneratorSym) -> Residual:
    """
    R1 = eta1^(2) + 2 eta1 and R2 = eta2^(1), both on-shell. ``g`` is a
    point symmetry of the system exactly when both vanish.
    """
    prolonged = prolong2(g)
    return Residual(
        substitute_onshell(prolonged.eta1_2 + g.eta1 * 2),
        substitute_onshell(prolonged.eta2_1),
    )


@dataclass(frozen=True)
class Ansatz:
    """
    The generator base + sum(c_k * parts[k]) with unknown scalars c_k.
    """

    base: GeneratorSym
    parts: Tuple[Tuple[str, GeneratorSym], ...] = ()

    @property
    def unknowns(self) -> Tuple[str, ...]:
        return tuple(name for name, _ in self.parts)

    def substitute(self, values: Mapping[str, Scalar]) -> GeneratorSym:
        generator = self.base
        for name, part in self.parts:
            generator = generator + part.scale(values[name])
        return generator


@dataclass(frozen=True)
class SolutionSpace:
    """
    The affine solution set particular + span(basis) of a coefficient
    system. ``consistent`` is False when there is no solution at all.
    """

    unknowns: Tuple[str, ...]
    consistent: bool
    particular: Dict[str, ExactScalar] = field(default_factory=dict)
    basis: Tuple[Dict[str, ExactScalar], ...] = ()
    equations: int = 0

    @property
    def dimension(self) -> int:
        return len(self.basis) if self.consistent else -1

    @property
    def unique(self) -> bool:
        return self.consistent and not self.basis

    def as_dict(self) -> dict:
        return {
            "unknowns": list(self.unknowns),
            "consistent": self.consistent,
            "dimension": self.dimension,
            "equations": self.equations,
            "particular": {k: str(v) for k, v in self.particular.items()},
            "basis": [{k: str(v) for k, v in vector.items()} for vector in self.basis],
        }


def coefficient_rows(residuals: Sequence[Residual]) -> List[Tuple[tuple, List[ExactScalar]]]:
    keys = set()
    for residual in residuals:
        for component, e in enumerate(residual):
            keys.update((component, key) for key in e.terms)
    ordered = sorted(keys, key=lambda k: (k[0], k[1][0].sort_key(), k[1][1]))
    return [
        (key, [residual[key[0]].terms.get(key[1], ZERO) for residual in residuals])
        for key in ordered
    ]


def solve_coefficients(ansatz: Ansatz) -> SolutionSpace:
    """
    Finds every assignment of the unknown scalars that makes ``ansatz`` a
    point symmetry. The residual is affine in the unknowns, so matching
    each monomial of R(base) + sum(c_k R(part_k)) to zero gives a linear
    system over Q(sqrt2, i), brought to reduced row echelon form with
    sympy's ``DomainMatrix``.
    """
    unknowns = ansatz.unknowns
    n = len(unknowns)
    residuals = [symmetry_residual(part) for _, part in ansatz.parts]
    residuals.append(symmetry_residual(ansatz.base))
    rows = coefficient_rows(residuals)
    if not rows:
        reduced, pivots = [], ()
    else:
        # [a_1 .. a_n | -b]
        augmented = DomainMatrix(
            [[v.element for v in values[:n]] + [(-values[n]).element] for _, values in rows],
            (len(rows), n + 1),
            FIELD,
        )
        echelon, pivots = augmented.rref()
        reduced = [
            [ExactScalar.from_element(echelon[r, c].element) for c in range(n + 1)]
            for r in range(len(pivots))
        ]
    logger.debug("pivot columns %s of %d equations", list(pivots), len(rows))

    if n in pivots:
        logger.info("coefficient system for %s is inconsistent", ", ".join(unknowns))
        return SolutionSpace(unknowns, False, equations=len(rows))

    particular = {name: ZERO for name in unknowns}
    for row, column in enumerate(pivots):
        particular[unknowns[column]] = reduced[row][n]

    basis = []
    for free in (c for c in range(n) if c not in pivots):
        vector = {name: ZERO for name in unknowns}
        vector[unknowns[free]] = ONE
        for row, column in enumerate(pivots):
            vector[unknowns[column]] = -reduced[row][free]
        basis.append(vector)

    return SolutionSpace(
        unknowns, True, particular, tuple(basis), equations=len(rows)
    )
