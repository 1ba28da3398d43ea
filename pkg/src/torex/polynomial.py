"""Exact polynomials over the rationals.

``MultiPoly`` is a sparse multivariate polynomial in one or two variables,
``UniPoly`` a dense univariate one with Sturm-sequence root isolation.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import DegreeTooHigh
from .rational import Q, to_fraction

MAX_DEGREE = 8


def _clean(terms: Mapping[tuple[int, ...], Fraction]) -> dict[tuple[int, ...], Fraction]:
    return {e: c for e, c in terms.items() if c != 0}


@dataclass(frozen=True)
class MultiPoly:
    """Sparse polynomial: exponent tuple -> Fraction coefficient."""

    dim: int
    terms: tuple[tuple[tuple[int, ...], Fraction], ...]

    @classmethod
    def from_dict(cls, dim: int, terms: Mapping[tuple[int, ...], object]) -> "MultiPoly":
        clean = {}
        for e, c in terms.items():
            if len(e) != dim:
                raise ValueError(f"exponent {e} does not match dimension {dim}")
            c = to_fraction(c)
            if c != 0:
                clean[tuple(e)] = clean.get(tuple(e), Fraction(0)) + c
        return cls(dim, tuple(sorted(_clean(clean).items())))

    @classmethod
    def constant(cls, dim: int, c) -> "MultiPoly":
        return cls.from_dict(dim, {(0,) * dim: c})

    @classmethod
    def variable(cls, dim: int, i: int) -> "MultiPoly":
        e = [0] * dim
        e[i] = 1
        return cls.from_dict(dim, {tuple(e): 1})

    @classmethod
    def affine(cls, coeffs: Sequence, const) -> "MultiPoly":
        dim = len(coeffs)
        terms = {(0,) * dim: const}
        for i, a in enumerate(coeffs):
            e = [0] * dim
            e[i] = 1
            terms[tuple(e)] = a
        return cls.from_dict(dim, terms)

    def as_dict(self) -> dict[tuple[int, ...], Fraction]:
        return dict(self.terms)

    @property
    def degree(self) -> int:
        return max((sum(e) for e, _ in self.terms), default=0)

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other):
        other = self._coerce(other)
        d = self.as_dict()
        for e, c in other.terms:
            d[e] = d.get(e, Fraction(0)) + c
        return MultiPoly.from_dict(self.dim, d)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly(self.dim, tuple((e, -c) for e, c in self.terms))

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        d: dict[tuple[int, ...], Fraction] = {}
        for e1, c1 in self.terms:
            for e2, c2 in other.terms:
                e = tuple(a + b for a, b in zip(e1, e2))
                d[e] = d.get(e, Fraction(0)) + c1 * c2
        return MultiPoly.from_dict(self.dim, d)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = MultiPoly.constant(self.dim, 1)
        for _ in range(n):
            out = out * self
        return out

    def _coerce(self, other) -> "MultiPoly":
        if isinstance(other, MultiPoly):
            if other.dim != self.dim:
                raise ValueError("dimension mismatch")
            return other
        return MultiPoly.constant(self.dim, other)

    def __call__(self, *point):
        if len(point) == 1 and isinstance(point[0], (tuple, list)):
            point = tuple(point[0])
        total = 0
        for e, c in self.terms:
            term = c
            for xi, k in zip(point, e):
                if k:
                    term = term * xi**k
            total = total + term
        return total

    def compose_affine(self, matrix: Sequence[Sequence], shift: Sequence) -> "MultiPoly":
        """Return f(M y + t) as a polynomial in y (M is dim x k)."""
        k = len(matrix[0]) if matrix else 0
        images = [
            MultiPoly.affine([matrix[i][j] for j in range(k)], shift[i])
            for i in range(self.dim)
        ]
        out = MultiPoly.constant(k, 0)
        for e, c in self.terms:
            term = MultiPoly.constant(k, c)
            for img, p in zip(images, e):
                if p:
                    term = term * img**p
            out = out + term
        return out

    def check_degree(self, cap: int = MAX_DEGREE) -> "MultiPoly":
        if self.degree > cap:
            raise DegreeTooHigh(f"degree {self.degree} exceeds cap {cap}")
        return self

    def __repr__(self) -> str:
        if not self.terms:
            return "MultiPoly(0)"
        names = "xyz"
        parts = []
        for e, c in self.terms:
            mono = "*".join(
                f"{names[i]}^{p}" if p > 1 else names[i] for i, p in enumerate(e) if p
            )
            parts.append(f"{c}" + (f"*{mono}" if mono else ""))
        return "MultiPoly(" + " + ".join(parts) + ")"


@dataclass(frozen=True)
class UniPoly:
    """Dense univariate polynomial, coefficients low to high."""

    coeffs: tuple[Fraction, ...]

    def __init__(self, coeffs: Iterable = ()):
        cs = [to_fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    @classmethod
    def from_roots(cls, roots: Iterable, lead=1) -> "UniPoly":
        out = cls([lead])
        for r in roots:
            out = out * cls([-to_fraction(r), 1])
        return out

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def lead(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def __call__(self, x):
        acc = 0 * x if not isinstance(x, Fraction) else Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + (c if isinstance(x, (Fraction, int)) else float(c))
        return acc

    def __add__(self, other):
        other = _as_uni(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (Fraction(0),) * (n - len(self.coeffs))
        b = other.coeffs + (Fraction(0),) * (n - len(other.coeffs))
        return UniPoly(x + y for x, y in zip(a, b))

    __radd__ = __add__

    def __neg__(self):
        return UniPoly(-c for c in self.coeffs)

    def __sub__(self, other):
        return self + (-_as_uni(other))

    def __rsub__(self, other):
        return _as_uni(other) - self

    def __mul__(self, other):
        other = _as_uni(other)
        if self.is_zero() or other.is_zero():
            return UniPoly()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return UniPoly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = UniPoly([1])
        for _ in range(n):
            out = out * self
        return out

    def deriv(self, k: int = 1) -> "UniPoly":
        p = self
        for _ in range(k):
            p = UniPoly(i * c for i, c in enumerate(p.coeffs) if i > 0)
        return p

    def divmod(self, other: "UniPoly") -> tuple["UniPoly", "UniPoly"]:
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        quo = [Fraction(0)] * max(len(rem) - len(other.coeffs) + 1, 0)
        d = other.degree
        while len(rem) - 1 >= d and any(rem):
            k = len(rem) - 1 - d
            f = rem[-1] / other.lead
            quo[k] = f
            for i, c in enumerate(other.coeffs):
                rem[i + k] -= f * c
            rem.pop()
            while rem and rem[-1] == 0:
                rem.pop()
        return UniPoly(quo), UniPoly(rem)

    def __mod__(self, other):
        return self.divmod(other)[1]

    def __floordiv__(self, other):
        return self.divmod(other)[0]

    def monic(self) -> "UniPoly":
        return UniPoly(c / self.lead for c in self.coeffs)

    def gcd(self, other: "UniPoly") -> "UniPoly":
        a, b = self, other
        while not b.is_zero():
            a, b = b, a % b
        return a.monic() if not a.is_zero() else a

    def squarefree(self) -> "UniPoly":
        g = self.gcd(self.deriv())
        if g.degree <= 0:
            return self
        return self // g

    def root_multiplicity(self, r) -> int:
        r = to_fraction(r)
        p, m = self, 0
        while not p.is_zero() and p(r) == 0:
            p = p // UniPoly([-r, 1])
            m += 1
        return m

    def compose(self, other: "UniPoly") -> "UniPoly":
        out = UniPoly()
        for c in reversed(self.coeffs):
            out = out * other + UniPoly([c])
        return out

    def __repr__(self) -> str:
        return "UniPoly(" + ", ".join(str(c) for c in self.coeffs) + ")"


@dataclass(frozen=True)
class AffineFunction:
    """a . x + c with exact coefficients."""

    coefficients: tuple[Fraction, ...]
    constant: Fraction

    def __init__(self, coefficients: Iterable, constant=0):
        object.__setattr__(self, "coefficients", tuple(to_fraction(c) for c in coefficients))
        object.__setattr__(self, "constant", to_fraction(constant))

    @property
    def dim(self) -> int:
        return len(self.coefficients)

    def __call__(self, *point):
        if len(point) == 1 and isinstance(point[0], (tuple, list)):
            point = tuple(point[0])
        if point and not isinstance(point[0], (Fraction, int)):
            return sum(float(a) * x for a, x in zip(self.coefficients, point)) + float(self.constant)
        return sum((a * x for a, x in zip(self.coefficients, point)), Fraction(0)) + self.constant

    def __add__(self, other: "AffineFunction") -> "AffineFunction":
        return AffineFunction(
            (a + b for a, b in zip(self.coefficients, other.coefficients)),
            self.constant + other.constant,
        )

    def __sub__(self, other: "AffineFunction") -> "AffineFunction":
        return self + (-other)

    def __neg__(self) -> "AffineFunction":
        return AffineFunction((-a for a in self.coefficients), -self.constant)

    def scale(self, k) -> "AffineFunction":
        k = to_fraction(k)
        return AffineFunction((k * a for a in self.coefficients), k * self.constant)

    def is_zero(self) -> bool:
        return self.constant == 0 and all(a == 0 for a in self.coefficients)

    def to_multipoly(self) -> MultiPoly:
        return MultiPoly.affine(self.coefficients, self.constant)

    def compose_affine(self, M: Sequence[Sequence], t: Sequence) -> "AffineFunction":
        """x -> self(M y + t) as an affine function of y."""
        k = len(M[0])
        coeffs = [
            sum(self.coefficients[i] * to_fraction(M[i][j]) for i in range(self.dim))
            for j in range(k)
        ]
        const = self.constant + sum(
            a * to_fraction(ti) for a, ti in zip(self.coefficients, t)
        )
        return AffineFunction(coeffs, const)

    def __repr__(self) -> str:
        return f"AffineFunction({[str(a) for a in self.coefficients]}, {self.constant})"


def _as_uni(x) -> UniPoly:
    return x if isinstance(x, UniPoly) else UniPoly([x])


def sturm_sequence(p: UniPoly) -> list[UniPoly]:
    seq = [p, p.deriv()]
    while not seq[-1].is_zero() and seq[-1].degree > 0:
        seq.append(-(seq[-2] % seq[-1]))
    return [s for s in seq if not s.is_zero()]


def _sign_changes(seq: Sequence[UniPoly], x: Fraction) -> int:
    signs = [s(x) for s in seq]
    signs = [v for v in signs if v != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if (a > 0) != (b > 0))


def count_roots(p: UniPoly, a, b) -> int:
    """Number of distinct real roots of p in the open interval (a, b)."""
    a, b = to_fraction(a), to_fraction(b)
    if p.is_zero():
        raise ValueError("zero polynomial has infinitely many roots")
    if p.degree == 0 or a >= b:
        return 0
    q = p.squarefree()
    # deflate endpoint roots so Sturm's count is clean
    for r in (a, b):
        while q.degree > 0 and q(r) == 0:
            q = q // UniPoly([-r, 1])
    if q.degree <= 0:
        return 0
    seq = sturm_sequence(q)
    return _sign_changes(seq, a) - _sign_changes(seq, b)


def isolate_roots(p: UniPoly, a, b) -> list[tuple[Fraction, Fraction]]:
    """Disjoint rational intervals each holding exactly one root of p in (a, b).

    A root hit exactly by a bisection midpoint comes back as (r, r).
    """
    a, b = to_fraction(a), to_fraction(b)
    out: list[tuple[Fraction, Fraction]] = []
    stack = [(a, b)]
    while stack:
        lo, hi = stack.pop()
        n = count_roots(p, lo, hi)
        if n == 0:
            continue
        if n == 1:
            out.append((lo, hi))
            continue
        mid = (lo + hi) / 2
        if p(mid) == 0:
            out.append((mid, mid))
        stack.append((lo, mid))
        stack.append((mid, hi))
    return sorted(out)


def refine_root(p: UniPoly, interval: tuple, tol=Fraction(1, 10**12)) -> tuple[Fraction, Fraction]:
    """Bisect an isolating interval of a simple root down to width tol."""
    lo, hi = to_fraction(interval[0]), to_fraction(interval[1])
    if lo == hi:
        return lo, hi
    tol = to_fraction(tol)
    q = p.squarefree()
    slo = q(lo)
    while hi - lo > tol:
        mid = (lo + hi) / 2
        v = q(mid)
        if v == 0:
            return mid, mid
        if (v > 0) == (slo > 0):
            lo, slo = mid, v
        else:
            hi = mid
    return lo, hi


def positive_on(p: UniPoly, a, b) -> bool:
    """True iff p > 0 throughout the open interval (a, b), decided exactly."""
    a, b = to_fraction(a), to_fraction(b)
    if p.is_zero():
        return False
    if count_roots(p, a, b) > 0:
        return False
    return p((a + b) / 2) > 0


def lagrange_interpolate(nodes: Sequence, values: Sequence) -> UniPoly:
    """Exact interpolating polynomial through (nodes[i], values[i])."""
    nodes = [to_fraction(n) for n in nodes]
    out = UniPoly()
    for i, xi in enumerate(nodes):
        basis = UniPoly([to_fraction(values[i])])
        for j, xj in enumerate(nodes):
            if j != i:
                basis = basis * UniPoly([-xj / (xi - xj), 1 / (xi - xj)])
        out = out + basis
    return out


__all__ = [
    "AffineFunction",
    "MultiPoly",
    "UniPoly",
    "Q",
    "count_roots",
    "isolate_roots",
    "lagrange_interpolate",
    "positive_on",
    "refine_root",
    "sturm_sequence",
]
