"""Exact arithmetic in F_M and F_{M^K}.

Polynomials over F_M are tuples of ints, lowest degree first. Elements of the
extension field are length-K coefficient tuples in the power basis
{1, a, ..., a^(K-1)}, where ``a`` is the residue of the indeterminate modulo the
primitive minimal polynomial.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field

from sympy import factorint, isprime

Poly = tuple[int, ...]


class FieldError(ValueError):
    """Invalid field parameters or an operation outside the field's domain."""


# ---------------------------------------------------------------------------
# polynomials over F_M
# ---------------------------------------------------------------------------


def poly_trim(f: Poly) -> Poly:
    f = list(f)
    while f and f[-1] == 0:
        f.pop()
    return tuple(f)


def poly_add(f: Poly, g: Poly, m: int) -> Poly:
    n = max(len(f), len(g))
    f = tuple(f) + (0,) * (n - len(f))
    g = tuple(g) + (0,) * (n - len(g))
    return poly_trim(tuple((x + y) % m for x, y in zip(f, g)))


def poly_sub(f: Poly, g: Poly, m: int) -> Poly:
    return poly_add(f, tuple(-c % m for c in g), m)


def poly_mul(f: Poly, g: Poly, m: int) -> Poly:
    if not f or not g:
        return ()
    out = [0] * (len(f) + len(g) - 1)
    for i, x in enumerate(f):
        if x:
            for j, y in enumerate(g):
                out[i + j] += x * y
    return poly_trim(tuple(c % m for c in out))


def poly_divmod(f: Poly, g: Poly, m: int) -> tuple[Poly, Poly]:
    g = poly_trim(g)
    if not g:
        raise ZeroDivisionError("polynomial division by zero")
    r = list(poly_trim(f))
    inv = pow(g[-1], -1, m)
    dg = len(g) - 1
    if len(r) - 1 < dg:
        return (), tuple(r)
    q = [0] * (len(r) - dg)
    for k in range(len(r) - 1 - dg, -1, -1):
        c = r[k + dg] * inv % m
        q[k] = c
        if c:
            for j, y in enumerate(g):
                r[k + j] = (r[k + j] - c * y) % m
    return poly_trim(tuple(q)), poly_trim(tuple(r[:dg]))


def poly_mod(f: Poly, g: Poly, m: int) -> Poly:
    return poly_divmod(f, g, m)[1]


def poly_gcd(f: Poly, g: Poly, m: int) -> Poly:
    """Monic gcd over F_m."""
    f, g = poly_trim(f), poly_trim(g)
    while g:
        f, g = g, poly_mod(f, g, m)
    if not f:
        return ()
    inv = pow(f[-1], -1, m)
    return tuple(c * inv % m for c in f)


def poly_powmod(f: Poly, e: int, mod: Poly, m: int) -> Poly:
    result: Poly = (1,)
    base = poly_mod(f, mod, m)
    while e:
        if e & 1:
            result = poly_mod(poly_mul(result, base, m), mod, m)
        base = poly_mod(poly_mul(base, base, m), mod, m)
        e >>= 1
    return poly_mod(result, mod, m)


def poly_eval(f: Poly, x: int, m: int) -> int:
    acc = 0
    for c in reversed(f):
        acc = (acc * x + c) % m
    return acc


def is_irreducible(f: Poly, m: int) -> bool:
    """Rabin's irreducibility test for a monic polynomial over F_m."""
    f = poly_trim(f)
    n = len(f) - 1
    if n < 1:
        return False
    if n == 1:
        return True
    x: Poly = (0, 1)
    if poly_powmod(x, m**n, f, m) != poly_mod(x, f, m):
        return False
    for r in factorint(n):
        h = poly_sub(poly_powmod(x, m ** (n // r), f, m), x, m)
        if poly_gcd(f, h, m) != (1,):
            return False
    return True


def is_primitive(f: Poly, m: int) -> bool:
    """True iff the monic polynomial ``f`` is irreducible and x generates the unit group."""
    f = poly_trim(f)
    n = len(f) - 1
    if n < 1 or f[0] == 0 or not is_irreducible(f, m):
        return False
    order = m**n - 1
    x: Poly = (0, 1)
    if poly_powmod(x, order, f, m) != (1,):
        return False
    return all(poly_powmod(x, order // r, f, m) != (1,) for r in factorint(order))


# ---------------------------------------------------------------------------
# field specs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PrimeFieldSpec:
    modulus: int

    def __post_init__(self):
        if not isinstance(self.modulus, int) or self.modulus < 2 or not isprime(self.modulus):
            raise FieldError(f"modulus {self.modulus!r} is not prime")


@dataclass(frozen=True)
class ExtElement:
    coeffs: tuple[int, ...]

    def __iter__(self):
        return iter(self.coeffs)


@dataclass(frozen=True)
class ExtFieldSpec:
    """F_{M^K} as F_M[x]/(min_poly) with a primitive ``min_poly`` (coefficients low to high)."""

    base: PrimeFieldSpec
    degree: int
    min_poly: tuple[int, ...]
    _checked: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        M, K = self.base.modulus, self.degree
        if K < 1:
            raise FieldError("degree must be >= 1")
        poly = tuple(int(c) for c in self.min_poly)
        object.__setattr__(self, "min_poly", poly)
        if len(poly) != K + 1 or poly[-1] != 1 or any(not 0 <= c < M for c in poly):
            raise FieldError("min_poly must be monic of degree K with coefficients in [0, M)")
        if self._checked and not is_primitive(poly, M):
            raise FieldError(f"min_poly {poly} is not primitive over F_{M}")

    @property
    def M(self) -> int:
        return self.base.modulus

    @property
    def K(self) -> int:
        return self.degree

    @property
    def order(self) -> int:
        """Size of the multiplicative group, M^K - 1."""
        return self.M**self.K - 1

    def element(self, coeffs) -> ExtElement:
        coeffs = tuple(int(c) % self.M for c in coeffs)
        if len(coeffs) > self.K:
            raise FieldError(f"element has {len(coeffs)} coordinates, field degree is {self.K}")
        return ExtElement(coeffs + (0,) * (self.K - len(coeffs)))

    def from_poly(self, f: Poly) -> ExtElement:
        """Reduce an arbitrary polynomial modulo the minimal polynomial."""
        return self.element(poly_mod(f, self.min_poly, self.M))

    def zero(self) -> ExtElement:
        return ExtElement((0,) * self.K)

    def one(self) -> ExtElement:
        return self.element((1,))

    def generator(self) -> ExtElement:
        """The primitive element ``a`` (residue of x)."""
        return self.from_poly((0, 1))

    def to_record(self) -> dict:
        return {"M": self.M, "K": self.K, "min_poly": list(self.min_poly)}

    @classmethod
    def from_record(cls, record: dict) -> "ExtFieldSpec":
        return cls(PrimeFieldSpec(int(record["M"])), int(record["K"]), tuple(record["min_poly"]))


def _check_member(fld: ExtFieldSpec, *elems: ExtElement) -> None:
    for e in elems:
        if len(e.coeffs) != fld.K or any(not 0 <= c < fld.M for c in e.coeffs):
            raise FieldError(f"{e} is not an element of F_{fld.M}^{fld.K}")


def ext_add(fld: ExtFieldSpec, x: ExtElement, y: ExtElement) -> ExtElement:
    _check_member(fld, x, y)
    return ExtElement(tuple((a + b) % fld.M for a, b in zip(x.coeffs, y.coeffs)))


def _mulmod(x: tuple[int, ...], y: tuple[int, ...], min_poly: tuple[int, ...], m: int) -> tuple[int, ...]:
    # product of two reduced elements, reduced by the monic min_poly
    k = len(min_poly) - 1
    prod = [0] * (2 * k - 1)
    for i, a in enumerate(x):
        if a:
            for j, b in enumerate(y):
                prod[i + j] += a * b
    for d in range(2 * k - 2, k - 1, -1):
        c = prod[d] % m
        if c:
            for j in range(k):
                prod[d - k + j] -= c * min_poly[j]
    return tuple(c % m for c in prod[:k])


def ext_mul(fld: ExtFieldSpec, x: ExtElement, y: ExtElement) -> ExtElement:
    _check_member(fld, x, y)
    return ExtElement(_mulmod(x.coeffs, y.coeffs, fld.min_poly, fld.M))


def ext_pow(fld: ExtFieldSpec, x: ExtElement, e: int) -> ExtElement:
    """Square-and-multiply."""
    if e < 0:
        raise FieldError("exponent must be non-negative")
    _check_member(fld, x)
    f, m = fld.min_poly, fld.M
    result = fld.one().coeffs
    base = x.coeffs
    while e:
        if e & 1:
            result = _mulmod(result, base, f, m)
        base = _mulmod(base, base, f, m)
        e >>= 1
    return ExtElement(result)


def find_primitive_extension(M: int, K: int) -> ExtFieldSpec:
    """Deterministic search for a primitive monic polynomial of degree K over F_M.

    Candidates are x^K - r(x), where the coefficients of r (low to high) run over
    the base-M digits of 0, 1, 2, ...; for K = 1 this yields x - g with g the
    smallest primitive root mod M.
    """
    base = PrimeFieldSpec(M)
    if not isinstance(K, int) or K < 1:
        raise FieldError("K must be a positive integer")
    for digits in itertools.product(range(M), repeat=K):
        tail = tuple(-d % M for d in reversed(digits))  # reversed: constant term varies fastest
        poly = tail + (1,)
        if is_primitive(poly, M):
            return ExtFieldSpec(base, K, poly, _checked=False)
    raise RuntimeError(f"no primitive polynomial of degree {K} over F_{M}")  # pragma: no cover


# ---------------------------------------------------------------------------
# discrete logarithms and roots
# ---------------------------------------------------------------------------


class BabyStepGiantStep:
    """Reusable discrete-log solver to base ``a`` over the full group order."""

    def __init__(self, fld: ExtFieldSpec):
        self.field = fld
        n = fld.order
        self.m = math.isqrt(n - 1) + 1 if n > 1 else 1
        a = fld.generator()
        table: dict[tuple[int, ...], int] = {}
        e = fld.one()
        for j in range(self.m):
            table.setdefault(e.coeffs, j)
            e = ext_mul(fld, e, a)
        self.table = table
        # a^(-m) = a^(n - m mod n)
        self.giant = ext_pow(fld, a, (-self.m) % n)

    def log(self, target: ExtElement) -> int:
        fld = self.field
        _check_member(fld, target)
        if not any(target.coeffs):
            raise FieldError("zero has no discrete logarithm")
        gamma = target
        for i in range(self.m + 1):
            j = self.table.get(gamma.coeffs)
            if j is not None:
                return (i * self.m + j) % fld.order
            gamma = ext_mul(fld, gamma, self.giant)
        raise RuntimeError("discrete log not found; generator is not primitive")  # pragma: no cover


@functools.lru_cache(maxsize=32)
def _solver(fld: ExtFieldSpec) -> BabyStepGiantStep:
    return BabyStepGiantStep(fld)


def discrete_log(fld: ExtFieldSpec, target: ExtElement) -> int:
    """The unique s in [0, M^K - 1) with a^s = target."""
    return _solver(fld).log(target)


def roots_in_base_field(fld: ExtFieldSpec | PrimeFieldSpec | int, poly: Poly) -> list[int]:
    """All roots of ``poly`` in F_M, with multiplicity, by exhaustive scan.

    ``fld`` may be an extension field spec, a prime field spec or the modulus.
    """
    if isinstance(fld, ExtFieldSpec):
        M = fld.M
    elif isinstance(fld, PrimeFieldSpec):
        M = fld.modulus
    else:
        M = int(fld)
    f = poly_trim(tuple(c % M for c in poly))
    if len(f) < 2:
        raise FieldError("polynomial must have degree >= 1")
    roots = []
    for r in range(M):
        while len(f) > 1 and poly_eval(f, r, M) == 0:
            roots.append(r)
            f, _ = poly_divmod(f, (-r % M, 1), M)
    return roots
