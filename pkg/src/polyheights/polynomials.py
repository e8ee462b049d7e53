"""Exact univariate polynomial arithmetic over Q and over prime fields.

Coefficients of rational polynomials are `fractions.Fraction` values stored
densely in ascending degree order, with the leading entry nonzero for a
nonzero polynomial; the zero polynomial has an empty coefficient tuple.  No
floating point enters this module: valuations, divisions and iterates are
exact.

>>> f = Polynomial(["0", "1/2", "1"])     # x^2 + x/2
>>> poly_iterate(f, 2)
Polynomial(['0', '1/4', '3/4', '1', '1'])
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

from .errors import (
    BadReductionError,
    DegreeCapError,
    InputError,
    PrecisionCeilingError,
)
from .numtheory import log_abs_int, padic_valuation_int

RationalLike = Union[Fraction, int, str]

#: Hard ceiling on deg(f^(n)) = d^n enforced by poly_iterate.
DEFAULT_DEGREE_CAP = 1 << 16

INF = math.inf

_KARATSUBA_CUTOFF = 24


def as_rational(value: RationalLike) -> Fraction:
    """Coerce ints, "num/den" strings and Fractions to Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise InputError(f"not an exact rational: {value!r}")


def _pack_nonneg(values: Sequence[int], slot_bytes: int) -> int:
    buf = b"".join(v.to_bytes(slot_bytes, "little") for v in values)
    return int.from_bytes(buf, "little")


def _unpack(packed: int, slot_bytes: int, count: int) -> list[int]:
    buf = packed.to_bytes(slot_bytes * count + slot_bytes, "little")
    return [
        int.from_bytes(buf[i * slot_bytes : (i + 1) * slot_bytes], "little")
        for i in range(count)
    ]


def convolve_int(a: Sequence[int], b: Sequence[int]) -> list[int]:
    """Integer sequence convolution.

    Short inputs use the schoolbook loop; longer ones go through Kronecker
    substitution, turning the convolution into two big-integer products so
    CPython's subquadratic multiplication does the work.
    """
    n, m = len(a), len(b)
    if n == 0 or m == 0:
        return []
    if min(n, m) < _KARATSUBA_CUTOFF:
        out = [0] * (n + m - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    out[i + j] += ai * bj
        return out

    apos = [x if x > 0 else 0 for x in a]
    aneg = [-x if x < 0 else 0 for x in a]
    bpos = [x if x > 0 else 0 for x in b]
    bneg = [-x if x < 0 else 0 for x in b]

    bits_a = max(x.bit_length() for x in a)
    bits_b = max(x.bit_length() for x in b)
    # Slot wide enough for min(n,m) products plus the sum of two packings.
    slot_bits = bits_a + bits_b + min(n, m).bit_length() + 2
    slot_bytes = (slot_bits + 7) // 8

    pp = _pack_nonneg(apos, slot_bytes) * _pack_nonneg(bpos, slot_bytes)
    nn = _pack_nonneg(aneg, slot_bytes) * _pack_nonneg(bneg, slot_bytes)
    pn = _pack_nonneg(apos, slot_bytes) * _pack_nonneg(bneg, slot_bytes)
    np_ = _pack_nonneg(aneg, slot_bytes) * _pack_nonneg(bpos, slot_bytes)

    count = n + m - 1
    plus = _unpack(pp + nn, slot_bytes, count)
    minus = _unpack(pn + np_, slot_bytes, count)
    return [x - y for x, y in zip(plus, minus)]


class Polynomial:
    """Immutable dense polynomial with exact rational coefficients."""

    __slots__ = ("coeffs",)

    coeffs: tuple[Fraction, ...]

    def __init__(self, coeffs: Iterable[RationalLike] = ()):
        raw = [as_rational(c) for c in coeffs]
        while raw and raw[-1] == 0:
            raw.pop()
        object.__setattr__(self, "coeffs", tuple(raw))

    def __setattr__(self, name, value):
        raise AttributeError("Polynomial is immutable")

    # -- constructors -------------------------------------------------

    @staticmethod
    def x() -> "Polynomial":
        return Polynomial((0, 1))

    @staticmethod
    def constant(c: RationalLike) -> "Polynomial":
        return Polynomial((c,))

    @staticmethod
    def monomial(k: int, c: RationalLike = 1) -> "Polynomial":
        return Polynomial((0,) * k + (c,))

    @staticmethod
    def from_strings(entries: Sequence[str]) -> "Polynomial":
        """Parse the "num/den" coefficient-array text form (ascending)."""
        try:
            return Polynomial(Fraction(e) for e in entries)
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"bad coefficient list {entries!r}: {exc}") from exc

    def to_strings(self) -> list[str]:
        return [str(c) for c in self.coeffs]

    # -- structure ----------------------------------------------------

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def leading_coefficient(self) -> Fraction:
        if not self.coeffs:
            return Fraction(0)
        return self.coeffs[-1]

    def __getitem__(self, k: int) -> Fraction:
        if 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        return Fraction(0)

    def __eq__(self, other) -> bool:
        if isinstance(other, Polynomial):
            return self.coeffs == other.coeffs
        return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"Polynomial({self.to_strings()!r})"

    # -- ring operations ----------------------------------------------

    def __add__(self, other) -> "Polynomial":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return Polynomial(out)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial(tuple(-c for c in self.coeffs))

    def __sub__(self, other) -> "Polynomial":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "Polynomial":
        return -(self - other)

    def __mul__(self, other) -> "Polynomial":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.is_zero or other.is_zero:
            return Polynomial()
        # Scale both factors to integers, convolve, put the denominator back.
        da = math.lcm(*(c.denominator for c in self.coeffs))
        db = math.lcm(*(c.denominator for c in other.coeffs))
        ia = [int(c * da) for c in self.coeffs]
        ib = [int(c * db) for c in other.coeffs]
        den = da * db
        return Polynomial(Fraction(c, den) for c in convolve_int(ia, ib))

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Polynomial":
        if n < 0:
            raise ValueError("negative polynomial power")
        result = Polynomial((1,))
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    @staticmethod
    def _coerce(other):
        if isinstance(other, Polynomial):
            return other
        if isinstance(other, (int, Fraction, str)):
            return Polynomial((other,))
        return NotImplemented

    # -- calculus and evaluation ----------------------------------------

    def derivative(self) -> "Polynomial":
        return Polynomial(tuple(k * c for k, c in enumerate(self.coeffs) if k))

    def evaluate(self, x):
        """Horner evaluation; exact for Fraction/int x, generic otherwise.

        Mixed arithmetic follows the argument: complex x yields complex,
        mpmath x yields mpmath values.
        """
        result = x * 0
        for c in reversed(self.coeffs):
            result = result * x + c
        return result

    def compose(self, other: "Polynomial") -> "Polynomial":
        """self(other(x)) by Horner over polynomials."""
        result = Polynomial()
        for c in reversed(self.coeffs):
            result = result * other + Polynomial((c,))
        return result

    def __divmod__(self, other: "Polynomial") -> tuple["Polynomial", "Polynomial"]:
        if not isinstance(other, Polynomial):
            return NotImplemented
        if other.is_zero:
            raise ZeroDivisionError("polynomial division by zero polynomial")
        rem = list(self.coeffs)
        dn, dd = len(rem) - 1, other.degree
        if dn < dd:
            return Polynomial(), self
        inv_lead = 1 / other.leading_coefficient
        quot = [Fraction(0)] * (dn - dd + 1)
        for k in range(dn - dd, -1, -1):
            c = rem[k + dd] * inv_lead
            if c:
                quot[k] = c
                for j, oc in enumerate(other.coeffs):
                    rem[k + j] -= c * oc
        return Polynomial(quot), Polynomial(rem[:dd])

    def shift(self, a: RationalLike) -> "Polynomial":
        """Taylor shift: returns g with g(x) = f(x + a)."""
        a = as_rational(a)
        out = []
        for c in reversed(self.coeffs):
            # Multiply accumulated polynomial by (x + a), then add c.
            new = [Fraction(0)] * (len(out) + 1)
            for i, v in enumerate(out):
                new[i] += a * v
                new[i + 1] += v
            new[0] += c
            out = new
        return Polynomial(out)


# ----------------------------------------------------------------------
# Kernel operations
# ----------------------------------------------------------------------


def poly_compose(f: Polynomial, g: Polynomial) -> Polynomial:
    """Exact composition f(g(x))."""
    return f.compose(g)


def poly_iterate(f: Polynomial, n: int, degree_cap: int = DEFAULT_DEGREE_CAP) -> Polynomial:
    """n-th iterate of f under composition; the 0th iterate is x.

    Raises DegreeCapError before materializing anything larger than
    degree_cap coefficients.
    """
    if n < 0:
        raise ValueError("iterate count must be nonnegative")
    d = f.degree
    if n > 0 and d >= 2:
        if d ** n > degree_cap:
            raise DegreeCapError(d**n, degree_cap)
    result = Polynomial.x()
    for _ in range(n):
        result = f.compose(result)
    return result


def poly_divide(f: Polynomial, g: Polynomial) -> tuple[Polynomial, Polynomial]:
    """Exact quotient and remainder with f = q*g + r, deg r < deg g."""
    return divmod(f, g)


def root_multiplicity(f: Polynomial, xi: RationalLike) -> int:
    """Largest k with (x - xi)^k dividing f, by repeated synthetic division."""
    if f.is_zero:
        raise ValueError("root multiplicity undefined for the zero polynomial")
    xi = as_rational(xi)
    coeffs = list(f.coeffs)
    mult = 0
    while True:
        # Synthetic division by (x - xi): quotient in place, last value is f(xi).
        acc = Fraction(0)
        out = []
        for c in reversed(coeffs):
            acc = acc * xi + c
            out.append(acc)
        remainder = out.pop()
        if remainder != 0 or not out:
            return mult
        mult += 1
        coeffs = list(reversed(out))


def conjugate_linear(f: Polynomial, alpha: RationalLike, beta: RationalLike = 0) -> Polynomial:
    """Conjugate by sigma(x) = alpha*x + beta: returns sigma o f o sigma^-1."""
    alpha = as_rational(alpha)
    beta = as_rational(beta)
    if alpha == 0:
        raise ValueError("conjugation scale must be nonzero")
    sigma_inv = Polynomial((-beta / alpha, 1 / alpha))
    inner = f.compose(sigma_inv)
    return alpha * inner + Polynomial((beta,))


def valuation(q: RationalLike, p: int) -> Union[int, float]:
    """p-adic valuation of a rational; +inf for 0."""
    q = as_rational(q)
    if q == 0:
        return INF
    return padic_valuation_int(q.numerator, p) - padic_valuation_int(q.denominator, p)


def log_abs_rational(q: Fraction) -> float:
    """log|q| for a nonzero rational of arbitrary size."""
    return log_abs_int(q.numerator) - log_abs_int(q.denominator)


def reduce_mod_p(f: Polynomial, p: int) -> "FpPolynomial":
    """Coefficientwise reduction into F_p.

    Requires every coefficient to have nonnegative p-valuation; the leading
    coefficient is allowed to vanish mod p (degree drops).
    """
    residues = []
    for i, c in enumerate(f.coeffs):
        if valuation(c, p) < 0:
            raise BadReductionError(
                f"coefficient {c} of x^{i} has negative {p}-adic valuation"
            )
        residues.append(c.numerator * pow(c.denominator, -1, p) % p)
    return FpPolynomial(p, residues)


@dataclass(frozen=True)
class LeadingCoefficientPower:
    """Data for B_n = a^((d^n-1)/(d-1)), the leading coefficient of f^(n).

    Holds the exact exponent and base so both log|B_n| and v_p(B_n) are
    available without materializing the iterate.
    """

    base: Fraction
    exponent: int
    log_abs: float

    def valuation(self, p: int) -> int:
        return self.exponent * valuation(self.base, p)


def leading_coefficient_power(f: Polynomial, n: int) -> LeadingCoefficientPower:
    d = f.degree
    if d < 2:
        raise ValueError("leading coefficient power requires degree >= 2")
    if n < 0:
        raise ValueError("iterate count must be nonnegative")
    a = f.leading_coefficient
    exponent = (d**n - 1) // (d - 1)
    return LeadingCoefficientPower(a, exponent, exponent * log_abs_rational(a))


# ----------------------------------------------------------------------
# Truncated orbits mod p^K
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class PrimePowerResidue:
    """Residue class modulo p^K."""

    prime: int
    exponent: int
    residue: int

    def __post_init__(self):
        modulus = self.prime**self.exponent
        if not 0 <= self.residue < modulus:
            object.__setattr__(self, "residue", self.residue % modulus)


@dataclass(frozen=True)
class OrbitResidues:
    """Orbit of q mod p^K with valuations of f^(n)(q) - q.

    ``difference_valuations[n]`` is v_p(f^(n)(q) - q) when that valuation is
    below the truncation K, math.inf for n = 0, and None when the residue
    vanished mod p^K so only "v >= K" is known and the caller should retry
    with a larger K.
    """

    residues: tuple[PrimePowerResidue, ...]
    difference_valuations: tuple[Union[int, float, None], ...]
    truncation: int


def _rational_residue(q: Fraction, p: int, modulus: int) -> int:
    if q.denominator % p == 0:
        raise InputError(f"{q} has negative {p}-adic valuation")
    return q.numerator * pow(q.denominator, -1, modulus) % modulus


def escape_radius(f: Polynomial) -> Fraction:
    """1 + max|a_i|/|a_d|: all roots lie inside, orbits outside escape."""
    d = f.degree
    if d < 1:
        raise ValueError("escape radius requires degree >= 1")
    lead = abs(f.leading_coefficient)
    biggest = max((abs(c) for c in f.coeffs[:-1]), default=Fraction(0))
    return 1 + biggest / lead


def has_good_reduction(f: Polynomial, p: int) -> bool:
    """True iff all coefficients are p-integral and the leading one is a unit."""
    if f.degree < 2:
        raise ValueError("good reduction is defined for degree >= 2 maps")
    if any(valuation(c, p) < 0 for c in f.coeffs):
        return False
    return valuation(f.leading_coefficient, p) == 0


def orbit_mod_prime_power(
    f: Polynomial, q: RationalLike, p: int, n_max: int, K: int
) -> OrbitResidues:
    """Residues of f^(n)(q) mod p^K for 0 <= n <= n_max.

    Requires good reduction of f at p and v_p(q) >= 0 so the orbit stays
    p-integral.
    """
    if not has_good_reduction(f, p):
        raise BadReductionError(f"{f!r} does not have good reduction at {p}")
    q = as_rational(q)
    if valuation(q, p) < 0:
        raise InputError(f"point {q} has negative {p}-adic valuation")
    modulus = p**K
    coeffs = [_rational_residue(c, p, modulus) for c in f.coeffs]
    r0 = _rational_residue(q, p, modulus)

    residues = [PrimePowerResidue(p, K, r0)]
    valuations: list[Union[int, float, None]] = [INF]
    r = r0
    for _ in range(n_max):
        acc = 0
        for c in reversed(coeffs):
            acc = (acc * r + c) % modulus
        r = acc
        residues.append(PrimePowerResidue(p, K, r))
        diff = (r - r0) % modulus
        valuations.append(padic_valuation_int(diff, p) if diff else None)
    return OrbitResidues(tuple(residues), tuple(valuations), K)


def orbit_difference_valuations(
    f: Polynomial,
    q: RationalLike,
    p: int,
    n_max: int,
    start_truncation: int = 32,
    truncation_ceiling: int = 4096,
    known_period: int | None = None,
) -> list[Union[int, float]]:
    """Exact v_p(f^(n)(q) - q) for 1 <= n <= n_max, doubling K as needed.

    When q is periodic of (known) period m, entries at multiples of m are
    math.inf and are not resolved through the truncated orbit.
    """
    K = start_truncation
    while True:
        orbit = orbit_mod_prime_power(f, q, p, n_max, K)
        vals = list(orbit.difference_valuations[1:])
        unresolved = [
            n + 1
            for n, v in enumerate(vals)
            if v is None and not (known_period and (n + 1) % known_period == 0)
        ]
        if not unresolved:
            out: list[Union[int, float]] = []
            for n, v in enumerate(vals, start=1):
                if v is None:
                    out.append(INF)
                else:
                    out.append(v)
            return out
        if K >= truncation_ceiling:
            raise PrecisionCeilingError(
                f"valuations at n={unresolved[:5]}... still >= {K}"
            )
        K = min(2 * K, truncation_ceiling)


# ----------------------------------------------------------------------
# Orbit Taylor jets
# ----------------------------------------------------------------------


def iterate_taylor_jet(
    f: Polynomial, q: RationalLike, n: int, order: int
) -> tuple[Fraction, ...]:
    """Coefficients c_0..c_order of f^(n)(q + t) as a series in t.

    Walks the orbit composing truncated jets, so the cost is n * order^2
    exact operations and never materializes f^(n).  c_0 is f^(n)(q) and
    c_1 is the derivative (f^(n))'(q).
    """
    if order < 0:
        raise ValueError("jet order must be nonnegative")
    q = as_rational(q)
    jet = [q] + [Fraction(0)] * order
    if order >= 1:
        jet[1] = Fraction(1)
    # Divided derivatives f^(k)/k! of f, fixed along the whole orbit.
    basis = [f]
    fact = 1
    for k in range(1, order + 1):
        fact *= k
        basis.append(basis[-1].derivative() * Fraction(1, k))
    for _ in range(n):
        base = jet[0]
        taylor = [g.evaluate(base) for g in basis]
        # Compose: new_jet = taylor(jet - base), truncated at `order`.
        small = jet[:]  # jet minus its constant term
        small[0] = Fraction(0)
        new = [Fraction(0)] * (order + 1)
        new[0] = taylor[0]
        power = [Fraction(0)] * (order + 1)
        power[0] = Fraction(1)
        for k in range(1, order + 1):
            # power <- power * small, truncated
            nxt = [Fraction(0)] * (order + 1)
            for i in range(order + 1):
                if power[i] == 0:
                    continue
                for j in range(1, order + 1 - i):
                    if small[j]:
                        nxt[i + j] += power[i] * small[j]
            power = nxt
            if taylor[k]:
                for i in range(order + 1):
                    if power[i]:
                        new[i] += taylor[k] * power[i]
            if all(c == 0 for c in power):
                break
        jet = new
    return tuple(jet)


# ----------------------------------------------------------------------
# Prime-field polynomials
# ----------------------------------------------------------------------


class FpPolynomial:
    """Dense polynomial over F_p with coefficients in [0, p)."""

    __slots__ = ("p", "coeffs")

    def __init__(self, p: int, coeffs: Iterable[int] = ()):
        raw = [c % p for c in coeffs]
        while raw and raw[-1] == 0:
            raw.pop()
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "coeffs", tuple(raw))

    def __setattr__(self, name, value):
        raise AttributeError("FpPolynomial is immutable")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def __eq__(self, other):
        if isinstance(other, FpPolynomial):
            return self.p == other.p and self.coeffs == other.coeffs
        return NotImplemented

    def __hash__(self):
        return hash((self.p, self.coeffs))

    def __repr__(self):
        return f"FpPolynomial({self.p}, {list(self.coeffs)!r})"

    def _check(self, other: "FpPolynomial"):
        if self.p != other.p:
            raise ValueError("mixed characteristic")

    def __add__(self, other: "FpPolynomial") -> "FpPolynomial":
        self._check(other)
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] = (out[i] + c) % self.p
        return FpPolynomial(self.p, out)

    def __sub__(self, other: "FpPolynomial") -> "FpPolynomial":
        self._check(other)
        out = list(self.coeffs) + [0] * max(0, len(other.coeffs) - len(self.coeffs))
        for i, c in enumerate(other.coeffs):
            out[i] = (out[i] - c) % self.p
        return FpPolynomial(self.p, out)

    def __mul__(self, other: "FpPolynomial") -> "FpPolynomial":
        self._check(other)
        if self.is_zero or other.is_zero:
            return FpPolynomial(self.p)
        prod = convolve_int(self.coeffs, other.coeffs)
        return FpPolynomial(self.p, prod)

    def evaluate(self, x: int) -> int:
        acc = 0
        for c in reversed(self.coeffs):
            acc = (acc * x + c) % self.p
        return acc

    def derivative(self) -> "FpPolynomial":
        return FpPolynomial(
            self.p, tuple(k * c % self.p for k, c in enumerate(self.coeffs) if k)
        )

    def compose(self, other: "FpPolynomial") -> "FpPolynomial":
        self._check(other)
        result = FpPolynomial(self.p)
        for c in reversed(self.coeffs):
            result = result * other + FpPolynomial(self.p, (c,))
        return result

    def iterate(self, n: int, degree_cap: int = DEFAULT_DEGREE_CAP) -> "FpPolynomial":
        if n < 0:
            raise ValueError("iterate count must be nonnegative")
        d = self.degree
        if n > 0 and d >= 2 and d**n > degree_cap:
            raise DegreeCapError(d**n, degree_cap)
        result = FpPolynomial(self.p, (0, 1))
        for _ in range(n):
            result = self.compose(result)
        return result

    def root_multiplicity(self, xi: int) -> int:
        """Repeated synthetic division; valid in any characteristic."""
        if self.is_zero:
            raise ValueError("root multiplicity undefined for the zero polynomial")
        xi %= self.p
        coeffs = list(self.coeffs)
        mult = 0
        while True:
            acc = 0
            out = []
            for c in reversed(coeffs):
                acc = (acc * xi + c) % self.p
                out.append(acc)
            remainder = out.pop()
            if remainder != 0 or not out:
                return mult
            mult += 1
            coeffs = list(reversed(out))
