"""Exact scalars: rationals, square-root extensions and Wigner 3j symbols.

Rationals are :class:`fractions.Fraction`. A :class:`RadicalNumber` is a finite
sum ``sum_r q_r * sqrt(r)`` over square-free positive integers ``r``; the
radicals of distinct square-free integers are linearly independent over Q, so
equality is a comparison of term maps.
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Iterable, Mapping, NamedTuple

__all__ = [
    "Fraction",
    "RadicalNumber",
    "ThreeJArgs",
    "as_rational",
    "rationalize",
    "squarefree_split",
    "wigner3j",
    "wigner3j_x",
    "wigner3j_z",
]


def as_rational(x) -> Fraction:
    """Coerce an int/Fraction (or integral RadicalNumber-free value) to Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, RadicalNumber):
        if not x.is_rational():
            raise ValueError(f"{x} is not rational")
        return x.rational_part()
    raise TypeError(f"cannot use {type(x).__name__} as an exact rational")


def rationalize(x: float, tol: float = 1e-9) -> Fraction:
    """Closest fraction to ``x`` with denominator at most ``1/tol``.

    The approximation error is below ``tol``.
    """
    if not math.isfinite(x):
        raise ValueError("cannot rationalize a non-finite value")
    return Fraction(x).limit_denominator(max(1, int(round(1.0 / tol))))


@lru_cache(maxsize=4096)
def squarefree_split(n: int) -> tuple[int, int]:
    """Return ``(s, r)`` with ``n == s*s*r`` and ``r`` square-free."""
    if n <= 0:
        raise ValueError("square-free split needs a positive integer")
    s, r = 1, 1
    m = n
    p = 2
    while p * p <= m:
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            s *= p ** (e // 2)
            if e % 2:
                r *= p
        p += 1 if p == 2 else 2
    return s, r * m


class RadicalNumber:
    """Exact element of Q(sqrt 2, sqrt 3, sqrt 5, ...).

    Instances are immutable; arithmetic returns new canonical values.

    >>> RadicalNumber.sqrt(6) * RadicalNumber.sqrt(3)
    RadicalNumber('3*sqrt(2)')
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, value=0):
        if isinstance(value, RadicalNumber):
            self._terms = value._terms
        else:
            q = as_rational(value)
            self._terms = {1: q} if q else {}
        self._hash = None

    @classmethod
    def _make(cls, terms: dict) -> "RadicalNumber":
        obj = cls.__new__(cls)
        obj._terms = terms
        obj._hash = None
        return obj

    @classmethod
    def from_terms(cls, terms: Mapping[int, object]) -> "RadicalNumber":
        """Build ``sum q*sqrt(r)`` for arbitrary positive integers ``r``."""
        out: dict[int, Fraction] = {}
        for r, q in terms.items():
            q = as_rational(q)
            if not q:
                continue
            s, rr = squarefree_split(int(r))
            out[rr] = out.get(rr, 0) + q * s
        return cls._make({r: q for r, q in out.items() if q})

    @classmethod
    def sqrt(cls, value) -> "RadicalNumber":
        """Exact square root of a non-negative rational."""
        q = as_rational(value)
        if q < 0:
            raise ValueError("square root of a negative rational")
        if q == 0:
            return cls()
        s, r = squarefree_split(q.numerator * q.denominator)
        return cls._make({r: Fraction(s, q.denominator)})

    # -- inspection -----------------------------------------------------

    @property
    def terms(self) -> dict[int, Fraction]:
        return dict(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_rational(self) -> bool:
        return not self._terms or (len(self._terms) == 1 and 1 in self._terms)

    def is_monomial(self) -> bool:
        """True for zero or a single ``q*sqrt(r)`` term."""
        return len(self._terms) <= 1

    def rational_part(self) -> Fraction:
        return self._terms.get(1, Fraction(0))

    def square(self) -> "RadicalNumber":
        return self * self

    def sign(self) -> int:
        if not self._terms:
            return 0
        if len(self._terms) == 1:
            (q,) = self._terms.values()
            return 1 if q > 0 else -1
        return _sign_of_sum(self._terms)

    def __abs__(self) -> "RadicalNumber":
        return -self if self.sign() < 0 else self

    def __float__(self) -> float:
        return float(sum(float(q) * math.sqrt(r) for r, q in self._terms.items()))

    def __bool__(self) -> bool:
        return bool(self._terms)

    # -- arithmetic -----------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, RadicalNumber):
            try:
                other = RadicalNumber(other)
            except TypeError:
                return NotImplemented
        if not other._terms:
            return self
        if not self._terms:
            return other
        out = dict(self._terms)
        for r, q in other._terms.items():
            v = out.get(r)
            if v is None:
                out[r] = q
            else:
                v += q
                if v:
                    out[r] = v
                else:
                    del out[r]
        return RadicalNumber._make(out)

    __radd__ = __add__

    def __neg__(self):
        return RadicalNumber._make({r: -q for r, q in self._terms.items()})

    def __sub__(self, other):
        if not isinstance(other, RadicalNumber):
            try:
                other = RadicalNumber(other)
            except TypeError:
                return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, RadicalNumber):
            try:
                q = as_rational(other)
            except TypeError:
                return NotImplemented
            if not q:
                return RadicalNumber()
            return RadicalNumber._make({r: c * q for r, c in self._terms.items()})
        out: dict[int, Fraction] = {}
        for r1, q1 in self._terms.items():
            for r2, q2 in other._terms.items():
                # product of square-free integers: the square part is gcd**2
                g = math.gcd(r1, r2)
                r = (r1 // g) * (r2 // g)
                out[r] = out.get(r, 0) + q1 * q2 * g
        return RadicalNumber._make({r: q for r, q in out.items() if q})

    __rmul__ = __mul__

    def inverse(self) -> "RadicalNumber":
        """Multiplicative inverse of a monomial ``q*sqrt(r)``."""
        if not self._terms:
            raise ZeroDivisionError("inverse of zero")
        if len(self._terms) != 1:
            raise ValueError("only monomial radicals are invertible here")
        ((r, q),) = self._terms.items()
        return RadicalNumber._make({r: 1 / (q * r)})

    def __truediv__(self, other):
        if isinstance(other, RadicalNumber):
            return self * other.inverse()
        try:
            q = as_rational(other)
        except TypeError:
            return NotImplemented
        if not q:
            raise ZeroDivisionError("division by zero")
        return RadicalNumber._make({r: c / q for r, c in self._terms.items()})

    def __rtruediv__(self, other):
        return RadicalNumber(other) * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        out = RadicalNumber(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # -- comparison -----------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, RadicalNumber):
            return self._terms == other._terms
        try:
            return self._terms == RadicalNumber(other)._terms
        except TypeError:
            return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __le__(self, other):
        return (self - other).sign() <= 0

    def __gt__(self, other):
        return (self - other).sign() > 0

    def __ge__(self, other):
        return (self - other).sign() >= 0

    # -- display --------------------------------------------------------

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for r in sorted(self._terms):
            q = self._terms[r]
            if r == 1:
                parts.append(str(q))
            elif q == 1:
                parts.append(f"sqrt({r})")
            elif q == -1:
                parts.append(f"-sqrt({r})")
            else:
                parts.append(f"{q}*sqrt({r})")
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self):
        return f"RadicalNumber('{self}')"

    def to_json(self) -> list:
        """``[[radicand, "p/q"], ...]`` sorted by radicand."""
        return [[r, str(self._terms[r])] for r in sorted(self._terms)]


def _sign_of_sum(terms: Mapping[int, Fraction]) -> int:
    # Interval evaluation with growing precision; terminates because a
    # nonzero canonical sum has a nonzero value.
    den = math.lcm(*(q.denominator for q in terms.values()))
    ints = [(r, q.numerator * (den // q.denominator)) for r, q in terms.items()]
    bits = 64
    while True:
        scale = 1 << (2 * bits)
        lo = hi = 0
        for r, c in ints:
            s = math.isqrt(r * scale)  # floor(sqrt(r) * 2**bits)
            if c > 0:
                lo += c * s
                hi += c * (s + 1)
            else:
                lo += c * (s + 1)
                hi += c * s
        if lo > 0:
            return 1
        if hi < 0:
            return -1
        bits *= 2


# ---------------------------------------------------------------------------
# Wigner 3j symbols


class ThreeJArgs(NamedTuple):
    j1: int
    j2: int
    j3: int
    m1: int
    m2: int
    m3: int

    @classmethod
    def make(cls, j1, j2, j3, m1, m2, m3) -> "ThreeJArgs":
        vals = (j1, j2, j3, m1, m2, m3)
        if any(not isinstance(v, int) or isinstance(v, bool) for v in vals):
            raise TypeError("3j arguments must be integers")
        for j, m in ((j1, m1), (j2, m2), (j3, m3)):
            if j < 0:
                raise ValueError(f"angular momentum must be non-negative, got {j}")
            if abs(m) > j:
                raise ValueError(f"|m|={abs(m)} exceeds j={j}")
        return cls(*vals)


@lru_cache(maxsize=None)
def _primes_upto(n: int) -> tuple[int, ...]:
    if n < 2:
        return ()
    sieve = bytearray([1]) * (n + 1)
    sieve[0] = sieve[1] = 0
    for p in range(2, math.isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p :: p] = bytearray(len(sieve[p * p :: p]))
    return tuple(i for i, ok in enumerate(sieve) if ok)


@lru_cache(maxsize=None)
def _factorial_exponents(n: int) -> tuple[tuple[int, int], ...]:
    """Prime exponents of n! (Legendre's formula)."""
    out = []
    for p in _primes_upto(n):
        e, pk = 0, p
        while pk <= n:
            e += n // pk
            pk *= p
        out.append((p, e))
    return tuple(out)


def _sqrt_factorial_ratio(num: Iterable[int], den: Iterable[int]) -> RadicalNumber:
    """sqrt(prod(a! for a in num) / prod(b! for b in den)), exactly."""
    exps: dict[int, int] = {}
    for a in num:
        for p, e in _factorial_exponents(a):
            exps[p] = exps.get(p, 0) + e
    for b in den:
        for p, e in _factorial_exponents(b):
            exps[p] = exps.get(p, 0) - e
    q = Fraction(1)
    r = 1
    for p, e in exps.items():
        half, odd = divmod(e, 2)
        q *= Fraction(p) ** half
        if odd:
            r *= p
    return RadicalNumber._make({r: q})


def wigner3j(*args) -> RadicalNumber:
    """Exact Wigner 3j symbol via the Racah sum.

    Accepts a :class:`ThreeJArgs` or six integers ``j1, j2, j3, m1, m2, m3``.
    Selection-rule violations return exact zero.
    """
    a = args[0] if len(args) == 1 else ThreeJArgs.make(*args)
    if not isinstance(a, ThreeJArgs):
        raise TypeError("expected ThreeJArgs or six integers")
    j1, j2, j3, m1, m2, m3 = a
    if m1 + m2 + m3 != 0:
        return RadicalNumber()
    if not abs(j1 - j2) <= j3 <= j1 + j2:
        return RadicalNumber()
    kmin = max(0, j2 - j3 - m1, j1 - j3 + m2)
    kmax = min(j1 + j2 - j3, j1 - m1, j2 + m2)
    if kmin > kmax:
        return RadicalNumber()
    total = Fraction(0)
    for k in range(kmin, kmax + 1):
        d = (
            math.factorial(k)
            * math.factorial(j3 - j2 + k + m1)
            * math.factorial(j3 - j1 + k - m2)
            * math.factorial(j1 + j2 - j3 - k)
            * math.factorial(j1 - k - m1)
            * math.factorial(j2 - k + m2)
        )
        total += Fraction(-1 if k % 2 else 1, d)
    if not total:
        return RadicalNumber()
    root = _sqrt_factorial_ratio(
        (j1 + j2 - j3, j1 - j2 + j3, -j1 + j2 + j3,
         j1 + m1, j1 - m1, j2 + m2, j2 - m2, j3 + m3, j3 - m3),
        (j1 + j2 + j3 + 1,),
    )
    phase = -1 if (j1 - j2 - m3) % 2 else 1
    return root * (total * phase)


def wigner3j_x(J: int, M: int, s: int) -> RadicalNumber:
    """Closed form of ``(J 1 J+1; M s -(M+s))`` for ``s = +1`` or ``-1``.

    ``(-1)**(J+M) * sqrt((J+sM+2)(J+sM+1) / ((2J+3)(2J+2)(2J+1)))``; this
    sign agrees with the Racah convention of :func:`wigner3j`.
    """
    if s not in (1, -1):
        raise ValueError("s must be +1 or -1")
    if J < 0 or abs(M) > J or abs(M + s) > J + 1:
        raise ValueError(f"invalid closed-form arguments J={J}, M={M}, s={s}")
    a = J + s * M
    mag = RadicalNumber.sqrt(Fraction((a + 2) * (a + 1), (2 * J + 3) * (2 * J + 2) * (2 * J + 1)))
    return mag if (J + M) % 2 == 0 else -mag


def wigner3j_z(J: int, M: int) -> RadicalNumber:
    """Closed form of ``(J 1 J+1; M 0 -M)``.

    ``(-1)**(J+M+1) * sqrt((J+M+1)(J-M+1) / ((2J+3)(2J+1)(J+1)))``. The
    Racah convention carries one extra factor of -1 relative to the
    ``(-1)**(J+M)`` prefactor that often accompanies this formula; e.g.
    ``(0 1 1; 0 0 0) = -1/sqrt(3)``.
    """
    if J < 0 or abs(M) > J:
        raise ValueError(f"invalid closed-form arguments J={J}, M={M}")
    mag = RadicalNumber.sqrt(Fraction((J + M + 1) * (J - M + 1), (2 * J + 3) * (2 * J + 1) * (J + 1)))
    return -mag if (J + M) % 2 == 0 else mag
