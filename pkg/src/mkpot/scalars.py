"""Exact coefficient rings: rational multivariate polynomials and trigonometric
polynomials in the six coordinates x^1..x^6.

Both rings keep Fraction coefficients, store no zero terms and use a canonical
term order, so equality is structural.  Plain Fractions act as the shared
constants of either ring; binary operations accept ``Fraction | int`` on either
side and lift them.
"""

from __future__ import annotations

from fractions import Fraction
from math import cos, sin
from typing import Iterable, Mapping, Sequence, Union

from .blades import DIM

Rational = Union[Fraction, int]

ZERO_EXP = (0,) * DIM


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    raise TypeError(f"expected a rational scalar, got {type(value).__name__}")


class PolyScalar:
    """Polynomial in x^1..x^6 with exact rational coefficients.

    Terms map an exponent tuple of length 6 to a nonzero Fraction.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[tuple[int, ...], Rational] | None = None):
        clean: dict[tuple[int, ...], Fraction] = {}
        if terms:
            for exps, coeff in terms.items():
                exps = tuple(exps)
                if len(exps) != DIM or any(e < 0 for e in exps):
                    raise ValueError(f"bad exponent tuple {exps}")
                c = _as_fraction(coeff)
                if c:
                    clean[exps] = clean.get(exps, Fraction(0)) + c
        self.terms = {e: c for e, c in sorted(clean.items()) if c}

    # -- constructors ------------------------------------------------------
    @classmethod
    def const(cls, value: Rational) -> "PolyScalar":
        v = _as_fraction(value)
        return cls({ZERO_EXP: v} if v else {})

    @classmethod
    def variable(cls, i: int, power: int = 1) -> "PolyScalar":
        exps = [0] * DIM
        exps[i - 1] = power
        return cls({tuple(exps): Fraction(1)})

    @classmethod
    def from_quadratic(cls, hess: Sequence[Sequence[Rational]]) -> "PolyScalar":
        """(1/2) x^T H x for a symmetric 6x6 matrix H."""
        terms: dict[tuple[int, ...], Fraction] = {}
        for i in range(DIM):
            for j in range(DIM):
                h = _as_fraction(hess[i][j])
                if not h:
                    continue
                exps = [0] * DIM
                exps[i] += 1
                exps[j] += 1
                key = tuple(exps)
                terms[key] = terms.get(key, Fraction(0)) + h / 2
        return cls(terms)

    # -- ring operations ---------------------------------------------------
    def _coerce(self, other) -> "PolyScalar | None":
        if isinstance(other, PolyScalar):
            return other
        if isinstance(other, (Fraction, int)):
            return PolyScalar.const(other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        merged = dict(self.terms)
        for e, c in o.terms.items():
            merged[e] = merged.get(e, Fraction(0)) + c
        return PolyScalar(merged)

    __radd__ = __add__

    def __neg__(self):
        return PolyScalar({e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        out: dict[tuple[int, ...], Fraction] = {}
        for ea, ca in self.terms.items():
            for eb, cb in o.terms.items():
                key = tuple(a + b for a, b in zip(ea, eb))
                out[key] = out.get(key, Fraction(0)) + ca * cb
        return PolyScalar(out)

    __rmul__ = __mul__

    def diff(self, i: int) -> "PolyScalar":
        out: dict[tuple[int, ...], Fraction] = {}
        for exps, coeff in self.terms.items():
            e = exps[i - 1]
            if e:
                key = exps[: i - 1] + (e - 1,) + exps[i:]
                out[key] = out.get(key, Fraction(0)) + coeff * e
        return PolyScalar(out)

    def eval(self, point: Sequence) -> float:
        total = 0.0
        for exps, coeff in self.terms.items():
            term = float(coeff)
            for x, e in zip(point, exps):
                if e:
                    term *= float(x) ** e
            total += term
        return total

    def eval_exact(self, point: Sequence[Rational]) -> Fraction:
        total = Fraction(0)
        for exps, coeff in self.terms.items():
            term = coeff
            for x, e in zip(point, exps):
                if e:
                    term *= _as_fraction(x) ** e
            total += term
        return total

    # -- structure ---------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def constant_part(self) -> Fraction:
        return self.terms.get(ZERO_EXP, Fraction(0))

    def is_constant(self) -> bool:
        return not self.terms or self.terms.keys() == {ZERO_EXP}

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.terms == o.terms

    def __hash__(self):
        return hash(tuple(self.terms.items()))

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for exps, coeff in self.terms.items():
            mono = "*".join(
                f"x{i+1}" + (f"^{e}" if e > 1 else "")
                for i, e in enumerate(exps)
                if e
            )
            parts.append(f"{coeff}" + (f"*{mono}" if mono else ""))
        return " + ".join(parts)


def _canonical_freq(freq: tuple[int, ...]) -> tuple[tuple[int, ...], int]:
    """Canonical representative of a frequency vector: first nonzero > 0.

    Returns (canonical, flip) with flip = -1 when the vector was negated,
    which flips the sign of sine terms (cosine is even, sine is odd).
    """
    for f in freq:
        if f > 0:
            return freq, 1
        if f < 0:
            return tuple(-x for x in freq), -1
    return freq, 1


COS, SIN = 0, 1


class TrigScalar:
    """Real trigonometric polynomial sum_k [a_k cos(k.x) + b_k sin(k.x)].

    Frequency vectors k are integer 6-tuples stored in canonical form (first
    nonzero component positive); coefficients are exact Fractions, so the ring
    serves as the exact engine on torus-periodic inputs.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[tuple[tuple[int, ...], int], Rational] | None = None):
        clean: dict[tuple[tuple[int, ...], int], Fraction] = {}
        if terms:
            for (freq, kind), coeff in terms.items():
                freq = tuple(freq)
                if len(freq) != DIM:
                    raise ValueError(f"bad frequency vector {freq}")
                c = _as_fraction(coeff)
                if not c:
                    continue
                cf, flip = _canonical_freq(freq)
                if kind == SIN:
                    if cf == ZERO_EXP:
                        continue  # sin(0) = 0
                    c *= flip
                key = (cf, kind)
                clean[key] = clean.get(key, Fraction(0)) + c
        self.terms = {k: c for k, c in sorted(clean.items()) if c}

    # -- constructors ------------------------------------------------------
    @classmethod
    def const(cls, value: Rational) -> "TrigScalar":
        v = _as_fraction(value)
        return cls({(ZERO_EXP, COS): v} if v else {})

    @classmethod
    def cosine(cls, freq: Iterable[int], coeff: Rational = 1) -> "TrigScalar":
        return cls({(tuple(freq), COS): coeff})

    @classmethod
    def sine(cls, freq: Iterable[int], coeff: Rational = 1) -> "TrigScalar":
        return cls({(tuple(freq), SIN): coeff})

    # -- ring operations ---------------------------------------------------
    def _coerce(self, other) -> "TrigScalar | None":
        if isinstance(other, TrigScalar):
            return other
        if isinstance(other, (Fraction, int)):
            return TrigScalar.const(other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        merged = dict(self.terms)
        for k, c in o.terms.items():
            merged[k] = merged.get(k, Fraction(0)) + c
        return TrigScalar(merged)

    __radd__ = __add__

    def __neg__(self):
        return TrigScalar({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        out: dict[tuple[tuple[int, ...], int], Fraction] = {}

        def put(freq, kind, coeff):
            cf, flip = _canonical_freq(tuple(freq))
            if kind == SIN:
                if cf == ZERO_EXP:
                    return
                coeff = coeff * flip
            key = (cf, kind)
            out[key] = out.get(key, Fraction(0)) + coeff

        half = Fraction(1, 2)
        for (fa, ka), ca in self.terms.items():
            for (fb, kb), cb in o.terms.items():
                c = ca * cb * half
                diff = tuple(a - b for a, b in zip(fa, fb))
                summ = tuple(a + b for a, b in zip(fa, fb))
                if ka == COS and kb == COS:
                    put(diff, COS, c)
                    put(summ, COS, c)
                elif ka == SIN and kb == SIN:
                    put(diff, COS, c)
                    put(summ, COS, -c)
                elif ka == SIN and kb == COS:
                    put(summ, SIN, c)
                    put(diff, SIN, c)
                else:  # COS * SIN
                    put(summ, SIN, c)
                    put(diff, SIN, -c)
        return TrigScalar(out)

    __rmul__ = __mul__

    def diff(self, i: int) -> "TrigScalar":
        out: dict[tuple[tuple[int, ...], int], Fraction] = {}
        for (freq, kind), coeff in self.terms.items():
            f = freq[i - 1]
            if not f:
                continue
            key = (freq, SIN if kind == COS else COS)
            c = coeff * f * (-1 if kind == COS else 1)
            out[key] = out.get(key, Fraction(0)) + c
        return TrigScalar(out)

    def eval(self, point: Sequence) -> float:
        total = 0.0
        for (freq, kind), coeff in self.terms.items():
            phase = sum(f * float(x) for f, x in zip(freq, point))
            total += float(coeff) * (cos(phase) if kind == COS else sin(phase))
        return total

    # -- structure ---------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def constant_part(self) -> Fraction:
        return self.terms.get((ZERO_EXP, COS), Fraction(0))

    def is_constant(self) -> bool:
        return not self.terms or self.terms.keys() == {(ZERO_EXP, COS)}

    def frequencies(self) -> set[tuple[int, ...]]:
        return {f for (f, _k) in self.terms if f != ZERO_EXP}

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.terms == o.terms

    def __hash__(self):
        return hash(tuple(self.terms.items()))

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for (freq, kind), coeff in self.terms.items():
            if freq == ZERO_EXP:
                parts.append(f"{coeff}")
                continue
            phase = "+".join(
                (f"{f}*x{i+1}" if f != 1 else f"x{i+1}")
                for i, f in enumerate(freq)
                if f
            )
            name = "cos" if kind == COS else "sin"
            parts.append(f"{coeff}*{name}({phase})")
        return " + ".join(parts)


Scalar = Union[Fraction, PolyScalar, TrigScalar]


def lift_to_poly(c: Scalar) -> PolyScalar:
    if isinstance(c, PolyScalar):
        return c
    if isinstance(c, (Fraction, int)):
        return PolyScalar.const(c)
    raise TypeError(f"cannot lift {type(c).__name__} to a polynomial")


def scalar_is_zero(c) -> bool:
    if isinstance(c, (PolyScalar, TrigScalar)):
        return c.is_zero()
    return not c


def scalar_diff(c, i: int):
    if isinstance(c, (PolyScalar, TrigScalar)):
        return c.diff(i)
    if isinstance(c, (Fraction, int)):
        return Fraction(0)
    raise TypeError(f"cannot differentiate {type(c).__name__}")


def normalize_scalar(c):
    """Demote constant ring elements to plain Fractions (canonical form)."""
    if isinstance(c, (PolyScalar, TrigScalar)):
        if c.is_zero():
            return Fraction(0)
        if c.is_constant():
            return c.constant_part()
        return c
    if isinstance(c, int):
        return Fraction(c)
    return c


def scalar_eval(c, point: Sequence) -> float:
    if isinstance(c, (PolyScalar, TrigScalar)):
        return c.eval(point)
    return float(c)
