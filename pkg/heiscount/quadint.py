from __future__ import annotations

import math
from fractions import Fraction
from functools import cached_property, lru_cache

import numpy as np

from heiscount.exceptions import InvalidDiscriminantException, FieldMismatchException, ZeroLatticeException
from heiscount.helper import ext_gcd


def _is_squarefree(n):
    n = abs(n)
    d = 2
    while d * d <= n:
        if n % (d * d) == 0:
            return False
        d += 1
    return True


def check_fundamental(disc):
    if not isinstance(disc, (int, np.integer)):
        raise InvalidDiscriminantException(f"Discriminant {disc!r} is not an integer")
    disc = int(disc)
    if disc >= 0:
        raise InvalidDiscriminantException(f"Discriminant {disc} is not negative")
    if disc % 4 == 1:
        if not _is_squarefree(disc):
            raise InvalidDiscriminantException(f"Discriminant {disc} is 1 mod 4 but not squarefree")
    elif disc % 4 == 0:
        m = disc // 4
        if m % 4 not in (2, 3):
            raise InvalidDiscriminantException(f"Discriminant {disc} = 4m with m = {m} not 2 or 3 mod 4")
        if not _is_squarefree(m):
            raise InvalidDiscriminantException(f"Discriminant {disc} = 4m with m = {m} not squarefree")
    else:
        raise InvalidDiscriminantException(f"Discriminant {disc} is {disc % 4} mod 4")
    return disc


class FieldSpec:
    """
    Imaginary quadratic field K = Q(sqrt(disc)) with integral basis (1, omega), omega^2 = p + q*omega.
    Use make_field to obtain instances; instances are shared per discriminant.
    """

    def __init__(self, disc):
        disc = check_fundamental(disc)
        self.disc = disc
        if disc % 4 == 0:
            self.basis_case = 'ZeroMod4'
            self.p = disc // 4
            self.q = 0
            self.t_K_multiple = 1  # t_K = t_K_multiple * sqrt(|disc|)
            self.pi_index = 2
        else:
            self.basis_case = 'OneMod4'
            self.p = (disc - 1) // 4
            self.q = 1
            self.t_K_multiple = 2
            self.pi_index = 1

    def __repr__(self):
        return f"FieldSpec({self.disc})"

    def __reduce__(self):
        return make_field, (self.disc,)

    @cached_property
    def sqrt_abs_disc(self):
        return math.sqrt(-self.disc)

    @cached_property
    def omega(self) -> complex:
        if self.q == 0:
            return complex(0.0, self.sqrt_abs_disc / 2)
        return complex(0.5, self.sqrt_abs_disc / 2)

    @cached_property
    def t_K(self):
        return self.t_K_multiple * self.sqrt_abs_disc

    @cached_property
    def units(self) -> list[QuadInt]:
        units = [QuadInt(self, x, y) for y in range(-2, 3) for x in range(-2, 3)
                 if x * x + self.q * x * y - self.p * y * y == 1]
        # 1 first, then the rest in coordinate order
        return sorted(units, key=lambda z: (z != 1, z.x, z.y))

    @cached_property
    def is_class_number_one(self):
        return self.disc in (-3, -4, -7, -8, -11, -19, -43, -67, -163)

    def zero(self):
        return QuadInt(self, 0, 0)

    def one(self):
        return QuadInt(self, 1, 0)

    def gen(self):
        return QuadInt(self, 0, 1)

    def __call__(self, x, y=0):
        return QuadInt(self, x, y)

    def info(self):
        return {
            'disc': self.disc,
            'basis_case': self.basis_case,
            'omega_squared': [self.p, self.q],
            'units': [[u.x, u.y] for u in self.units],
            't_K': self.t_K,
            't_K_sqrt_multiple': self.t_K_multiple,
            'pi_index': self.pi_index,
        }


@lru_cache(maxsize=None)
def make_field(disc) -> FieldSpec:
    return FieldSpec(disc)


class QuadInt:
    __slots__ = ('field', 'x', 'y')

    def __init__(self, field: FieldSpec, x: int, y: int = 0) -> None:
        self.field = field
        self.x = int(x)
        self.y = int(y)

    def __repr__(self) -> str:
        return f"QuadInt(D={self.field.disc}, {self.x}, {self.y})"

    def __str__(self) -> str:
        return f"{self.x}{self.y:+}w"

    @property
    def key(self) -> tuple[int, int]:
        return self.x, self.y

    def _coerce(self, other) -> QuadInt:
        if isinstance(other, QuadInt):
            if other.field is not self.field:
                raise FieldMismatchException(f"Mixed fields {self.field.disc} and {other.field.disc}")
            return other
        if isinstance(other, (int, np.integer)):
            return QuadInt(self.field, int(other), 0)
        return NotImplemented

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, np.integer)):
            return self.y == 0 and self.x == other
        if isinstance(other, QuadInt):
            return self.field is other.field and self.x == other.x and self.y == other.y
        return False

    def __hash__(self) -> int:
        return hash((self.field.disc, self.x, self.y))

    def __bool__(self) -> bool:
        return self.x != 0 or self.y != 0

    def __add__(self, other) -> QuadInt:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return QuadInt(self.field, self.x + other.x, self.y + other.y)

    def __radd__(self, other) -> QuadInt:
        return self + other

    def __neg__(self) -> QuadInt:
        return QuadInt(self.field, -self.x, -self.y)

    def __sub__(self, other) -> QuadInt:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return QuadInt(self.field, self.x - other.x, self.y - other.y)

    def __rsub__(self, other) -> QuadInt:
        return (-self) + other

    def __mul__(self, other) -> QuadInt:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        p, q = self.field.p, self.field.q
        yy = self.y * other.y
        return QuadInt(self.field,
                       self.x * other.x + p * yy,
                       self.x * other.y + other.x * self.y + q * yy)

    def __rmul__(self, other) -> QuadInt:
        return self * other

    def __pow__(self, n: int) -> QuadInt:
        if n < 0:
            raise ValueError("Negative powers are not integral")
        result = self.field.one()
        base = self
        while n > 0:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def conj(self) -> QuadInt:
        return QuadInt(self.field, self.x + self.field.q * self.y, -self.y)

    def trace(self) -> int:
        return 2 * self.x + self.field.q * self.y

    def norm(self) -> int:
        return self.x * self.x + self.field.q * self.x * self.y - self.field.p * self.y * self.y

    def embed(self) -> complex:
        return self.x + self.y * self.field.omega

    def is_unit(self) -> bool:
        return self.norm() == 1

    def exact_div(self, other) -> QuadInt | None:
        """
        self / other if the quotient lies in O_K, else None
        """
        other = self._coerce(other)
        n = other.norm()
        if n == 0:
            raise ZeroDivisionError("Division by zero in O_K")
        num = self * other.conj()
        if num.x % n or num.y % n:
            return None
        return QuadInt(self.field, num.x // n, num.y // n)

    def unit_inverse(self) -> QuadInt:
        if not self.is_unit():
            raise ValueError(f"{self} is not a unit")
        return self.conj()


class KNum:
    """
    Element num/den of K with num in O_K and den a positive integer, kept reduced
    """
    __slots__ = ('num', 'den')

    def __init__(self, num: QuadInt, den: int = 1) -> None:
        den = int(den)
        if den == 0:
            raise ZeroDivisionError("KNum with zero denominator")
        if den < 0:
            num, den = -num, -den
        g = math.gcd(math.gcd(num.x, num.y), den)
        if g > 1:
            num = QuadInt(num.field, num.x // g, num.y // g)
            den //= g
        self.num = num
        self.den = den

    @classmethod
    def ratio(cls, a: QuadInt, c: QuadInt) -> KNum:
        n = c.norm()
        if n == 0:
            raise ZeroDivisionError("KNum ratio with zero denominator")
        return cls(a * c.conj(), n)

    @property
    def field(self) -> FieldSpec:
        return self.num.field

    def __repr__(self) -> str:
        return f"KNum({self.num!r}, {self.den})"

    def __eq__(self, other) -> bool:
        if isinstance(other, KNum):
            return self.num == other.num and self.den == other.den
        if isinstance(other, (QuadInt, int)):
            return self == KNum(other if isinstance(other, QuadInt) else QuadInt(self.field, other))
        return False

    def __hash__(self) -> int:
        return hash((self.num, self.den))

    def _coerce(self, other) -> KNum:
        if isinstance(other, KNum):
            return other
        if isinstance(other, QuadInt):
            return KNum(other)
        if isinstance(other, (int, np.integer)):
            return KNum(QuadInt(self.field, int(other)))
        return NotImplemented

    def __add__(self, other) -> KNum:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return KNum(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self) -> KNum:
        return KNum(-self.num, self.den)

    def __sub__(self, other) -> KNum:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> KNum:
        return (-self) + other

    def __mul__(self, other) -> KNum:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return KNum(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other) -> KNum:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        n = other.num.norm()
        if n == 0:
            raise ZeroDivisionError("KNum division by zero")
        return KNum(self.num * other.num.conj() * other.den, self.den * n)

    def conj(self) -> KNum:
        return KNum(self.num.conj(), self.den)

    def trace(self) -> Fraction:
        return Fraction(self.num.trace(), self.den)

    def norm(self) -> Fraction:
        return Fraction(self.num.norm(), self.den * self.den)

    def real(self) -> Fraction:
        return self.trace() / 2

    def imag_sqrt_coeff(self) -> Fraction:
        # Im = imag_sqrt_coeff * sqrt(|disc|); Im(omega) = sqrt(|disc|)/2 in both bases
        return Fraction(self.num.y, 2 * self.den)

    def imag(self) -> float:
        return float(self.imag_sqrt_coeff()) * self.field.sqrt_abs_disc

    def embed(self) -> complex:
        return complex(float(self.real()), self.imag())

    def is_zero(self) -> bool:
        return not self.num

    def is_integral(self) -> bool:
        return self.den == 1


class ZLattice2:
    """
    Full-rank Z-sublattice of O_K in column Hermite normal form [[h11, h12], [0, h22]] over the basis (1, omega),
    basis vectors h11 and h12 + h22*omega, 0 <= h12 < h11. The zero lattice has hnf None.
    """

    def __init__(self, field: FieldSpec, hnf=None) -> None:
        self.field = field
        self.hnf = hnf

    def __repr__(self) -> str:
        return f"ZLattice2(D={self.field.disc}, {self.hnf})"

    def __eq__(self, other) -> bool:
        return isinstance(other, ZLattice2) and self.field is other.field and self.hnf == other.hnf

    def __hash__(self) -> int:
        return hash((self.field.disc, self.hnf))

    @classmethod
    def from_vectors(cls, field: FieldSpec, vectors) -> ZLattice2:
        h11 = 0
        pivot = None
        for vec in vectors:
            x, y = (vec.x, vec.y) if isinstance(vec, QuadInt) else (int(vec[0]), int(vec[1]))
            if y == 0:
                h11 = math.gcd(h11, x)
            elif pivot is None:
                pivot = (x, y) if y > 0 else (-x, -y)
            else:
                px, py = pivot
                g, s, t = ext_gcd(py, y)
                pivot = (s * px + t * x, g)
                h11 = math.gcd(h11, (y // g) * px - (py // g) * x)

        if pivot is None and h11 == 0:
            return cls(field, None)
        if pivot is None or h11 == 0:
            raise ZeroLatticeException("Vectors span a lattice of rank 1, which has infinite index in O_K")

        return cls(field, (h11, pivot[0] % h11, pivot[1]))

    @classmethod
    def from_hnf(cls, field: FieldSpec, h11, h12, h22) -> ZLattice2:
        return cls.from_vectors(field, [(h11, 0), (h12, h22)])

    def is_zero(self) -> bool:
        return self.hnf is None

    def _require_nonzero(self):
        if self.hnf is None:
            raise ZeroLatticeException("Operation requires a lattice of finite index")

    def index(self) -> int:
        self._require_nonzero()
        return self.hnf[0] * self.hnf[2]

    def basis(self) -> list[QuadInt]:
        self._require_nonzero()
        h11, h12, h22 = self.hnf
        return [QuadInt(self.field, h11, 0), QuadInt(self.field, h12, h22)]

    def contains(self, z: QuadInt) -> bool:
        if self.hnf is None:
            return not z
        h11, h12, h22 = self.hnf
        if z.y % h22:
            return False
        return (z.x - (z.y // h22) * h12) % h11 == 0

    def __contains__(self, z: QuadInt) -> bool:
        return self.contains(z)

    def reduce(self, z: QuadInt) -> QuadInt:
        """
        Representative of z modulo the lattice with basis coordinates in [0, 1)
        """
        self._require_nonzero()
        h11, h12, h22 = self.hnf
        k = z.y // h22
        x = z.x - k * h12
        return QuadInt(self.field, x % h11, z.y - k * h22)

    def representatives(self) -> list[QuadInt]:
        self._require_nonzero()
        h11, _, h22 = self.hnf
        return [QuadInt(self.field, x, y) for y in range(h22) for x in range(h11)]

    def is_omega_stable(self) -> bool:
        if self.hnf is None:
            return True
        w = self.field.gen()
        return all(self.contains(b * w) for b in self.basis())

    def is_conj_stable(self) -> bool:
        if self.hnf is None:
            return True
        return all(self.contains(b.conj()) for b in self.basis())

    def scaled(self, c: QuadInt) -> ZLattice2:
        if self.hnf is None or not c:
            return ZLattice2(self.field, None)
        return ZLattice2.from_vectors(self.field, [c * b for b in self.basis()])


def ideal_span(gens) -> ZLattice2:
    gens = list(gens)
    if not gens:
        raise ValueError("ideal_span needs at least one generator")
    field = gens[0].field
    w = field.gen()
    vectors = []
    for g in gens:
        if g.field is not field:
            raise FieldMismatchException(f"Mixed fields {field.disc} and {g.field.disc}")
        vectors.append(g)
        vectors.append(g * w)
    return ZLattice2.from_vectors(field, vectors)


def is_coprime_triple(a: QuadInt, alpha: QuadInt, c: QuadInt) -> bool:
    span = ideal_span([a, alpha, c])
    return not span.is_zero() and span.index() == 1


def reduce_mod_sublattice(z: QuadInt, lattice: ZLattice2) -> QuadInt:
    return lattice.reduce(z)


def imaginary_generator(field: FieldSpec) -> QuadInt:
    if field.q == 0:
        return QuadInt(field, 0, 1)
    return QuadInt(field, -1, 2)


def norms(field: FieldSpec, xs, ys):
    xs = np.asarray(xs, dtype=np.int64)
    ys = np.asarray(ys, dtype=np.int64)
    return xs * xs + field.q * xs * ys - field.p * ys * ys
