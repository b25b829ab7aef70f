"""Secret splitting primitives: Shamir over a prime field, XOR and halves."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache, reduce
from operator import xor
from typing import Sequence

from .bits import BitString
from .rng import RandomSource

MAX_MODULUS = 2**31


@lru_cache(maxsize=256)
def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def check_modulus(q: int) -> None:
    if not isinstance(q, int) or q > MAX_MODULUS or not is_prime(q):
        raise ValueError(f"modulus must be a prime <= 2^31, got {q!r}")


@dataclass(frozen=True, slots=True)
class FieldElement:
    value: int
    modulus: int

    def __post_init__(self) -> None:
        check_modulus(self.modulus)
        if not 0 <= self.value < self.modulus:
            raise ValueError(f"{self.value} is not in Z_{self.modulus}")


@dataclass(frozen=True)
class Polynomial:
    """Coefficient ``i`` multiplies x^i; coefficient 0 is the shared secret."""

    coefficients: tuple[int, ...]
    modulus: int

    def __post_init__(self) -> None:
        check_modulus(self.modulus)
        if not self.coefficients:
            raise ValueError("polynomial needs at least the constant term")
        if any(not 0 <= c < self.modulus for c in self.coefficients):
            raise ValueError("coefficient outside the field")

    @property
    def threshold(self) -> int:
        return len(self.coefficients)

    def __call__(self, x: int) -> int:
        acc = 0
        for c in reversed(self.coefficients):
            acc = (acc * x + c) % self.modulus
        return acc


@dataclass(frozen=True)
class Share:
    """One piece of a split secret.

    ``payload`` is a FieldElement for ``shamir`` and a BitString for ``xor``
    and ``concat``. ``index`` is the Shamir x-coordinate or the 1-based
    fragment position.
    """

    scheme: str
    index: int
    payload: FieldElement | BitString

    def __post_init__(self) -> None:
        if self.scheme not in ("shamir", "xor", "concat"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.index < 1:
            raise ValueError("share index must be positive")
        expected = FieldElement if self.scheme == "shamir" else BitString
        if not isinstance(self.payload, expected):
            raise TypeError(f"{self.scheme} share needs a {expected.__name__} payload")


def random_polynomial(
    secret: FieldElement, t: int, rng: RandomSource, *, nonzero_leading: bool = False
) -> Polynomial:
    """Degree <= t-1 polynomial with constant term ``secret``.

    Coefficients are uniform over Z_q. With ``nonzero_leading`` the top
    coefficient is redrawn until nonzero, which makes the degree exactly t-1
    but removes one candidate secret from the view of t-1 shareholders.
    """
    q = secret.modulus
    coeffs = [secret.value]
    for i in range(1, t):
        a = rng.below(q)
        while nonzero_leading and i == t - 1 and a == 0:
            a = rng.below(q)
        coeffs.append(a)
    return Polynomial(tuple(coeffs), q)


def shamir_split(
    secret: FieldElement, t: int, k: int, rng: RandomSource, *, nonzero_leading: bool = False
) -> list[Share]:
    """Split ``secret`` into shares (i, f(i)) for i = 1..k, any t of which reconstruct it."""
    q = secret.modulus
    if t < 1:
        raise ValueError("threshold must be at least 1")
    if t > k:
        raise ValueError(f"threshold {t} exceeds share count {k}")
    if k >= q:
        raise ValueError(f"{k} shares need {k} distinct nonzero points in Z_{q}")
    poly = random_polynomial(secret, t, rng, nonzero_leading=nonzero_leading)
    return [Share("shamir", i, FieldElement(poly(i), q)) for i in range(1, k + 1)]


def lagrange_at_zero(points: Sequence[tuple[int, int]], q: int) -> int:
    """g(0) for the unique degree < len(points) polynomial through ``points``."""
    total = 0
    for i, (xi, yi) in enumerate(points):
        num, den = 1, 1
        for j, (xj, _) in enumerate(points):
            if j != i:
                num = num * xj % q
                den = den * (xj - xi) % q
        total = (total + yi * num * pow(den, -1, q)) % q
    return total


def shamir_reconstruct(shares: Sequence[Share], t: int) -> FieldElement:
    """Interpolate at zero using the t shares with the lowest indices."""
    if any(s.scheme != "shamir" for s in shares):
        raise ValueError("only shamir shares can be interpolated")
    if len(shares) < t:
        raise ValueError(f"need {t} shares, got {len(shares)}")
    moduli = {s.payload.modulus for s in shares}
    if len(moduli) != 1:
        raise ValueError(f"shares mix moduli {sorted(moduli)}")
    indices = [s.index for s in shares]
    if len(set(indices)) != len(indices):
        raise ValueError("duplicate share indices")
    (q,) = moduli
    chosen = sorted(shares, key=lambda s: s.index)[:t]
    return FieldElement(lagrange_at_zero([(s.index, s.payload.value) for s in chosen], q), q)


def xor_split(secret: BitString, k: int, rng: RandomSource) -> list[BitString]:
    if k < 2:
        raise ValueError("xor splitting needs k >= 2")
    if secret.length == 0:
        raise ValueError("cannot split an empty secret")
    fragments = [rng.bits(secret.length) for _ in range(k - 1)]
    fragments.append(reduce(xor, fragments, secret))
    return fragments


def xor_combine(fragments: Sequence[BitString]) -> BitString:
    if not fragments:
        raise ValueError("nothing to combine")
    return reduce(xor, fragments[1:], fragments[0])


def concat_split(value: BitString) -> tuple[BitString, BitString]:
    if value.length == 0 or value.length % 2:
        raise ValueError(f"need a nonempty even-length string, got {value.length} bits")
    half = value.length // 2
    return value.slice(0, half), value.slice(half, value.length)


def concat_join(left: BitString, right: BitString) -> BitString:
    if left.length == 0 or right.length == 0:
        raise ValueError("cannot join an empty half")
    return left + right


# Bit-string secrets are carried through Shamir one field element at a time.


def chunk_width(q: int) -> int:
    """Secret bits packed per field element; 2^w <= q so every chunk fits."""
    return q.bit_length() - 1


def share_width(q: int) -> int:
    """Bits needed to encode any element of Z_q."""
    return (q - 1).bit_length()


def chunk_bounds(length: int, q: int) -> list[tuple[int, int]]:
    w = chunk_width(q)
    if w < 1:
        raise ValueError(f"modulus {q} too small to carry a bit")
    return [(lo, min(lo + w, length)) for lo in range(0, length, w)]


def chunk_secret(secret: BitString, q: int) -> list[FieldElement]:
    return [FieldElement(secret.slice(lo, hi).value, q) for lo, hi in chunk_bounds(secret.length, q)]


def unchunk_secret(chunks: Sequence[FieldElement], length: int) -> BitString:
    q = chunks[0].modulus
    out = BitString(0, 0)
    for (lo, hi), chunk in zip(chunk_bounds(length, q), chunks, strict=True):
        out = out + BitString(chunk.value, hi - lo)
    return out


def encode_field_values(values: Sequence[int], q: int) -> BitString:
    width = share_width(q)
    out = BitString(0, 0)
    for v in values:
        out = out + BitString(v, width)
    return out


def decode_field_values(encoded: BitString, q: int) -> list[int]:
    width = share_width(q)
    if encoded.length % width:
        raise ValueError("encoded length is not a multiple of the field width")
    return [encoded.slice(i, i + width).value for i in range(0, encoded.length, width)]
