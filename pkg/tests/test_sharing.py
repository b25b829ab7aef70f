from __future__ import annotations

from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qkdn_trust.bits import BitString
from qkdn_trust.rng import Rng, ScriptedRng
from qkdn_trust.sharing import (
    FieldElement,
    Polynomial,
    Share,
    chunk_secret,
    concat_join,
    concat_split,
    decode_field_values,
    encode_field_values,
    is_prime,
    lagrange_at_zero,
    shamir_reconstruct,
    shamir_split,
    unchunk_secret,
    xor_combine,
    xor_split,
)

B = BitString.from_bits
PRIMES = [2, 3, 5, 7, 11, 13, 17, 31, 101]


def naive_interpolate(points, q):
    """Oracle: solve the Vandermonde system by Gauss-Jordan mod q, return the constant term."""
    n = len(points)
    rows = [[pow(x, j, q) for j in range(n)] + [y] for x, y in points]
    for col in range(n):
        piv = next(r for r in range(col, n) if rows[r][col])
        rows[col], rows[piv] = rows[piv], rows[col]
        inv = pow(rows[col][col], q - 2, q)
        rows[col] = [v * inv % q for v in rows[col]]
        for r in range(n):
            if r != col and rows[r][col]:
                f = rows[r][col]
                rows[r] = [(a - f * b) % q for a, b in zip(rows[r], rows[col])]
    return rows[0][n]


def shares_of(pairs, q):
    return [Share("shamir", i, FieldElement(y, q)) for i, y in pairs]


class TestPrimes:
    def test_small_primes(self):
        assert [n for n in range(30) if is_prime(n)] == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]

    def test_field_element_needs_prime_modulus(self):
        with pytest.raises(ValueError):
            FieldElement(1, 8)
        with pytest.raises(ValueError):
            FieldElement(7, 7)


class TestShamir:
    def test_worked_example(self):
        shares = shamir_split(FieldElement(3, 7), 2, 3, ScriptedRng(ints=[2]))
        assert [(s.index, s.payload.value) for s in shares] == [(1, 5), (2, 0), (3, 2)]

    def test_t1_copies_secret(self):
        shares = shamir_split(FieldElement(4, 5), 1, 3, Rng(0).stream("x"))
        assert [s.payload.value for s in shares] == [4, 4, 4]

    def test_indices(self):
        shares = shamir_split(FieldElement(9, 11), 3, 5, Rng(1).stream("x"))
        assert [s.index for s in shares] == [1, 2, 3, 4, 5]

    @pytest.mark.parametrize("pairs", [[(1, 5), (3, 2)], [(1, 5), (2, 0)], [(2, 0), (3, 2)]])
    def test_reconstruct_examples(self, pairs):
        assert shamir_reconstruct(shares_of(pairs, 7), 2).value == 3

    def test_single_share_t1(self):
        assert shamir_reconstruct(shares_of([(4, 6)], 7), 1).value == 6

    @pytest.mark.parametrize("t,k,q", [(3, 2, 7), (0, 2, 7), (2, 7, 7), (2, 9, 7)])
    def test_split_rejects(self, t, k, q):
        with pytest.raises(ValueError):
            shamir_split(FieldElement(1, q), t, k, Rng(0).stream("x"))

    def test_split_rejects_composite_modulus(self):
        with pytest.raises(ValueError):
            shamir_split(FieldElement(1, 9), 2, 3, Rng(0).stream("x"))

    def test_reconstruct_rejects(self):
        with pytest.raises(ValueError, match="duplicate"):
            shamir_reconstruct(shares_of([(1, 5), (1, 5)], 7), 2)
        with pytest.raises(ValueError, match="need 2"):
            shamir_reconstruct(shares_of([(1, 5)], 7), 2)
        with pytest.raises(ValueError, match="moduli"):
            shamir_reconstruct(shares_of([(1, 2)], 5) + shares_of([(2, 3)], 7), 2)
        with pytest.raises(ValueError):
            shamir_reconstruct([Share("xor", 1, B("01"))], 1)

    def test_nonzero_leading_redraws(self):
        poly_rng = ScriptedRng(ints=[0, 0, 4])
        shares = shamir_split(FieldElement(1, 5), 2, 2, poly_rng, nonzero_leading=True)
        assert [s.payload.value for s in shares] == [0, 4]  # f(x) = 4x + 1

    def test_polynomial_horner(self):
        f = Polynomial((3, 2), 7)
        assert [f(x) for x in range(1, 4)] == [5, 0, 2]

    @settings(max_examples=60, deadline=None)
    @given(q=st.sampled_from(PRIMES[2:]), data=st.data())
    def test_any_t_subset_reconstructs(self, q, data):
        k = data.draw(st.integers(1, min(6, q - 1)))
        t = data.draw(st.integers(1, k))
        secret = data.draw(st.integers(0, q - 1))
        seed = data.draw(st.integers(0, 2**32))
        shares = shamir_split(FieldElement(secret, q), t, k, Rng(seed).stream("s"))
        for subset in combinations(shares, t):
            assert shamir_reconstruct(list(subset), t).value == secret

    @settings(max_examples=60, deadline=None)
    @given(q=st.sampled_from(PRIMES[1:]), data=st.data())
    def test_lagrange_matches_linear_solve(self, q, data):
        n = data.draw(st.integers(1, min(5, q - 1)))
        xs = data.draw(st.lists(st.integers(1, q - 1), min_size=n, max_size=n, unique=True))
        ys = data.draw(st.lists(st.integers(0, q - 1), min_size=n, max_size=n))
        pts = list(zip(xs, ys))
        assert lagrange_at_zero(pts, q) == naive_interpolate(pts, q)


class TestXor:
    def test_forced_fragment(self):
        assert xor_split(B("1011"), 2, ScriptedRng(bits=["0110"])) == [B("0110"), B("1101")]

    def test_zero_fragment(self):
        s = B("100111")
        assert xor_split(s, 2, ScriptedRng(bits=["000000"])) == [B("000000"), s]

    def test_combine_examples(self):
        assert xor_combine([B("0101"), B("0101")]) == B("0000")
        assert xor_combine([B("1100"), B("0101"), B("1010")]) == B("0011")

    def test_rejects(self):
        with pytest.raises(ValueError):
            xor_split(B("1"), 1, Rng(0).stream("x"))
        with pytest.raises(ValueError):
            xor_split(BitString(0, 0), 3, Rng(0).stream("x"))
        with pytest.raises(ValueError):
            xor_combine([B("01"), B("011")])

    @given(value=st.integers(0, 2**40 - 1), k=st.integers(2, 8), seed=st.integers(0, 2**32))
    def test_round_trip(self, value, k, seed):
        s = BitString(value, 40)
        frags = xor_split(s, k, Rng(seed).stream("f"))
        assert len(frags) == k and xor_combine(frags) == s


class TestConcat:
    def test_split(self):
        assert concat_split(B("10110100")) == (B("1011"), B("0100"))

    def test_join(self):
        assert concat_join(B("0100"), B("0111")) == B("01000111")

    def test_rejects(self):
        with pytest.raises(ValueError):
            concat_split(B("101"))
        with pytest.raises(ValueError):
            concat_join(BitString(0, 0), B("1"))

    @given(st.integers(1, 32).flatmap(lambda n: st.tuples(st.just(2 * n), st.integers(0, 2 ** (2 * n) - 1))))
    def test_round_trip(self, sized):
        n, v = sized
        s = BitString(v, n)
        assert concat_join(*concat_split(s)) == s


class TestChunking:
    @given(q=st.sampled_from([5, 7, 11, 13, 17, 257]), value=st.integers(0, 2**20 - 1), n=st.integers(1, 20))
    def test_chunk_round_trip(self, q, value, n):
        s = BitString(value & ((1 << n) - 1), n)
        chunks = chunk_secret(s, q)
        assert all(c.value < q for c in chunks)
        assert unchunk_secret(chunks, n) == s

    def test_encode_decode(self):
        enc = encode_field_values([12, 0, 7], 13)
        assert enc.length == 12
        assert decode_field_values(enc, 13) == [12, 0, 7]
