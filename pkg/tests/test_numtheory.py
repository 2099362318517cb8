import math

import pytest
from hypothesis import given, strategies as st

from hadfam.errors import DomainError
from hadfam.numtheory import (
    ParamKey,
    canonical_key,
    factorize,
    gcd,
    is_prime,
    is_prime_power,
    mod_inverse,
    num_params,
    param_keys,
    particular_steps,
    split_p1_p2_squared,
)


def test_gcd_convention():
    assert gcd(0, 12) == 12
    assert gcd(8, 12) == 4
    with pytest.raises(DomainError):
        gcd(0, 0)


def test_mod_inverse():
    assert mod_inverse(3, 7) == 5
    with pytest.raises(DomainError):
        mod_inverse(2, 4)


@given(st.integers(2, 60), st.data())
def test_particular_steps_lands_on_free_cell(N, data):
    i = data.draw(st.integers(0, N - 1))
    j = data.draw(st.integers(0, N - 1).filter(lambda j: j != i))
    m = particular_steps(i, j, N)
    step = (i - j) % N
    g = math.gcd(step, N)
    assert 0 <= m < N // g
    assert (i + m * step) % N == i % g


def test_particular_steps_zero_on_free_cells():
    N = 12
    for n in range(1, N):
        g = math.gcd(n, N)
        for c in range(g):
            # cell (c, c - n) sits on diagonal -n; step i - j = n
            assert particular_steps(c, (c - n) % N, N) == 0


def test_particular_steps_rejects_main_diagonal():
    with pytest.raises(DomainError):
        particular_steps(3, 3, 6)


def test_param_keys_count_and_order():
    for N in range(1, 40):
        keys = param_keys(N)
        assert len(keys) == num_params(N) == sum(math.gcd(n, N) for n in range(N))
        assert list(keys) == sorted(keys)
    assert str(ParamKey(3, 1)) == "x_1,3"


@given(st.integers(1, 40), st.data())
def test_canonical_key_constant_along_strings(N, data):
    i = data.draw(st.integers(0, N - 1))
    n = data.draw(st.integers(0, N - 1))
    k = canonical_key(i, (i + n) % N, N)
    g = math.gcd(n, N)
    for t in range(N // g):
        i2 = (i + t * g) % N
        assert canonical_key(i2, (i2 + n) % N, N) == k


def test_factorize_and_predicates():
    assert factorize(360) == {2: 3, 3: 2, 5: 1}
    assert is_prime(97) and not is_prime(91)
    assert is_prime_power(27) and not is_prime_power(12)
    assert split_p1_p2_squared(12) == (3, 2)
    assert split_p1_p2_squared(18) == (2, 3)
    assert split_p1_p2_squared(20) == (5, 2)
    assert split_p1_p2_squared(30) is None
    assert split_p1_p2_squared(8) is None
