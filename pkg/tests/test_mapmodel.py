import pytest
from hypothesis import given, strategies as st

from collatz_ergodic.mapmodel import (BUILTIN_MAPS, COLLATZ_S, COLLATZ_T, THREE_N_MINUS_ONE, BranchMap,
                                      MapSpecError, load_map, parse_mapspec, require_valid, validate)


def test_builtins_valid():
    for m in BUILTIN_MAPS.values():
        assert validate(m) == []


def test_bad_divisibility_reported_at_residue_1():
    bad = BranchMap(2, ((1, 0, 2), (3, 1, 4)))
    v = validate(bad)
    assert v and {x.residue for x in v} == {1}
    with pytest.raises(MapSpecError):
        require_valid(bad)


def test_three_n_minus_one_valid_by_brute_force():
    assert validate(THREE_N_MINUS_ONE) == []
    for n in range(1, 1001):
        a, b, d = THREE_N_MINUS_ONE.branches[n % 2]
        assert (a * n + b) % d == 0 and (a * n + b) // d >= 1


def test_nonpositive_image_rejected():
    # n -> (n - 3)/1 sends 1 to -2
    v = validate(BranchMap(2, ((1, 0, 2), (1, -3, 1))))
    assert any(x.residue == 1 for x in v)


@pytest.mark.parametrize("text,expected", [
    ("mod 2 { 0: (1n+0)/2; 1: (3n+1)/2 }", COLLATZ_T),
    ("mod 2 { 0: (1n+0)/2; 1: (3n+1)/1 }", COLLATZ_S),
    ("mod 2 {\n  0: (1n+0)/2;\n  1: (3n-1)/2\n}", THREE_N_MINUS_ONE),
])
def test_parse_known(text, expected):
    assert parse_mapspec(text) == expected


def test_missing_residue():
    with pytest.raises(MapSpecError, match="missing residue 1"):
        parse_mapspec("mod 2 { 0: (1n+0)/2 }")


@pytest.mark.parametrize("text", [
    "mod 2 { 0: (1n+0)/2; 0: (1n+0)/2; 1: (3n+1)/2 }",
    "mod 2 { 0: (1n+0)/2; 2: (3n+1)/2 }",
    "mod 2 { 0: (1n+0)/0; 1: (3n+1)/2 }",
    "mod 2 { 0: (1n+0)/2; 1: (3n+1)/4 }",
    "mod 2 0: (1n+0)/2",
    "",
])
def test_malformed(text):
    with pytest.raises(MapSpecError):
        parse_mapspec(text)


def test_error_location():
    with pytest.raises(MapSpecError) as ei:
        parse_mapspec("mod 2 {\n 0: (1n+0)/2;\n 1: (3x+1)/2 }")
    assert ei.value.line == 3


def test_name_ignored_by_equality():
    assert parse_mapspec(COLLATZ_T.render(), name="other") == COLLATZ_T


def test_load_map(tmp_path):
    assert load_map("collatz-t") is COLLATZ_T
    assert load_map("3n-minus-1.spec") == THREE_N_MINUS_ONE
    p = tmp_path / "s.spec"
    p.write_text(COLLATZ_S.render())
    assert load_map(str(p)) == COLLATZ_S
    with pytest.raises(FileNotFoundError):
        load_map("no-such-map")


@st.composite
def valid_maps(draw):
    m = draw(st.integers(2, 5))
    branches = []
    for r in range(m):
        d = draw(st.sampled_from([1, m]))
        a = draw(st.integers(1, 7)) * (m if d == m else 1)
        # choose b so that a*r + b is divisible by d and images stay positive
        b = (-a * r) % d + d * draw(st.integers(0, 3))
        branches.append((a, b, d))
    return BranchMap(m, tuple(branches))


@given(valid_maps())
def test_render_parse_round_trip(m):
    assert validate(m) == []
    assert parse_mapspec(m.render()) == m


@given(valid_maps(), st.integers(1, 10**6))
def test_valid_maps_send_naturals_to_naturals(m, n):
    y = m(n)
    a, b, d = m.branches[n % m.modulus]
    assert y * d == a * n + b and y >= 1
