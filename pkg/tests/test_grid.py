import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from rdsolve.grid import (
    NEUMANN,
    PERIODIC,
    Field,
    GridSpec,
    SystemField,
    coords,
    l2_norm,
    linear_index,
    load_binary,
    load_csv,
    sample,
    save_binary,
    save_csv,
    total_mass,
    unindex,
)


def test_spacing_periodic_excludes_duplicate_node():
    spec = GridSpec(1.0, 128, PERIODIC)
    assert spec.h_x * spec.n_x == pytest.approx(1.0)


def test_spacing_neumann_places_nodes_on_boundary():
    spec = GridSpec(1.0, 3, NEUMANN)
    assert spec.h_x == pytest.approx(0.5)
    assert spec.h_x * (spec.n_x - 1) == pytest.approx(1.0)


@pytest.mark.parametrize("bad", [dict(n_x=1), dict(side_length=0.0), dict(bc="dirichlet")])
def test_invalid_spec_rejected(bad):
    kwargs = dict(side_length=1.0, n_x=8, bc=PERIODIC)
    kwargs.update(bad)
    with pytest.raises(ValueError):
        GridSpec(**kwargs)


def test_linear_index_convention():
    spec = GridSpec(1.0, 100, PERIODIC)
    assert linear_index(spec, 0, 0) == 0
    assert linear_index(spec, 1, 0) == 100


def test_linear_index_roundtrip_exhaustive():
    spec = GridSpec(1.0, 7, PERIODIC)
    seen = set()
    for i in range(7):
        for j in range(7):
            l = linear_index(spec, i, j)
            assert unindex(spec, l) == (i, j)
            seen.add(l)
    assert seen == set(range(49))


def test_sample_constant():
    spec = GridSpec(1.0, 16, PERIODIC)
    f = sample(spec, lambda x, y: 3.5)
    assert np.all(f.data == 3.5)


def test_sample_ramp_neumann():
    spec = GridSpec(1.0, 3, NEUMANN)
    f = sample(spec, lambda x, y: x)
    assert np.allclose(f.grid()[0], [0.0, 0.5, 1.0])
    assert np.allclose(f.grid()[2], [0.0, 0.5, 1.0])


def test_sample_respects_origin():
    spec = GridSpec(0.5, 5, PERIODIC, origin=(-0.25, -0.25))
    f = sample(spec, lambda x, y: x + 10 * y)
    assert f.grid()[0, 0] == pytest.approx(-0.25 + 10 * -0.25)
    x, y = coords(spec)
    assert x[0, -1] == pytest.approx(-0.25 + 4 * spec.h_x)


def test_sample_rejects_nonfinite():
    spec = GridSpec(1.0, 4, PERIODIC)
    with pytest.raises(ValueError, match=r"\(i=0, j=0\)"):
        sample(spec, lambda x, y: np.where((x == 0) & (y == 0), np.nan, 1.0))


def test_l2_norm_examples():
    spec = GridSpec(1.0, 10, PERIODIC)
    assert l2_norm(Field(np.zeros(100), spec)) == 0.0
    one_hot = np.zeros(100)
    one_hot[37] = 3.0
    assert l2_norm(Field(one_hot, spec)) == 3.0
    assert l2_norm(Field(np.ones(100), spec)) == pytest.approx(10.0)


def test_total_mass_examples():
    spec = GridSpec(1.0, 128, PERIODIC)
    assert total_mass(Field(np.zeros(128 * 128), spec)) == 0.0
    assert total_mass(Field(np.ones(128 * 128), spec)) == pytest.approx(1.0)


def test_total_mass_matches_direct_sum():
    rng = np.random.default_rng(3)
    spec = GridSpec(2.0, 9, NEUMANN)
    v = rng.standard_normal(81)
    brute = sum(spec.h_x ** 2 * x for x in v)
    assert total_mass(Field(v, spec)) == pytest.approx(brute, rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(
    arrays(float, 36, elements=st.floats(-1e6, 1e6)),
    arrays(float, 36, elements=st.floats(-1e6, 1e6)),
)
def test_l2_norm_triangle_inequality(a, b):
    spec = GridSpec(1.0, 6, PERIODIC)
    fa, fb = Field(a, spec), Field(b, spec)
    fab = Field(a + b, spec)
    assert l2_norm(fab) <= l2_norm(fa) + l2_norm(fb) + 1e-9


def test_field_length_validated():
    spec = GridSpec(1.0, 4, PERIODIC)
    with pytest.raises(ValueError, match="length"):
        Field(np.zeros(15), spec)


def test_system_field_requires_shared_spec():
    a = Field(np.zeros(16), GridSpec(1.0, 4, PERIODIC))
    b = Field(np.zeros(16), GridSpec(2.0, 4, PERIODIC))
    with pytest.raises(ValueError):
        SystemField([a, b])


def test_system_stack_roundtrip():
    spec = GridSpec(1.0, 4, NEUMANN)
    rng = np.random.default_rng(0)
    values = rng.standard_normal((2, 4, 4))
    sf = SystemField.from_stack(spec, values)
    assert sf.n_components == 2
    assert np.array_equal(sf.stack(), values)


def test_csv_roundtrip(tmp_path):
    spec = GridSpec(1.0, 5, PERIODIC)
    rng = np.random.default_rng(1)
    f = Field(rng.standard_normal(25), spec)
    p = tmp_path / "f.csv"
    save_csv(p, f)
    g = load_csv(p, spec)
    assert np.allclose(f.data, g.data, rtol=0, atol=0)
    with open(p) as fh:
        first = fh.readline()
    assert first.count(",") == 4


def test_binary_roundtrip(tmp_path):
    spec = GridSpec(2.0, 6, NEUMANN)
    rng = np.random.default_rng(2)
    sf = SystemField.from_stack(spec, rng.standard_normal((2, 6, 6)))
    p = tmp_path / "f.bin"
    save_binary(p, sf)
    assert p.stat().st_size == 16 + 2 * 36 * 8
    with open(p, "rb") as fh:
        assert fh.read(4) == b"RDF1"
    back = load_binary(p, spec)
    assert back.n_components == 2
    assert np.array_equal(back.stack(), sf.stack())


def test_binary_rejects_wrong_grid(tmp_path):
    spec = GridSpec(1.0, 4, PERIODIC)
    sf = SystemField.from_stack(spec, np.zeros((1, 4, 4)))
    p = tmp_path / "f.bin"
    save_binary(p, sf)
    with pytest.raises(ValueError, match="n_x"):
        load_binary(p, GridSpec(1.0, 8, PERIODIC))


@settings(max_examples=25, deadline=None)
@given(arrays(float, (3, 3), elements=st.floats(-1e12, 1e12, allow_nan=False)))
def test_binary_roundtrip_exact_bits(tmp_path_factory, values):
    spec = GridSpec(1.0, 3, NEUMANN)
    sf = SystemField.from_stack(spec, values[None])
    p = tmp_path_factory.mktemp("bits") / "f.bin"
    save_binary(p, sf)
    back = load_binary(p, spec)
    assert back.components[0].data.tobytes() == sf.components[0].data.tobytes()
