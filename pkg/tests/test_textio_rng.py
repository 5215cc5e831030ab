import numpy as np
import pytest

from markovsa.errors import DimensionError
from markovsa.rng import RngStream, as_stream
from markovsa.textio import (
    format_cmdp,
    format_matrix,
    format_mdp,
    parse_cmdp,
    parse_matrix,
    parse_mdp,
    read_matrix,
    read_observations,
    write_matrix,
    write_observations,
)


def test_matrix_round_trip(tmp_path):
    A = np.array([[0.1, 1 / 3], [2.5e-17, -4.0]])
    assert np.array_equal(parse_matrix(format_matrix(A)), A)
    write_matrix(tmp_path / "a.txt", A)
    assert np.array_equal(read_matrix(tmp_path / "a.txt"), A)


def test_matrix_comments_and_errors():
    assert parse_matrix("# header\n1 2  # shape\n3 4\n").tolist() == [[3.0, 4.0]]
    with pytest.raises(ValueError, match="end of input"):
        parse_matrix("2 2\n1 2 3\n")
    with pytest.raises(ValueError, match="trailing"):
        parse_matrix("1 1\n1 2\n")
    with pytest.raises(ValueError, match="expected integer"):
        parse_matrix("a 1\n1\n")


def test_mdp_and_cmdp_round_trip():
    P = np.stack([np.eye(2), np.full((2, 2), 0.5)])
    c = np.array([[1.0, 2.0], [3.0, 4.0]])
    P2, c2 = parse_mdp(format_mdp(P, c))
    assert np.array_equal(P2, P) and np.array_equal(c2, c)
    betas = np.stack([np.eye(2), np.ones((2, 2))])
    out = parse_cmdp(format_cmdp(P, c, betas, [0.3, 0.9]))
    assert np.array_equal(out[2], betas) and out[3].tolist() == [0.3, 0.9]


def test_mdp_shape_errors():
    with pytest.raises(DimensionError, match="transition matrix 1"):
        parse_mdp("2 2\n2 2\n1 0\n0 1\n1 2\n1\n1 1\n1 1\n")
    with pytest.raises(DimensionError, match="cost matrix"):
        parse_mdp("1 1\n1 1\n1\n1 2\n1 2\n")


def test_observations_round_trip(tmp_path):
    y = np.array([0.1, -2.0, 1e-300, 7.25])
    write_observations(tmp_path / "y.txt", y)
    assert np.array_equal(read_observations(tmp_path / "y.txt"), y)


def test_streams_are_reproducible_and_disjoint():
    a = RngStream(3).child("x", 1).uniforms(5)
    assert np.array_equal(a, RngStream(3).child("x", 1).uniforms(5))
    assert np.array_equal(a, RngStream(3).child("x").child(1).uniforms(5))
    assert not np.array_equal(a, RngStream(3).child("x", 2).uniforms(5))
    assert not np.array_equal(a, RngStream(4).child("x", 1).uniforms(5))
    assert not np.array_equal(RngStream(0).child(0).uniforms(5), RngStream(0).uniforms(5))


def test_adding_children_does_not_perturb_siblings():
    r = RngStream(9)
    first = r.child("rep", 0).uniforms(3)
    r.child("rep", 1).uniforms(1000)
    assert np.array_equal(first, RngStream(9).child("rep", 0).uniforms(3))


def test_uniforms_shape_and_range():
    u = RngStream(1).uniforms(1000, 3)
    assert u.shape == (1000, 3) and u.min() >= 0 and u.max() < 1
    assert isinstance(RngStream(1).uniform(), float)
    with pytest.raises(ValueError):
        RngStream(1).child(-1)


def test_as_stream():
    s = RngStream(5)
    assert as_stream(s) is s
    assert as_stream(5).uniform() == RngStream(5).uniform()
    assert as_stream(None).uniform() == RngStream(0).uniform()
