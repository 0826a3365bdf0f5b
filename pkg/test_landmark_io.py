import numpy as np
import pytest

from errors import LandmarkFormatError
from landmark_io import format_landmarks, parse_landmarks, read_landmark_files, read_landmarks, read_matrix, write_landmarks

TWO_FIGURES = """x1,x2
0.0,0.0
1.0,0.0
1.0,1.0
0.0,1.0

0.1,0.0
1.2,0.1
0.9,1.1
-0.1,0.8
"""


def test_header_and_two_figures():
    figures = parse_landmarks(TWO_FIGURES)
    assert len(figures) == 2
    assert figures[0].points.shape == (4, 2)
    assert figures[1].points[3].tolist() == [-0.1, 0.8]


def test_header_is_optional():
    figures = parse_landmarks(TWO_FIGURES.split("\n", 1)[1])
    assert len(figures) == 2


def test_malformed_value_reports_its_line():
    text = "x1,x2\n0.0,abc\n1.0,0.0\n1.0,1.0\n0.0,1.0\n"
    with pytest.raises(LandmarkFormatError) as info:
        parse_landmarks(text, path="shapes.csv")
    assert info.value.line == 2
    assert str(info.value).startswith("shapes.csv:2:")


def test_ragged_row():
    text = "0.0,0.0\n1.0,0.0\n1.0,1.0,2.0\n0.0,1.0\n"
    with pytest.raises(LandmarkFormatError) as info:
        parse_landmarks(text)
    assert info.value.line == 3


def test_non_finite_value():
    with pytest.raises(LandmarkFormatError) as info:
        parse_landmarks("0,0\n1,inf\n1,1\n0,1\n")
    assert info.value.line == 2


def test_header_only():
    with pytest.raises(LandmarkFormatError):
        parse_landmarks("x1,x2\n")


def test_empty_text():
    with pytest.raises(LandmarkFormatError):
        parse_landmarks("\n\n")


def test_too_few_landmarks():
    with pytest.raises(LandmarkFormatError):
        parse_landmarks("x1,x2\n0,0\n1,0\n0,1\n")


def test_figures_must_share_a_shape():
    text = "0,0\n1,0\n1,1\n0,1\n\n0,0\n1,0\n1,1\n0,1\n2,2\n"
    with pytest.raises(LandmarkFormatError) as info:
        parse_landmarks(text)
    assert info.value.line == 6


def test_written_values_read_back_exactly(rng, tmp_path):
    figures = [rng.standard_normal((5, 2)) for _ in range(3)]
    path = tmp_path / "figures.csv"
    write_landmarks(path, figures)
    restored = read_landmarks(path)
    assert len(restored) == 3
    for original, figure in zip(figures, restored):
        assert np.array_equal(figure.points, original)


def test_formatting_is_deterministic(rng):
    figures = [rng.standard_normal((4, 2)) for _ in range(2)]
    text = format_landmarks(figures)
    assert text == format_landmarks(figures)
    assert text.startswith("x1,x2\n")
    assert text.count("x1") == 1
    assert "\n\n" in text


def test_several_files_with_expected_shape(tmp_path):
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    first.write_text(TWO_FIGURES)
    second.write_text("0,0,0\n1,0,0\n0,1,0\n0,0,1\n1,1,1\n")
    assert len(read_landmark_files([first, first], shape=(4, 2))) == 4
    with pytest.raises(LandmarkFormatError):
        read_landmark_files([first, second])


def test_missing_file(tmp_path):
    with pytest.raises(LandmarkFormatError):
        read_landmarks(tmp_path / "missing.csv")


def test_read_matrix(tmp_path):
    path = tmp_path / "sigma.csv"
    path.write_text("2.0,0.5\n0.5,1.0\n")
    assert read_matrix(path).tolist() == [[2.0, 0.5], [0.5, 1.0]]
    path.write_text("2.0,x\n0.5,1.0\n")
    with pytest.raises(LandmarkFormatError):
        read_matrix(path)
