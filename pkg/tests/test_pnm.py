import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from omega_detect import pnm
from omega_detect.errors import MaskFormatError
from omega_detect.segmentation import load_mask


def test_plain_pgm_with_comments():
    data = b"P2\n# a comment\n3 2\n# another\n255\n0 10 20\n30 40 255\n"
    arr, maxval = pnm.read_pnm(data)
    assert maxval == 255
    assert arr.tolist() == [[0, 10, 20], [30, 40, 255]]


def test_plain_pbm_packed_digits():
    arr, maxval = pnm.read_pnm(b"P1\n4 2\n0110\n1001\n")
    assert maxval is None
    assert arr.tolist() == [[False, True, True, False], [True, False, False, True]]


def test_raw_pbm_row_padding():
    # 10 columns -> 2 bytes per row, trailing bits ignored
    data = b"P4\n10 2\n" + bytes([0b10000000, 0b01000000, 0b00000000, 0b11000000])
    arr, _ = pnm.read_pnm(data)
    assert arr[0].tolist() == [True] + [False] * 8 + [True]
    assert arr[1].tolist() == [False] * 8 + [True, True]


def test_sixteen_bit_pgm_is_big_endian():
    data = b"P5 2 1 65535\n" + bytes([0x01, 0x00, 0xFF, 0xFF])
    arr, maxval = pnm.read_pnm(data)
    assert maxval == 65535
    assert arr.tolist() == [[256, 65535]]


@pytest.mark.parametrize("data", [
    b"P6\n1 1\n255\n\x00\x00\x00",
    b"P5\n0 3\n255\n",
    b"P5\n2 2\n255\n\x00",
    b"P2\n2 2\n255\n1 2 3",
    b"P5\n2",
])
def test_bad_files_raise(data):
    with pytest.raises(MaskFormatError):
        pnm.read_pnm(data)


@given(arrays(np.uint8, st.tuples(st.integers(1, 12), st.integers(1, 12))))
def test_p5_round_trip(gray):
    arr, maxval = pnm.read_pnm(pnm.encode_pgm(gray))
    assert maxval == 255
    np.testing.assert_array_equal(arr, gray)


def test_spec_examples(tmp_path):
    center = np.zeros((3, 3), np.uint8)
    center[1, 1] = 255
    pnm.write_pgm(tmp_path / "c.pgm", center)
    m = load_mask(tmp_path / "c.pgm", 128)
    assert m.count == 1 and m.pixels[1, 1]

    pnm.write_pgm(tmp_path / "z.pgm", np.zeros((4, 5), np.uint8))
    assert load_mask(tmp_path / "z.pgm").count == 0

    pnm.write_pgm(tmp_path / "g.pgm", np.array([[0, 100, 200]], np.uint8))
    assert load_mask(tmp_path / "g.pgm", 128).pixels.tolist() == [[False, False, True]]


def test_threshold_is_inclusive_and_scaled_for_deep_files(tmp_path):
    path = tmp_path / "deep.pgm"
    path.write_bytes(b"P2 3 1 1023\n511 512 1023\n")
    # 128/255 of 1023 is 513.5
    assert load_mask(path, 128).pixels.tolist() == [[False, False, True]]
    path.write_bytes(b"P2 2 1 255\n127 128\n")
    assert load_mask(path, 128).pixels.tolist() == [[False, True]]


def test_pbm_ignores_threshold(tmp_path):
    path = tmp_path / "b.pbm"
    path.write_bytes(b"P1 2 1 10")
    assert load_mask(path, 255).pixels.tolist() == [[True, False]]


def test_png_via_pillow(tmp_path):
    Image = pytest.importorskip("PIL.Image")
    img = np.array([[0, 255], [129, 127]], np.uint8)
    Image.fromarray(img).save(tmp_path / "m.png")
    assert load_mask(tmp_path / "m.png").pixels.tolist() == [[False, True], [True, False]]


def test_missing_file(tmp_path):
    with pytest.raises(MaskFormatError):
        load_mask(tmp_path / "absent.pgm")
