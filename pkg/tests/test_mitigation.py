import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from esia.attack import DropSchedule, color_strip_attack, generate_schedule, pixel_loss_attack
from esia.core import psnr
from esia.errors import DimensionError, MitigationError
from esia.fixtures import gradient_image
from esia.mitigation import HoleImage, _fill_pass, median_interpolate, mitigate, realign

from oracles import median_fill_ref


def column_image(values, width=3):
    v = np.asarray(values, dtype=np.uint8)
    return np.repeat(np.repeat(v[:, None, None], width, axis=1), 3, axis=2)


def test_realign_empty_schedule(rng):
    img = rng.integers(0, 256, (5, 4, 3), dtype=np.uint8)
    h = realign(img, DropSchedule((), 5))
    assert np.array_equal(h.raster, img) and h.hole_rows == frozenset()


def test_realign_single_drop():
    attacked = column_image([10, 11, 12, 99])  # a0, a1, a2, pad
    h = realign(attacked, DropSchedule((1,), 4))
    assert h.hole_rows == {1}
    assert h.raster[[0, 2, 3], 0, 0].tolist() == [10, 11, 12]


def test_realign_height_mismatch():
    with pytest.raises(DimensionError):
        realign(np.zeros((3, 2, 3), np.uint8), DropSchedule((), 4))


def test_hole_rows_must_be_in_range():
    with pytest.raises(DimensionError):
        HoleImage(np.zeros((3, 2, 3), np.uint8), {3})


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 40), st.data())
def test_realign_round_trip(h, data):
    rows = data.draw(st.sets(st.integers(0, h - 1)))
    schedule = DropSchedule(tuple(sorted(rows)), h)
    img = np.random.default_rng(data.draw(st.integers(0, 2 ** 32))).integers(
        0, 256, (h, 4, 3), dtype=np.uint8)
    holes = realign(pixel_loss_attack(img, schedule), schedule)
    keep = [r for r in range(h) if r not in rows]
    assert np.array_equal(holes.raster[keep], img[keep])


def test_median_constant_image():
    img = np.full((9, 5, 3), (17, 170, 250), np.uint8)
    out = median_interpolate(HoleImage(img, {0, 3, 4, 5, 8}))
    assert np.array_equal(out, img)


def test_lower_median_of_eight_neighbors():
    img = np.zeros((3, 3, 3), np.uint8)
    coords = [(y, x) for y in range(3) for x in range(3) if (y, x) != (1, 1)]
    for v, (y, x) in zip(range(1, 9), coords):
        img[y, x] = v
    missing = np.zeros((3, 3), bool)
    missing[1, 1] = True
    filled = _fill_pass(img, missing)
    assert filled.tolist() == missing.tolist()
    assert img[1, 1].tolist() == [4, 4, 4]


def test_middle_row_hole_uses_six_neighbors():
    img = np.zeros((3, 3, 3), np.uint8)
    img[0] = [[1] * 3, [2] * 3, [3] * 3]
    img[2] = [[6] * 3, [7] * 3, [8] * 3]
    out = median_interpolate(HoleImage(img, {1}))
    assert out[1, 1].tolist() == [3, 3, 3]  # lower median of 1,2,3,6,7,8


def test_two_adjacent_hole_rows_gradient():
    img = column_image([0, 10, 20, 30, 40, 50, 60], width=4)
    out = median_interpolate(HoleImage(img, {3, 4}))
    ref, passes = median_fill_ref(img.tolist(), {3, 4})
    assert passes == 1  # both rows touch a valid row
    assert out.tolist() == ref
    img = column_image([0, 10, 20, 30, 40, 50, 60, 70], width=4)
    ref, passes = median_fill_ref(img.tolist(), {2, 3, 4})
    assert passes == 2
    assert median_interpolate(HoleImage(img, {2, 3, 4})).tolist() == ref
    # values frozen from the reference: top/bottom rows of the run first, middle second
    assert [row[1][0] for row in ref[1:6]] == [10, 10, 10, 50, 50]


def test_all_holes_raises():
    with pytest.raises(MitigationError):
        median_interpolate(HoleImage(np.zeros((2, 2, 3), np.uint8), {0, 1}))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 12), st.integers(1, 6), st.data())
def test_median_matches_reference_and_bounds(h, w, data):
    holes = data.draw(st.sets(st.integers(0, h - 1), max_size=h - 1))
    img = np.random.default_rng(data.draw(st.integers(0, 2 ** 32))).integers(
        0, 256, (h, w, 3), dtype=np.uint8)
    out = median_interpolate(HoleImage(img, holes))
    ref, _ = median_fill_ref(img.tolist(), holes)
    assert out.tolist() == ref
    keep = [r for r in range(h) if r not in holes]
    assert np.array_equal(out[keep], img[keep])


def test_mitigate_n0_identity(rng):
    img = rng.integers(0, 256, (6, 6, 3), dtype=np.uint8)
    assert np.array_equal(mitigate(img, DropSchedule((), 6)), img)


@pytest.mark.parametrize("mode", ["loss", "strip"])
def test_mitigate_constant_image_exact(mode):
    img = np.full((30, 10, 3), 123, np.uint8)
    s = generate_schedule(30, 9, 11)
    attacked = pixel_loss_attack(img, s) if mode == "loss" else color_strip_attack(img, s)
    assert np.array_equal(mitigate(attacked, s), img)


def test_mitigate_improves_gradient_psnr():
    img = gradient_image(100, 32, (0, 0, 0), (250, 200, 150), 90.0)
    s = DropSchedule((10, 20), 100)
    attacked = pixel_loss_attack(img, s)
    assert psnr(img, mitigate(attacked, s)) > psnr(img, attacked)


def test_mitigate_restores_non_hole_rows(rng):
    img = rng.integers(0, 256, (50, 7, 3), dtype=np.uint8)
    s = generate_schedule(50, 20, 3)
    out = mitigate(pixel_loss_attack(img, s), s)
    keep = [r for r in range(50) if r not in s.rows]
    assert np.array_equal(out[keep], img[keep])


def test_passes_bounded_by_height():
    img = column_image(list(range(0, 200, 10)), width=2)
    holes = set(range(1, 20))
    _, passes = median_fill_ref(img.tolist(), holes)
    assert passes <= 20
    assert median_interpolate(HoleImage(img, holes)).tolist() == median_fill_ref(img.tolist(), holes)[0]
