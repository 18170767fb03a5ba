import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from lowrank import SolverConfig
from lowrank.bench import read_csv
from lowrank.cli import main
from lowrank.images import (
    PnmError,
    background_subtract,
    frames_to_matrix,
    inpaint,
    matrix_to_frames,
    psnr,
    read_pgm,
    read_ppm,
    write_pgm,
    write_ppm,
)
from lowrank.linalg import relative_distance


def rank5_image(seed=0, size=64):
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((size, 5)) @ rng.standard_normal((5, size))
    return np.rint(255 * (M - M.min()) / (M.max() - M.min()))


def half_mask(shape, seed=1):
    return np.where(np.random.default_rng(seed).random(shape) < 0.5, 255, 0).astype(np.uint8)


def moving_square(n_frames=40, size=64, box=8):
    yy, xx = np.mgrid[:size, :size]
    background = 120 + 40 * np.sin(xx / 9.0) + 30 * np.cos(yy / 7.0)
    frames, truth = [], []
    for j in range(n_frames):
        x0 = round(j * (size - box) / (n_frames - 1))
        y0 = (size - box) // 2 + round(10 * np.sin(j / 6.0))
        sq = np.zeros((size, size), bool)
        sq[y0 : y0 + box, x0 : x0 + box] = True
        frames.append(np.where(sq, 250.0, background).astype(np.uint8))
        truth.append(sq)
    return frames, truth, np.rint(background)


# --- PGM / PPM -----------------------------------------------------------


def test_read_ascii_example():
    img = read_pgm(b"P2\n2 2\n255\n0 128 255 64\n")
    np.testing.assert_array_equal(img, [[0, 128], [255, 64]])
    assert img.dtype == np.uint8


def test_read_with_comments_and_small_maxval():
    img = read_pgm(b"P2 # comment\n3 1\n# another\n15\n0 7 15")
    np.testing.assert_array_equal(img, [[0, 7, 15]])


def test_write_exact_bytes():
    data = write_pgm(np.array([[1, 2, 3], [4, 5, 6]], dtype=np.uint8))
    assert data == b"P5\n3 2\n255\n\x01\x02\x03\x04\x05\x06"


def test_canonical_p5_byte_round_trip():
    data = b"P5\n2 3\n255\n" + bytes(range(6))
    assert write_pgm(read_pgm(data)) == data


@settings(max_examples=50, deadline=None)
@given(st.tuples(st.integers(1, 12), st.integers(1, 12)).flatmap(
    lambda s: arrays(np.uint8, s, elements=st.integers(0, 255))))
def test_pixel_round_trip(img):
    np.testing.assert_array_equal(read_pgm(write_pgm(img)), img)


def test_ppm_round_trip():
    img = np.random.default_rng(0).integers(0, 256, (5, 4, 3), dtype=np.uint8)
    np.testing.assert_array_equal(read_ppm(write_ppm(img)), img)
    np.testing.assert_array_equal(read_ppm(b"P3\n1 1\n255\n1 2 3\n"), [[[1, 2, 3]]])


@pytest.mark.parametrize(
    "data,offset",
    [
        (b"P5\n4 4\n255\n" + bytes(10), 21),
        (b"P7\n1 1\n255\n\x00", 0),
        (b"P2\n2 x\n255\n", 5),
        (b"P2\n1 1\n300\n5", 7),
        (b"P2\n2 1\n255\n1", 12),
        (b"P2\n1 1\n9\n12", 9),
        (b"P5\n2 1\n100\n\x05\xc8", 12),
    ],
)
def test_parse_errors_report_offset(data, offset):
    with pytest.raises(PnmError) as info:
        read_pgm(data)
    assert info.value.offset == offset
    assert f"byte offset {offset}" in str(info.value)


def test_write_rejects_out_of_range():
    with pytest.raises(ValueError):
        write_pgm(np.array([[300.0]]))
    with pytest.raises(ValueError):
        write_pgm(np.zeros((2, 2, 2)))


def test_psnr():
    a = np.zeros((4, 4))
    assert psnr(a, a) == float("inf")
    assert psnr(a + 255, a) == pytest.approx(0.0)


# --- inpainting ----------------------------------------------------------


def test_inpaint_full_mask_identity():
    img = rank5_image(3, 16).astype(np.uint8)
    out = inpaint(img, np.full(img.shape, 255, np.uint8), config=SolverConfig(lam=0.0, continuation=False))
    np.testing.assert_array_equal(out, img)


def test_inpaint_psnr_gain():
    img = rank5_image()
    mask = half_mask(img.shape)
    out = inpaint(img.astype(np.uint8), mask)
    zero_filled = np.where(mask == 255, img, 0)
    assert psnr(out, img) >= psnr(zero_filled, img) + 10
    assert out.dtype == np.uint8


@pytest.mark.parametrize("solver", ["ialm", "svp"])
def test_inpaint_other_solvers_in_range(solver):
    img = rank5_image(1, 32).astype(np.uint8)
    out = inpaint(img, half_mask(img.shape), solver=solver, config=SolverConfig(rank=5, max_iters=100))
    assert out.dtype == np.uint8 and out.shape == img.shape


def test_inpaint_colour():
    img = np.stack([rank5_image(s, 24) for s in range(3)], axis=2).astype(np.uint8)
    out = inpaint(img, half_mask(img.shape[:2]))
    assert out.shape == img.shape


@pytest.mark.parametrize("n_obs", [0, 1])
def test_inpaint_too_few_observed(n_obs):
    mask = np.zeros((8, 8), np.uint8)
    mask.flat[:n_obs] = 255
    with pytest.raises(ValueError):
        inpaint(np.zeros((8, 8), np.uint8), mask)


def test_inpaint_mask_errors():
    img = np.zeros((4, 4), np.uint8)
    with pytest.raises(ValueError):
        inpaint(img, np.full((4, 5), 255))
    with pytest.raises(ValueError):
        inpaint(img, np.full((4, 4), 128))
    with pytest.raises(ValueError):
        inpaint(img, np.full((4, 4), 255), solver="nope")


# --- background subtraction ---------------------------------------------


def test_frame_matrix_round_trip():
    frames = [np.arange(12).reshape(3, 4) + k for k in range(5)]
    D, shape = frames_to_matrix(frames)
    assert D.shape == (12, 5)
    assert D[1 * 4 + 2, 3] == frames[3][1, 2]
    np.testing.assert_array_equal(matrix_to_frames(D, shape), np.stack(frames))


def test_bgsub_static_scene():
    frame = rank5_image(2, 32).astype(np.uint8)
    bg, fg = background_subtract([frame] * 10)
    assert np.all(np.abs(bg.astype(int) - frame) <= 1)
    assert fg.max() <= 2


@pytest.fixture(scope="module")
def square_run():
    frames, truth, background = moving_square()
    return truth, background, background_subtract(frames)


def test_bgsub_planted_square_iou(square_run):
    truth, _, (_, fg) = square_run
    for est, sq in zip(fg >= 128, truth):
        iou = np.count_nonzero(est & sq) / np.count_nonzero(est | sq)
        assert iou >= 0.8


def test_bgsub_background_distance(square_run):
    _, background, (bg, _) = square_run
    for frame in bg:
        assert relative_distance(frame.astype(float), background) <= 0.05


def test_bgsub_errors():
    with pytest.raises(ValueError):
        background_subtract([np.zeros((4, 4))])
    with pytest.raises(ValueError):
        background_subtract([np.zeros((4, 4)), np.zeros((4, 5))])
    with pytest.raises(ValueError):
        background_subtract([])


# --- CLI -----------------------------------------------------------------


def test_cli_no_arguments(capsys):
    assert main([]) == 2
    assert "usage" in capsys.readouterr().err


def test_cli_module_entry_no_arguments():
    proc = subprocess.run([sys.executable, "-m", "lowrank"], capture_output=True, text=True)
    assert proc.returncode == 2 and "usage" in proc.stderr


def test_cli_unknown_flag(capsys):
    assert main(["bench", "--preset", "fig1a", "--out", "x.csv", "--bogus"]) == 2


def test_cli_help_lists_solver_flags(capsys):
    assert main(["complete", "--help"]) == 0
    text = capsys.readouterr().out
    for flag in ("--lam", "--rank", "--mu", "--mu-growth", "--mu-max", "--max-iters", "--tol",
                 "--cardinality", "--sigma", "--seed", "--no-continuation"):
        assert flag in text


def test_cli_bench_fig2a(tmp_path):
    out = tmp_path / "r.csv"
    assert main(["bench", "--preset", "fig2a", "--scale", "200", "--out", str(out)]) == 0
    traces = read_csv(out.read_bytes())
    assert {s for s, _ in traces} == {"pcp", "godec"}
    assert {i for _, i in traces} == set(range(5))


def test_cli_bench_seed_determinism_and_plot(tmp_path):
    runs = []
    for k in range(2):
        out = tmp_path / f"r{k}.csv"
        plot = tmp_path / f"r{k}.svg"
        argv = ["bench", "--preset", "fig2a", "--scale", "60", "--repeats", "2", "--seed", "7",
                "--out", str(out), "--plot", str(plot)]
        assert main(argv) == 0
        runs.append(read_csv(out.read_bytes()))
        assert plot.read_bytes().startswith(b"<svg")
    strip = {k: [(r.iteration, r.objective, r.relative_distance) for r in v] for k, v in runs[0].items()}
    assert strip == {k: [(r.iteration, r.objective, r.relative_distance) for r in v] for k, v in runs[1].items()}


def test_cli_bench_unknown_solver_subset(tmp_path):
    assert main(["bench", "--preset", "fig2a", "--solvers", "als", "--out", str(tmp_path / "x.csv")]) == 2


def test_cli_complete(tmp_path):
    img = rank5_image(0, 64)
    mask = half_mask(img.shape)
    (tmp_path / "obs.pgm").write_bytes(write_pgm(np.where(mask == 255, img, 0)))
    (tmp_path / "mask.pgm").write_bytes(write_pgm(mask))
    out = tmp_path / "out.npy"
    argv = ["complete", "--input", str(tmp_path / "obs.pgm"), "--mask", str(tmp_path / "mask.pgm"),
            "--solver", "ialm", "--out", str(out)]
    assert main(argv) == 0
    # the integer image is only approximately rank 5, so exact recovery is not expected
    assert relative_distance(np.load(out), img) < 1e-2


def test_cli_complete_solver_failure(tmp_path):
    np.save(tmp_path / "d.npy", np.ones((5, 5)))
    np.save(tmp_path / "m.npy", np.ones((5, 5)))
    argv = ["complete", "--input", str(tmp_path / "d.npy"), "--mask", str(tmp_path / "m.npy"),
            "--solver", "als", "--out", str(tmp_path / "o.npy")]
    assert main(argv) == 1  # als without a rank


def test_cli_complete_missing_file(tmp_path):
    argv = ["complete", "--input", str(tmp_path / "nope.npy"), "--mask", str(tmp_path / "nope.npy"),
            "--out", str(tmp_path / "o.npy")]
    assert main(argv) == 1


def test_cli_bad_config_is_usage_error(tmp_path):
    np.save(tmp_path / "d.npy", np.ones((5, 5)))
    argv = ["rpca", "--input", str(tmp_path / "d.npy"), "--out-low", str(tmp_path / "l.npy"), "--tol", "-1"]
    assert main(argv) == 2


def test_cli_rpca_csv(tmp_path):
    rng = np.random.default_rng(0)
    L = rng.standard_normal((30, 2)) @ rng.standard_normal((2, 30))
    S = np.where(rng.random(L.shape) < 0.05, 8.0, 0.0)
    np.savetxt(tmp_path / "d.csv", L + S, delimiter=",")
    argv = ["rpca", "--input", str(tmp_path / "d.csv"), "--out-low", str(tmp_path / "l.csv"),
            "--out-sparse", str(tmp_path / "s.csv")]
    assert main(argv) == 0
    assert relative_distance(np.loadtxt(tmp_path / "l.csv", delimiter=","), L) < 1e-4


def test_cli_inpaint_and_bgsub(tmp_path):
    img = rank5_image(4, 64).astype(np.uint8)
    (tmp_path / "img.pgm").write_bytes(write_pgm(img))
    (tmp_path / "mask.pgm").write_bytes(write_pgm(half_mask(img.shape)))
    argv = ["inpaint", "--input", str(tmp_path / "img.pgm"), "--mask", str(tmp_path / "mask.pgm"),
            "--out", str(tmp_path / "out.pgm")]
    assert main(argv) == 0
    assert psnr(read_pgm((tmp_path / "out.pgm").read_bytes()), img) > 30

    frames, _, _ = moving_square(n_frames=12, size=32, box=6)
    fdir = tmp_path / "frames"
    fdir.mkdir()
    for j, f in enumerate(frames):
        (fdir / f"f{j:03d}.pgm").write_bytes(write_pgm(f))
    argv = ["bgsub", "--frames", str(fdir), "--out-bg", str(tmp_path / "bg"), "--out-fg", str(tmp_path / "fg")]
    assert main(argv) == 0
    assert len(list((tmp_path / "fg").glob("*.pgm"))) == 12


def test_cli_bgsub_needs_frames(tmp_path):
    argv = ["bgsub", "--frames", str(tmp_path), "--out-bg", str(tmp_path / "b"), "--out-fg", str(tmp_path / "f")]
    assert main(argv) == 2


def test_cli_ppca(tmp_path, capsys):
    rng = np.random.default_rng(0)
    D = rng.standard_normal((8, 2)) @ rng.standard_normal((2, 300)) + 0.1 * rng.standard_normal((8, 300))
    np.save(tmp_path / "d.npy", D)
    assert main(["ppca", "--input", str(tmp_path / "d.npy"), "--rank", "2", "--out", str(tmp_path / "m.npz")]) == 0
    assert "noise variance" in capsys.readouterr().out
    assert np.load(tmp_path / "m.npz")["A_hat"].shape == (8, 2)
    assert main(["ppca", "--input", str(tmp_path / "d.npy"), "--rank", "8"]) == 1
