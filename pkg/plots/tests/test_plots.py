import shutil
import subprocess

import numpy as np
import pytest

from soh_plots import (FigureSpec, SnapshotFormatError, read_diagnostics,
                       read_snapshot_text, render)
from soh_plots.cli import main


def write_mirror(path, kind, fields, nx, ny, dx=0.01, dy=0.01, time=0.25):
    """Handcraft a snapshot text mirror (the documented interchange format)."""
    names = list(fields)
    with open(path, "w") as fh:
        fh.write("# soh snapshot text mirror v1\n")
        fh.write(f"# kind={kind} nx={nx} ny={ny} dx={dx!r} dy={dy!r} time={time!r}\n")
        fh.write("# columns: i j x y " + " ".join(names) + "\n")
        for j in range(ny):
            for i in range(nx):
                vals = " ".join(format(fields[n][j, i], ".17g") for n in names)
                fh.write(f"{i} {j} {(i + 0.5) * dx!r} {(j + 0.5) * dy!r} {vals}\n")
    return path


@pytest.fixture
def single_mirror(tmp_path):
    nx = ny = 24
    x = (np.arange(nx) + 0.5) / nx
    X, Y = np.meshgrid(x, x)
    rho = np.where((X > 0.3) & (X < 0.7) & (Y > 0.4) & (Y < 0.6), 0.95, 0.6)
    q1 = rho * np.cos(2 * np.pi * Y)
    q2 = rho * np.sin(2 * np.pi * Y)
    return write_mirror(tmp_path / "single.txt", "single",
                        {"rho": rho, "q1": q1, "q2": q2}, nx, ny)


@pytest.fixture
def twofluid_mirror(tmp_path):
    nx = ny = 20
    rng = np.random.default_rng(0)
    rp = 0.4 + 0.1 * rng.standard_normal((ny, nx))
    rm = 0.8 - rp
    zeros = np.zeros((ny, nx))
    fields = {"rho_plus": rp, "rho_minus": rm,
              "qp1": rp * 0.3, "qp2": zeros, "qm1": -rm * 0.3, "qm2": zeros,
              "wp1": np.ones((ny, nx)), "wp2": zeros,
              "wm1": -np.ones((ny, nx)), "wm2": zeros}
    return write_mirror(tmp_path / "crowd.txt", "twofluid", fields, nx, ny)


@pytest.fixture
def mirror_1d(tmp_path):
    nx = 50
    x = (np.arange(nx) + 0.5) / nx
    rho = np.where(x < 0.5, 0.8, 0.9969)[None, :]
    return write_mirror(tmp_path / "line.txt", "single",
                        {"rho": rho, "q1": rho * 0.9, "q2": rho * 0.1}, nx, 1)


class TestTextIO:
    def test_roundtrip_fields(self, single_mirror):
        snap = read_snapshot_text(single_mirror)
        assert snap.kind == "single"
        assert snap.nx == 24 and snap.ny == 24
        assert set(snap.fields) == {"rho", "q1", "q2"}
        assert snap.fields["rho"].shape == (24, 24)

    def test_rejects_garbage(self, tmp_path):
        p = tmp_path / "junk.txt"
        p.write_text("not a mirror\n")
        with pytest.raises(SnapshotFormatError):
            read_snapshot_text(p)

    def test_rejects_missing(self, tmp_path):
        with pytest.raises(SnapshotFormatError):
            read_snapshot_text(tmp_path / "absent.txt")

    def test_row_count_checked(self, single_mirror):
        lines = single_mirror.read_text().splitlines()
        single_mirror.write_text("\n".join(lines[:-3]) + "\n")
        with pytest.raises(SnapshotFormatError):
            read_snapshot_text(single_mirror)

    def test_diagnostics_reader(self, tmp_path):
        p = tmp_path / "diag.tsv"
        p.write_text("# soh diagnostics v1\n# columns: step time mass\n"
                     "1 0.0005 12.0\n2 0.001 12.0\n")
        d = read_diagnostics(p)
        assert list(d["step"]) == [1.0, 2.0]
        assert d["mass"][1] == 12.0


class TestFigures:
    def test_density_map(self, single_mirror, tmp_path):
        out = render(FigureSpec(single_mirror, "density", tmp_path / "d.png"))
        assert out.exists() and out.stat().st_size > 2000

    def test_quiver(self, single_mirror, tmp_path):
        out = render(FigureSpec(single_mirror, "quiver", tmp_path / "q.png",
                                subsample=4))
        assert out.exists()

    def test_cross_section(self, mirror_1d, tmp_path):
        out = render(FigureSpec(mirror_1d, "cross-section", tmp_path / "c.png"))
        assert out.exists()

    def test_lane_panels(self, twofluid_mirror, tmp_path):
        out = render(FigureSpec(twofluid_mirror, "lane-panels",
                                tmp_path / "l.png"))
        assert out.exists()

    def test_quiver_rejects_1d(self, mirror_1d, tmp_path):
        with pytest.raises(SnapshotFormatError, match="cross-section"):
            render(FigureSpec(mirror_1d, "quiver", tmp_path / "q.png"))

    def test_kind_schema_mismatch(self, twofluid_mirror, single_mirror, tmp_path):
        with pytest.raises(SnapshotFormatError):
            render(FigureSpec(twofluid_mirror, "density", tmp_path / "x.png"))
        with pytest.raises(SnapshotFormatError):
            render(FigureSpec(single_mirror, "lane-panels", tmp_path / "y.png"))

    def test_unknown_kind(self, single_mirror, tmp_path):
        with pytest.raises(SnapshotFormatError):
            FigureSpec(single_mirror, "hologram", tmp_path / "z.png")

    def test_deterministic_bytes(self, single_mirror, twofluid_mirror, tmp_path):
        for kind, mirror in (("density", single_mirror),
                             ("quiver", single_mirror),
                             ("lane-panels", twofluid_mirror)):
            a = render(FigureSpec(mirror, kind, tmp_path / "a.png"))
            b = render(FigureSpec(mirror, kind, tmp_path / "b.png"))
            assert a.read_bytes() == b.read_bytes()

    def test_inputs_not_mutated(self, single_mirror, tmp_path):
        before = single_mirror.read_bytes()
        render(FigureSpec(single_mirror, "density", tmp_path / "d.png"))
        assert single_mirror.read_bytes() == before


class TestCli:
    def test_ok(self, single_mirror, tmp_path, capsys):
        rc = main(["density", str(single_mirror), "-o", str(tmp_path / "o.png")])
        assert rc == 0
        assert (tmp_path / "o.png").exists()

    def test_schema_error_code(self, mirror_1d, tmp_path):
        rc = main(["quiver", str(mirror_1d), "-o", str(tmp_path / "o.png")])
        assert rc == 2

    def test_missing_input_code(self, tmp_path):
        rc = main(["density", str(tmp_path / "no.txt"),
                   "-o", str(tmp_path / "o.png")])
        assert rc == 2


@pytest.mark.skipif(shutil.which("soh") is None,
                    reason="solver CLI not installed")
class TestAgainstSolverOutput:
    """End-to-end: figures from real (reduced-size) scenario runs."""

    @pytest.fixture(scope="class")
    def collision_out(self, tmp_path_factory):
        out = tmp_path_factory.mktemp("collision")
        cfg = out / "run.cfg"
        cfg.write_text(
            "scenario = collision\ndx = 0.02\ndy = 0.02\ndt = 0.0005\n"
            "t_end = 0.1\nsnapshot_every = 100\n"
            f"output_dir = {out}\n")
        subprocess.run(["soh", "run", str(cfg)], check=True,
                       capture_output=True)
        return out

    @pytest.fixture(scope="class")
    def crowd_out(self, tmp_path_factory):
        out = tmp_path_factory.mktemp("crowd")
        cfg = out / "run.cfg"
        cfg.write_text(
            "scenario = crowd\ndx = 0.02\ndy = 0.02\ndt = 0.0005\nbeta = 0.5\n"
            "t_end = 0.075\nsnapshot_every = 50\nseed = 0\n"
            f"output_dir = {out}\n")
        subprocess.run(["soh", "run", str(cfg)], check=True,
                       capture_output=True)
        return out

    def test_collision_panels(self, collision_out, tmp_path):
        from PIL import Image

        for step in ("000000", "000100", "000200"):
            mirror = collision_out / f"snapshot_{step}.txt"
            assert mirror.exists()
            for kind in ("density", "quiver"):
                out = render(FigureSpec(mirror, kind,
                                        tmp_path / f"{kind}_{step}.png"))
                assert out.exists()
        # the final density map shows real structure, not a flat field
        img = Image.open(tmp_path / "density_000200.png").convert("RGB")
        assert len(set(img.getdata())) > 100
        # identical inputs, identical bytes
        mirror = collision_out / "snapshot_000200.txt"
        a = render(FigureSpec(mirror, "density", tmp_path / "again_a.png"))
        b = render(FigureSpec(mirror, "density", tmp_path / "again_b.png"))
        assert a.read_bytes() == b.read_bytes()

    def test_crowd_panels(self, crowd_out, tmp_path):
        for step in ("000000", "000050", "000100", "000150"):
            mirror = crowd_out / f"snapshot_{step}.txt"
            assert mirror.exists()
            out = render(FigureSpec(mirror, "lane-panels",
                                    tmp_path / f"lanes_{step}.png"))
            assert out.exists()
