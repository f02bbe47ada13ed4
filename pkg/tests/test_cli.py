import json
import shutil
import subprocess
import sys

import numpy as np
import pytest

from bezcage import io
from bezcage.cli import main
from bezcage.shapes import bend, cube_quads, icosphere


@pytest.fixture(scope="module")
def work(tmp_path_factory, round_cage):
    d = tmp_path_factory.mktemp("cli")
    io.save_cage(d / "src.json", round_cage)
    io.save_cage(d / "bent.json", round_cage.map_points(bend))
    io.write_mesh(d / "sphere.obj", icosphere(2, 0.8))
    return d


def test_coords_deform_identity(work, round_cage, capsys):
    assert main(["coords", "--cage", str(work / "src.json"), "--mesh", str(work / "sphere.obj"), "--out", str(work / "c.bin")]) == 0
    out = work / "same.obj"
    args = ["deform", "--coords", str(work / "c.bin"), "--cage", str(work / "src.json"), "--mesh", str(work / "sphere.obj")]
    assert main(args + ["--target", str(work / "src.json"), "--out", str(out)]) == 0
    mesh = io.read_mesh(work / "sphere.obj")
    got = io.read_mesh(out)
    assert np.abs(got.vertices - mesh.vertices).max() <= 1e-9 * round_cage.diameter
    assert np.array_equal(got.faces, mesh.faces)
    assert main(args + ["--target", str(work / "bent.json"), "--out", str(work / "bent.obj"), "--sigma-res", "8"]) == 0


def test_coords_projected_crossprod(work):
    out = work / "x.bin"
    assert main(["coords", "--cage", str(work / "src.json"), "--mesh", str(work / "sphere.obj"), "--out", str(out),
                 "--variant", "crossprod", "--project", "--grid", "4", "--levels", "2"]) == 0  # fmt: skip
    table = io.load_coordinates(out)
    assert table.projected and table.variant == "crossprod" and table.grid == 4
    assert np.abs(table.phi.sum(axis=1) - 1).max() <= 1e-14


def test_validate_reports(work, capsys):
    assert main(["validate", "--cage", str(work / "src.json"), "--mesh", str(work / "sphere.obj"), "--coords", str(work / "c.bin")]) == 0
    out = capsys.readouterr().out
    assert "rank(A) = 4" in out
    assert "raw:" in out and "projected:" in out and "partition of unity" in out


def test_stale_coords_error(work, capsys):
    args = ["deform", "--coords", str(work / "c.bin"), "--cage", str(work / "bent.json"), "--target", str(work / "src.json"),
            "--mesh", str(work / "sphere.obj"), "--out", str(work / "never.obj")]  # fmt: skip
    assert main(args) == 1
    assert capsys.readouterr().err.startswith("error[stale-coordinates]")
    assert not (work / "never.obj").exists()


def test_exterior_vertex_reported_by_obj_number(work, capsys):
    mesh = icosphere(1, 0.5)
    verts = mesh.vertices.copy()
    verts[4] = [5.0, 0.0, 0.0]
    io.write_mesh(work / "out.obj", mesh.with_vertices(verts))
    assert main(["coords", "--cage", str(work / "src.json"), "--mesh", str(work / "out.obj"), "--out", str(work / "o.bin")]) == 1
    err = capsys.readouterr().err
    assert err.startswith("error[exterior]") or err.startswith("error[mesh]")
    assert "OBJ vertex numbers 5" in err


def test_elevate_and_tessellate(work, tmp_path):
    quads = tmp_path / "cube.obj"
    q = cube_quads()
    lines = [f"v {x} {y} {z}" for quad in q for x, y, z in quad]
    lines += [f"f {4 * k + 1} {4 * k + 2} {4 * k + 3} {4 * k + 4}" for k in range(6)]
    quads.write_text("\n".join(lines) + "\n")
    assert main(["elevate", "--quads", str(quads), "--degree", "3", "--out", str(tmp_path / "c3.json")]) == 0
    cage = io.load_cage(tmp_path / "c3.json")
    assert len(cage) == 6 and cage.patches[0].degrees == (3, 3)
    assert main(["tessellate", "--cage", str(tmp_path / "c3.json"), "--res", "4", "--out", str(tmp_path / "t.obj")]) == 0
    assert len(io.read_mesh(tmp_path / "t.obj").faces) == 6 * 2 * 16


def test_coons(tmp_path):
    loop = {"u0": [[0, 0, 0], [0, 0.5, 0.2], [0, 1, 0]], "u1": [[1, 0, 0], [1, 0.5, 0.2], [1, 1, 0]],
            "v0": [[0, 0, 0], [1, 0, 0]], "v1": [[0, 1, 0], [1, 1, 0]]}  # fmt: skip
    path = tmp_path / "loops.json"
    path.write_text(json.dumps({"format": "coons-loops", "version": 1, "loops": [loop]}))
    out = tmp_path / "patch.json"
    assert main(["coons", "--loops", str(path), "--degree", "1", "2", "--out", str(out)]) == 0
    patch = io.load_cage(out, validate=False).patches[0]
    assert patch.degrees == (1, 2)
    assert main(["coons", "--loops", str(path), "--degree", "3", "3", "--out", str(out)]) == 1


def test_bad_cage_file(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"format": "bezier-cage", "version": 1, "patches": [], "extra": 1}')
    assert main(["validate", "--cage", str(bad)]) == 1
    assert capsys.readouterr().err.startswith("error[format]")
    assert main(["validate", "--cage", str(tmp_path / "missing.json")]) == 1
    assert capsys.readouterr().err.startswith("error[io]")


def test_usage_errors():
    with pytest.raises(SystemExit) as exc:
        main(["coords", "--cage", "x"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["validate", "--cage", "x", "--coords", "c.bin"])
    assert exc.value.code == 2


def test_module_entry_point(work):
    proc = subprocess.run([sys.executable, "-m", "bezcage", "validate", "--cage", str(work / "src.json")],
                          capture_output=True, text=True)  # fmt: skip
    assert proc.returncode == 0, proc.stderr
    assert "rank(A) = 4" in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "bezcage", "validate", "--cage", str(work / "nope.json")],
                          capture_output=True, text=True)  # fmt: skip
    assert proc.returncode != 0 and "error[io]" in proc.stderr


@pytest.mark.skipif(shutil.which("bezcage") is None, reason="console script not installed")
def test_console_script():
    proc = subprocess.run(["bezcage", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "coords" in proc.stdout
