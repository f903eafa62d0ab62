"""Grid export / re-import tests."""

import io

import numpy as np
import pytest

from hexcut.cutcell import decompose
from hexcut.diagnostics import measure
from hexcut.errors import InputError, OutputError
from hexcut.field import LevelSetField
from hexcut.lattice import HexLattice
from hexcut.rules import RuleConfig, resolve
from hexcut.vtkio import export_mesh, export_mesh_file, read_mesh, read_mesh_file


def resolved(seed, dims=(3, 3, 3), rule="L1_solid"):
    lat = HexLattice(dims=dims)
    rng = np.random.default_rng(seed)
    vals = rng.uniform(0.1, 3.0, lat.node_count)
    vals[rng.random(lat.node_count) < 0.5] *= -1.0
    mesh = decompose(LevelSetField(lat, vals))
    return resolve(mesh, RuleConfig(rule=rule))


def export_text(res):
    buf = io.StringIO()
    export_mesh(res, buf)
    return buf.getvalue()


def test_round_trip_reproduces_volumes():
    res = resolved(1)
    rep = measure(res)
    grid = read_mesh(io.StringIO(export_text(res)))
    vols = grid.volumes()
    assert vols["v_solid"] == pytest.approx(rep.v_solid, rel=1e-9)
    assert vols["v_void"] == pytest.approx(rep.v_void, rel=1e-9)
    assert vols["v_at"] == pytest.approx(rep.v_at, rel=1e-9)
    assert vols["v_at_solid"] == pytest.approx(rep.v_at_solid, rel=1e-9)


def test_cell_counts_and_types():
    res = resolved(2)
    mesh = res.mesh
    grid = read_mesh(io.StringIO(export_text(res)))
    n_tets = len(mesh.tets)
    n_hex = len(mesh.uniform_cells)
    assert len(grid.cells) == n_tets + n_hex
    assert grid.cell_types[:n_tets] == (10,) * n_tets
    assert grid.cell_types[n_tets:] == (12,) * n_hex
    assert all(len(c) == 4 for c in grid.cells[:n_tets])
    assert all(len(c) == 8 for c in grid.cells[n_tets:])
    # point table is deduplicated
    assert len(np.unique(grid.points, axis=0)) == len(grid.points)


def test_cell_data_matches_resolution():
    res = resolved(3)
    mesh = res.mesh
    grid = read_mesh(io.StringIO(export_text(res)))
    n_tets = len(mesh.tets)
    for i, tet in enumerate(mesh.tets):
        assert grid.phase[i] == (1 if res.phases[i] > 0 else 0)
        assert grid.ambiguity[i] == {0: 0, 1: 1, 2: 2}[tet.tag]
        assert grid.owner_cell[i] == tet.owner_cell
    for j, cell in enumerate(sorted(mesh.uniform_cells)):
        assert grid.phase[n_tets + j] == (1 if mesh.uniform_cells[cell] > 0 else 0)
        assert grid.ambiguity[n_tets + j] == 0
        assert grid.owner_cell[n_tets + j] == cell


def test_repeated_export_is_byte_identical():
    res = resolved(4)
    assert export_text(res) == export_text(res)


def test_export_read_export_is_stable(tmp_path):
    res = resolved(5)
    path = tmp_path / "mesh.vtk"
    export_mesh_file(res, path)
    text = path.read_text(encoding="ascii")
    assert text == export_text(res)
    grid = read_mesh_file(path)
    assert len(grid.cells) == len(res.mesh.tets) + len(res.mesh.uniform_cells)


def test_export_to_unwritable_path_raises_output_error(tmp_path):
    res = resolved(6)
    with pytest.raises(OutputError):
        export_mesh_file(res, tmp_path / "no" / "such" / "dir" / "mesh.vtk")


def test_read_missing_file_raises_input_error(tmp_path):
    with pytest.raises(InputError):
        read_mesh_file(tmp_path / "absent.vtk")


def test_malformed_header_rejected():
    with pytest.raises(InputError):
        read_mesh(io.StringIO("not a grid file\n"))


def test_malformed_cell_row_rejected():
    res = resolved(7)
    lines = export_text(res).splitlines()
    for i, line in enumerate(lines):
        if line.startswith("4 "):
            lines[i] = "4 0 1 2"          # claims 4 ids, lists 3
            break
    with pytest.raises(InputError):
        read_mesh(io.StringIO("\n".join(lines)))


def test_missing_cell_array_rejected():
    res = resolved(8)
    text = export_text(res).replace("SCALARS owner_cell", "SCALARS something_else")
    with pytest.raises(InputError):
        read_mesh(io.StringIO(text))


def test_truncated_file_rejected():
    res = resolved(9)
    text = export_text(res)
    cut = text[: text.index("CELL_DATA")]
    with pytest.raises((InputError, IndexError)) as exc:
        read_mesh(io.StringIO(cut))
    assert exc.type is InputError
