"""Job execution layer tests (shared by the service and the CLI)."""

import io

import numpy as np
import pytest

from hexcut.cutcell import decompose
from hexcut.diagnostics import measure, shell_csv
from hexcut.errors import InputError
from hexcut.field import PrimitiveScene, ScenePrimitive, Sphere, sample_scene
from hexcut.jobs import (
    build_field,
    build_lattice,
    cut_response,
    run_compare,
    run_cut,
    run_npac,
    run_shell,
)
from hexcut.rules import RuleConfig, resolve
from hexcut.schemas import CompareJob, CutJob, FieldSourceSpec, LatticeSpec, NpacJob, ShellJob
from hexcut.vtkio import read_mesh

LATTICE = LatticeSpec(dims=(3, 3, 3), spacing=0.5, origin=(1.0, 0.0, 0.0))
RANDOM = {"preset": {"name": "random", "seed": 3}}


def test_build_lattice_carries_geometry():
    lat = build_lattice(LATTICE)
    assert lat.dims == (3, 3, 3)
    assert lat.spacing == 0.5
    assert lat.origin == (1.0, 0.0, 0.0)


def test_build_field_explicit_checks_length():
    lat = build_lattice(LATTICE)
    values = tuple(float(i % 5 - 2) or 1.0 for i in range(lat.node_count))
    fld = build_field(lat, FieldSourceSpec(explicit=values))
    assert fld.values.shape == (lat.node_count,)
    with pytest.raises(InputError, match="nodes"):
        build_field(lat, FieldSourceSpec(explicit=(1.0, -1.0)))


def test_build_field_scene_matches_direct_sampling():
    lat = build_lattice(LATTICE)
    spec = FieldSourceSpec(scene={
        "background": "void",
        "primitives": [
            {"shape": {"kind": "sphere", "center": [1.5, 0.75, 0.75], "radius": 0.6},
             "sense": "solid"},
        ],
    })
    fld = build_field(lat, spec)
    direct = sample_scene(lat, PrimitiveScene(
        background="void",
        primitives=(ScenePrimitive(shape=Sphere(center=(1.5, 0.75, 0.75), radius=0.6),
                                   sense="solid"),),
    ))
    assert np.array_equal(fld.values, direct.values)


def test_build_field_shell_preset_centers():
    lat = build_lattice(LatticeSpec(dims=(4, 4, 4), spacing=0.5, origin=(2.0, 0.0, 0.0)))
    octant = FieldSourceSpec(preset={"name": "shell", "preset": "octant",
                                     "inner_radius": 0.4, "outer_radius": 0.9})
    fld = build_field(lat, octant)
    # solid band exists between the radii measured from the origin corner
    r = np.linalg.norm(
        np.stack([lat.node_position(n) for n in range(lat.node_count)]) - (2.0, 0.0, 0.0),
        axis=1,
    )
    band = (r > 0.45) & (r < 0.85)
    assert (fld.values[band] > 0).all()
    with pytest.raises(InputError, match="inner"):
        build_field(lat, FieldSourceSpec(preset={
            "name": "shell", "inner_radius": 0.9, "outer_radius": 0.4,
        }))


def test_build_field_random_seed_and_override():
    lat = build_lattice(LATTICE)
    spec = FieldSourceSpec(preset={"name": "random", "seed": 3, "amplitude": 2.0})
    a = build_field(lat, spec)
    b = build_field(lat, spec)
    assert np.array_equal(a.values, b.values)
    c = build_field(lat, spec, seed_override=4)
    assert not np.array_equal(a.values, c.values)
    d = build_field(lat, FieldSourceSpec(preset={"name": "random", "seed": 4, "amplitude": 2.0}))
    assert np.array_equal(c.values, d.values)


def test_run_cut_matches_direct_pipeline():
    job = CutJob(lattice=LATTICE.model_dump(), field=RANDOM,
                 rule_config={"rule": "L4_max"})
    result = run_cut(job)
    lat = build_lattice(LATTICE)
    fld = build_field(lat, job.field)
    res = resolve(decompose(fld), RuleConfig(rule="L4_max"))
    rep = measure(res)
    assert result.geometry.v_solid == rep.v_solid
    assert result.geometry.watertight
    assert len(result.iteration_reports) == 1
    assert result.iteration_reports[0]["rule"] == "L4_max"


def test_run_cut_iteration_script_threads_state():
    job = CutJob(
        lattice=LATTICE.model_dump(),
        field={"preset": {"name": "random", "seed": 1}},
        rule_config={"rule": "L2"},
        iteration_script=[
            {"preset": {"name": "random", "seed": 2}},
            {"preset": {"name": "random", "seed": 3}},
        ],
    )
    result = run_cut(job)
    assert [r["iteration"] for r in result.iteration_reports] == [1, 2, 3]
    assert result.resolution.state.iteration == 3
    assert result.resolution.report.iteration == 3


def test_cut_response_mesh_round_trip():
    job = CutJob(lattice=LATTICE.model_dump(), field=RANDOM)
    result = run_cut(job)
    resp = cut_response(result, include_mesh=True)
    grid = read_mesh(io.StringIO(resp.mesh_text))
    vols = grid.volumes()
    assert vols["v_solid"] == pytest.approx(result.geometry.v_solid, rel=1e-9)
    assert resp.geometry_report["v_at"] == result.geometry.v_at
    slim = cut_response(result, include_mesh=False)
    assert slim.mesh_text is None


def test_run_npac_frozen_class_counts():
    resp = run_npac(NpacJob())
    assert resp.intersected_total == 254
    assert resp.group_class_counts == {
        "rot": 21,
        "rot_refl": 20,
        "rot_compl": 14,
        "rot_refl_compl": 13,
    }
    assert len(resp.classes) == 14
    assert sum(row.orbit_size for row in resp.classes) == 254
    reps = [row.representative for row in resp.classes]
    assert reps == sorted(reps)
    for row in resp.classes:
        assert row.n_at == row.n_iat + row.n_bat
        assert row.crossings >= 3


def test_run_shell_csv_consistent_with_rows():
    job = ShellJob(inner_radius=0.65, outer_radii=(0.8, 1.0),
                   rule_config={"rule": "G1_void"})
    study, resp = run_shell(job)
    assert resp.csv == shell_csv(study)
    assert len(resp.rows) == 2
    assert resp.rows[0]["thickness"] == pytest.approx(0.15)
    assert "ratio_at" in resp.rows[0]
    assert resp.rows[0]["watertight"] is True


def test_run_compare_pairwise_structure():
    job = CompareJob(lattice=LATTICE.model_dump(), field=RANDOM,
                     rules=("G1_solid", "G1_void", "L1_solid"))
    resp = run_compare(job)
    assert set(resp.reports) == {"G1_solid", "G1_void", "L1_solid"}
    assert len(resp.pairwise) == 3
    for pair in resp.pairwise:
        a = resp.reports[pair["rule_a"]]
        b = resp.reports[pair["rule_b"]]
        assert pair["solid_volume_diff"] == pytest.approx(a["v_solid"] - b["v_solid"])
    # the G1 variants bound every other rule, so this diff is positive
    lead = next(p for p in resp.pairwise
                if (p["rule_a"], p["rule_b"]) == ("G1_solid", "G1_void"))
    assert lead["solid_volume_diff"] > 0
