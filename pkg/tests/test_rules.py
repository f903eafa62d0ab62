"""Phase-resolution rule tests.

Each rule family gets a deterministic hand-built mesh where the expected
phase assignment can be stated outright, plus randomized checks of the
invariants the rules promise (purity, per-cell and per-cluster phase
uniformity, solid-volume bracketing by the two G1 variants).
"""

import numpy as np
import pytest

from hexcut.cutcell import BAT, IAT, decompose, facet_area
from hexcut.errors import DegeneracyError, InputError
from hexcut.field import SOLID, VOID, LevelSetField, interpolate_in_cell
from hexcut.lattice import HexLattice
from hexcut.rules import (
    DECIDER_VARIANTS,
    RULE_NAMES,
    IterationState,
    RuleConfig,
    build_at_clusters,
    resolve,
    saddle_value,
)


def random_mesh(seed, dims=(3, 3, 3)):
    lat = HexLattice(dims=dims)
    rng = np.random.default_rng(seed)
    vals = rng.uniform(0.1, 3.0, lat.node_count)
    vals[rng.random(lat.node_count) < 0.5] *= -1.0
    return decompose(LevelSetField(lat, vals))


def code_field(lat, cell_codes):
    """Field of +/-2 values realizing one 8-bit sign code per cell."""
    vals = np.full(lat.node_count, -2.0)
    for cell, code in cell_codes.items():
        for slot, node in enumerate(lat.cell_nodes(cell)):
            if code >> slot & 1:
                vals[node] = 2.0
    return LevelSetField(lat, vals)


def solid_volume(res):
    mesh = res.mesh
    vol = sum(t.volume for t, p in zip(mesh.tets, res.phases) if p == SOLID)
    h3 = mesh.lattice.spacing ** 3
    vol += sum(h3 for s in mesh.uniform_cells.values() if s == SOLID)
    return vol


# -- saddle decider ------------------------------------------------------------


def test_saddle_hand_example_positive():
    sp, zero = saddle_value((2.0, -1.0, 3.0, -1.0), "classical")
    assert sp == pytest.approx(5.0 / 7.0)
    assert not zero
    sp, zero = saddle_value((2.0, -1.0, 3.0, -1.0), "paper")
    assert sp == pytest.approx(5.0 / 3.0)
    assert not zero


def test_saddle_hand_example_negative():
    sp, _ = saddle_value((1.0, -2.0, 1.0, -2.0), "classical")
    assert sp == pytest.approx(-0.5)
    # the paper variant divides by the corner sum, which is negative here,
    # so the two variants disagree on this face
    sp, _ = saddle_value((1.0, -2.0, 1.0, -2.0), "paper")
    assert sp == pytest.approx(1.5)


def test_saddle_paper_zero_denominator_flagged():
    sp, zero = saddle_value((1.0, -1.0, 1.0, -1.0), "paper")
    assert zero and sp == 0.0


def test_saddle_classical_raises_off_alternating_input():
    with pytest.raises(DegeneracyError):
        saddle_value((2.0, 1.0, 1.0, 2.0), "classical")


def test_saddle_classical_safe_on_alternating_signs():
    rng = np.random.default_rng(0)
    for _ in range(200):
        a, c = rng.uniform(0.01, 5.0, 2)
        b, d = -rng.uniform(0.01, 5.0, 2)
        sp, zero = saddle_value((a, b, c, d), "classical")
        assert not zero
        assert np.isfinite(sp)


def test_rule_config_rejects_unknown_names():
    with pytest.raises(InputError):
        RuleConfig(rule="L5")
    with pytest.raises(InputError):
        RuleConfig(rule="L1_solid", decider="fast")
    assert set(DECIDER_VARIANTS) == {"classical", "paper"}


# -- shared behavior -----------------------------------------------------------


def test_unambiguous_phases_never_change():
    mesh = random_mesh(1)
    for rule in RULE_NAMES:
        res = resolve(mesh, RuleConfig(rule=rule))
        for t, p in zip(mesh.tets, res.phases):
            if t.tag == 0:
                assert p == t.corner_sign
            else:
                assert p in (SOLID, VOID)


def test_resolve_is_pure_and_repeatable():
    mesh = random_mesh(2)
    tags_before = [t.tag for t in mesh.tets]
    a = resolve(mesh, RuleConfig(rule="L4_max"))
    b = resolve(mesh, RuleConfig(rule="L4_max"))
    assert np.array_equal(a.phases, b.phases)
    assert a.phases is not b.phases
    assert [t.tag for t in mesh.tets] == tags_before


def test_g1_variants_bracket_every_rule():
    mesh = random_mesh(3)
    lo = solid_volume(resolve(mesh, RuleConfig(rule="G1_void")))
    hi = solid_volume(resolve(mesh, RuleConfig(rule="G1_solid")))
    assert lo < hi
    for rule in RULE_NAMES:
        v = solid_volume(resolve(mesh, RuleConfig(rule=rule)))
        assert lo - 1e-12 <= v <= hi + 1e-12


def test_report_counts_tet_kinds():
    mesh = random_mesh(4)
    res = resolve(mesh, RuleConfig(rule="G1_solid"))
    r = res.report
    assert r.n_tets == len(mesh.tets)
    assert r.n_iat == sum(1 for t in mesh.tets if t.tag == IAT)
    assert r.n_bat == sum(1 for t in mesh.tets if t.tag == BAT)
    assert r.n_at == r.n_iat + r.n_bat
    assert r.rule == "G1_solid"
    d = r.to_dict()
    assert d["n_at"] == r.n_at


# -- G1 / L1 -------------------------------------------------------------------


def test_g1_assigns_one_phase_to_all_ats():
    mesh = random_mesh(5)
    solid = resolve(mesh, RuleConfig(rule="G1_solid"))
    void = resolve(mesh, RuleConfig(rule="G1_void"))
    for i, t in enumerate(mesh.tets):
        if t.tag != 0:
            assert solid.phases[i] == SOLID
            assert void.phases[i] == VOID


def test_l1_forces_iats_but_asks_saddle_for_bats():
    mesh = random_mesh(6)
    ls = resolve(mesh, RuleConfig(rule="L1_solid"))
    lv = resolve(mesh, RuleConfig(rule="L1_void"))
    for i, t in enumerate(mesh.tets):
        if t.tag == IAT:
            assert ls.phases[i] == SOLID
            assert lv.phases[i] == VOID
        elif t.tag == BAT:
            # same decider, same answer under either IAT policy
            assert ls.phases[i] == lv.phases[i]


# -- L2 ------------------------------------------------------------------------

L2_LAT = HexLattice(dims=(2, 1, 1))
CODE_CELL0 = 65     # two opposite corners solid on the far face, has an IAT
CODE_CELL1 = 130    # mirrored pick for the other cell


def test_l2_cold_start_marks_intersected_cells_solid():
    fld = code_field(L2_LAT, {1: CODE_CELL1})     # cell 0 stays uniform void
    mesh = decompose(fld)
    assert mesh.uniform_cells == {0: VOID}
    res = resolve(mesh, RuleConfig(rule="L2"))
    assert res.report.iteration == 1
    for i, t in enumerate(mesh.tets):
        if t.tag == IAT:
            assert res.phases[i] == SOLID
    assert res.state.iteration == 1
    assert res.state.phases[0] == VOID
    assert res.state.phases[1] == SOLID


def test_l2_uniform_to_intersected_transition_keeps_void():
    first = decompose(code_field(L2_LAT, {1: CODE_CELL1}))
    state = resolve(first, RuleConfig(rule="L2")).state

    second = decompose(code_field(L2_LAT, {0: CODE_CELL0, 1: CODE_CELL1}))
    res = resolve(second, RuleConfig(rule="L2"), state=state)
    assert res.report.iteration == 2
    seen = {IAT: set()}
    for i, t in enumerate(second.tets):
        if t.tag == IAT:
            seen[IAT].add(t.owner_cell)
            expected = VOID if t.owner_cell == 0 else SOLID
            assert res.phases[i] == expected
    assert seen[IAT] == {0, 1}
    assert res.state.phases[0] == VOID
    assert res.state.phases[1] == SOLID


def test_l2_missing_state_counts_and_defaults_solid():
    mesh = decompose(code_field(L2_LAT, {0: CODE_CELL0, 1: CODE_CELL1}))
    state = IterationState(iteration=4, phases={0: VOID})
    res = resolve(mesh, RuleConfig(rule="L2"), state=state)
    assert res.report.iteration == 5
    assert res.report.missing_state_cells == 1
    for i, t in enumerate(mesh.tets):
        if t.tag == IAT and t.owner_cell == 1:
            assert res.phases[i] == SOLID


def test_l2_does_not_mutate_caller_state():
    mesh = decompose(code_field(L2_LAT, {1: CODE_CELL1}))
    state = IterationState(iteration=7, phases={5: SOLID})
    resolve(mesh, RuleConfig(rule="L2"), state=state)
    assert state.iteration == 7
    assert state.phases == {5: SOLID}


# -- L3 ------------------------------------------------------------------------


def test_l3_phase_matches_probe_interpolation():
    mesh = random_mesh(8)
    res = resolve(mesh, RuleConfig(rule="L3"))
    for cell, (lo, hi) in mesh.cell_tets.items():
        iats = [i for i in range(lo, hi) if mesh.tets[i].tag == IAT]
        if not iats:
            continue
        probe = np.stack([mesh.tets[i].coords.mean(axis=0) for i in iats]).mean(axis=0)
        value = interpolate_in_cell(mesh.field, cell, probe)
        expected = SOLID if value >= 0.0 else VOID
        assert all(res.phases[i] == expected for i in iats)


def test_l3_iat_phase_uniform_per_cell():
    mesh = random_mesh(9)
    res = resolve(mesh, RuleConfig(rule="L3"))
    for cell, (lo, hi) in mesh.cell_tets.items():
        phases = {int(res.phases[i]) for i in range(lo, hi) if mesh.tets[i].tag == IAT}
        assert len(phases) <= 1


# -- L4 ------------------------------------------------------------------------


def shared_areas(mesh, phases, members):
    """Boundary area between the given ATs and unambiguous neighbors."""
    fmap = mesh.facet_map()
    a_solid = a_void = 0.0
    for i in members:
        tet = mesh.tets[i]
        for skip in range(4):
            facet = frozenset(tet.verts[k] for k in range(4) if k != skip)
            incident = fmap[facet]
            if len(incident) != 2:
                continue
            other = incident[0] if incident[1] == i else incident[1]
            if mesh.tets[other].tag != 0:
                continue
            area = facet_area(tet, facet)
            if phases[other] == SOLID:
                a_solid += area
            else:
                a_void += area
    return a_solid, a_void


def test_l4_variants_follow_shared_area():
    mesh = random_mesh(10)
    mx = resolve(mesh, RuleConfig(rule="L4_max"))
    mn = resolve(mesh, RuleConfig(rule="L4_min"))
    base = np.array([t.corner_sign for t in mesh.tets], dtype=np.int8)
    flips = 0
    for cell, (lo, hi) in mesh.cell_tets.items():
        iats = [i for i in range(lo, hi) if mesh.tets[i].tag == IAT]
        if not iats:
            continue
        a_solid, a_void = shared_areas(mesh, base, iats)
        if a_solid > a_void:
            assert all(mx.phases[i] == SOLID for i in iats)
            assert all(mn.phases[i] == VOID for i in iats)
            flips += 1
        elif a_void > a_solid:
            assert all(mx.phases[i] == VOID for i in iats)
            assert all(mn.phases[i] == SOLID for i in iats)
            flips += 1
    assert flips > 0


def test_l4_zero_shared_area_falls_back_solid():
    # a cell whose IATs touch only other ambiguous tets has nothing to
    # compare; both variants fall back to solid and say so in the report
    mesh = random_mesh(11)
    res = resolve(mesh, RuleConfig(rule="L4_max"))
    base = np.array([t.corner_sign for t in mesh.tets], dtype=np.int8)
    expected_fallbacks = 0
    for cell, (lo, hi) in mesh.cell_tets.items():
        iats = [i for i in range(lo, hi) if mesh.tets[i].tag == IAT]
        if not iats:
            continue
        a_solid, a_void = shared_areas(mesh, base, iats)
        if a_solid == 0.0 and a_void == 0.0:
            expected_fallbacks += 1
            assert all(res.phases[i] == SOLID for i in iats)
    assert res.report.zero_area_fallbacks == expected_fallbacks


# -- G2 ------------------------------------------------------------------------


def test_g2_clusters_partition_ats():
    mesh = random_mesh(12)
    ids, clusters = build_at_clusters(mesh)
    ats = {i for i, t in enumerate(mesh.tets) if t.tag != 0}
    assert set(ids) == ats
    assert sorted(i for c in clusters for i in c) == sorted(ats)
    # ids are dense and ordered by smallest member
    firsts = [c[0] for c in clusters]
    assert firsts == sorted(firsts)
    assert set(ids.values()) == set(range(len(clusters)))


def test_g2_phase_constant_per_cluster_and_follows_area():
    mesh = random_mesh(13)
    mx = resolve(mesh, RuleConfig(rule="G2_max"))
    mn = resolve(mesh, RuleConfig(rule="G2_min"))
    assert mx.report.n_clusters == mn.report.n_clusters
    assert mx.cluster_ids == mn.cluster_ids
    base = np.array([t.corner_sign for t in mesh.tets], dtype=np.int8)
    _, clusters = build_at_clusters(mesh)
    decided = 0
    for members in clusters:
        pmx = {int(mx.phases[i]) for i in members}
        pmn = {int(mn.phases[i]) for i in members}
        assert len(pmx) == 1 and len(pmn) == 1
        a_solid, a_void = shared_areas(mesh, base, members)
        if a_solid > a_void:
            assert pmx == {SOLID} and pmn == {VOID}
            decided += 1
        elif a_void > a_solid:
            assert pmx == {VOID} and pmn == {SOLID}
            decided += 1
    assert decided > 0


def test_g2_cluster_adjacency_is_real():
    # every multi-member cluster is connected through shared facets
    mesh = random_mesh(14)
    _, clusters = build_at_clusters(mesh)
    fmap = mesh.facet_map()
    for members in clusters:
        if len(members) == 1:
            continue
        adj = {i: set() for i in members}
        mset = set(members)
        for facet, incident in fmap.items():
            if len(incident) == 2:
                i, j = incident
                if i in mset and j in mset:
                    adj[i].add(j)
                    adj[j].add(i)
        seen = {members[0]}
        queue = [members[0]]
        while queue:
            cur = queue.pop()
            for nxt in adj[cur]:
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
        assert seen == mset


# -- decider counters ----------------------------------------------------------

CHECKER = 0b10100101     # alternating corners: every face is ambiguous


def test_checkerboard_paper_decider_hits_zero_denominators():
    lat = HexLattice(dims=(1, 1, 1))
    mesh = decompose(code_field(lat, {0: CHECKER}))
    nbat = sum(1 for t in mesh.tets if t.tag == BAT)
    assert nbat > 0
    res = resolve(mesh, RuleConfig(rule="L1_void", decider="paper"))
    assert res.report.decider_zero_denominators == nbat
    for i, t in enumerate(mesh.tets):
        if t.tag == BAT:
            assert res.phases[i] == SOLID


def test_checkerboard_classical_decider_ties_to_solid():
    lat = HexLattice(dims=(1, 1, 1))
    mesh = decompose(code_field(lat, {0: CHECKER}))
    nbat = sum(1 for t in mesh.tets if t.tag == BAT)
    res = resolve(mesh, RuleConfig(rule="L1_void", decider="classical"))
    assert res.report.decider_ties == nbat
    for i, t in enumerate(mesh.tets):
        if t.tag == BAT:
            assert res.phases[i] == SOLID


def test_decider_irrelevant_for_global_rules():
    mesh = random_mesh(15)
    a = resolve(mesh, RuleConfig(rule="G1_solid", decider="classical"))
    b = resolve(mesh, RuleConfig(rule="G1_solid", decider="paper"))
    assert np.array_equal(a.phases, b.phases)
    assert a.report.decider_zero_denominators == 0
    assert a.report.decider_ties == 0
