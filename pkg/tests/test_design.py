import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from desense.design import (
    DesignPoint,
    film_with_prestretch,
    geometry_from_circle,
    score,
    score_geometry,
    sweep,
    write_sweep_csv,
    SWEEP_HEADER,
)
from desense.config import prototype_film
from desense.model import DomainError

QUARTER = math.pi / 2


def prototype_point(film, **kw):
    return DesignPoint(kw.pop("ri", 20.0), kw.pop("ro", 75.0), kw.pop("theta", QUARTER), film, **kw)


def test_prototype_geometry(film):
    g = geometry_from_circle(prototype_point(film))
    assert g.lower_base_bl == pytest.approx(2 * 20 * math.sin(math.pi / 4))
    assert g.upper_base_bu == pytest.approx(2 * 75 * math.sin(math.pi / 4))
    assert g.initial_height_h0 == 55.0
    # prototype rounds (28.3, 106.1) to (30, 100)
    assert abs(g.lower_base_bl - 30) < 2 and abs(g.upper_base_bu - 100) < 7
    assert g.mean_base == pytest.approx(65.0, rel=0.04)


def test_degenerate_limit(film):
    g = geometry_from_circle(prototype_point(film, ri=74.999))
    assert g.initial_height_h0 == pytest.approx(0.001)
    with pytest.raises(DomainError):
        prototype_point(film, ri=75.0)
    with pytest.raises(DomainError):
        prototype_point(film, theta=2.0)


def test_inner_radius_tradeoff(film):
    gs = [geometry_from_circle(prototype_point(film, ri=r)) for r in (15, 20, 30, 40)]
    assert all(b.lower_base_bl > a.lower_base_bl for a, b in zip(gs, gs[1:]))
    assert all(b.initial_height_h0 < a.initial_height_h0 for a, b in zip(gs, gs[1:]))


def test_prototype_cell_score(cell):
    s = score_geometry(cell)
    assert s.sensitivity == pytest.approx(66.968, rel=1e-4)
    assert abs(s.base_capacitance - 900) < 50
    assert s.stretch_ok
    assert s.parasitic_z_gain == pytest.approx(1 / 110)
    assert s.linearity_error > 0


def test_prototype_point_score(film):
    s = score(prototype_point(film))
    assert abs(s.sensitivity - 66.0) < 4.0
    assert abs(s.base_capacitance - 900.0) < 60.0
    assert s.stretch_ok


def test_single_layer_doubles(cell):
    from dataclasses import replace

    thin = replace(cell, film=replace(cell.film, initial_thickness_d0=cell.film.initial_thickness_d0 / 2))
    assert score_geometry(thin).sensitivity == pytest.approx(2 * score_geometry(cell).sensitivity, rel=1e-12)
    assert score_geometry(thin).sensitivity == pytest.approx(133.94, rel=1e-3)


def test_prestretch_4x4(film):
    base = score(prototype_point(film)).sensitivity
    more = score(prototype_point(film_with_prestretch(film, 4.0))).sensitivity
    assert more / base == pytest.approx((4 / 3) ** 2, rel=1e-12)


def test_sweep_directions(film):
    rows = sweep(film, [15, 20, 30, 40])
    assert [r["ri_mm"] for r in rows] == [15, 20, 30, 40]
    for key in ("sens_pF_per_mm", "linerr", "zgain_per_mm"):
        vals = [r[key] for r in rows]
        assert all(b > a for a, b in zip(vals, vals[1:])), key


def test_sweep_empty_and_exact(film):
    assert sweep(film, []) == []
    rows = sweep(film, [10, 20, 30])
    s = score(prototype_point(film))
    row = rows[1]
    assert row["sens_pF_per_mm"] == s.sensitivity
    assert row["linerr"] == s.linearity_error
    assert row["C0_pF"] == s.base_capacitance


def test_sweep_flags_and_drops(film):
    rows = sweep(film, [20, 50, 80], prestretch_values=[3.0, 5.5])
    # ri = 80 > ro dropped; 5.5x pre-stretch overstretches
    assert {r["ri_mm"] for r in rows} == {20, 50}
    assert any(not r["stretch_ok"] for r in rows)


def test_sweep_parallel_matches_serial(film):
    kw = dict(ri_values=[15, 20, 30, 40], prestretch_values=[3.0, 4.0], layer_values=[1, 2])
    assert sweep(film, **kw, workers=2) == sweep(film, **kw)


def test_sweep_csv(film, tmp_path):
    path = tmp_path / "sweep.csv"
    write_sweep_csv(sweep(film, [20, 30]), path)
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(SWEEP_HEADER)
    assert len(lines) == 3


@given(st.floats(10, 49), st.floats(0.5, 5))
def test_tradeoff_monotonicity(ri, dr):
    film = prototype_film()
    a = score(prototype_point(film, ri=ri))
    b = score(prototype_point(film, ri=min(ri + dr, 50)))
    ga = geometry_from_circle(prototype_point(film, ri=ri))
    gb = geometry_from_circle(prototype_point(film, ri=min(ri + dr, 50)))
    assert b.sensitivity > a.sensitivity
    assert gb.initial_height_h0 < ga.initial_height_h0


def test_scaling_laws(cell):
    from dataclasses import replace

    s = score_geometry(cell).sensitivity
    f = cell.film
    assert score_geometry(replace(cell, film=replace(f, relative_permittivity=2 * f.relative_permittivity))).sensitivity == pytest.approx(2 * s)
    assert score_geometry(replace(cell, film=replace(f, layer_count=2))).sensitivity == pytest.approx(2 * s)
    assert score_geometry(cell.scaled(2.0)).sensitivity == pytest.approx(2 * s)
    assert score_geometry(replace(cell, film=replace(f, initial_thickness_d0=2 * f.initial_thickness_d0))).sensitivity == pytest.approx(s / 2)


def test_score_deterministic(film):
    assert score(prototype_point(film)) == score(prototype_point(film))
