import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nrems.ems import (
    AnchorScheme,
    aperture_duration_bound,
    build_modular_ems,
    double_focus_phases,
    effective_aperture,
    elements_per_module,
    full_coverage_duration,
    module_linear_profile,
    plane_wave_focus_profile,
    quantize_phases,
    select_anchor_points,
)
from nrems.geometry import GeometryError, Point2, mirror_continuation

from scenes import LAM

TWO_PI = 2 * math.pi
K0 = TWO_PI / LAM
PSI60 = math.radians(60.0)
H60 = 10.0 * math.sin(PSI60)


def wrap(v):
    return np.angle(np.exp(1j * np.asarray(v)))


def design_source(xc, psi, height):
    return Point2(xc - height / math.tan(psi), height)


# --------------------------------------------------------------- double focusing


def test_double_focus_trivial_element():
    v = double_focus_phases((0, 1), (0, 1), np.array([0.0]), 1.0)[0]
    assert min(v, TWO_PI - v) < 1e-12


def test_double_focus_conjugate_sum_is_n():
    x = (np.arange(200) - 100) * LAM / 4
    s, r = Point2(-5.0, 8.0), Point2(3.0, 14.0)
    phi = double_focus_phases(s, r, x, LAM)
    path = np.hypot(x - s.x, s.y) + np.hypot(r.x - x, r.y)
    af = np.sum(np.exp(1j * phi) * np.exp(-1j * K0 * path))
    assert abs(af) == pytest.approx(len(x), rel=1e-9)

    s2 = s.shifted(LAM / 2, 0.0)
    path2 = np.hypot(x - s2.x, s2.y) + np.hypot(r.x - x, r.y)
    assert abs(np.sum(np.exp(1j * phi) * np.exp(-1j * K0 * path2))) < abs(af)


def test_double_focus_rejects_points_below_skin():
    with pytest.raises(GeometryError):
        double_focus_phases((0, -1), (0, 1), np.zeros(1), LAM)


# --------------------------------------------------------------- module gradient


def test_module_profile_specular_is_zero():
    s = Point2(-8.0, 6.0)
    centre = Point2(0.0, 0.0)
    anchor = mirror_continuation(s, centre, 14.0)
    prof = module_linear_profile(centre, np.arange(-51, 52), s, anchor, LAM / 4, LAM)
    assert np.max(np.abs(prof)) < 1e-12


def test_module_profile_vertical_incidence_is_zero():
    prof = module_linear_profile((2.0, 0.0), np.arange(-5, 6), (2.0, 10.0), (2.0, 20.0), LAM / 4, LAM)
    assert np.all(prof == 0.0)


def test_module_profile_rejects_anchor_at_centre():
    with pytest.raises(GeometryError):
        module_linear_profile((0.0, 0.0), [0, 1], (0, 1), (0.0, 0.0), LAM / 4, LAM)
    with pytest.raises(GeometryError):
        module_linear_profile((0.0, 1.0), [0, 1], (0, 1), (0.0, 2.0), LAM / 4, LAM)


@pytest.mark.parametrize("anchor", [(5.0, 5.0), (-3.0, 6.0), (2.0, 12.0)])
def test_module_profile_matches_brute_force_scan(anchor):
    """Scan linear increments at 1 mrad against the exact path sum and compare."""
    pitch, n_mod = LAM / 4, 103
    psi = math.pi / 4
    s = design_source(0.0, psi, 10.0 * math.sin(psi))
    offsets = np.arange(n_mod) - 0.5 * (n_mod - 1)
    prof = module_linear_profile((0.0, 0.0), offsets, s, anchor, pitch, LAM)
    inc = prof[1] - prof[0]

    x = offsets * pitch
    path = np.hypot(x - s.x, s.y) + np.hypot(anchor[0] - x, anchor[1])
    geo = np.exp(-1j * K0 * path)
    grid = np.arange(-math.pi, math.pi, 1e-3)
    power = np.abs(np.exp(1j * np.outer(grid, offsets)) @ geo) ** 2
    best = grid[np.argmax(power)]
    assert abs(wrap(best - inc)) <= 2e-3


def test_single_module_is_phase_matched_and_offset_invariant():
    pitch, n_mod = LAM / 4, 103
    lay = build_modular_ems(1, 1, n_mod, pitch, LAM, PSI60, [(4.0, 15.0)], source_height=H60)
    g = lay.module_slopes[0] / K0
    sums = []
    for offset in (0.0, 1.234):
        term = np.exp(1j * (lay.phases + offset)) * np.exp(-1j * K0 * g * lay.element_x)
        sums.append(abs(term.sum()))
    assert sums[0] == pytest.approx(n_mod, rel=1e-9)
    assert sums[1] == pytest.approx(sums[0], rel=1e-12)


# --------------------------------------------------------------- assembly


def test_full_scale_counts():
    n_mod = elements_per_module(0.1, LAM / 4)
    assert n_mod == 103
    anchors = select_anchor_points(AnchorScheme((15.0, 25.0, 35.0), 4, (-5, 5, 10, 50)))[:4]
    lay = build_modular_ems(4, 5, n_mod, LAM / 4, LAM, PSI60, anchors, source_height=H60)
    assert lay.n_elements == 2060
    assert lay.n_modules == 20
    assert np.array_equal(np.bincount(lay.module_id), np.full(20, 103))
    assert np.array_equal(np.bincount(lay.cluster_id), np.full(4, 515))
    assert np.array_equal(lay.cluster_id, lay.module_id // 5)
    idx = lay.element_index
    assert idx[0] == -1030 and idx[-1] == 1029
    for m in range(lay.n_modules):
        second = np.diff(lay.phases[lay.module_id == m], 2)
        assert np.max(np.abs(second)) < 1e-9


def test_degenerate_single_module():
    lay = build_modular_ems(1, 1, 7, LAM / 4, LAM, PSI60, [(0.0, 10.0)], source_height=H60)
    assert lay.n_elements == 7 and lay.n_modules == 1
    assert np.max(np.abs(np.diff(lay.phases, 2))) < 1e-9


def test_inconsistent_counts_rejected():
    with pytest.raises(ValueError):
        build_modular_ems(2, 5, 10, LAM / 4, LAM, PSI60, [(0, 10)], source_height=H60)
    with pytest.raises(ValueError):
        build_modular_ems(1, 0, 10, LAM / 4, LAM, PSI60, [(0, 10)], source_height=H60)


def test_specular_anchor_gives_flat_profile():
    """Anchor on the specular ray: zero gradient, so a plain mirror up to one constant."""
    pitch = LAM / 4
    s = design_source(0.0, PSI60, H60)
    anchor = mirror_continuation(s, Point2(0.0, 0.0), 20.0)
    lay = build_modular_ems(1, 1, 101, pitch, LAM, PSI60, [anchor], source_height=H60)
    assert np.max(np.abs(wrap(np.diff(lay.phases)))) < 1e-12
    assert abs(lay.module_slopes[0]) < 1e-9


def _fig3_layout(n_mod, modules):
    return build_modular_ems(1, modules, n_mod, LAM / 4, LAM, PSI60, [(0.0, 15.0)], source_height=H60)


def test_piecewise_profile_within_quarter_pi_of_double_focus():
    lay = _fig3_layout(103, 5)
    anchor = lay.anchors[0]
    worst = 0.0
    for m, xc in enumerate(lay.module_centers):
        sel = lay.module_id == m
        exact = double_focus_phases(design_source(xc, PSI60, H60), anchor, lay.element_x[sel], LAM)
        dev = wrap(lay.phases[sel] - exact)
        # the per-module constant is the source progression, compensated in focusing
        dev = wrap(dev - np.angle(np.mean(np.exp(1j * dev))))
        worst = max(worst, float(np.max(np.abs(dev))))
    assert worst < math.pi / 4

    ref = plane_wave_focus_profile(lay.element_x, PSI60, anchor, LAM)
    assert np.max(np.abs(wrap(lay.phases - ref))) < math.pi / 4


def test_piecewise_error_decreases_with_module_count():
    errors = []
    for modules in (1, 2, 5, 10):
        lay = _fig3_layout(520 // modules, modules)
        ref = plane_wave_focus_profile(lay.element_x, PSI60, lay.anchors[0], LAM)
        dev = wrap(lay.phases - ref)
        dev = wrap(dev - np.angle(np.mean(np.exp(1j * dev))))
        errors.append(float(np.max(np.abs(dev))))
    assert all(a > b for a, b in zip(errors, errors[1:])), errors


def test_quantizer():
    phases = np.linspace(-7.0, 7.0, 1001)
    q = quantize_phases(phases, 2)
    assert set(np.round(q / (math.pi / 2)).astype(int)) <= {0, 1, 2, 3}
    assert np.max(np.abs(wrap(q - phases))) <= math.pi / 4 + 1e-12
    with pytest.raises(ValueError):
        quantize_phases(phases, 0)


def test_elements_per_module():
    assert elements_per_module(0.1, LAM / 2) == 51
    with pytest.raises(ValueError):
        elements_per_module(1e-4, LAM)


# --------------------------------------------------------------- anchors


def test_full_scale_anchor_scheme():
    anchors = select_anchor_points(AnchorScheme((15.0, 25.0, 35.0), 4, (-5, 5, 10, 50)))
    assert len(anchors) == 12
    for i, a in enumerate(anchors):
        assert math.hypot(*a) == pytest.approx([15.0, 25.0, 35.0][i // 4], abs=1e-9)
        assert -5 <= a.x <= 5 and 10 <= a.y <= 50
    xs = [a.x for a in anchors[:4]]
    assert xs == sorted(xs)


def test_single_symmetric_anchor_on_axis():
    (a,) = select_anchor_points(AnchorScheme((20.0,), 1, (-4, 4, 5, 30)))
    assert a.x == pytest.approx(0.0, abs=1e-12)
    assert a.y == pytest.approx(20.0, abs=1e-12)


@given(st.floats(5.0, 40.0), st.integers(1, 6))
def test_anchors_lie_on_iso_range(radius, count):
    area = (-5.0, 5.0, 4.0, 45.0)
    anchors = select_anchor_points(AnchorScheme((radius,), count, area))
    assert len(anchors) == count
    for a in anchors:
        assert math.hypot(*a) == pytest.approx(radius, abs=1e-9)
        assert area[0] - 1e-9 <= a.x <= area[1] + 1e-9


def test_anchor_arc_missing_area_rejected():
    with pytest.raises(GeometryError):
        select_anchor_points(AnchorScheme((5.0,), 2, (-5, 5, 10, 30)))
    with pytest.raises(GeometryError):
        AnchorScheme((-1.0,), 2, (-5, 5, 10, 30))


# --------------------------------------------------------------- apertures


def test_effective_aperture_examples():
    assert effective_aperture(0.0, 1.0, 10.0, 0.017453, math.pi / 2) == pytest.approx(0.17453, abs=1e-5)
    assert effective_aperture(10.0, 0.2, 10.0, 0.017453, math.pi / 2) == pytest.approx(2.1745, abs=1e-4)
    assert 5 * 103 * LAM / 4 == pytest.approx(0.501, abs=1e-3)
    with pytest.raises(GeometryError):
        effective_aperture(1.0, 1.0, 10.0, 0.01, 0.0)


def test_aperture_duration_bound():
    assert aperture_duration_bound(5, 103, 103, 0.97335e-3, 10.0) == pytest.approx(0.0401, abs=1e-4)
    assert aperture_duration_bound(5, 103, 515, 0.97335e-3, 10.0) == 0.0
    assert aperture_duration_bound(5, 103, 1000, 0.97335e-3, 10.0) == 0.0
    with pytest.raises(ValueError):
        aperture_duration_bound(5, 103, 100, 1e-3, 0.0)


def test_full_coverage_duration():
    t = full_coverage_duration(4, 5, 103, LAM / 4, 10.0)
    assert t == pytest.approx(4 * 5 * 103 * LAM / 4 / 10.0, rel=1e-12)
    assert t == pytest.approx(0.2005, abs=1e-4)


def test_layout_is_immutable_and_mirror_is_zero():
    lay = _fig3_layout(20, 2)
    with pytest.raises(ValueError):
        lay.phases[0] = 1.0
    mir = lay.as_mirror()
    assert np.all(mir.phases == 0.0)
    moved = lay.shifted(1.5)
    assert np.allclose(moved.element_x, lay.element_x + 1.5)
    assert np.array_equal(moved.phases, lay.phases)
