"""Kernel evaluation: closed forms, independent oracles, backend agreement."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import airy as scipy_airy

from kernelwave.kernels import (
    KernelQuery,
    KernelValue,
    eval_kernel,
    heat_term,
    relation_connS,
    relation_connSS,
    rescaled_airy_lhs,
    rescaled_pearcey_lhs,
    transition_interpolation_check,
)
from kernelwave.kernels import _direct_airy  # deformation-invariance check
from kernelwave.quadrature import QuadOptions

coord = st.floats(-1.5, 1.5, allow_nan=False)


def _val(kernel, tau1=0.0, tau2=0.0, u=0.0, v=0.0, a=None, backend="direct"):
    return eval_kernel(
        KernelQuery(kernel, tau1, tau2, u, v, a_param=a, backend=backend)
    )


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------


def test_heat_term_values():
    assert heat_term(0.0, 1.0, "four-pi") == 0.0
    assert heat_term(-0.5, 1.0, "two-pi") == 0.0
    dt, dx = 0.7, -0.4
    want4 = np.exp(-(dx ** 2) / (4 * dt)) / np.sqrt(4 * np.pi * dt)
    want2 = np.exp(-(dx ** 2) / (2 * dt)) / np.sqrt(2 * np.pi * dt)
    assert abs(heat_term(dt, dx, "four-pi") - want4) < 1e-15
    assert abs(heat_term(dt, dx, "two-pi") - want2) < 1e-15
    with pytest.raises(ValueError):
        heat_term(dt, dx, "six-pi")


@pytest.mark.parametrize("du", [0.5, 1.0, 0.25, -0.8])
def test_sine_ext_equal_times_is_sinc(du):
    kv = _val("sine-ext", 0.3, 0.3, du, 0.0)
    want = np.sin(np.pi * du) / (np.pi * du)
    assert abs(kv.value.real - want) < 1e-10


def test_sine_ext_diagonal_limit():
    kv = _val("sine-ext", -0.2, -0.2, 0.7, 0.7)
    assert abs(kv.value.real - 1.0) < 1e-10


def test_s1_diagonal_value():
    kv = _val("s1", 0.4, 0.4, -0.3, -0.3)
    assert abs(kv.value.real - 1.0 / np.pi) < 1e-12


def test_s2_diagonal_value():
    kv = _val("s2", -0.1, -0.1, 0.6, 0.6)
    assert abs(kv.value.real - np.sqrt(3.0) / (2 * np.pi)) < 1e-12


def test_airy_ext_zero_times_matches_classic_kernel():
    # tau1 = tau2 = 0 reduces to (Ai(u)Ai'(v) - Ai'(u)Ai(v))/(u - v)
    for u, v in [(0.3, -0.2), (0.7, 0.1), (-0.5, -1.1)]:
        Aiu, Aipu, _, _ = scipy_airy(u)
        Aiv, Aipv, _, _ = scipy_airy(v)
        want = (Aiu * Aipv - Aipu * Aiv) / (u - v)
        kv = _val("airy-ext", 0.0, 0.0, u, v)
        assert abs(kv.value.real - want) < 1e-8


def test_airy_ext_origin_is_derivative_squared():
    aip0 = scipy_airy(0.0)[1]
    kv = _val("airy-ext", 0.0, 0.0, 0.0, 0.0)
    assert abs(kv.value.real - aip0 ** 2) < 1e-8


# ---------------------------------------------------------------------------
# realness, symmetry under shifts, deformation invariance
# ---------------------------------------------------------------------------


def test_kernels_are_real_on_sample_points():
    rng = np.random.default_rng(5)
    for kernel in ("sine-ext", "s1", "s2", "airy-ext", "pearcey-ext"):
        t1, t2, u, v = rng.uniform(-1, 1, size=4)
        kv = _val(kernel, t1, t2, u, v)
        assert kv.imag_residual < 1e-9, kernel


@given(coord, coord, coord, coord, st.floats(-0.5, 0.5), st.floats(-0.5, 0.5))
def test_segment_kernels_depend_only_on_differences(t1, t2, u, v, ct, cu):
    # the three segment kernels are invariant under common shifts
    for kernel in ("s1", "s2", "sine-ext"):
        base = _val(kernel, t1, t2, u, v).value
        moved = _val(kernel, t1 + ct, t2 + ct, u + cu, v + cu).value
        assert abs(base - moved) < 1e-10


def test_direct_airy_contour_deformation_invariance():
    opts = QuadOptions()
    vals = [
        _direct_airy(0.2, -0.1, 0.3, -0.4, opts, sigma_vertex=s, gamma_vertex=g)[0]
        for s, g in ((0.25, -0.25), (0.1, -0.3), (0.6, -0.1), (0.35, -0.6))
    ]
    for v in vals[1:]:
        assert abs(v - vals[0]) < 1e-9


def test_direct_airy_rejects_swapped_contours():
    from kernelwave.quadrature import GeometryError

    with pytest.raises(GeometryError):
        _direct_airy(0.0, 0.0, 0.0, 0.0, QuadOptions(),
                     sigma_vertex=-0.3, gamma_vertex=0.3)


# ---------------------------------------------------------------------------
# backends and rescaled left-hand sides
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("kernel", ["airy-ext", "pearcey-ext"])
def test_backends_agree(kernel):
    for t1, t2, u, v in [(0.2, -0.1, 0.4, -0.3), (-0.3, 0.25, -0.6, 0.1)]:
        d = _val(kernel, t1, t2, u, v, backend="direct")
        s = _val(kernel, t1, t2, u, v, backend="saddle")
        assert abs(d.value - s.value) < 1e-8
        assert d.backend_used == "direct" and s.backend_used == "saddle"


def test_rescaled_airy_lhs_backends_agree():
    d = rescaled_airy_lhs(3.0, 0.2, -0.1, 0.4, -0.3, "direct")
    s = rescaled_airy_lhs(3.0, 0.2, -0.1, 0.4, -0.3, "saddle")
    assert abs(d.value - s.value) < 1e-8


def test_rescaled_pearcey_lhs_backends_agree():
    d = rescaled_pearcey_lhs(3.0, 0.2, -0.1, 0.4, -0.3, "direct")
    s = rescaled_pearcey_lhs(3.0, 0.2, -0.1, 0.4, -0.3, "saddle")
    assert abs(d.value - s.value) < 1e-8


def test_rescaled_lhs_converges_to_segment_kernel():
    # at large a the rescaled kernels approach their stationary limits
    point = (0.3, -0.2, 0.25, 0.1)
    u, v, t1, t2 = point
    s1 = _val("s1", t1, t2, u, v).value.real
    s2 = _val("s2", t1, t2, u, v).value.real
    for a, tol in ((8.0, 2e-2), (20.0, 4e-3)):
        assert abs(rescaled_airy_lhs(a, t1, t2, u, v).value.real - s1) < tol
    for a, tol in ((8.0, 3e-2), (20.0, 8e-3)):
        assert abs(rescaled_pearcey_lhs(a, t1, t2, u, v).value.real - s2) < tol


def test_error_estimates_are_honest():
    # reference: the same query at doubled node count and tighter tolerance
    tight = QuadOptions(rel_tol=1e-13, abs_tol=1e-16, nodes_per_panel=64)
    queries = [
        KernelQuery("sine-ext", 0.3, -0.2, 0.8, 0.1),
        KernelQuery("s1", -0.4, 0.2, 0.3, -0.6),
        KernelQuery("s2", 0.1, -0.3, -0.2, 0.5),
        KernelQuery("airy-ext", 0.15, -0.1, 0.4, -0.25),
        KernelQuery("pearcey-ext", -0.2, 0.1, 0.5, 0.3),
    ]
    for q in queries:
        kv = eval_kernel(q)
        ref = eval_kernel(
            KernelQuery(q.kernel, q.tau1, q.tau2, q.u, q.v, opts=tight)
        )
        true_err = abs(kv.value - ref.value)
        assert true_err <= max(5.0 * kv.error_estimate, 1e-11), q.kernel


# ---------------------------------------------------------------------------
# exact relations
# ---------------------------------------------------------------------------


def test_relation_connS_holds():
    for t1, t2, u, v in [(0.4, -0.2, 0.3, -0.5), (0.0, 0.3, -0.7, 0.2)]:
        lhs, rhs = relation_connS(t1, t2, u, v)
        assert abs(lhs.value - rhs.value) < 1e-10


def test_relation_connSS_holds():
    for t1, t2, u, v in [(0.4, -0.2, 0.3, -0.5), (-0.3, 0.1, 0.6, -0.4)]:
        lhs, rhs = relation_connSS(t1, t2, u, v)
        assert abs(lhs.value - rhs.value) < 1e-10


def test_transition_zero_matches_quartic_kernel():
    lhs, rhs = transition_interpolation_check(0.0, 0.2, -0.1, 0.3, -0.4)
    assert abs(lhs.value - rhs.value) < 1e-10


def test_transition_rejects_negative_a():
    with pytest.raises(ValueError):
        transition_interpolation_check(-1.0, 0.0, 0.0, 0.0, 0.0)


# ---------------------------------------------------------------------------
# query plumbing
# ---------------------------------------------------------------------------


def test_query_validation():
    with pytest.raises(ValueError):
        KernelQuery("unknown-kernel")
    with pytest.raises(ValueError):
        KernelQuery("transition-a")  # needs a_param
    with pytest.raises(ValueError):
        KernelQuery("s1", a_param=2.0)  # a_param is transition-only
    with pytest.raises(ValueError):
        KernelQuery("s1", backend="magic")


def test_kernel_value_wrap_records_imag_residual():
    kv = KernelValue.wrap(1.0 + 1e-12j, 1e-14, "direct")
    assert kv.imag_residual == pytest.approx(1e-12)
    assert kv.backend_used == "direct"


def test_transition_a_runs_and_is_real():
    kv = _val("transition-a", 0.2, -0.1, 0.3, 0.1, a=1.5)
    assert kv.imag_residual < 1e-9
