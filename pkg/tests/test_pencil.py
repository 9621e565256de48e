"""Dispersion function, spectra, contours and the surface mode."""

from __future__ import annotations

import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from breather._scaled import ScaledComplex
from breather.errors import ModelError, QuadratureNotConverged, ZeroOnContour
from breather.pencil import (
    ContourRectangle,
    IndexCone,
    PencilContext,
    delta0_search,
    dispersion_G,
    dispersion_G_deriv,
    dispersion_G_inf,
    dispersion_G_scaled,
    dispersion_logderiv,
    eigenfunction,
    in_Omega0,
    newton_eigenvalue,
    resolvent_membership,
    spectral_quantities,
    untruncated_eigenvalues,
    winding_count,
    winding_count_function,
)

from conftest import OMEGA0_REF, T_REF


class TestUntruncatedRoots:
    def test_reference_root(self, probe):
        roots = untruncated_eigenvalues(probe, 1)
        assert len(roots) == 4
        best = min(abs(r - OMEGA0_REF) for r in roots)
        assert best < 1e-12

    def test_roots_satisfy_dispersion(self, probe):
        for r in untruncated_eigenvalues(probe, 1):
            val = dispersion_G_inf(probe, 1, r)
            scale = abs(dispersion_G_inf(probe, 1, r + 0.5)) + 1.0
            assert abs(val) < 1e-9 * scale

    def test_mirror_symmetry(self, probe):
        """Real-kernel symmetry: roots come in pairs w, -conj(w)."""
        roots = untruncated_eigenvalues(probe, 1)
        for r in roots:
            assert min(abs(s - (-r.conjugate())) for s in roots) < 1e-9


class TestNewton:
    def test_refined_eigenvalue_residual(self, probe):
        w = newton_eigenvalue(probe, 1, T_REF, 1.8 - 0.15j)
        g = dispersion_G(probe, 1, w, T_REF)
        assert abs(w - OMEGA0_REF) < 1e-10
        assert abs(g) < 1e-10

    def test_analytic_derivative_vs_fd(self, probe):
        w, h = 1.6 - 0.2j, 1e-6
        d = dispersion_G_deriv(probe, 1, w, T_REF)
        fd = (
            dispersion_G(probe, 1, w + h, T_REF)
            - dispersion_G(probe, 1, w - h, T_REF)
        ) / (2 * h)
        assert abs(d - fd) < 1e-4 * abs(d)

    def test_scaled_dispersion_matches_plain(self, probe):
        for w in (1.2 - 0.3j, -2.0 - 0.1j, 0.4 - 0.45j):
            a = dispersion_G(probe, 1, w, T_REF)
            b = dispersion_G_scaled(probe, 1, w, T_REF).to_complex(
                strict=True
            )
            assert abs(a - b) < 1e-10 * abs(a)


class TestWinding:
    def test_polynomial_zero_counts(self):
        zeros = (1.0 - 0.2j, -2.0 - 0.35j)

        def logderiv(w):
            w = np.asarray(w, dtype=complex)
            return sum(1.0 / (w - z) for z in zeros)

        both = ContourRectangle(a=5.0, y_top=0.0, y_bottom=-0.5)
        one = ContourRectangle(a=1.5, y_top=0.0, y_bottom=-0.5)
        shallow = ContourRectangle(a=5.0, y_top=0.0, y_bottom=-0.1)
        assert winding_count_function(logderiv, both)[0] == 2
        assert winding_count_function(logderiv, one)[0] == 1
        assert winding_count_function(logderiv, shallow)[0] == 0

    def test_zero_on_contour_detected(self):
        z = 1.0 - 0.5j

        def logderiv(w):
            w = np.asarray(w, dtype=complex)
            return 1.0 / (w - z)

        rect = ContourRectangle(a=5.0, y_top=0.0, y_bottom=-0.5)
        with pytest.raises((ZeroOnContour, QuadratureNotConverged)):
            winding_count_function(
                logderiv, rect,
                zero_probe=lambda w: math.log(abs(complex(w) - z)),
            )

    def test_reference_rectangle_counts_four(self, probe):
        gamma = probe.interface.minus.gamma
        rect = ContourRectangle(a=20.0, y_top=0.0, y_bottom=-gamma + 0.05)
        assert winding_count(probe, 1, T_REF, rect) == 4

    def test_delta0_shrinks_with_window(self, probe):
        cstar = math.sqrt(3.75)
        d_short = delta0_search(probe, 1, 51 * math.pi / cstar, a=8.0)
        d_long = delta0_search(probe, 1, 201 * math.pi / cstar, a=8.0)
        assert d_long < d_short


class TestSpectralQuantities:
    def test_base_point_values(self, ctx):
        sq = spectral_quantities(ctx, 1, 1)
        V_p, V_m, mu_p, mu_m = sq.as_complex(strict=True)
        itf = ctx.interface
        w = ctx.omega0
        eps_p = itf.permittivity("plus", w)
        assert abs(V_p - (-w * itf.mu0 * eps_p)) < 1e-12 * abs(V_p)
        assert abs(mu_p**2 - (ctx.k**2 + V_p * w)) < 1e-10 * abs(mu_p**2)
        assert mu_p.real > 0 and mu_m.real > 0

    def test_cone_frequencies(self, ctx):
        cone = IndexCone(4)
        pts = cone.members
        assert all(abs(n) <= nu for n, nu in pts)
        for n, nu in pts:
            w = ctx.omega(n, nu)
            assert abs(w - (n * ctx.omega_R + 1j * nu * ctx.omega_I)) == 0.0


class TestEigenfunction:
    def test_interface_continuity(self, ctx):
        phi = eigenfunction(ctx)
        lo = phi(np.array([-1e-9]))
        hi = phi(np.array([1e-9]))
        # second and third components continuous; first jumps
        assert abs(lo[1, 0] - hi[1, 0]) < 1e-6 * abs(lo[1, 0])
        assert abs(lo[2, 0] - hi[2, 0]) < 1e-4 * abs(lo[2, 0])
        assert abs(lo[0, 0] - hi[0, 0]) > 0.1 * abs(lo[0, 0])

    def test_decay_both_sides(self, ctx):
        phi = eigenfunction(ctx)
        vals = phi(np.array([-30.0, -1.0, 1.0, 30.0]))
        assert np.all(np.abs(vals[:, 0]) < 1e-6 * np.abs(vals[:, 1]))
        assert np.all(np.abs(vals[:, 3]) < 1e-6 * np.abs(vals[:, 2]))

    def test_first_order_system(self, ctx):
        """i phi2' + k phi1 + omega phi3 = 0 on each side (exactly, since
        phi2' = mu phi2 off the interface)."""
        phi = eigenfunction(ctx)
        for x in (-2.0, 3.0):
            h = 1e-6
            v = phi(np.array([x - h, x, x + h]))
            d2 = (v[1, 2] - v[1, 0]) / (2 * h)
            res = 1j * d2 + ctx.k * v[0, 1] + ctx.omega0 * v[2, 1]
            assert abs(res) < 1e-4 * max(abs(ctx.omega0 * v[2, 1]), 1e-12)


class TestMembership:
    def test_base_point_is_point_spectrum(self, ctx):
        assert resolvent_membership(ctx, 1, 1) == "point_spec"

    def test_deep_cone_is_resolvent(self, ctx):
        for n, nu in ((0, 2), (2, 2), (1, 3), (3, 5)):
            assert resolvent_membership(ctx, n, nu) == "resolvent"

    def test_omega0_set(self, ctx):
        assert in_Omega0(ctx, 0.0)
        assert not in_Omega0(ctx, 1.0 - 0.2j)


class TestModelGuards:
    def test_dispersion_needs_lorentz_minus(self, nl):
        from breather.susceptibility import Constant, MaterialInterface

        itf = MaterialInterface(minus=Constant(2.0), plus=Constant(2.0))
        ctx = PencilContext(itf, k=3.0, omega0=None)
        with pytest.raises(ModelError):
            dispersion_G(ctx, 1, 1.0 - 0.1j, 10.0)


class TestScaledArithmetic:
    @given(
        st.floats(-50, 50), st.floats(-50, 50),
        st.floats(-50, 50), st.floats(-50, 50),
    )
    @settings(max_examples=80, deadline=None)
    def test_product_consistency(self, a, b, c, d):
        z1, z2 = complex(a, b), complex(c, d)
        s = ScaledComplex.from_complex(z1) * ScaledComplex.from_complex(z2)
        assert cmath.isclose(
            s.to_complex(strict=False), z1 * z2,
            rel_tol=1e-12, abs_tol=1e-300,
        )

    @given(st.floats(-2000, 2000), st.floats(-2000, 2000))
    @settings(max_examples=80, deadline=None)
    def test_exp_log_roundtrip(self, re, im):
        s = ScaledComplex.exp(complex(re, im))
        assert math.isclose(s.log_mag, re, rel_tol=1e-12, abs_tol=1e-12)

    def test_overflow_safe_magnitudes(self):
        big = ScaledComplex.exp(5000.0 + 1.0j)
        small = ScaledComplex.exp(-5000.0 - 1.0j)
        prod = big * small
        assert abs(prod.to_complex(strict=True) - 1.0) < 1e-12
