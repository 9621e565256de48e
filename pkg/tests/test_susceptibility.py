"""Quadrature oracles for the closed-form kernel transforms.

Every truncated transform in the package is exponential-sum algebra; here
each one is checked against direct Gauss-Legendre integration of its
time-domain kernel, which shares no code with the implementation.
"""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from breather.errors import ConfigError, DomainError, PoleError
from breather.susceptibility import (
    Constant,
    MaterialInterface,
    NonlinearSusceptibility,
    TruncatedDrude,
    TruncatedLorentz,
    UntruncatedDrude,
    UntruncatedLorentz,
    ft_chi1,
    ft_chi2_truncated,
    ft_chi2_untruncated,
    ft_chi3_truncated,
)

RNG = np.random.default_rng(20260823)


def gauss(a, b, n=60):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w


def lorentz_kernel(c_L, gamma, omega_star):
    cs = math.sqrt(omega_star**2 - gamma**2)
    return lambda t: c_L * np.exp(-gamma * t) * np.sin(cs * t) / cs


def drude_kernel(c_D, gamma):
    return lambda t: (c_D / gamma) * (1.0 - np.exp(-gamma * t))


def quad_chi1(kernel, T, omega, n=120):
    t, w = gauss(0.0, T, n)
    return complex(np.sum(w * np.exp(1j * omega * t) * kernel(t)))


# ----------------------------------------------------------------------
# Linear models
# ----------------------------------------------------------------------

class TestLinearTransforms:
    def test_truncated_lorentz_vs_quadrature_sweep(self):
        model = TruncatedLorentz(c_L=20.0, gamma=0.5, omega_star=2.0, T=8.0)
        kern = lorentz_kernel(20.0, 0.5, 2.0)
        for _ in range(100):
            w = complex(RNG.uniform(-6, 6), RNG.uniform(-1.2, 1.2))
            exact = ft_chi1(model, w)
            ref = quad_chi1(kern, 8.0, w, n=200)
            assert abs(exact - ref) < 1e-10 * max(1.0, abs(ref))

    def test_truncated_drude_vs_quadrature_sweep(self):
        model = TruncatedDrude(c_D=4.0, gamma=0.5, T=6.0)
        kern = drude_kernel(4.0, 0.5)
        for _ in range(100):
            w = complex(RNG.uniform(-6, 6), RNG.uniform(-1.2, 1.2))
            exact = ft_chi1(model, w)
            ref = quad_chi1(kern, 6.0, w, n=200)
            assert abs(exact - ref) < 1e-10 * max(1.0, abs(ref))

    def test_truncation_converges_to_untruncated(self):
        w = 1.3 + 0.4j
        un = UntruncatedLorentz(c_L=20.0, gamma=0.5, omega_star=2.0)
        for T in (20.0, 40.0):
            tr = TruncatedLorentz(c_L=20.0, gamma=0.5, omega_star=2.0, T=T)
            gap = abs(ft_chi1(tr, w) - ft_chi1(un, w))
            # Remainder is an integral of e^{(Im w - gamma) t} past T.
            assert gap < 10.0 * math.exp(-(0.5 - 0.4) * T)

    def test_untruncated_domain_guard(self):
        un = UntruncatedLorentz(c_L=20.0, gamma=0.5, omega_star=2.0)
        with pytest.raises(DomainError):
            ft_chi1(un, 1.0 - 0.6j)
        with pytest.raises(DomainError):
            ft_chi1(UntruncatedDrude(c_D=4.0, gamma=0.5), 1.0 - 0.1j)

    def test_constant_and_validation(self):
        assert ft_chi1(Constant(alpha=2.0), 5.0 + 3.0j) == 2.0
        with pytest.raises(ConfigError):
            TruncatedLorentz(c_L=20.0, gamma=2.5, omega_star=2.0, T=1.0)
        with pytest.raises(ConfigError):
            Constant(alpha=-1.0)

    def test_scaled_transform_matches_plain(self):
        model = TruncatedLorentz(c_L=20.0, gamma=0.5, omega_star=2.0, T=8.0)
        for w in (0.5 - 0.9j, -2.0 + 0.3j, 4.0 - 0.2j):
            s = model.ft_scaled(w).to_complex(strict=True)
            assert abs(s - model.ft(w)) < 1e-12 * abs(s)

    @given(
        st.floats(-8, 8, allow_nan=False),
        st.floats(-1.0, 1.0, allow_nan=False),
    )
    @settings(max_examples=60, deadline=None)
    def test_real_kernel_conjugation_symmetry(self, re, im):
        model = TruncatedLorentz(c_L=20.0, gamma=0.5, omega_star=2.0, T=5.0)
        w = complex(re, im)
        lhs = ft_chi1(model, -w.conjugate())
        rhs = ft_chi1(model, w).conjugate()
        assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(rhs))


# ----------------------------------------------------------------------
# Nonlinear transforms
# ----------------------------------------------------------------------

def make_nl(T_N):
    c2 = np.zeros((3, 3, 3))
    c3 = np.zeros((3, 3, 3, 3))
    for j in range(3):
        c2[j, j, j] = 2000.0
        c3[j, j, j, j] = 1000.0
    return NonlinearSusceptibility(
        c2=c2, c3=c3, gamma_tilde=1.0, omega_star_tilde=3.0, T_N=T_N
    )


def oscillator(t, gamma_t=1.0, omega_t=3.0):
    ct = math.sqrt(omega_t**2 - gamma_t**2)
    return np.exp(-gamma_t * t) * np.sin(ct * t) / ct


def quad_chi2_scalar(T, w1, w2, n=24):
    """Direct integral of e^{i(w1 t1 + w2 t2)} K2 over [0, T]^2.

    K2(t1, t2) = int_0^{min} D(s) D(t1 - s) D(t2 - s) ds; the square is
    split along the diagonal so every nested integrand is smooth.
    """
    total = 0.0 + 0.0j
    xg, wg = np.polynomial.legendre.leggauss(n)
    for wa, wb in ((w1, w2), (w2, w1)):
        # region t_a <= t_b
        ta = 0.5 * T * (xg + 1.0)
        wta = 0.5 * T * wg
        for i, t1 in enumerate(ta):
            tb = t1 + 0.5 * (T - t1) * (xg + 1.0)
            wtb = 0.5 * (T - t1) * wg
            s = 0.5 * t1 * (xg + 1.0)
            ws = 0.5 * t1 * wg
            inner = np.array([
                np.sum(ws * oscillator(s) * oscillator(t1 - s)
                       * oscillator(t2 - s))
                for t2 in tb
            ])
            total += wta[i] * np.sum(
                wtb * np.exp(1j * (wa * t1 + wb * tb)) * inner
            )
    return total


def quad_chi3_scalar(T, w1, w2, w3, n=12):
    """Direct integral of the cubic kernel over [0, T]^3 by ordered
    simplices: sum over the 6 orderings of (t1, t2, t3)."""
    xg, wg = np.polynomial.legendre.leggauss(n)
    total = 0.0 + 0.0j
    freqs = (w1, w2, w3)
    import itertools

    for perm in itertools.permutations(range(3)):
        wa, wb, wc = (freqs[perm[0]], freqs[perm[1]], freqs[perm[2]])
        # t_a <= t_b <= t_c, inner memory integral over s in [0, t_a].
        ta = 0.5 * T * (xg + 1.0)
        wta = 0.5 * T * wg
        for i, t1 in enumerate(ta):
            tb = t1 + 0.5 * (T - t1) * (xg + 1.0)
            wtb = 0.5 * (T - t1) * wg
            s = 0.5 * t1 * (xg + 1.0)
            ws = 0.5 * t1 * wg
            Ds = oscillator(s)
            D1 = oscillator(t1 - s)
            for jj, t2 in enumerate(tb):
                tc = t2 + 0.5 * (T - t2) * (xg + 1.0)
                wtc = 0.5 * (T - t2) * wg
                inner = np.array([
                    np.sum(ws * Ds * D1 * oscillator(t2 - s)
                           * oscillator(t3 - s))
                    for t3 in tc
                ])
                total += wta[i] * wtb[jj] * np.sum(
                    wtc * np.exp(1j * (wa * t1 + wb * t2 + wc * tc)) * inner
                )
    return total


class TestNonlinearTransforms:
    def test_chi2_vs_quadrature(self):
        nl = make_nl(0.8)
        for w1, w2 in (
            (1.0, 2.0),
            (1.8 - 0.15j, -1.8 - 0.15j),
            (0.0, 3.6 - 0.3j),
            (-2.5 + 0.4j, 1.1 - 0.9j),
        ):
            exact = nl._scalar_chi2_truncated(w1, w2)
            ref = quad_chi2_scalar(0.8, w1, w2, n=28)
            assert abs(exact - ref) < 1e-8 * max(1e-6, abs(ref))

    def test_chi2_sweep_real_frequencies(self, nl):
        for _ in range(100):
            w1 = complex(RNG.uniform(-8, 8), RNG.uniform(-1, 1))
            w2 = complex(RNG.uniform(-8, 8), RNG.uniform(-1, 1))
            exact = nl._scalar_chi2_truncated(w1, w2)
            ref = quad_chi2_scalar(nl.T_N, w1, w2, n=16)
            assert abs(exact - ref) < 1e-10

    def test_chi3_vs_quadrature(self):
        nl = make_nl(0.8)
        for w in (
            (1.0, 2.0, -1.0),
            (1.8 - 0.15j, 1.8 - 0.15j, -1.8 - 0.15j),
            (0.5 + 0.3j, -0.7 - 0.6j, 2.2),
        ):
            exact = nl._scalar_chi3_truncated(*w)
            ref = quad_chi3_scalar(0.8, *w, n=14)
            assert abs(exact - ref) < 1e-6 * max(1e-6, abs(ref))

    def test_chi3_sweep_small_window(self, nl):
        for _ in range(10):
            w = [complex(RNG.uniform(-5, 5), RNG.uniform(-0.8, 0.8))
                 for _ in range(3)]
            exact = nl._scalar_chi3_truncated(*w)
            ref = quad_chi3_scalar(nl.T_N, *w, n=10)
            assert abs(exact - ref) < 1e-10

    def test_chi2_symmetry_and_conjugation(self, nl):
        w1, w2 = 1.7 - 0.2j, -0.9 - 0.6j
        a = nl._scalar_chi2_truncated(w1, w2)
        assert a == nl._scalar_chi2_truncated(w2, w1)
        b = nl._scalar_chi2_truncated(-w1.conjugate(), -w2.conjugate())
        assert abs(b - a.conjugate()) < 1e-14

    def test_paley_wiener_growth_bound(self, nl):
        """Compact support in [0, T_N]^2 caps the transform by
        C exp(T_N (|Im w1| + |Im w2|)) with C the kernel's L1 mass."""
        # L1 mass of |K2| by the same split quadrature, at zero frequency
        # of |kernel|: reuse the scalar quadrature with |.| folded in by
        # integrating the absolute kernel directly.
        T = nl.T_N
        xg, wg = np.polynomial.legendre.leggauss(24)
        mass = 0.0
        for swap in (False, True):
            ta = 0.5 * T * (xg + 1.0)
            wta = 0.5 * T * wg
            for i, t1 in enumerate(ta):
                tb = t1 + 0.5 * (T - t1) * (xg + 1.0)
                wtb = 0.5 * (T - t1) * wg
                s = 0.5 * t1 * (xg + 1.0)
                ws = 0.5 * t1 * wg
                inner = np.array([
                    abs(np.sum(ws * oscillator(s) * oscillator(t1 - s)
                               * oscillator(t2 - s)))
                    for t2 in tb
                ])
                mass += wta[i] * np.sum(wtb * inner)
        for _ in range(40):
            w1 = complex(RNG.uniform(-10, 10), RNG.uniform(-25, 5))
            w2 = complex(RNG.uniform(-10, 10), RNG.uniform(-25, 5))
            bound = mass * math.exp(
                T * (abs(w1.imag) + abs(w2.imag))
            )
            val = abs(nl._scalar_chi2_truncated(w1, w2))
            assert val <= bound * (1.0 + 1e-9)

    def test_untruncated_chi2_is_transfer_product(self, nl):
        w1, w2 = 1.2 - 0.1j, 0.7 - 0.3j
        t = ft_chi2_untruncated(nl, w1, w2)
        scalar = nl.d_hat(w1) * nl.d_hat(w2) * nl.d_hat(w1 + w2)
        assert np.allclose(t, nl.c2 * scalar)
        with pytest.raises(PoleError):
            ct = nl.c_tilde
            nl.d_hat(complex(ct, -nl.gamma_tilde))

    def test_tensor_transforms_scale_the_scalar(self, nl):
        w1, w2 = 0.4 - 0.2j, 1.1 + 0.1j
        t2 = ft_chi2_truncated(nl, w1, w2)
        assert np.allclose(t2, nl.c2 * nl._scalar_chi2_truncated(w1, w2))
        t3 = ft_chi3_truncated(nl, w1, w2, w1)
        assert np.allclose(
            t3, nl.c3 * nl._scalar_chi3_truncated(w1, w2, w1)
        )

    def test_tm_compatibility_guard(self):
        c2 = np.zeros((3, 3, 3))
        c2[2, 0, 0] = 1.0
        with pytest.raises(ConfigError):
            NonlinearSusceptibility(
                c2=c2, c3=np.zeros((3, 3, 3, 3)),
                gamma_tilde=1.0, omega_star_tilde=3.0, T_N=0.1,
            )


# ----------------------------------------------------------------------
# Interface container
# ----------------------------------------------------------------------

class TestMaterialInterface:
    def test_sides_and_permittivity(self, interface):
        w = 1.5 - 0.1j
        eps_plus = interface.permittivity("plus", w)
        assert abs(eps_plus - 3.0) < 1e-14
        eps_minus = interface.permittivity("minus", w)
        chi = ft_chi1(interface.minus, w)
        assert abs(eps_minus - (1.0 + chi)) < 1e-12 * abs(eps_minus)
        with pytest.raises(ValueError):
            interface.side_model("left")

    def test_scaled_permittivity_matches(self, interface):
        w = -2.2 - 0.4j
        plain = interface.permittivity("minus", w)
        scaled = interface.permittivity_scaled("minus", w)
        assert abs(scaled.to_complex(strict=True) - plain) < 1e-12 * abs(plain)
