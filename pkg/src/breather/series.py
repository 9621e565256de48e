"""Recursive construction of the polychromatic interface breather.

Starting from the seed u^{1,1} = eps * phi0 (the linear surface mode),
each level nu >= 2 assembles the nonlinear right-hand side h^{n,nu} --
quadratic and cubic convolution sums over the lower levels with
coefficients built from the truncated susceptibility transforms -- and
solves the linear interface problem L_{nk}(omega^{(n,nu)}) u = h.
Only n >= 0 is solved; negative harmonics follow by conjugation, which
enforces u^{-n,nu} = conj(u^{n,nu}) exactly.

The physical fields are partial sums

    psi^(M)(x,y,t) = sum_{nu<=M} sum_{|n|<=nu}
                     u^{n,nu}(x) e^{-i n (omega_R t - k y)} e^{nu omega_I t},

real-valued by the conjugate symmetry, with E = mu0 (psi1, psi2, 0) and
H = (0, 0, psi3).  The displacement field admits two equivalent modal
forms (operator identity vs explicit polarization sums) used to
cross-check the assembly.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DivergenceWarning,
    ResolventViolation,
    SingularSystem,
    SolverError,
    ZeroFrequency,
)
from .pencil import eigenfunction, spectral_quantities
from .resolvent import (
    GridFunction,
    SampledRHS,
    _u2_prime_at_nodes,
    _u2_prime_right,
    interface_u3_right,
    reconstruct_u3,
    solve_analytic,
    solve_fd,
)
from .susceptibility import ft_chi2_truncated, ft_chi3_truncated

__all__ = [
    "CoefficientTable",
    "NonlinearRHS",
    "beta_coeff",
    "gamma_coeff",
    "assemble_h",
    "build_series",
    "synthesize",
    "reconstruct_fields",
    "d_field_modal",
    "divergence_residual",
    "maxwell_residual",
    "decay_profile",
]


# ----------------------------------------------------------------------
# Types
# ----------------------------------------------------------------------

@dataclass
class NonlinearRHS:
    """One level of the nonlinear source: two active components.

    h1 lives at integer nodes (left-limit convention at the interface,
    right limit stored separately), h2 at half nodes; the third
    component vanishes identically in TM polarization.
    """

    grid: object
    h1: np.ndarray
    h2: np.ndarray
    h1_right: complex = 0j

    @classmethod
    def zero(cls, grid):
        return cls(grid, np.zeros(grid.N + 1, dtype=complex),
                   np.zeros(grid.N, dtype=complex))

    @property
    def is_zero(self):
        return (self.h1_right == 0 and not self.h1.any()
                and not self.h2.any())

    def conjugate_negated(self):
        """The (-n, nu) source: h^{-n,nu} = -conj(h^{n,nu})."""
        return NonlinearRHS(self.grid, -np.conj(self.h1), -np.conj(self.h2),
                            -np.conj(self.h1_right))

    def max_abs(self):
        m1 = float(np.max(np.abs(self.h1))) if self.h1.size else 0.0
        m2 = float(np.max(np.abs(self.h2))) if self.h2.size else 0.0
        return max(m1, m2, abs(self.h1_right))


@dataclass
class CoefficientTable:
    """The computed harmonics u^{n,nu} over the index cone.

    Only n >= 0 is stored; ``get`` serves negative harmonics as exact
    conjugates and returns None outside the cone (those entries are
    identically zero).  The nonlinear sources of each level are kept for
    the displacement-field reconstruction.
    """

    ctx: object
    grid: object
    eps: float
    nu_max: int
    entries: dict = field(default_factory=dict)
    h_entries: dict = field(default_factory=dict)
    norms: dict = field(default_factory=dict)

    def get(self, n, nu):
        if abs(n) > nu or nu < 1 or nu > self.nu_max:
            return None
        if n >= 0:
            return self.entries.get((n, nu))
        gf = self.entries.get((-n, nu))
        return None if gf is None else _conj_cached(gf)

    def get_h(self, n, nu):
        if abs(n) > nu or nu < 2:
            return None
        if n >= 0:
            return self.h_entries.get((n, nu))
        h = self.h_entries.get((-n, nu))
        return None if h is None else h.conjugate_negated()


def _conj_cached(gf):
    cached = getattr(gf, "_conj", None)
    if cached is None:
        cached = gf.conjugate()
        gf._conj = cached
    return cached


# ----------------------------------------------------------------------
# Nonlinearity coefficients
# ----------------------------------------------------------------------

def beta_coeff(ctx, n, m, nu, mu, j, p, q, side):
    """Quadratic coefficient
    -omega^{(n,nu)} eps0 mu0^2 chi2_{j,p,q}(omega^{(m,mu)}, omega^{(n-m,nu-mu)})
    for the given side ('minus'/'plus'); zero when that side is linear.
    Indices j, p, q are 1-based field components.
    """
    if not (1 <= mu <= nu - 1):
        raise ValueError("need 1 <= mu <= nu-1")
    nl = ctx.interface.nl_side(side)
    if nl is None:
        return 0j
    itf = ctx.interface
    chi2 = ft_chi2_truncated(nl, ctx.omega(m, mu), ctx.omega(n - m, nu - mu))
    return (-ctx.omega(n, nu) * itf.eps0 * itf.mu0**2
            * chi2[j - 1, p - 1, q - 1])


def gamma_coeff(ctx, n, m, l, nu, mu, lam, j, p, q, r, side):
    """Cubic coefficient
    -omega^{(n,nu)} eps0 mu0^3 chi3_{j,p,q,r}(omega^{(m,mu)},
    omega^{(l,lam)}, omega^{(n-m-l,nu-mu-lam)}); zero on a linear side.
    """
    if not (mu >= 1 and lam >= 1 and mu + lam <= nu - 1):
        raise ValueError("need mu, lam >= 1 and mu + lam <= nu - 1")
    nl = ctx.interface.nl_side(side)
    if nl is None:
        return 0j
    itf = ctx.interface
    chi3 = ft_chi3_truncated(
        nl, ctx.omega(m, mu), ctx.omega(l, lam),
        ctx.omega(n - m - l, nu - mu - lam),
    )
    return (-ctx.omega(n, nu) * itf.eps0 * itf.mu0**3
            * chi3[j - 1, p - 1, q - 1, r - 1])


# ----------------------------------------------------------------------
# Grid-function component samples per side and node family
# ----------------------------------------------------------------------

def _side_samples(gf):
    """Per-side arrays of (u1, u2) on both node families.

    Returns {'minus': (int_comps, half_comps), 'plus': (...)} where
    int_comps[p] and half_comps[p] (p = 0 for u1, 1 for u2) are the
    samples on that side's integer and half nodes.  The minus integer
    block ends with the left interface limits; the plus integer block
    *starts* with the right limits.  u1 is interpolated to half nodes by
    2-point averaging (one-sided extrapolation in the cell right of the
    interface, where the stored node value is a left limit); u2 is
    averaged onto integer nodes with the exact interface value.
    """
    cached = getattr(gf, "_sides", None)
    if cached is not None:
        return cached
    g = gf.grid
    N, m = g.N, g.mid
    U, V = gf.U, gf.V
    u2_int = np.empty(N + 1, dtype=complex)
    u2_int[0] = 0.0
    u2_int[N] = 0.0
    u2_int[1:N] = 0.5 * (V[0: N - 1] + V[1:N])
    u2_int[m] = V[N]
    u1_half = 0.5 * (U[:-1] + U[1:])
    if m + 2 <= N:
        u1_half[m] = 1.5 * U[m + 1] - 0.5 * U[m + 2]
    out = {
        "minus": (
            (U[: m + 1], u2_int[: m + 1]),
            (u1_half[:m], V[:m]),
        ),
        "plus": (
            (np.concatenate(([gf.u1_right], U[m + 1:])),
             np.concatenate(([V[N]], u2_int[m + 1:]))),
            (u1_half[m:], V[m:N]),
        ),
    }
    gf._sides = out
    return out


# ----------------------------------------------------------------------
# Nonlinear right-hand side assembly
# ----------------------------------------------------------------------

def _active_sides(ctx):
    return [s for s in ("minus", "plus")
            if ctx.interface.nl_side(s) is not None]


def assemble_h(ctx, table, n, nu):
    """The nonlinear source h^{n,nu}: quadratic plus cubic convolution
    sums over the lower levels, index ranges clipped to the cone.

    Needs all table entries with level < nu.  Returns a NonlinearRHS
    (identically zero for nu = 1 or |n| > nu).
    """
    grid = table.grid
    out = NonlinearRHS.zero(grid)
    if nu < 2 or abs(n) > nu:
        return out
    sides = _active_sides(ctx)
    if not sides:
        return out
    itf = ctx.interface
    m_idx = grid.mid
    pref2 = -ctx.omega(n, nu) * itf.eps0 * itf.mu0**2
    pref3 = -ctx.omega(n, nu) * itf.eps0 * itf.mu0**3

    acc = {}
    for side in sides:
        n_int = (m_idx + 1) if side == "minus" else (grid.N - m_idx + 1)
        n_half = m_idx if side == "minus" else grid.N - m_idx
        acc[side] = (np.zeros(n_int, dtype=complex),
                     np.zeros(n_half, dtype=complex))

    nls = {side: itf.nl_side(side) for side in sides}

    # quadratic sums
    for mu in range(1, nu):
        mu2 = nu - mu
        for mm in range(max(-mu, n - mu2), min(mu, n + mu2) + 1):
            a = table.get(mm, mu)
            b = table.get(n - mm, mu2)
            if a is None or b is None:
                continue
            sa, sb = _side_samples(a), _side_samples(b)
            w1, w2 = ctx.omega(mm, mu), ctx.omega(n - mm, mu2)
            for side in sides:
                chi2 = ft_chi2_truncated(nls[side], w1, w2)
                h1s, h2s = acc[side]
                ai, ah = sa[side]
                bi, bh = sb[side]
                for j in range(2):
                    for p in range(2):
                        for q in range(2):
                            c = chi2[j, p, q]
                            if c == 0:
                                continue
                            c = pref2 * c
                            if j == 0:
                                h1s += c * ai[p] * bi[q]
                            else:
                                h2s += c * ah[p] * bh[q]

    # cubic sums
    if nu >= 3:
        for mu in range(1, nu - 1):
            for lam in range(1, nu - mu):
                kap = nu - mu - lam
                for mm in range(-mu, mu + 1):
                    rem = n - mm
                    for ll in range(max(-lam, rem - kap),
                                    min(lam, rem + kap) + 1):
                        a = table.get(mm, mu)
                        b = table.get(ll, lam)
                        c3e = table.get(rem - ll, kap)
                        if a is None or b is None or c3e is None:
                            continue
                        sa = _side_samples(a)
                        sb = _side_samples(b)
                        sc = _side_samples(c3e)
                        w1 = ctx.omega(mm, mu)
                        w2 = ctx.omega(ll, lam)
                        w3 = ctx.omega(rem - ll, kap)
                        for side in sides:
                            chi3 = ft_chi3_truncated(nls[side], w1, w2, w3)
                            h1s, h2s = acc[side]
                            ai, ah = sa[side]
                            bi, bh = sb[side]
                            ci, ch = sc[side]
                            for j in range(2):
                                for p in range(2):
                                    for q in range(2):
                                        for r in range(2):
                                            cc = chi3[j, p, q, r]
                                            if cc == 0:
                                                continue
                                            cc = pref3 * cc
                                            if j == 0:
                                                h1s += (cc * ai[p]
                                                        * bi[q] * ci[r])
                                            else:
                                                h2s += (cc * ah[p]
                                                        * bh[q] * ch[r])

    if "minus" in acc:
        h1s, h2s = acc["minus"]
        out.h1[: m_idx + 1] = h1s
        out.h2[:m_idx] = h2s
    if "plus" in acc:
        h1s, h2s = acc["plus"]
        out.h1_right = complex(h1s[0])
        out.h1[m_idx + 1:] = h1s[1:]
        out.h2[m_idx:] = h2s
    return out


# ----------------------------------------------------------------------
# The recursion
# ----------------------------------------------------------------------

def _seed_entry(ctx, grid, eps):
    phi = eigenfunction(ctx)
    x, xh, m = grid.x, grid.x_half, grid.mid
    vals = phi(x) * eps
    U = vals[0].copy()
    U[m] = eps * (-1j * ctx.k)                       # left limit
    W = vals[2].copy()
    W[m] = eps * (-1j * phi.V_minus)                 # left limit
    V = np.empty(grid.N + 1, dtype=complex)
    V[: grid.N] = eps * phi(xh)[1]
    V[grid.N] = eps * phi.value_at_interface
    ratio = phi.mu_minus / phi.mu_plus
    return GridFunction(
        grid, U, V,
        u1_right=eps * 1j * ctx.k * ratio,
        W=W, w_right=eps * 1j * ratio * phi.V_plus,
        residual=0.0,
    )


def _entry_norm_sq(gf):
    h = gf.grid.h
    s = float(np.sum(np.abs(gf.U) ** 2)
              + np.sum(np.abs(gf.V[: gf.grid.N]) ** 2))
    if gf.W is not None:
        s += float(np.sum(np.abs(gf.W) ** 2))
    return h * s


def build_series(ctx, grid, eps, nu_max, solver="fd", threads=1):
    """Run the recursion up to level nu_max and return the table.

    solver: 'fd' (staggered scheme) or 'analytic' (variation of
    constants).  Emits DivergenceWarning when the per-level norms grow
    for three consecutive levels (seed amplitude past the convergence
    radius).
    """
    if solver not in ("fd", "analytic"):
        raise ValueError("solver must be 'fd' or 'analytic'")
    table = CoefficientTable(ctx=ctx, grid=grid, eps=eps, nu_max=nu_max)
    table.entries[(1, 1)] = _seed_entry(ctx, grid, eps)
    table.norms[1] = math.sqrt(2.0 * _entry_norm_sq(table.entries[(1, 1)]))

    def _solve_one(n, nu):
        h = assemble_h(ctx, table, n, nu)
        if h.is_zero:
            gf = GridFunction(grid, np.zeros(grid.N + 1, dtype=complex),
                              np.zeros(grid.N + 1, dtype=complex),
                              W=np.zeros(grid.N + 1, dtype=complex),
                              w_right=0j, residual=0.0)
            return n, h, gf
        r = SampledRHS(grid, h.h1, h.h2, r1_right=h.h1_right)
        try:
            if solver == "fd":
                gf = solve_fd(ctx, n, nu, r, grid)
            else:
                gf, _ = solve_analytic(ctx, n, nu, r)
        except SingularSystem as exc:
            raise ResolventViolation(n, nu, str(exc)) from exc
        except (ValueError, ArithmeticError) as exc:
            raise SolverError(f"solve failed at ({n},{nu}): {exc}") from exc
        if gf.W is None:
            gf.W = reconstruct_u3(ctx, n, nu, gf.U, gf.V, grid)
            gf.w_right = interface_u3_right(ctx, n, nu, gf)
        return n, h, gf

    growth = 0
    for nu in range(2, nu_max + 1):
        ns = list(range(0, nu + 1))
        if threads > 1:
            from concurrent.futures import ThreadPoolExecutor

            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(lambda n: _solve_one(n, nu), ns))
        else:
            results = [_solve_one(n, nu) for n in ns]
        lvl = 0.0
        for n, h, gf in results:
            table.entries[(n, nu)] = gf
            table.h_entries[(n, nu)] = h
            w = 1.0 if n == 0 else 2.0      # negative-n mirror by symmetry
            lvl += w * _entry_norm_sq(gf)
        table.norms[nu] = math.sqrt(lvl)
        if table.norms[nu] > table.norms[nu - 1] > 0:
            growth += 1
            if growth >= 3:
                warnings.warn(
                    f"per-level norms grew for 3 consecutive levels "
                    f"(through nu={nu}); seed amplitude may exceed the "
                    f"convergence radius",
                    DivergenceWarning,
                )
                growth = 0
        else:
            growth = 0
    return table


# ----------------------------------------------------------------------
# Synthesis and field reconstruction
# ----------------------------------------------------------------------

def _synthesize_complex(table, x, y, t, M=None):
    ctx = table.ctx
    M = table.nu_max if M is None else min(M, table.nu_max)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    psi = np.zeros((3,) + x.shape, dtype=complex)
    for nu in range(1, M + 1):
        damp = math.exp(nu * ctx.omega_I * t)
        for n in range(-nu, nu + 1):
            gf = table.get(n, nu)
            if gf is None:
                continue
            phase = np.exp(-1j * n * (ctx.omega_R * t - ctx.k * y)) * damp
            psi[0] += phase * gf.eval_u1(x)
            psi[1] += phase * gf.eval_u2(x)
            if gf.W is not None:
                psi[2] += phase * gf.eval_u3(x)
    return psi


def synthesize(table, x, y, t, M=None):
    """Partial sum of the harmonic series at (x, y, t); returns the three
    real field components (psi1, psi2, psi3) on the x-array."""
    psi = _synthesize_complex(table, x, y, t, M)
    return psi.real


def d_field_modal(ctx, table, n, nu, route="operator"):
    """Modal displacement field (D1 at integer nodes, D2 at half nodes,
    D1 right limit, D2 interface value).

    route='operator': D = -(B u_E + h)/omega^{(n,nu)} using the stored
    nonlinear source.  route='convolution': the explicit polarization
    sums (linear transform term plus quadratic and cubic coefficients),
    recomputed from scratch.
    """
    omega = ctx.omega(n, nu)
    if omega == 0:
        raise ZeroFrequency("modal D-field needs omega != 0")
    gf = table.get(n, nu)
    grid = table.grid
    if gf is None:
        z = np.zeros(grid.N + 1, dtype=complex)
        return z, z[: grid.N], 0j, 0j
    h = table.get_h(n, nu)
    if h is None:
        h = NonlinearRHS.zero(grid)
    m = grid.mid
    sides = _side_samples(gf)
    itf = ctx.interface

    if route == "operator":
        sq = spectral_quantities(ctx, n, nu)
        Vm = sq.V_minus.to_complex(strict=False)
        Vp = sq.V_plus.to_complex(strict=False)
        if not (np.isfinite(Vm.real) and np.isfinite(Vm.imag)):
            # B u_E is astronomically large exactly where u is flushed to
            # zero; the product V*u is the bounded physical quantity and
            # vanishes at double precision there
            Vm = 0j
        D1 = np.empty(grid.N + 1, dtype=complex)
        D2 = np.empty(grid.N, dtype=complex)
        D1[: m + 1] = -(Vm * gf.U[: m + 1] + h.h1[: m + 1]) / omega
        D1[m + 1:] = -(Vp * gf.U[m + 1:] + h.h1[m + 1:]) / omega
        D1_right = -(Vp * gf.u1_right + h.h1_right) / omega
        D2[:m] = -(Vm * gf.V[:m] + h.h2[:m]) / omega
        D2[m:] = -(Vp * gf.V[m: grid.N] + h.h2[m:]) / omega
        D2_if = -(Vm * gf.V[grid.N]) / omega
        return D1, D2, D1_right, D2_if

    if route != "convolution":
        raise ValueError("route must be 'operator' or 'convolution'")

    # linear transform term, per side
    eps_m = itf.permittivity("minus", omega)
    eps_p = itf.permittivity("plus", omega)
    if not (np.isfinite(eps_m.real) and np.isfinite(eps_m.imag)):
        eps_m = 0j   # see the operator-route note: u vanishes there
    D1 = np.empty(grid.N + 1, dtype=complex)
    D2 = np.empty(grid.N, dtype=complex)
    D1[: m + 1] = itf.mu0 * eps_m * gf.U[: m + 1]
    D1[m + 1:] = itf.mu0 * eps_p * gf.U[m + 1:]
    D1_right = itf.mu0 * eps_p * gf.u1_right
    D2[:m] = itf.mu0 * eps_m * gf.V[:m]
    D2[m:] = itf.mu0 * eps_p * gf.V[m: grid.N]
    D2_if = itf.mu0 * eps_m * gf.V[grid.N]

    # quadratic + cubic polarization sums = -h/omega, reassembled fresh
    h2_ = assemble_h(ctx, table, n, nu)
    D1 += -h2_.h1 / omega
    D1_right += -h2_.h1_right / omega
    D2 += -h2_.h2 / omega
    return D1, D2, D1_right, D2_if


def reconstruct_fields(table, point, M=None):
    """(E, H, D) of the truncated series at point = (x, y, t).

    E = mu0 (psi1, psi2, 0), H = (0, 0, psi3); D from the modal operator
    identity, real by conjugate symmetry.
    """
    ctx = table.ctx
    x, y, t = point
    x = np.atleast_1d(np.asarray(x, dtype=float))
    psi = _synthesize_complex(table, x, y, t, M)
    mu0 = ctx.interface.mu0
    E = np.stack([mu0 * psi[0].real, mu0 * psi[1].real,
                  np.zeros_like(psi[0].real)])
    H = np.stack([np.zeros_like(psi[2].real), np.zeros_like(psi[2].real),
                  psi[2].real])
    M_ = table.nu_max if M is None else min(M, table.nu_max)
    D = np.zeros((3,) + x.shape, dtype=complex)
    for nu in range(1, M_ + 1):
        damp = math.exp(nu * ctx.omega_I * t)
        for n in range(-nu, nu + 1):
            gf = table.get(n, nu)
            if gf is None:
                continue
            D1, D2, D1r, D2i = d_field_modal(ctx, table, n, nu)
            phase = np.exp(-1j * n * (ctx.omega_R * t - ctx.k * y)) * damp
            D[0] += phase * _interp_int(table.grid, D1, D1r, x)
            D[1] += phase * _interp_half(table.grid, D2, D2i, x)
    return E, H, D.real


def _interp_int(grid, arr, right_val, x):
    """Integer-family interpolation with the left/right limit split."""
    m = grid.mid
    out = np.empty(x.shape, dtype=complex)
    neg = x < 0
    out[neg] = np.interp(x[neg], grid.x[: m + 1], arr[: m + 1])
    xp = np.concatenate(([0.0], grid.x[m + 1:]))
    fp = np.concatenate(([right_val], arr[m + 1:]))
    out[~neg] = np.interp(x[~neg], xp, fp)
    return out


def _interp_half(grid, arr, interface_val, x):
    """Half-family interpolation with the shared interface value."""
    m, N = grid.mid, grid.N
    out = np.empty(x.shape, dtype=complex)
    neg = x < 0
    xm = np.concatenate((grid.x_half[:m], [0.0]))
    fm = np.concatenate((arr[:m], [interface_val]))
    out[neg] = np.interp(x[neg], xm, fm)
    xp = np.concatenate(([0.0], grid.x_half[m:]))
    fp = np.concatenate(([interface_val], arr[m:]))
    out[~neg] = np.interp(x[~neg], xp, fp)
    return out


# ----------------------------------------------------------------------
# Diagnostics
# ----------------------------------------------------------------------

def divergence_residual(ctx, table, n, nu):
    """Discrete L2 norm of d_x D1 + i n k D2 for one mode.

    The modal divergence vanishes identically in the continuum (curl
    fields are divergence free); the discrete value is O(h^2) * ||u||.
    """
    grid = table.grid
    D1, D2, D1r, _ = d_field_modal(ctx, table, n, nu, route="operator")
    h, m, N = grid.h, grid.mid, grid.N
    dD1 = np.empty(N, dtype=complex)
    dD1[:] = (D1[1:] - D1[:-1]) / h
    dD1[m] = (D1[m + 1] - D1r) / h    # cell right of the interface
    res = dD1 + 1j * n * ctx.k * D2
    return math.sqrt(h * float(np.sum(np.abs(res) ** 2)))


def maxwell_residual(ctx, table, sample_points, M=None):
    """Max relative residual of the first-order TM system at the given
    (x, y, t) samples.

    Time and tangential derivatives are applied per mode (exact in the
    ansatz); x-derivatives use the staggered stencils.  Expected size:
    series tail + O(h^2).
    """
    grid = table.grid
    M_ = table.nu_max if M is None else min(M, table.nu_max)
    h, m, N = grid.h, grid.mid, grid.N

    modes = []
    for nu in range(1, M_ + 1):
        for n in range(-nu, nu + 1):
            gf = table.get(n, nu)
            if gf is None:
                continue
            D1, D2, D1r, D2i = d_field_modal(ctx, table, n, nu)
            du3 = (gf.W[1:] - gf.W[:-1]) / h
            du3[m] = (gf.W[m + 1] - gf.w_right) / h
            du2 = _u2_prime_at_nodes(gf.V, grid)
            du2_r = _u2_prime_right(gf.V, grid)
            modes.append((n, nu, gf, D1, D2, D1r, D2i, du3, du2, du2_r))

    worst = 0.0
    for (xs, ys, ts) in sample_points:
        x = np.atleast_1d(float(xs))
        R = np.zeros(3, dtype=complex)
        scale = 0.0
        for (n, nu, gf, D1, D2, D1r, D2i, du3, du2, du2_r) in modes:
            om = ctx.omega(n, nu)
            ph = complex(np.exp(-1j * n * (ctx.omega_R * ts - ctx.k * ys))
                         * math.exp(nu * ctx.omega_I * ts))
            u1 = _interp_int(grid, gf.U, gf.u1_right, x)[0]
            u3 = _interp_int(grid, gf.W, gf.w_right, x)[0]
            d1 = _interp_int(grid, D1, D1r, x)[0]
            d2 = _interp_half(grid, D2, D2i, x)[0]
            dxu3 = _interp_half_noif(grid, du3, x)[0]
            dxu2 = _interp_int(grid, du2, du2_r, x)[0]
            # -d_y psi3 + d_t D1 ; d_x psi3 + d_t D2 ;
            # -d_y psi1 + d_x psi2 + d_t psi3
            R[0] += ph * (-1j * n * ctx.k * u3 - 1j * om * d1)
            R[1] += ph * (dxu3 - 1j * om * d2)
            R[2] += ph * (-1j * n * ctx.k * u1 + dxu2 - 1j * om * u3)
            scale = max(scale, abs(ph * om * d1), abs(ph * om * d2),
                        abs(ph * om * u3))
        if scale > 0:
            worst = max(worst, float(np.max(np.abs(R))) / scale)
    return worst


def _interp_half_noif(grid, arr, x):
    """Half-family interpolation without an interface value (one-sided
    nearest-cell extension across x = 0)."""
    m, N = grid.mid, grid.N
    out = np.empty(x.shape, dtype=complex)
    neg = x < 0
    out[neg] = np.interp(x[neg], grid.x_half[:m], arr[:m])
    out[~neg] = np.interp(x[~neg], grid.x_half[m:], arr[m:])
    return out


def decay_profile(table, weight="period"):
    """Per-level aggregate norms [(nu, ||u^nu||)].

    ||u^nu||^2 = P * sum_{|n|<=nu} ||u^{n,nu}||^2_{L2(R)} by Parseval,
    with the y-period P = 2 pi / |k| ('period') or P = 2 pi ('2pi').
    """
    k = abs(table.ctx.k)
    P = 2.0 * math.pi / k if weight == "period" else 2.0 * math.pi
    return [(nu, math.sqrt(P) * table.norms[nu])
            for nu in sorted(table.norms)]
