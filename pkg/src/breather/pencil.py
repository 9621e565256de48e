"""The interface operator pencil: spectral quantities and dispersion tools.

For the TM Maxwell pencil of a two-layer interface, this module evaluates
the side coefficients V_pm = -omega mu0 eps_pm(omega) and transverse decay
exponents mu_pm = sqrt(n^2 k^2 + omega V_pm), the dispersion function whose
zeros are the pencil eigenvalues, closed-form untruncated eigenvalues
(quartic), Newton refinement for the truncated model, argument-principle
winding counts over rectangles, spectral-set membership classification,
and the closed-form surface-mode eigenfunction.
"""

import cmath
import math
from dataclasses import dataclass

import numpy as np

from ._scaled import ScaledComplex
from .errors import (
    DegenerateError,
    DerivativeSingular,
    ModelError,
    NoConvergence,
    QuadratureNotConverged,
    ZeroOnContour,
)
from .susceptibility import Constant, TruncatedLorentz, UntruncatedLorentz

__all__ = [
    "PencilContext",
    "IndexCone",
    "SpectralQuantities",
    "ContourRectangle",
    "TolerancePack",
    "spectral_quantities",
    "dispersion_G",
    "dispersion_G_inf",
    "dispersion_logderiv",
    "untruncated_eigenvalues",
    "newton_eigenvalue",
    "winding_count",
    "winding_count_function",
    "delta0_search",
    "essential_spectrum_membership",
    "in_Omega0",
    "resolvent_membership",
    "eigenfunction",
    "Eigenfunction",
]


@dataclass(frozen=True)
class PencilContext:
    """Interface + wavenumber + base eigenvalue; the recursion's frame.

    omega0 = omega_R + i omega_I is the chosen base eigenvalue; the mixed
    multiples omega^{(n,nu)} = n omega_R + i nu omega_I span the discrete
    cone of the construction.
    """

    interface: object
    k: float
    omega0: complex = None

    @property
    def omega_R(self):
        return self.omega0.real

    @property
    def omega_I(self):
        return self.omega0.imag

    @property
    def physically_decaying(self):
        """Solutions decay in time iff omega_I <= 0."""
        return self.omega0 is not None and self.omega_I <= 0

    def omega(self, n, nu):
        """Mixed multiple omega^{(n,nu)} = n omega_R + i nu omega_I."""
        return n * self.omega_R + 1j * nu * self.omega_I


@dataclass(frozen=True)
class IndexCone:
    """The index set {(n, nu) : |n| <= nu <= nu_max}."""

    nu_max: int

    def __post_init__(self):
        if self.nu_max < 1:
            raise ValueError("nu_max must be >= 1")

    def __contains__(self, pair):
        n, nu = pair
        return 1 <= nu <= self.nu_max and abs(n) <= nu

    @property
    def members(self):
        return [
            (n, nu)
            for nu in range(1, self.nu_max + 1)
            for n in range(-nu, nu + 1)
        ]

    def frequencies(self, ctx):
        """The set S of mixed multiples over the cone."""
        return [ctx.omega(n, nu) for (n, nu) in self.members]


@dataclass(frozen=True)
class SpectralQuantities:
    """V_pm and mu_pm at one cone point, in overflow-safe log-polar form."""

    V_plus: ScaledComplex
    V_minus: ScaledComplex
    mu_plus: ScaledComplex
    mu_minus: ScaledComplex

    def as_complex(self, strict=False):
        """(V+, V-, mu+, mu-) as plain complex (inf on overflow)."""
        return tuple(
            q.to_complex(strict=strict)
            for q in (self.V_plus, self.V_minus, self.mu_plus, self.mu_minus)
        )


@dataclass(frozen=True)
class ContourRectangle:
    """Axis-aligned rectangle [-a, a] x [y_bottom, y_top] for winding."""

    a: float
    y_top: float
    y_bottom: float
    quadrature: int = 64

    def __post_init__(self):
        if not (self.a > 0 and self.y_bottom < self.y_top):
            raise ValueError("need a > 0 and y_bottom < y_top")

    @property
    def corners(self):
        """Counterclockwise corner list starting at the bottom-left."""
        return [
            complex(-self.a, self.y_bottom),
            complex(self.a, self.y_bottom),
            complex(self.a, self.y_top),
            complex(-self.a, self.y_top),
        ]


@dataclass(frozen=True)
class TolerancePack:
    """Thresholds for spectral-set classification."""

    point_tol: float = 1e-6      # |G| relative to coefficient scale
    omega0_tol: float = 1e-8     # |omega^2 eps| threshold for Omega_0
    ess_tol_im: float = 1e-8     # imaginary band around essential curves


# ----------------------------------------------------------------------
# Spectral quantities
# ----------------------------------------------------------------------

def spectral_quantities(ctx, n, nu):
    """V_pm(n,nu) and the principal decay exponents mu_pm(n,nu).

    V_pm = -omega^{(n,nu)} mu0 eps_pm(omega^{(n,nu)});
    mu_pm = principal sqrt of n^2 k^2 + omega^{(n,nu)} V_pm (Re >= 0).
    Everything is carried in scaled arithmetic since the minus-side
    permittivity can reach magnitudes like e^{2000} deep in the cone.
    """
    omega = ctx.omega(n, nu)
    itf = ctx.interface
    mu0 = itf.mu0
    out = {}
    for side in ("plus", "minus"):
        eps = itf.permittivity_scaled(side, omega)
        V = eps * (-omega * mu0)
        mu = ((n * ctx.k) ** 2 + V * omega).sqrt()
        out[side] = (V, mu)
    return SpectralQuantities(
        V_plus=out["plus"][0],
        V_minus=out["minus"][0],
        mu_plus=out["plus"][1],
        mu_minus=out["minus"][1],
    )


# ----------------------------------------------------------------------
# Dispersion functions
# ----------------------------------------------------------------------

def _lorentz_params(ctx):
    m = ctx.interface.minus
    if not isinstance(m, (TruncatedLorentz, UntruncatedLorentz)):
        raise ModelError("dispersion function needs a Lorentz-family minus side")
    if not isinstance(ctx.interface.plus, Constant):
        raise ModelError("dispersion function needs a constant plus side")
    eps_plus = ctx.interface.eps0 * (1.0 + ctx.interface.plus.alpha)
    return m, eps_plus


def _dispersion_pieces(ctx, n, omega, T):
    """(polynomial part P, window prefactor -c_L*R*B, exponent (i*omega-gamma)T).

    G_n(omega, T) = P(omega) + e^{(i omega - gamma) T} * (-c_L R(omega) B(omega)).
    Vectorized over omega.
    """
    m, eps_plus = _lorentz_params(ctx)
    eps0, mu0 = ctx.interface.eps0, ctx.interface.mu0
    K = (n * ctx.k) ** 2
    omega = np.asarray(omega, dtype=complex) if np.ndim(omega) else complex(omega)
    den_L = omega * omega + 2j * m.gamma * omega - m.omega_star**2
    A = (K / eps0 - omega * omega * mu0) * eps_plus + K
    B = K - omega * omega * mu0 * eps_plus
    P = A * den_L - m.c_L * B
    cs = m.c_star
    R = (1j * omega - m.gamma) / cs * math.sin(cs * T) - math.cos(cs * T)
    return P, -m.c_L * R * B, (1j * omega - m.gamma) * T


def _dispersion_pieces_deriv(ctx, n, omega, T):
    """d/d omega of (P, -c_L R B) and of the exponent."""
    m, eps_plus = _lorentz_params(ctx)
    eps0, mu0 = ctx.interface.eps0, ctx.interface.mu0
    K = (n * ctx.k) ** 2
    omega = np.asarray(omega, dtype=complex) if np.ndim(omega) else complex(omega)
    den_L = omega * omega + 2j * m.gamma * omega - m.omega_star**2
    dden = 2 * omega + 2j * m.gamma
    A = (K / eps0 - omega * omega * mu0) * eps_plus + K
    dA = -2 * omega * mu0 * eps_plus
    B = K - omega * omega * mu0 * eps_plus
    dB = -2 * omega * mu0 * eps_plus
    dP = dA * den_L + A * dden - m.c_L * dB
    cs = m.c_star
    R = (1j * omega - m.gamma) / cs * math.sin(cs * T) - math.cos(cs * T)
    dR = 1j / cs * math.sin(cs * T)
    dW = -m.c_L * (dR * B + R * dB)
    return dP, dW, -m.c_L * R * B


def dispersion_G(ctx, n, omega, T):
    """The truncated-Lorentz dispersion function G_n(omega, T).

    Its zeros (outside the singular set Omega_0) are exactly the
    eigenvalues of the truncated interface pencil.
    """
    P, W, expo = _dispersion_pieces(ctx, n, omega, T)
    return P + cmath.exp(expo) * W


def dispersion_G_scaled(ctx, n, omega, T):
    """G_n(omega, T) in scaled arithmetic, valid arbitrarily deep in Im omega."""
    P, W, expo = _dispersion_pieces(ctx, n, omega, T)
    return ScaledComplex.from_complex(P) + ScaledComplex.exp(expo) * W


def dispersion_G_deriv(ctx, n, omega, T):
    """Analytic derivative d G_n/d omega (closed form, no finite differences)."""
    P, W, expo = _dispersion_pieces(ctx, n, omega, T)
    dP, dW, _ = _dispersion_pieces_deriv(ctx, n, omega, T)
    return dP + cmath.exp(expo) * (dW + 1j * T * W)

def dispersion_logderiv(ctx, n, omega, T):
    """G'/G, overflow-safe below Im omega = -gamma; vectorized over omega.

    Inside the closed strip Im omega >= -gamma the exponential window
    factor has modulus <= 1 and plain complex arithmetic is used; deeper
    points fall back to scaled (log-polar) evaluation per point.
    """
    scalar = np.ndim(omega) == 0
    omega = np.atleast_1d(np.asarray(omega, dtype=complex))
    P, W, expo = _dispersion_pieces(ctx, n, omega, T)
    dP, dW, _ = _dispersion_pieces_deriv(ctx, n, omega, T)
    out = np.empty(omega.shape, dtype=complex)
    safe = np.real(expo) < 600.0
    if safe.any():
        E = np.exp(expo[safe])
        out[safe] = (dP[safe] + E * (dW[safe] + 1j * T * W[safe])) / (
            P[safe] + E * W[safe]
        )
    for i in np.nonzero(~safe)[0]:
        E = ScaledComplex.exp(expo[i])
        num = ScaledComplex.from_complex(dP[i]) + E * (dW[i] + 1j * T * W[i])
        den = ScaledComplex.from_complex(P[i]) + E * W[i]
        out[i] = (num / den).to_complex()
    return complex(out[0]) if scalar else out


def _quartic_coeffs(ctx, n):
    m, eps_plus = _lorentz_params(ctx)
    eps0, mu0 = ctx.interface.eps0, ctx.interface.mu0
    K = (n * ctx.k) ** 2
    q2 = mu0 * eps_plus
    q0 = K * (eps_plus / eps0 + 1.0)
    gamma, ws2 = m.gamma, m.omega_star**2
    return np.array(
        [
            -q2,
            -2j * gamma * q2,
            q0 + q2 * ws2 + m.c_L * mu0 * eps_plus,
            2j * gamma * q0,
            -q0 * ws2 - m.c_L * K,
        ],
        dtype=complex,
    )


def dispersion_G_inf(ctx, n, omega):
    """Untruncated dispersion polynomial G_n^inf(omega) (degree four)."""
    return complex(np.polyval(_quartic_coeffs(ctx, n), complex(omega)))


def dispersion_G_inf_deriv(ctx, n, omega):
    return complex(np.polyval(np.polyder(_quartic_coeffs(ctx, n)), complex(omega)))


def coefficient_scale(ctx, n, omega=1.0):
    """Magnitude scale of the dispersion polynomial near |omega|."""
    c = _quartic_coeffs(ctx, n)
    r = max(1.0, abs(omega))
    return float(sum(abs(ci) * r ** (len(c) - 1 - i) for i, ci in enumerate(c)))


def untruncated_eigenvalues(ctx, n):
    """All roots of the untruncated dispersion quartic for harmonic n.

    Uses the companion-matrix eigenvalue iteration behind numpy's root
    finder (robust near coincident roots).  Roots of the two-sided
    eigenvalue condition always lie in the closed strip -gamma <= Im <= 0.
    """
    coeffs = _quartic_coeffs(ctx, n)
    scale = float(np.max(np.abs(coeffs)))
    if abs(coeffs[0]) < 1e-14 * scale:
        raise DegenerateError("leading quartic coefficient vanishes")
    return sorted(np.roots(coeffs), key=lambda w: (-w.real, w.imag))


def newton_eigenvalue(ctx, n, T, omega_guess, tol=1e-12, max_iter=60):
    """Newton refinement of a truncated-model eigenvalue from a seed.

    Seeds normally come from untruncated_eigenvalues (the truncated
    eigenvalues form continuous curves in T emanating from them).
    Converged means |G_n(omega, T)| < tol * coefficient scale.
    """
    omega = complex(omega_guess)
    scale = coefficient_scale(ctx, n, omega)
    for _ in range(max_iter):
        g = dispersion_G(ctx, n, omega, T)
        if abs(g) < tol * scale:
            return omega
        dg = dispersion_G_deriv(ctx, n, omega, T)
        if abs(dg) < 1e-300 * scale:
            raise DerivativeSingular(
                f"dG/domega ~ 0 at {omega} (T={T}); choose another seed"
            )
        omega = omega - g / dg
    raise NoConvergence(
        f"Newton did not reach |G| < {tol}*scale in {max_iter} iterations",
        last_iterate=omega,
        residual=abs(dispersion_G(ctx, n, omega, T)) / scale,
    )


# ----------------------------------------------------------------------
# Winding counts (argument principle)
# ----------------------------------------------------------------------

_GAUSS_NODES, _GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(8)


def _gauss_segment(f, a, b):
    zs = 0.5 * (b - a) * _GAUSS_NODES + 0.5 * (a + b)
    vals = np.asarray(f(zs))  # integrands are vectorized over nodes
    return 0.5 * (b - a) * np.sum(_GAUSS_WEIGHTS * vals)


def _adaptive_edge_integral(f, z0, z1, tol, depth=0, max_depth=28):
    """Adaptive composite Gauss integration of f along the segment [z0, z1].

    Bisects until two Gauss levels agree within the local tolerance (split
    across children, floored at roundoff level), so refinement concentrates
    where f varies fast.  Returns (integral, local error estimate).
    """
    mid = 0.5 * (z0 + z1)
    coarse = _gauss_segment(f, z0, z1)
    fine = _gauss_segment(f, z0, mid) + _gauss_segment(f, mid, z1)
    err = abs(fine - coarse)
    if err < tol or depth >= max_depth:
        return fine, err
    child_tol = max(0.5 * tol, 1e-12)
    left, e1 = _adaptive_edge_integral(f, z0, mid, child_tol, depth + 1, max_depth)
    right, e2 = _adaptive_edge_integral(f, mid, z1, child_tol, depth + 1, max_depth)
    return left + right, e1 + e2


def winding_count_function(logderiv, rect, zero_probe=None):
    """(1/2 pi i) contour integral of f'/f around the rectangle, rounded.

    logderiv(omega) must return f'(omega)/f(omega).  zero_probe(omega), if
    given, returns a log-magnitude of f used to reject contours passing
    through a zero.  Raises QuadratureNotConverged when the pre-rounding
    value sits further than 0.25 from an integer.
    """
    corners = rect.corners
    # Edge tolerance: the whole contour should contribute < ~1e-4 winding
    # units of quadrature error (counts only need 0.25).
    edge_tol = 2.0 * math.pi * 1e-5
    if zero_probe is not None:
        logs = []
        for a, b in zip(corners, corners[1:] + corners[:1]):
            ts = np.linspace(0.0, 1.0, max(rect.quadrature, 16))
            logs.extend(zero_probe(a + t * (b - a)) for t in ts)
        logs = np.array(logs)
        if np.min(logs) < np.max(logs) - 27.6:  # 1e-12 relative magnitude dip
            raise ZeroOnContour(
                "dispersion function nearly vanishes on the contour"
            )
    total = 0j
    for a, b in zip(corners, corners[1:] + corners[:1]):
        part, _ = _adaptive_edge_integral(logderiv, a, b, edge_tol)
        total += part
    raw = total / (2j * math.pi)
    nearest = round(raw.real)
    residual = abs(raw - nearest)
    if residual > 0.25:
        raise QuadratureNotConverged(
            f"winding integral {raw} is {residual:.3f} from an integer"
        )
    return int(nearest), residual


def winding_count(ctx, n, T, rect):
    """Number of zeros of G_n(., T) inside the rectangle."""
    count, _ = winding_count_function(
        lambda w: dispersion_logderiv(ctx, n, w, T),
        rect,
        zero_probe=lambda w: dispersion_G_scaled(ctx, n, w, T).log_mag,
    )
    return count


def delta0_search(ctx, n, T, a, delta_min=1e-4, delta_max=None, tol=1e-3,
                  quadrature=64):
    """Smallest delta with exactly four zeros above Im = -gamma + delta.

    Bisection on the rectangle family with vertices +-a, +-a + i(-gamma +
    delta): counts exceed four when the contour dips into the band of
    spurious truncated-model zeros hugging Im = -gamma.  Returns
    delta_min itself when even the deepest probed contour still counts 4.
    """
    gamma = ctx.interface.minus.gamma
    if delta_max is None:
        # Deepest delta that still keeps every untruncated eigenvalue
        # inside the rectangle, with a 25% safety margin.
        depth = max(-r.imag for r in untruncated_eigenvalues(ctx, n))
        delta_max = 0.75 * (gamma - depth)
        if delta_max <= delta_min:
            raise DegenerateError(
                "untruncated eigenvalues sit too close to Im = -gamma for "
                "a four-zero rectangle to exist"
            )

    def count(delta):
        rect = ContourRectangle(
            a=a, y_top=0.0, y_bottom=-gamma + delta, quadrature=quadrature
        )
        try:
            return winding_count(ctx, n, T, rect)
        except (ZeroOnContour, QuadratureNotConverged):
            # A contour grazing the band of spurious zeros: treat as "more
            # than four" so bisection backs away from Im = -gamma.
            return -1

    if count(delta_min) == 4:
        return delta_min
    lo, hi = delta_min, delta_max
    if count(hi) != 4:
        raise NoConvergence(
            f"no delta in [{delta_min}, {delta_max}] gives a count of 4"
        )
    while hi - lo > tol:
        midpoint = 0.5 * (lo + hi)
        if count(midpoint) == 4:
            hi = midpoint
        else:
            lo = midpoint
    return hi


# ----------------------------------------------------------------------
# Spectral-set membership
# ----------------------------------------------------------------------

def essential_spectrum_membership(ctx, n, omega, tol_im=1e-8):
    """Which side's essential-spectrum curve (if any) passes through omega.

    The essential spectrum outside Omega_0 is where omega^2 mu0 eps_pm
    lands on [n^2 k^2, inf) (on (0, inf) when n k = 0).
    """
    omega = complex(omega)
    K = (n * ctx.k) ** 2
    hits = []
    for side in ("plus", "minus"):
        w = ctx.interface.permittivity_scaled(side, omega) * (
            omega * omega * ctx.interface.mu0
        )
        if w.is_zero:
            continue
        # |Im w| < tol_im and Re w in the branch interval, in log space.
        sin_p, cos_p = math.sin(w.phase), math.cos(w.phase)
        im_small = (
            w.log_mag + math.log(max(abs(sin_p), 1e-300)) < math.log(tol_im)
        )
        lower = math.log(K) if K > 0 else -math.inf
        re_in = cos_p > 0 and w.log_mag + math.log(cos_p) >= lower
        if im_small and re_in:
            hits.append(side)
    if len(hits) == 2:
        return "both"
    if hits:
        return f"{hits[0]}_branch"
    return "none"


def in_Omega0(ctx, omega, tol=1e-8):
    """True iff omega^2 eps_plus(omega) or omega^2 eps_minus(omega) ~ 0."""
    omega = complex(omega)
    for side in ("plus", "minus"):
        w = ctx.interface.permittivity_scaled(side, omega) * (omega * omega)
        if w.is_zero or w.log_mag < math.log(tol):
            return True
    return False


def resolvent_membership(ctx, n, nu, tol_pack=TolerancePack(), T=None):
    """Classify omega^{(n,nu)}: resolvent / point_spec / essential / omega0_set.

    The point-spectrum proxy is a small dispersion residual relative to the
    coefficient scale; T defaults to the minus-side memory window.
    """
    omega = ctx.omega(n, nu)
    if in_Omega0(ctx, omega, tol_pack.omega0_tol):
        return "omega0_set"
    if essential_spectrum_membership(ctx, n, omega, tol_pack.ess_tol_im) != "none":
        return "essential"
    if T is None:
        T = ctx.interface.minus.T
    g = dispersion_G_scaled(ctx, n, omega, T)
    log_scale = math.log(coefficient_scale(ctx, n, omega))
    if g.log_mag < log_scale + math.log(tol_pack.point_tol):
        return "point_spec"
    return "resolvent"


# ----------------------------------------------------------------------
# Eigenfunction
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class Eigenfunction:
    """The closed-form surface mode at the base eigenvalue (n, nu) = (1, 1).

    phi(x) decays like e^{mu_- x} for x < 0 and e^{-mu_+ x} for x > 0;
    components 2 and 3 are continuous across x = 0 (component 3 up to the
    dispersion residual of the stored eigenvalue).
    """

    k: float
    mu_minus: complex
    mu_plus: complex
    V_minus: complex
    V_plus: complex

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.empty((3,) + x.shape, dtype=complex)
        neg = x < 0
        pos = ~neg
        em = np.exp(self.mu_minus * x[neg])
        ep = np.exp(-self.mu_plus * x[pos])
        ratio = self.mu_minus / self.mu_plus
        out[0, neg] = -1j * self.k * em
        out[1, neg] = self.mu_minus * em
        out[2, neg] = -1j * self.V_minus * em
        out[0, pos] = 1j * self.k * ratio * ep
        out[1, pos] = self.mu_minus * ep
        out[2, pos] = 1j * ratio * self.V_plus * ep
        return out

    @property
    def value_at_interface(self):
        """phi_2(0) from either side (the shared normalization mu_-)."""
        return self.mu_minus


def eigenfunction(ctx):
    """Closed-form eigenfunction of the pencil at the stored omega0."""
    sq = spectral_quantities(ctx, 1, 1)
    V_p, V_m, mu_p, mu_m = sq.as_complex(strict=True)
    if mu_p == 0 or mu_m == 0:
        raise DegenerateError("mu_pm(1,1) = 0: no decaying surface mode")
    return Eigenfunction(
        k=ctx.k, mu_minus=mu_m, mu_plus=mu_p, V_minus=V_m, V_plus=V_p
    )
