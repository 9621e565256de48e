"""Material models and exact Fourier-Laplace transforms of memory kernels.

Linear susceptibilities (Lorentz / Drude oscillators, with or without a
finite memory window, and constant dielectrics) and the quadratic/cubic
oscillator-driven nonlinear susceptibilities, all evaluated in closed form
at arbitrary complex frequencies.  The truncated (compact-memory) kernels
are entire in every frequency argument; their transforms are computed by
exact exponential-sum algebra (see _expalg) rather than quadrature.
"""

import math
import threading
from dataclasses import dataclass, field

import numpy as np

from ._expalg import g_window, simplex_transform, triangle_transform
from ._scaled import ScaledComplex
from .errors import ConfigError, DomainError, ModelError, PoleError

__all__ = [
    "ExpSumKernel",
    "LinearSusceptibility",
    "TruncatedLorentz",
    "UntruncatedLorentz",
    "TruncatedDrude",
    "UntruncatedDrude",
    "Constant",
    "NonlinearSusceptibility",
    "MaterialInterface",
    "ft_chi1",
    "ft_chi1_scaled",
    "permittivity",
    "permittivity_scaled",
    "d_hat",
    "ft_chi2_untruncated",
    "ft_chi3_untruncated",
    "ft_chi2_truncated",
    "ft_chi3_truncated",
]


# ----------------------------------------------------------------------
# Time-domain kernels
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class ExpSumKernel:
    """Causal kernel t -> sum_j a_j e^{lambda_j t} supported on [0, T_cut].

    terms : tuple of (amplitude, rate) complex pairs
    T_cut : float, may be math.inf for untruncated kernels

    Physical (real-valued) kernels have terms in conjugate pairs, so the
    imaginary part of the evaluation is discarded only by the caller.
    """

    terms: tuple
    T_cut: float = math.inf

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape, dtype=complex)
        support = (t >= 0) & (t <= self.T_cut)
        ts = t[support]
        acc = np.zeros(ts.shape, dtype=complex)
        for a, lam in self.terms:
            acc += a * np.exp(lam * ts)
        out[support] = acc
        return out if out.shape else complex(out)


# ----------------------------------------------------------------------
# Linear susceptibilities
# ----------------------------------------------------------------------

class LinearSusceptibility:
    """Base class: closed-form chi^(1) transforms for one material model."""

    def ft(self, omega):
        raise NotImplementedError

    def ft_scaled(self, omega):
        """Transform as a ScaledComplex (overflow-safe); default wraps ft."""
        return ScaledComplex.from_complex(self.ft(omega))

    def time_kernel(self):
        """The kernel as an ExpSumKernel, when one exists."""
        raise NotImplementedError


def _lorentz_denominator(omega, gamma, omega_star):
    return omega * omega + 2j * gamma * omega - omega_star * omega_star


@dataclass(frozen=True)
class UntruncatedLorentz(LinearSusceptibility):
    """chi^(1)(omega) = -c_L / (omega^2 + 2 i gamma omega - omega_*^2)."""

    c_L: float
    gamma: float
    omega_star: float

    def __post_init__(self):
        if not (self.omega_star > self.gamma > 0 and self.c_L > 0):
            raise ConfigError("Lorentz model needs omega_star > gamma > 0, c_L > 0")

    @property
    def c_star(self):
        return math.sqrt(self.omega_star**2 - self.gamma**2)

    def ft(self, omega):
        omega = complex(omega)
        if omega.imag <= -self.gamma:
            raise DomainError(
                "untruncated Lorentz transform converges only for "
                f"Im omega > {-self.gamma}; got {omega.imag}"
            )
        return -self.c_L / _lorentz_denominator(omega, self.gamma, self.omega_star)

    def time_kernel(self):
        cs = self.c_star
        a = self.c_L / (2j * cs)
        return ExpSumKernel(
            terms=((a, -self.gamma + 1j * cs), (-a, -self.gamma - 1j * cs)),
            T_cut=math.inf,
        )


@dataclass(frozen=True)
class TruncatedLorentz(LinearSusceptibility):
    """Lorentz oscillator with memory cut off at t = T (entire transform)."""

    c_L: float
    gamma: float
    omega_star: float
    T: float

    def __post_init__(self):
        if not (self.omega_star > self.gamma > 0 and self.c_L > 0 and self.T > 0):
            raise ConfigError(
                "truncated Lorentz model needs omega_star > gamma > 0, "
                "c_L > 0, T > 0"
            )

    @property
    def c_star(self):
        return math.sqrt(self.omega_star**2 - self.gamma**2)

    def _bracket(self, omega):
        """The window factor multiplying the untruncated transform."""
        cs = self.c_star
        return (1j * omega - self.gamma) / cs * math.sin(cs * self.T) - math.cos(
            cs * self.T
        )

    def ft(self, omega):
        omega = complex(omega)
        denom = _lorentz_denominator(omega, self.gamma, self.omega_star)
        factor = 1.0 + np.exp((1j * omega - self.gamma) * self.T) * self._bracket(omega)
        return -self.c_L / denom * factor

    def ft_scaled(self, omega):
        omega = complex(omega)
        denom = _lorentz_denominator(omega, self.gamma, self.omega_star)
        expo = ScaledComplex.exp((1j * omega - self.gamma) * self.T)
        factor = 1.0 + expo * self._bracket(omega)
        return factor * (-self.c_L) / denom

    def time_kernel(self):
        cs = self.c_star
        a = self.c_L / (2j * cs)
        return ExpSumKernel(
            terms=((a, -self.gamma + 1j * cs), (-a, -self.gamma - 1j * cs)),
            T_cut=self.T,
        )


@dataclass(frozen=True)
class UntruncatedDrude(LinearSusceptibility):
    """chi^(1)(omega) = -c_D / (omega^2 + i gamma omega)."""

    c_D: float
    gamma: float

    def __post_init__(self):
        if not (self.gamma > 0 and self.c_D > 0):
            raise ConfigError("Drude model needs gamma > 0, c_D > 0")

    def ft(self, omega):
        omega = complex(omega)
        if omega.imag <= 0:
            raise DomainError(
                "untruncated Drude transform converges only for Im omega > 0"
            )
        return -self.c_D / (omega * omega + 1j * self.gamma * omega)

    def time_kernel(self):
        a = self.c_D / self.gamma
        return ExpSumKernel(terms=((a, 0.0), (-a, -self.gamma)), T_cut=math.inf)


@dataclass(frozen=True)
class TruncatedDrude(LinearSusceptibility):
    """Drude conductor with memory cut off at t = T (entire transform)."""

    c_D: float
    gamma: float
    T: float

    def __post_init__(self):
        if not (self.gamma > 0 and self.c_D > 0 and self.T > 0):
            raise ConfigError("truncated Drude model needs gamma > 0, c_D > 0, T > 0")

    def ft(self, omega):
        omega = complex(omega)
        denom = omega * omega + 1j * self.gamma * omega
        window = 1.0 - np.exp(1j * omega * self.T) * (
            1.0 - (1j * omega / self.gamma) * (1.0 - math.exp(-self.gamma * self.T))
        )
        return -self.c_D / denom * window

    def time_kernel(self):
        a = self.c_D / self.gamma
        return ExpSumKernel(terms=((a, 0.0), (-a, -self.gamma)), T_cut=self.T)


@dataclass(frozen=True)
class Constant(LinearSusceptibility):
    """Instantaneous dielectric response chi^(1) = alpha."""

    alpha: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ConfigError("constant susceptibility needs alpha > 0")

    def ft(self, omega):
        return complex(self.alpha)

    def time_kernel(self):
        raise ModelError("constant susceptibility has no exponential-sum kernel")


def ft_chi1(model, omega):
    """Closed-form Fourier-Laplace transform chi^(1)(omega) of the model."""
    return model.ft(omega)


def ft_chi1_scaled(model, omega):
    """Same as ft_chi1 but in overflow-safe log-polar representation."""
    return model.ft_scaled(omega)


# ----------------------------------------------------------------------
# Nonlinear susceptibility
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class NonlinearSusceptibility:
    """Quadratic and cubic responses driven by one damped oscillator.

    c2 : (3,3,3) coupling tensor c^(2)_{j,p,q}
    c3 : (3,3,3,3) coupling tensor c^(3)_{j,p,q,r}
    gamma_tilde, omega_star_tilde : oscillator damping / resonance
    T_N : nonlinear memory window (transforms are entire in all arguments)

    TM compatibility requires the third-row couplings that would feed the
    magnetic component from in-plane fields to vanish identically.
    """

    c2: np.ndarray
    c3: np.ndarray
    gamma_tilde: float
    omega_star_tilde: float
    T_N: float
    _cache2: dict = field(default_factory=dict, repr=False, compare=False)
    _cache3: dict = field(default_factory=dict, repr=False, compare=False)
    _lock: threading.Lock = field(
        default_factory=threading.Lock, repr=False, compare=False
    )

    def __post_init__(self):
        object.__setattr__(self, "c2", np.asarray(self.c2, dtype=float))
        object.__setattr__(self, "c3", np.asarray(self.c3, dtype=float))
        if self.c2.shape != (3, 3, 3) or self.c3.shape != (3, 3, 3, 3):
            raise ConfigError("c2 must be (3,3,3) and c3 must be (3,3,3,3)")
        if not (self.omega_star_tilde > self.gamma_tilde > 0 and self.T_N > 0):
            raise ConfigError(
                "nonlinear model needs omega_star_tilde > gamma_tilde > 0, T_N > 0"
            )
        if np.any(self.c2[2, :2, :2] != 0.0):
            raise ConfigError(
                "TM compatibility: c2[3,p,q] must vanish for p,q in {1,2}"
            )
        if np.any(self.c3[2, :2, :2, :2] != 0.0):
            raise ConfigError(
                "TM compatibility: c3[3,p,q,r] must vanish for p,q,r in {1,2}"
            )
        self.c2.flags.writeable = False
        self.c3.flags.writeable = False

    @property
    def c_tilde(self):
        return math.sqrt(self.omega_star_tilde**2 - self.gamma_tilde**2)

    def oscillator_kernel(self):
        """D(t) = e^{-gamma_tilde t} sin(c_tilde t)/c_tilde for t >= 0."""
        ct = self.c_tilde
        a = 1.0 / (2j * ct)
        return ExpSumKernel(
            terms=((a, -self.gamma_tilde + 1j * ct), (-a, -self.gamma_tilde - 1j * ct)),
            T_cut=math.inf,
        )

    def d_hat(self, omega):
        """Oscillator transfer function -1/(omega^2 + 2i gt omega - ost^2)."""
        omega = complex(omega)
        denom = _lorentz_denominator(omega, self.gamma_tilde, self.omega_star_tilde)
        if abs(denom) < 1e-12 * max(1.0, abs(omega) ** 2, self.omega_star_tilde**2):
            raise PoleError(f"omega = {omega} hits a pole of the oscillator response")
        return -1.0 / denom

    # -- truncated scalar transforms (exponential-sum algebra) ---------
    def _rates_amps(self):
        ct = self.c_tilde
        lam = np.array(
            [-self.gamma_tilde + 1j * ct, -self.gamma_tilde - 1j * ct]
        )
        amp = np.array([1.0 / (2j * ct), -1.0 / (2j * ct)])
        return lam, amp

    def _scalar_chi2_truncated(self, w1, w2):
        key = tuple(sorted((complex(w1), complex(w2)), key=lambda w: (w.real, w.imag)))
        hit = self._cache2.get(key)
        if hit is not None:
            return hit
        T = self.T_N
        lam, amp = self._rates_amps()
        lj = lam[:, None, None]
        lk = lam[None, :, None]
        ll = lam[None, None, :]
        weight = amp[:, None, None] * amp[None, :, None] * amp[None, None, :]
        z1 = lj + 1j * complex(w1)
        z2 = lk + 1j * complex(w2)
        delta = ll - lj - lk  # Re delta = gamma_tilde > 0, never confluent
        z1b, z2b = np.broadcast_arrays(z1 + 0 * ll, z2 + 0 * ll)
        db = np.broadcast_to(delta, z1b.shape)
        val = (
            triangle_transform(z1b + db, z2b, T)
            + triangle_transform(z2b + db, z1b, T)
            - g_window(z1b, T) * g_window(z2b, T)
        ) / db
        out = complex(np.sum(weight * val))
        with self._lock:
            self._cache2[key] = out
        return out

    def _scalar_chi3_truncated(self, w1, w2, w3):
        key = tuple(
            sorted(
                (complex(w1), complex(w2), complex(w3)),
                key=lambda w: (w.real, w.imag),
            )
        )
        hit = self._cache3.get(key)
        if hit is not None:
            return hit
        T = self.T_N
        lam, amp = self._rates_amps()
        sh = (2, 2, 2, 2)
        lj = lam[:, None, None, None]
        lk = lam[None, :, None, None]
        lp = lam[None, None, :, None]
        ll = lam[None, None, None, :]
        weight = (
            amp[:, None, None, None]
            * amp[None, :, None, None]
            * amp[None, None, :, None]
            * amp[None, None, None, :]
        )
        z = [
            np.broadcast_to(lj + 1j * complex(w1), sh),
            np.broadcast_to(lk + 1j * complex(w2), sh),
            np.broadcast_to(lp + 1j * complex(w3), sh),
        ]
        delta = np.broadcast_to(ll - lj - lk - lp, sh)  # Re = 2*gamma_tilde > 0
        acc = -g_window(z[0], T) * g_window(z[1], T) * g_window(z[2], T)
        # One ordered simplex per assignment of which argument is smallest.
        for s0, s1, s2 in (
            (0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)
        ):
            acc = acc + simplex_transform(z[s0] + delta, z[s1], z[s2], T)
        out = complex(np.sum(weight * acc / delta))
        with self._lock:
            self._cache3[key] = out
        return out


def d_hat(nl, omega):
    """Oscillator transfer function of the nonlinear model at omega."""
    return nl.d_hat(omega)


def ft_chi2_untruncated(nl, omega1, omega2):
    """c^(2)_{jpq} D(omega1) D(omega2) D(omega1+omega2), componentwise."""
    scalar = nl.d_hat(omega1) * nl.d_hat(omega2) * nl.d_hat(omega1 + omega2)
    return nl.c2 * scalar


def ft_chi3_untruncated(nl, omega1, omega2, omega3):
    """c^(3)_{jpqr} D(w1) D(w2) D(w3) D(w1+w2+w3), componentwise."""
    scalar = (
        nl.d_hat(omega1)
        * nl.d_hat(omega2)
        * nl.d_hat(omega3)
        * nl.d_hat(omega1 + omega2 + omega3)
    )
    return nl.c3 * scalar


def ft_chi2_truncated(nl, omega1, omega2):
    """Exact transform of the memory-windowed quadratic kernel.

    The window restricts (t1, t2) to [0, T_N]^2; the inner self-convolution
    integral over [0, min(t1, t2)] is done in closed form on the
    exponential-sum representation of the oscillator kernel, and the outer
    transform splits over the two triangles of the square.  Entire in both
    frequency arguments.
    """
    return nl.c2 * nl._scalar_chi2_truncated(omega1, omega2)


def ft_chi3_truncated(nl, omega1, omega2, omega3):
    """Exact transform of the memory-windowed cubic kernel (see chi2)."""
    return nl.c3 * nl._scalar_chi3_truncated(omega1, omega2, omega3)


# ----------------------------------------------------------------------
# Interface
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class MaterialInterface:
    """Two homogeneous half-lines meeting at x = 0.

    minus/plus are the linear models on x < 0 and x > 0; nl_minus/nl_plus
    the optional nonlinear responses on each side.
    """

    minus: LinearSusceptibility
    plus: LinearSusceptibility
    nl_minus: NonlinearSusceptibility = None
    nl_plus: NonlinearSusceptibility = None
    eps0: float = 1.0
    mu0: float = 1.0

    def __post_init__(self):
        if not (self.eps0 > 0 and self.mu0 > 0):
            raise ConfigError("eps0 and mu0 must be positive")

    @property
    def c0(self):
        return 1.0 / math.sqrt(self.eps0 * self.mu0)

    def side_model(self, side):
        if side == "minus":
            return self.minus
        if side == "plus":
            return self.plus
        raise ValueError(f"side must be 'plus' or 'minus', got {side!r}")

    def nl_side(self, side):
        if side == "minus":
            return self.nl_minus
        if side == "plus":
            return self.nl_plus
        raise ValueError(f"side must be 'plus' or 'minus', got {side!r}")

    def permittivity(self, side, omega):
        return self.eps0 * (1.0 + self.side_model(side).ft(omega))

    def permittivity_scaled(self, side, omega):
        return self.eps0 * (1.0 + self.side_model(side).ft_scaled(omega))


def permittivity(interface, side, omega):
    """eps_side(omega) = eps0 (1 + chi^(1)_side(omega))."""
    return interface.permittivity(side, omega)


def permittivity_scaled(interface, side, omega):
    """Overflow-safe permittivity in log-polar representation."""
    return interface.permittivity_scaled(side, omega)
