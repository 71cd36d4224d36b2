"""Technical noise on the inputs of the two-reference setup.

Every input copy, including the vacuum port D, is replaced by a Gaussian
mixture of coherent states centred on its nominal amplitude::

    omega(alpha) = int d^2beta  exp(-|beta|^2 / (2 sigma^2)) / (2 pi sigma^2)  |alpha + beta><alpha + beta|

so each real component of the displacement has variance ``sigma^2``. The
network is passive and unitary, hence each detected mode also carries a
complex Gaussian displacement of per-component variance ``sigma^2`` and the
two detected modes see independent noise. For a detector whose noiseless
mean photon number is ``mu`` the no-click probability becomes::

    a * exp(-a * mu),    a = 1 / (1 + 2 sigma^2)

In the phase-keying scenario the references are ``alpha`` and ``-alpha``
with ``alpha`` drawn from a complex Gaussian of per-component variance
``xi^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .detection import RngStream, run_blocks, sample_batch
from .errors import DomainError, InvalidShotCount
from .optics import evolve
from .protocols import _check_count, build_two_ref_setup

__all__ = [
    "NoiseParams",
    "PhaseKeyingParams",
    "RatesReport",
    "sample_displacement",
    "no_click_prob_closed",
    "conclusive_probs",
    "averaged_conclusive_probs",
    "reliability_closed",
    "reliability_general",
    "averaged_rates_closed",
    "mc_rates",
    "gaussian_integral_Im",
    "gaussian_integral_step",
    "gaussian_integral_numeric",
]


@dataclass(frozen=True)
class NoiseParams:
    sigma: float = 0.0

    def __post_init__(self):
        s = float(self.sigma)
        if not s >= 0.0:
            raise DomainError(f"sigma must be >= 0, got {self.sigma!r}")
        object.__setattr__(self, "sigma", s)


@dataclass(frozen=True)
class PhaseKeyingParams:
    xi: float = 1.0

    def __post_init__(self):
        x = float(self.xi)
        if not x > 0.0 or math.isinf(x):
            raise DomainError(f"xi must be a positive finite number, got {self.xi!r}")
        object.__setattr__(self, "xi", x)


@dataclass(frozen=True)
class RatesReport:
    """Averaged success, error and failure rates with the reliability they imply.

    Monte Carlo estimates fill the ``se_*`` fields; closed forms leave them
    ``None``. ``reliability`` is ``nan`` when no conclusive outcome was seen.
    """

    reliability: float
    p_success: float
    p_error: float
    p_failure: float
    theta: float
    se_reliability: float | None = None
    se_success: float | None = None
    se_error: float | None = None
    se_failure: float | None = None
    shots: int | None = None

    def __post_init__(self):
        rates = (self.p_success, self.p_error, self.p_failure)
        if any(not (0.0 <= p <= 1.0) for p in rates):
            raise DomainError(f"rates outside [0, 1]: {rates}")
        if abs(sum(rates) - 1.0) > 1e-12:
            raise DomainError(f"rates do not sum to 1: {rates}")
        if not math.isnan(self.reliability) and not (0.0 <= self.reliability <= 1.0):
            raise DomainError(f"reliability {self.reliability} outside [0, 1]")


def _sigma(sigma) -> float:
    return NoiseParams(sigma).sigma


def _xi(xi) -> float:
    return PhaseKeyingParams(xi).xi


def _theta_from(r: float) -> float:
    if math.isnan(r):
        return math.nan
    return math.inf if r <= 0.5 else (1.0 - r) / (2.0 * r - 1.0)


def sample_displacement(sigma, rng: RngStream, size=None):
    """Complex displacement(s) with independent N(0, sigma^2) real and imaginary parts."""
    sigma = _sigma(sigma)
    if sigma == 0.0:
        return 0j if size is None else np.zeros(size, dtype=complex)
    re = rng.normal(sigma, size)
    im = rng.normal(sigma, size)
    return re + 1j * im if size is not None else complex(re, im)


def _coupling(n_a, n_x):
    # noiseless mean photon number per |alpha_i - alpha_j|^2 at T1 = 1/2
    return n_a * n_x / (n_a + 2.0 * n_x)


def _counts(n_a, n_b, n_c):
    return tuple(_check_count(n, name) for n, name in
                 ((n_a, "n_a"), (n_b, "n_b"), (n_c, "n_c")))


def no_click_prob_closed(k: int, i: int, n_a, n_b, n_c, sigma, alpha1, alpha2) -> float:
    """Probability that detector ``D_k`` stays dark when the unknown is ``alpha_i``.

    ``D_1`` compares the unknown with reference 2 and ``D_2`` with reference 1.
    """
    n_a, n_b, n_c = _counts(n_a, n_b, n_c)
    a = 1.0 / (1.0 + 2.0 * _sigma(sigma) ** 2)
    if i not in (1, 2) or k not in (1, 2):
        raise DomainError(f"detector and hypothesis must be 1 or 2, got k={k!r}, i={i!r}")
    alphas = (complex(alpha1), complex(alpha2))
    unknown = alphas[i - 1]
    if k == 1:
        mu = _coupling(n_a, n_c) * abs(unknown - alphas[1]) ** 2
    else:
        mu = _coupling(n_a, n_b) * abs(unknown - alphas[0]) ** 2
    return a * math.exp(-a * mu)


def conclusive_probs(alpha1, alpha2, sigma, n_a, n_b, n_c) -> np.ndarray:
    """Matrix ``M[i-1, j-1] = Tr(E_i rho_j)`` of conclusive outcome probabilities.

    ``E_1`` is "D_1 fires, D_2 dark" and ``E_2`` the mirror image.
    """
    out = np.empty((2, 2))
    for j in (1, 2):
        p1 = no_click_prob_closed(1, j, n_a, n_b, n_c, sigma, alpha1, alpha2)
        p2 = no_click_prob_closed(2, j, n_a, n_b, n_c, sigma, alpha1, alpha2)
        out[0, j - 1] = (1.0 - p1) * p2
        out[1, j - 1] = (1.0 - p2) * p1
    return out


def averaged_conclusive_probs(n_a, n_b, n_c, sigma, xi, method: str = "closed") -> np.ndarray:
    """``Tr(E_i rho_j)`` averaged over phase-keyed references ``(alpha, -alpha)``.

    ``method="closed"`` uses ``E[exp(-4 c |alpha|^2)] = 1 / (1 + 8 c xi^2)``;
    ``method="quad"`` integrates :func:`conclusive_probs` over the radial
    density of ``alpha`` instead and serves as an independent check.
    """
    n_a, n_b, n_c = _counts(n_a, n_b, n_c)
    sigma, xi = _sigma(sigma), _xi(xi)
    if method == "quad":
        def radial(r, i, j):
            dens = r / xi ** 2 * math.exp(-r * r / (2.0 * xi ** 2))
            return dens * conclusive_probs(r, -r, sigma, n_a, n_b, n_c)[i, j]
        out = np.empty((2, 2))
        for i in range(2):
            for j in range(2):
                out[i, j] = integrate.quad(radial, 0.0, math.inf, args=(i, j),
                                           epsabs=1e-13, epsrel=1e-12)[0]
        return out
    if method != "closed":
        raise DomainError(f"unknown method {method!r}")
    a = 1.0 / (1.0 + 2.0 * sigma ** 2)
    g1 = 1.0 / (1.0 + 8.0 * a * _coupling(n_a, n_c) * xi ** 2)
    g2 = 1.0 / (1.0 + 8.0 * a * _coupling(n_a, n_b) * xi ** 2)
    return np.array([
        [a * (1.0 - a * g1), a * (1.0 - a) * g2],
        [a * (1.0 - a) * g1, a * (1.0 - a * g2)],
    ])


def reliability_closed(n_a, n_b, sigma, xi) -> tuple[float, float]:
    """``(R, theta)`` for equal reference copy numbers, ``R = (1 + theta) / (1 + 2 theta)``."""
    n_a, n_b, _ = _counts(n_a, n_b, n_b)
    sigma, xi = _sigma(sigma), _xi(xi)
    theta = (n_a + 2.0 * n_b) / (n_a * n_b) * (sigma / (2.0 * xi)) ** 2
    return (1.0 + theta) / (1.0 + 2.0 * theta), theta


def reliability_general(n_a, n_b, n_c, sigma, xi, method: str = "closed") -> tuple[float, float]:
    """``(R(E_1), R(E_2))`` for arbitrary copy numbers and equal priors.

    Not covered by the compact formula when ``n_b != n_c``; built from the
    averaged conclusive probabilities.
    """
    m = averaged_conclusive_probs(n_a, n_b, n_c, sigma, xi, method)
    return float(m[0, 0] / (m[0, 0] + m[0, 1])), float(m[1, 1] / (m[1, 0] + m[1, 1]))


def averaged_rates_closed(n_a, n_b, sigma, xi, n_c=None) -> RatesReport:
    """Phase-keying averages of success, error and failure with equal priors.

    ``n_c`` defaults to ``n_b``. Reliability is then the compact closed form;
    otherwise it is the pooled ``P / (P + P_E)``.
    """
    n_c = n_b if n_c is None else n_c
    n_a, n_b, n_c = _counts(n_a, n_b, n_c)
    sigma, xi = _sigma(sigma), _xi(xi)
    if n_b == n_c:
        a = 1.0 / (1.0 + 2.0 * sigma ** 2)
        denom = 1.0 + 2.0 * sigma ** 2 + 8.0 * _coupling(n_a, n_b) * xi ** 2
        p = a * (1.0 - 1.0 / denom)
        p_e = a * (2.0 * sigma ** 2 / denom)
        p_f = 2.0 * sigma ** 2 * a + (1.0 - 2.0 * sigma ** 2) * a / denom
        r, theta = reliability_closed(n_a, n_b, sigma, xi)
    else:
        m = averaged_conclusive_probs(n_a, n_b, n_c, sigma, xi)
        p = float(0.5 * (m[0, 0] + m[1, 1]))
        p_e = float(0.5 * (m[0, 1] + m[1, 0]))
        p_f = 1.0 - p - p_e
        r = p / (p + p_e)
        theta = _theta_from(r)
    return RatesReport(r, p, p_e, p_f, theta)


def mc_rates(n_a, n_b, sigma, xi, shots: int, seed: int, n_c=None,
             workers: int | None = None) -> RatesReport:
    """Monte Carlo estimate of :func:`averaged_rates_closed`.

    Each shot draws ``alpha`` from the keying distribution, a true hypothesis
    with probability 1/2, and an independent displacement for every input
    mode of the full multi-copy network (unknown copies, reference copies and
    the vacuum port). The reliability estimate is the fraction of correct
    verdicts among conclusive ones.
    """
    n_c = n_b if n_c is None else n_c
    n_a, n_b, n_c = _counts(n_a, n_b, n_c)
    sigma, xi = _sigma(sigma), _xi(xi)
    if int(shots) != shots or shots < 1:
        raise InvalidShotCount(f"shots must be a positive integer, got {shots!r}")
    setup = build_two_ref_setup(n_a, n_b, n_c)
    u = setup.matrix
    n_modes = u.shape[0]

    def block(size, rng):
        alpha = sample_displacement(xi, rng, size)
        refs = np.stack([alpha, -alpha], axis=-1)
        truth = np.where(rng.uniform(size) < 0.5, 1, 2)
        inputs = setup.input_amps(refs[np.arange(size), truth - 1], refs)
        inputs = inputs + sample_displacement(sigma, rng, (size, n_modes))
        verdict = setup.decide(sample_batch(evolve(u, inputs), setup.detector_bank, rng))
        correct = int(np.count_nonzero(verdict == truth))
        conclusive = int(np.count_nonzero(verdict))
        return np.array([correct, conclusive - correct, size - conclusive])

    correct, wrong, failed = (int(v) for v in sum(run_blocks(block, shots, seed, workers)))
    shots = int(shots)
    p, p_e, p_f = correct / shots, wrong / shots, failed / shots
    conclusive = correct + wrong
    if conclusive:
        r = correct / conclusive
        se_r = math.sqrt(r * (1.0 - r) / conclusive)
    else:
        r = se_r = math.nan

    def se(q):
        return math.sqrt(q * (1.0 - q) / shots)

    return RatesReport(r, p, p_e, 1.0 - p - p_e, _theta_from(r),
                       se_r, se(p), se(p_e), se(p_f), shots)


# --------------------------------------------------------------------------
# Gaussian integrals over m complex displacements


def _check_integral_args(m, a, b, sigma):
    if int(m) != m or m < 0:
        raise DomainError(f"m must be a nonnegative integer, got {m!r}")
    if not (a > 0 and b > 0):
        raise DomainError(f"a and b must be positive, got a={a!r}, b={b!r}")
    return int(m), float(a), float(b), _sigma(sigma)


def gaussian_integral_Im(m, a, b, x, sigma) -> float:
    """``I_m`` in closed form: ``b / (b + 2 m a sigma^2) exp(-a |x|^2 / (b + 2 m a sigma^2))``.

    ``I_m`` averages ``exp(-(a/b) |x + beta_1 + ... + beta_m|^2)`` over ``m``
    independent displacements of per-component variance ``sigma^2``.
    """
    m, a, b, sigma = _check_integral_args(m, a, b, sigma)
    d = b + 2.0 * m * a * sigma ** 2
    return b / d * math.exp(-a * abs(complex(x)) ** 2 / d)


def gaussian_integral_step(m, a, b, x, sigma) -> float:
    """``I_m`` by peeling off one displacement at a time.

    ``I_m(a, b) = b / (b + 2 a sigma^2) * I_{m-1}(a, b + 2 a sigma^2)`` with
    ``I_0(a, b) = exp(-(a/b) |x|^2)``.
    """
    m, a, b, sigma = _check_integral_args(m, a, b, sigma)
    prefactor = 1.0
    for _ in range(m):
        b_next = b + 2.0 * a * sigma ** 2
        prefactor *= b / b_next
        b = b_next
    return prefactor * math.exp(-(a / b) * abs(complex(x)) ** 2)


def gaussian_integral_numeric(a, b, x, sigma, width: float = 10.0) -> float:
    """``I_1`` by 2-D quadrature of its integrand over ``[-w sigma, w sigma]^2``."""
    _, a, b, sigma = _check_integral_args(1, a, b, sigma)
    if sigma == 0.0:
        return math.exp(-(a / b) * abs(complex(x)) ** 2)
    x = complex(x)
    lim = width * sigma

    def integrand(v, u):
        gauss = math.exp(-(u * u + v * v) / (2.0 * sigma ** 2)) / (2.0 * math.pi * sigma ** 2)
        return gauss * math.exp(-(a / b) * ((x.real + u) ** 2 + (x.imag + v) ** 2))

    return integrate.dblquad(integrand, -lim, lim, -lim, lim, epsabs=1e-12, epsrel=1e-10)[0]
