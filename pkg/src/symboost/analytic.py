"""Closed-form fidelity scaling for Fourier-space adders and Shor circuits.

Conventions follow :mod:`symboost.circuits`: an adder register holds ``L + 1``
qubits, ``s`` and ``a`` have at most ``L`` bits and ``r[j]`` is the phase error
of a ``theta_j`` rotation (``alpha_j`` for absolute errors,
``(pi / 2^j) alpha_j`` for relative ones).

With symmetric typed errors the output amplitude of QFT, +a, QFT^-1 on ``|s>``
is

    Phi(l) = 2^-(L+1) [1 + exp(i sum_nu k_nu r[L - nu + TOP_INDEX_SHIFT])
                            exp(2 pi i (s + a - l) / 2^(L+1))] R(l)

    R(l) = sum_{l'} exp(i sum_m l'_[L-1-m] {a_m r_0 + sum_{nu<m} k_nu r_{m-nu}})
                    exp(2 pi i (s + a - l) l' / 2^L)

with ``k_nu = s_nu + a_nu - l_nu``. ``TOP_INDEX_SHIFT`` is fixed once by
:func:`calibrate_top_index_shift` against the simulator; the commonly quoted
form of the prefactor corresponds to a shift of -1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .noise import Category, ErrorModel, NoiseSpec, make_ledger

TOP_INDEX_SHIFT = 0
SIGMA_NU_VALIDITY = 0.1


class DegenerateInputError(ValueError):
    """Raised when a ratio or fit is undefined for the given inputs (e.g. sigma = 0)."""


def _bits(value: int, n: int) -> np.ndarray:
    return (value >> np.arange(n)) & 1


@dataclass(frozen=True)
class AdderNoiseVector:
    r: np.ndarray
    L: int

    def __post_init__(self):
        r = np.asarray(self.r, dtype=np.float64)
        if r.ndim != 1 or r.size < self.L + 1:
            raise ValueError(f"need at least L+1 = {self.L + 1} error entries, got {r.size}")
        object.__setattr__(self, "r", r)

    @classmethod
    def zeros(cls, L: int) -> AdderNoiseVector:
        return cls(np.zeros(L + 2), L)

    @classmethod
    def from_alphas(cls, alphas, L: int, model=ErrorModel.RELATIVE) -> AdderNoiseVector:
        alphas = np.asarray(alphas, dtype=np.float64)
        if ErrorModel(model) == ErrorModel.RELATIVE:
            return cls(np.pi / np.exp2(np.arange(alphas.size)) * alphas, L)
        return cls(alphas, L)

    @classmethod
    def from_spec(cls, spec: NoiseSpec, L: int) -> AdderNoiseVector:
        """Typed forward-direction draws of ``spec``, as the simulator sees them."""
        ledger = make_ledger(spec)
        alphas = [ledger.alpha_for(j, 1) for j in range(L + 2)]
        return cls.from_alphas(alphas, L, spec.model)


def _digit_terms(s, a, l, L, minus=0):
    """Addend digits (``a_nu - minus_nu``) and ``k_nu`` for nu = 0..L."""
    n = L + 1
    a_d = _bits(a, n) - _bits(minus, n)
    k = _bits(s, n) + a_d - _bits(l % 2**n, n)
    return a_d, k


def _fourier_phases(a_d, k, r, L):
    """Noise phase on Fourier bit weight index m = 0..L-1 (the l' bits)."""
    phases = np.empty(L)
    for m in range(L):
        nu = np.arange(m)
        phases[m] = a_d[m] * r[0] + np.dot(k[:m], r[m - nu])
    return phases


def r_sum(s: int, a: int, l: int, noise: AdderNoiseVector, minus: int = 0) -> complex:
    """The l'-sum R(l), evaluated term by term over all ``2^L`` values of l'.

    ``minus`` subtracts a second constant digit-wise (``a -> a - minus``).
    """
    L = noise.L
    a_d, k = _digit_terms(s, a, l, L, minus)
    phases = _fourier_phases(a_d, k, noise.r, L)
    lp = np.arange(2**L)
    # bit L-1-m of l' pairs with phase m
    lp_bits = (lp[:, None] >> (L - 1 - np.arange(L))[None, :]) & 1
    d = s + a - minus - l
    total = lp_bits @ phases + 2.0 * np.pi * ((d * lp) % 2**L) / 2**L
    return complex(np.sum(np.exp(1j * total)))


def _top_phase(a_d, k, r, L, shift):
    nu = np.arange(L)
    return float(np.dot(k[:L], r[L - nu + shift]) + a_d[L] * r[0])


def phi_amplitude(s: int, a: int, l: int, noise: AdderNoiseVector, minus: int = 0,
                  top_shift: int | None = None) -> complex:
    L = noise.L
    shift = TOP_INDEX_SHIFT if top_shift is None else top_shift
    a_d, k = _digit_terms(s, a, l, L, minus)
    d = s + a - minus - l
    top = _top_phase(a_d, k, noise.r, L, shift)
    pref = (1.0 + np.exp(1j * top) * np.exp(2j * np.pi * (d % 2 ** (L + 1)) / 2 ** (L + 1)))
    return complex(pref * r_sum(s, a, l, noise, minus) / 2 ** (L + 1))


def adder_fidelity_analytic(s: int, a: int, noise: AdderNoiseVector) -> float:
    return abs(phi_amplitude(s, a, s + a, noise)) ** 2


def calibrate_top_index_shift(L: int = 4, sigma: float = 0.1, seed: int = 1,
                              candidates=(-1, 0, 1)) -> int:
    """Pick the prefactor index shift that reproduces the simulator.

    Matches the noiseless case and one symmetric noisy draw at register size
    ``L``; returns the unique candidate that agrees on every output ``l``.
    """
    from .circuits import adder_output_state

    spec = NoiseSpec(ErrorModel.RELATIVE, Category.TYPED_SYMMETRIC, sigma, seed)
    noise = AdderNoiseVector.from_spec(spec, L)
    s, a = 3 % 2**L, 5 % 2**L
    probs = adder_output_state(s, a, L, spec).probabilities()
    exact = np.zeros(2 ** (L + 1))
    exact[s + a] = 1.0
    matches = []
    for shift in candidates:
        ok = all(abs(abs(phi_amplitude(s, a, l, AdderNoiseVector.zeros(L), top_shift=shift)) ** 2
                     - exact[l]) < 1e-12 for l in range(2 ** (L + 1)))
        ok = ok and all(abs(abs(phi_amplitude(s, a, l, noise, top_shift=shift)) ** 2 - probs[l]) < 1e-9
                        for l in range(2 ** (L + 1)))
        if ok:
            matches.append(shift)
    if len(matches) != 1:
        raise RuntimeError(f"calibration ambiguous or failed: {matches}")
    return matches[0]


# --- ensemble behaviour of the adder fidelity ------------------------------

def _coefficients(s, a, L):
    """Weights C[m, j] with theta_m = sum_j C[m, j] r_j, m = 0..L (symmetric typed)."""
    a_d, k = _digit_terms(s, a, s + a, L)
    C = np.zeros((L + 1, L + 1))
    for m in range(L + 1):
        C[m, 0] = a_d[m]
        for nu in range(m):
            C[m, m - nu] += k[nu]
    return C


def _nontyped_variance(s, a, L, weights):
    """Per-Fourier-bit phase variance when every gate draws independently.

    Each set bit of s, a and l = s + a in position nu < m contributes an
    independent ``r_{m-nu}`` term; the addend digit in position m adds ``r_0``.
    """
    n = L + 1
    sb, ab, lb = _bits(s, n), _bits(a, n), _bits(s + a, n)
    var = np.zeros(n)
    for m in range(n):
        nu = np.arange(m)
        var[m] = ab[m] * weights[0] + np.dot(sb[:m] + ab[:m] + lb[:m], weights[m - nu])
    return var


def _log_fidelity(theta):
    # F = prod_m cos^2(theta_m / 2) for an output register read at l = s + a
    return np.sum(np.log(np.cos(theta / 2.0) ** 2), axis=-1)


def _weights(model, L):
    w = np.ones(L + 1)
    if ErrorModel(model) == ErrorModel.RELATIVE:
        w = (np.pi / np.exp2(np.arange(L + 1))) ** 2
    return w


def ratio_extrema(L: int, sigma: float, model=ErrorModel.RELATIVE, n_draws: int = 1000,
                  n_pairs: int = 10_000, seed: int = 0) -> tuple[float, float]:
    """Extremes over (s, a) of the mean |ln F| for symmetric typed errors,
    divided by the (s, a)-average of the mean |ln F| for non-typed errors.

    Pairs are enumerated exhaustively for ``L <= 8``; above that ``n_pairs``
    random pairs plus the structured candidates ``s = a = 0`` and
    ``s = a = 2^L - 1`` are used. Both ensembles use ``n_draws`` draws.
    """
    if sigma <= 0:
        raise DegenerateInputError("ratios are undefined for sigma = 0")
    rng = np.random.default_rng(seed)
    if L <= 8:
        pairs = [(s, a) for s in range(2**L) for a in range(2**L)]
    else:
        rand = rng.integers(0, 2**L, size=(n_pairs, 2))
        pairs = [(0, 0), (2**L - 1, 2**L - 1)] + [tuple(map(int, p)) for p in rand]
    w = _weights(model, L)
    sym_draws = sigma * rng.standard_normal((n_draws, L + 1)) * np.sqrt(w)
    z = rng.standard_normal((n_draws, L + 1))
    sym = np.empty(len(pairs))
    non = np.empty(len(pairs))
    for i, (s, a) in enumerate(pairs):
        C = _coefficients(s, a, L)
        sym[i] = -np.mean(_log_fidelity(sym_draws @ C.T))
        theta = sigma * z * np.sqrt(_nontyped_variance(s, a, L, w))
        non[i] = -np.mean(_log_fidelity(theta))
    denom = float(np.mean(non))
    if denom <= 0:
        raise DegenerateInputError("non-typed adder infidelity vanished")
    return float(sym.min() / denom) + 0.0, float(sym.max() / denom)


# --- limiting distribution and P_remain ------------------------------------

@dataclass(frozen=True)
class AnalyticParams:
    L: int
    sigma: float
    eta: float
    x0: float

    def __post_init__(self):
        if not (self.eta > 0 and math.isfinite(self.eta)):
            raise ValueError(f"eta must be finite and > 0, got {self.eta}")
        if not 0.0 <= self.x0 < 1.0:
            raise ValueError(f"x0 must lie in [0, 1), got {self.x0}")

    @property
    def adder_fidelity(self) -> float:
        return math.exp(-self.eta * self.L)


WINDOWS = ("offset", "unit")


def _raw_density(u, eta):
    return eta / (2.0 * math.log(2.0) * u) * np.exp(-eta * (1.0 + np.log2(1.0 / u)))


def _side_widths(params, window):
    """Extent of the integration window on either side of ``x0``.

    ``"offset"``: the localization window ``|x - x0| < 1`` (offsets below
    ``2^(L-1)`` output units on both sides of the ideal output).
    ``"unit"``: ``x`` itself restricted to ``[0, 1]``.
    """
    if window == "offset":
        return 1.0, 1.0
    if window == "unit":
        return params.x0, 1.0 - params.x0
    raise ValueError(f"window must be one of {WINDOWS}, got {window!r}")


def _window_mass(params, window):
    # closed form of the integral of the raw density over the window
    beta = params.eta / math.log(2.0)
    return 0.5 * math.exp(-params.eta) * sum(w**beta for w in _side_widths(params, window))


def limiting_r_density(x, params: AnalyticParams, window: str = "offset"):
    """Limiting |R(x)|^2 around the ideal output ``x0``, normalized over the window."""
    x = np.asarray(x, dtype=np.float64)
    u = np.abs(x - params.x0)
    if np.any(u == 0):
        raise ValueError("density is singular at x = x0")
    return _raw_density(u, params.eta) / _window_mass(params, window)


def _one_sided(params, window, width, g, curvature, exclusion, tol):
    """Integral over 0 < u <= width of density(u) * g(u), with g(u) ~ 1 - curvature u^2 near 0."""
    if width <= 0:
        return 0.0
    beta = params.eta / math.log(2.0)
    scale = params.eta * math.exp(-params.eta) / (2.0 * math.log(2.0)) / _window_mass(params, window)
    # density = scale * u^(beta - 1); inside the exclusion window integrate analytically
    delta = min(exclusion, width)
    near = scale * (delta**beta / beta - curvature * delta ** (beta + 2) / (beta + 2))
    if delta >= width:
        return near
    # substitute t = ln u to flatten the spike at u = 0
    far, _ = integrate.quad(lambda t: scale * math.exp(beta * t) * g(math.exp(t)),
                            math.log(delta), math.log(width), epsabs=tol, limit=200)
    return near + far


def density_mass(params: AnalyticParams, window: str = "offset", exclusion: float = 1e-6,
                 tol: float = 1e-8) -> float:
    """Integral of :func:`limiting_r_density` over the window, by quadrature."""
    one = lambda u: 1.0  # noqa: E731
    return sum(_one_sided(params, window, w, one, 0.0, exclusion, tol)
               for w in _side_widths(params, window))


def p_remain(params: AnalyticParams, window: str = "offset", exclusion: float = 1e-6,
             tol: float = 1e-8) -> float:
    """Integral of cos^2(pi (x - x0) / 2) times the limiting density over the window.

    The integrable spike at ``x0`` is handled analytically inside a symmetric
    exclusion window of half-width ``exclusion``.
    """
    g = lambda u: math.cos(math.pi * u / 2.0) ** 2  # noqa: E731
    k = math.pi**2 / 4.0
    return sum(_one_sided(params, window, w, g, k, exclusion, tol)
               for w in _side_widths(params, window))


def symmetric_substructure_fidelity(params: AnalyticParams, window: str = "offset") -> float:
    return p_remain(params, window) ** 2


def symmetric_shor_fidelity(f_ss: float, f_adder: float, L: int) -> float:
    """Modulo-adder product formula for symmetric errors raised to the 4 L^2 units."""
    f_addmod = 0.75 * f_ss + 0.25 * (f_ss * f_adder + f_adder**2) / 2.0
    return f_addmod ** (4 * L * L)


def shor_fidelity_sym(params: AnalyticParams, window: str = "offset") -> float:
    return symmetric_shor_fidelity(symmetric_substructure_fidelity(params, window),
                                   params.adder_fidelity, params.L)


def shor_fidelity_nontyped(f_adder: float, L: int) -> float:
    if not 0.0 <= f_adder <= 1.0:
        raise ValueError("adder fidelity must lie in [0, 1]")
    return (0.75 * f_adder**2 + 0.25 * f_adder**5) ** (4 * L * L)


def crude_extra_boost(f_adder: float, N: int, L_min: int, delta_L: int) -> float:
    """F_s.s. when |R|^2 is a delta peak of weight F_adder on a flat background."""
    x0 = N / 2 ** (L_min + delta_L)
    if not 0.0 < x0 < 1.0:
        raise ValueError(f"x0 = N / 2^(L_min + delta_L) = {x0} must lie in (0, 1)")
    p = f_adder + (1.0 - f_adder) * (0.5 + math.sin(math.pi * x0) / math.pi)
    return p * p


# --- fits ------------------------------------------------------------------

def fit_through_origin(x, y) -> tuple[float, float, float]:
    """Least-squares slope of y = b x; returns (slope, r_squared, residual sum of squares)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    sxx = float(np.dot(x, x))
    if sxx == 0:
        raise DegenerateInputError("all abscissae are zero")
    slope = float(np.dot(x, y)) / sxx
    rss = float(np.sum((y - slope * x) ** 2))
    tss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - rss / tss if tss > 0 else 1.0
    return slope, r2, rss


def fit_eta(samples, return_r2: bool = False):
    """Adder decay constant from ``(L, mean F_adder)`` pairs, assuming F = exp(-eta L)."""
    samples = list(samples)
    if len({L for L, _ in samples}) < 3:
        raise DegenerateInputError("need at least 3 distinct register sizes")
    if any(not (0.0 < F <= 1.0) for _, F in samples):
        raise ValueError("fidelities must lie in (0, 1]")
    Ls = [L for L, _ in samples]
    ys = [-math.log(F) for _, F in samples]
    eta, r2, _ = fit_through_origin(Ls, ys)
    return (eta, r2) if return_r2 else eta
