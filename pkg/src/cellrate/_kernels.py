"""Inner loops, each in a numba and a pure-numpy flavour.

The public names at the bottom dispatch on ``_jit.USE_NUMBA``. Both
flavours are importable directly so tests and the benchmark can compare them.
"""

import math

import numpy as np

from ._jit import njit

MODE_RR, MODE_GREEDY, MODE_PF = 0, 1, 2


# -- scheduler selection ------------------------------------------------------

def select_served_np(delta, fading, snr_composite, alpha, mode, pick):
    """Served user's rate and distance for each drop (row)."""
    rows = np.arange(delta.shape[0])
    if mode == MODE_RR:
        idx = pick
    elif mode == MODE_GREEDY:
        idx = np.argmax(fading * delta ** (-alpha), axis=1)
    else:
        idx = np.argmax(fading, axis=1)
    d = delta[rows, idx]
    a = fading[rows, idx]
    return np.log1p(snr_composite * a * d ** (-alpha)), d


@njit(cache=True, nogil=True)
def select_served_nb(delta, fading, snr_composite, alpha, mode, pick):
    n, m = delta.shape
    rate = np.empty(n)
    dist = np.empty(n)
    for i in range(n):
        if mode == 0:
            k = pick[i]
        else:
            k = 0
            best = -1.0
            for j in range(m):
                if mode == 2:
                    score = fading[i, j]
                elif alpha == 2.0:
                    score = fading[i, j] / (delta[i, j] * delta[i, j])
                else:
                    score = fading[i, j] * math.exp(-alpha * math.log(delta[i, j]))
                if score > best:
                    best = score
                    k = j
        dist[i] = delta[i, k]
        rate[i] = math.log1p(snr_composite * fading[i, k] * delta[i, k] ** (-alpha))
    return rate, dist


# -- multi-cell SINR draws ----------------------------------------------------

def sinr_draws_np(signal_mean, interf_means, fading, noise):
    """SINR and total interference per drop; column 0 of ``fading`` is the
    serving link."""
    interference = np.einsum("ij,ij->i", interf_means, fading[:, 1:])
    return signal_mean * fading[:, 0] / (noise + interference), interference


@njit(cache=True, nogil=True)
def sinr_draws_nb(signal_mean, interf_means, fading, noise):
    n, m = interf_means.shape
    sinr = np.empty(n)
    tot = np.empty(n)
    for i in range(n):
        acc = 0.0
        for j in range(m):
            acc += interf_means[i, j] * fading[i, j + 1]
        tot[i] = acc
        sinr[i] = signal_mean[i] * fading[i, 0] / (noise + acc)
    return sinr, tot


# -- per-location mean rate under Rayleigh fading -----------------------------
#
# E[ln(1 + SINR)] = int_0^inf P(SINR > g) / (1 + g) dg with
# P(SINR > g) = exp(-g I_n / S) prod_j 1 / (1 + g I_j / S).
# Integrated in u = ln g around the location's mean-SINR scale on a fixed
# Gauss-Legendre rule; no partial fractions, so equal means are harmless.

LOG_SPAN = 36.0


def location_mean_rate_np(signal_mean, interf_means, noise, nodes, weights):
    scale = signal_mean / (noise + interf_means.sum(axis=1))
    u = np.log(scale)[:, None] + nodes[None, :]
    g = np.exp(u)
    ratio = interf_means / signal_mean[:, None]
    # one log of the product instead of a log1p per factor; the product
    # stays below ~e^300 on the rule's span
    prod = (1.0 + g) * np.prod(1.0 + g[:, :, None] * ratio[:, None, :], axis=2)
    logs = -g * (noise / signal_mean)[:, None] - np.log(prod)
    lo = np.log(scale) - LOG_SPAN
    head = np.exp(lo)  # int_0^{g_lo} ~ g_lo: survival ~ 1 there
    return (weights[None, :] * g * np.exp(logs)).sum(axis=1) + head


@njit(cache=True, nogil=True)
def location_mean_rate_nb(signal_mean, interf_means, noise, nodes, weights):
    n, m = interf_means.shape
    out = np.empty(n)
    for i in range(n):
        s = signal_mean[i]
        tot = noise
        for j in range(m):
            tot += interf_means[i, j]
        ls = math.log(s / tot)
        inv = 1.0 / s
        acc = 0.0
        for k in range(nodes.shape[0]):
            g = math.exp(ls + nodes[k])
            prod = 1.0 + g
            for j in range(m):
                prod *= 1.0 + g * interf_means[i, j] * inv
            acc += weights[k] * g * math.exp(-g * noise * inv) / prod
        out[i] = acc + math.exp(ls - LOG_SPAN)
    return out


def log_rule(n=768):
    """Gauss-Legendre nodes on ``[-LOG_SPAN, LOG_SPAN]`` (offsets in ln g)."""
    x, w = np.polynomial.legendre.leggauss(n)
    return LOG_SPAN * x, LOG_SPAN * w


# -- hypoexponential density ---------------------------------------------------

def hypoexp_pdf_np(eta, coeffs, means):
    eta = np.asarray(eta, dtype=float)
    return (coeffs / means * np.exp(-eta[..., None] / means)).sum(axis=-1)


@njit(cache=True, nogil=True)
def hypoexp_pdf_nb(eta, coeffs, means):
    out = np.empty(eta.shape[0])
    for i in range(eta.shape[0]):
        acc = 0.0
        for j in range(means.shape[0]):
            acc += coeffs[j] / means[j] * math.exp(-eta[i] / means[j])
        out[i] = acc
    return out


from ._jit import USE_NUMBA  # noqa: E402

if USE_NUMBA:
    select_served = select_served_nb
    sinr_draws = sinr_draws_nb
    location_mean_rate = location_mean_rate_nb

    def hypoexp_pdf(eta, coeffs, means):
        eta = np.asarray(eta, dtype=float)
        return hypoexp_pdf_nb(eta.ravel(), coeffs, means).reshape(eta.shape)
else:
    select_served = select_served_np
    sinr_draws = sinr_draws_np
    location_mean_rate = location_mean_rate_np
    hypoexp_pdf = hypoexp_pdf_np
