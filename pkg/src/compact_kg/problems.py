"""Initial data used in the experiments, as module-level (picklable) functions."""

import numpy as np


def trig_phi(x):
    return 3.0 / (2.0 + np.cos(x))


def trig_phi_xx(x):
    c = np.cos(x)
    s = np.sin(x)
    return 3.0 * (c * (2.0 + c) + 2.0 * s * s) / (2.0 + c) ** 3


def trig_gamma(x):
    return np.sin(x)


def gaussian_phi(x):
    return np.exp(-x * x)


def gaussian_phi_xx(x):
    return (4.0 * x * x - 2.0) * np.exp(-x * x)


def gaussian_gamma(x):
    # 1/(e^{x^2} + e^{-x^2}) written without overflow
    e = np.exp(-x * x)
    return e / (1.0 + e * e)


DATA = {
    "trig": (trig_phi, trig_gamma, trig_phi_xx),
    "gaussian": (gaussian_phi, gaussian_gamma, gaussian_phi_xx),
}
