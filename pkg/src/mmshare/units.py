"""dB <-> linear conversions. All unit changes in the package go through here."""

import numpy as np


def db2lin(x_db):
    """Power ratio in dB (or dBm) to linear (or mW)."""
    return np.power(10.0, np.asarray(x_db, dtype=float) / 10.0)


def lin2db(x):
    """Linear power ratio to dB. Zero maps to -inf."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(x)
