"""Input validation helpers shared across the package."""

from __future__ import annotations

import numpy as np

__all__ = [
    "check_positive",
    "check_nonnegative",
    "check_count",
    "check_design_vector",
    "check_array_length",
]


def check_positive(name, value):
    """Raise ValueError unless ``value`` is a finite scalar > 0."""
    value = float(value)
    if not np.isfinite(value) or value <= 0.0:
        raise ValueError(f"{name} must be a positive finite scalar, got {value!r}")
    return value


def check_nonnegative(name, value):
    value = float(value)
    if not np.isfinite(value) or value < 0.0:
        raise ValueError(f"{name} must be a nonnegative finite scalar, got {value!r}")
    return value


def check_count(name, value, upper):
    """Validate an integer in [0, upper]."""
    count = int(value)
    if count != value:
        raise ValueError(f"{name} must be an integer, got {value!r}")
    if not 0 <= count <= upper:
        raise ValueError(f"{name} must lie in [0, {upper}], got {count}")
    return count


def check_design_vector(rho, n_elements):
    """Coerce ``rho`` to a 0/1 uint8 vector of length ``n_elements``."""
    arr = np.asarray(rho)
    if arr.shape != (n_elements,):
        raise ValueError(
            f"design vector has shape {arr.shape}, expected ({n_elements},)"
        )
    if not np.isin(arr, (0, 1)).all():
        raise ValueError("design vector entries must be 0 or 1")
    return arr.astype(np.uint8)


def check_array_length(name, arr, length, dtype=float):
    arr = np.asarray(arr, dtype=dtype)
    if arr.shape != (length,):
        raise ValueError(f"{name} has shape {arr.shape}, expected ({length},)")
    if dtype is float and not np.isfinite(arr).all():
        raise ValueError(f"{name} contains non-finite entries")
    return arr
