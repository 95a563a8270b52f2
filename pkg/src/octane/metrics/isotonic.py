import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.optimize import isotonic_regression


def isotonic_fit(values: ArrayLike, increasing: bool = True) -> NDArray[np.float64]:
    """Least-squares monotone fit of a sampled curve (pool adjacent violators)."""
    values = np.asarray(values, dtype=np.float64)
    if values.size < 2:
        return values.copy()
    return np.asarray(isotonic_regression(values, increasing=increasing).x, dtype=np.float64)
