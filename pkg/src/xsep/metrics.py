"""Similarity metrics between separated components.

SSIM follows the standard Gaussian-windowed formulation (11x11 window,
sigma 1.5, k1=0.01, k2=0.03 by default); lower SSIM between the two
separated X-ray components means better separation.
"""

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

__all__ = ["SsimParams", "ssim", "mse_psnr"]


@dataclass(frozen=True)
class SsimParams:
    window_side: int = 11
    sigma: float = 1.5
    k1: float = 0.01
    k2: float = 0.03
    dynamic_range: float = None  # None: use max-min over the image pair

    def __post_init__(self):
        if self.window_side % 2 != 1 or self.window_side < 1:
            raise ValueError("window_side must be odd and positive")
        if self.k1 <= 0 or self.k2 <= 0:
            raise ValueError("k1 and k2 must be positive")
        if self.dynamic_range is not None and self.dynamic_range <= 0:
            raise ValueError("dynamic_range must be positive")


def gaussian_window(side, sigma):
    """Normalized 2-D Gaussian weights on a side x side grid."""
    half = (side - 1) / 2.0
    x = np.arange(side) - half
    g = np.exp(-(x * x) / (2.0 * sigma * sigma))
    k = np.outer(g, g)
    return k / k.sum()


def _pair_range(a, b):
    lo = min(float(a.min()), float(b.min()))
    hi = max(float(a.max()), float(b.max()))
    r = hi - lo
    return r if r > 0 else 1.0


def ssim(a, b, params=None):
    """Mean SSIM over all full window positions of two same-size images."""
    p = params or SsimParams()
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"image sizes differ: {a.shape} vs {b.shape}")
    w = p.window_side
    if min(a.shape) < w:
        raise ValueError(f"images must be at least {w} pixels per dimension")
    R = p.dynamic_range if p.dynamic_range is not None else _pair_range(a, b)
    c1 = (p.k1 * R) ** 2
    c2 = (p.k2 * R) ** 2
    kern = gaussian_window(w, p.sigma)

    def moments(x):
        return np.tensordot(sliding_window_view(x, (w, w)), kern, axes=([2, 3], [0, 1]))

    mu_a = moments(a)
    mu_b = moments(b)
    var_a = moments(a * a) - mu_a * mu_a
    var_b = moments(b * b) - mu_b * mu_b
    cov = moments(a * b) - mu_a * mu_b
    num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
    den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    return float(np.mean(num / den))


def mse_psnr(a, b, peak):
    """Mean squared error and PSNR in dB; psnr is +inf when mse is zero."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"image sizes differ: {a.shape} vs {b.shape}")
    diff = a - b
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return 0.0, float("inf")
    return mse, 10.0 * np.log10(peak * peak / mse)
