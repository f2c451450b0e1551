"""Phase-symmetry transform from log-Gabor quadrature filter responses.

Frequency-domain filtering with a bank of log-Gabor filters over several
scales and orientations (Kovesi-style construction).  Symmetry energy at a
pixel is the scale-summed |even| - |odd| response, noise-compensated and
normalized by the total response amplitude, then accumulated over
orientations.  The result is contrast- and rotation-invariant and lies in
[0, 1] per pixel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

EPSILON = 1e-4

# Ratio between the angular filter spacing and the angular Gaussian sigma.
D_THETA_ON_SIGMA = 1.3


class FilterSizeError(ValueError):
    """Image too small for the requested filter bank."""


@dataclass(frozen=True)
class PhaseSymmetryParams:
    n_scales: int = 5
    n_orientations: int = 6
    min_wavelength: float = 3.0
    scale_multiplier: float = 2.1
    sigma_on_f: float = 0.55
    noise_k: float = 2.0
    polarity: str = "bright"  # bright | dark | both

    def __post_init__(self):
        if self.n_scales < 1 or self.n_orientations < 1:
            raise ValueError("need at least one scale and one orientation")
        if self.min_wavelength < 2:
            raise ValueError("min_wavelength must be >= 2 pixels")
        if self.scale_multiplier <= 1:
            raise ValueError("scale_multiplier must be > 1")
        if not 0 < self.sigma_on_f < 1:
            raise ValueError("sigma_on_f must be in (0, 1)")
        if self.polarity not in ("bright", "dark", "both"):
            raise ValueError(f"bad polarity {self.polarity!r}")


DEFAULT_PARAMS = PhaseSymmetryParams()

_BANK_CACHE: dict[tuple, tuple[np.ndarray, np.ndarray]] = {}


def _frequency_grids(rows: int, cols: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Radius/angle grids with DC at [0, 0] (FFT layout)."""
    fy = np.fft.ifftshift((np.arange(rows) - rows // 2) / rows)
    fx = np.fft.ifftshift((np.arange(cols) - cols // 2) / cols)
    y, x = np.meshgrid(fy, fx, indexing="ij")
    radius = np.hypot(x, y)
    radius[0, 0] = 1.0  # avoid log(0) at DC; filters are zeroed there anyway
    theta = np.arctan2(-y, x)
    return radius, np.sin(theta), np.cos(theta)


def _filter_bank(rows: int, cols: int, params: PhaseSymmetryParams):
    """Per-(scale, orientation) frequency-domain filters, cached by shape."""
    key = (rows, cols, params.n_scales, params.n_orientations,
           params.min_wavelength, params.scale_multiplier, params.sigma_on_f)
    cached = _BANK_CACHE.get(key)
    if cached is not None:
        return cached

    radius, sintheta, costheta = _frequency_grids(rows, cols)

    # Low-pass to suppress filter tails beyond the Nyquist ring.
    lowpass = 1.0 / (1.0 + (radius / 0.45) ** 30)

    radial = np.empty((params.n_scales, rows, cols))
    log_sigma = np.log(params.sigma_on_f)
    for s in range(params.n_scales):
        wavelength = params.min_wavelength * params.scale_multiplier**s
        f0 = 1.0 / wavelength
        g = np.exp(-(np.log(radius / f0) ** 2) / (2.0 * log_sigma**2))
        g *= lowpass
        g[0, 0] = 0.0
        radial[s] = g

    theta_sigma = np.pi / params.n_orientations / D_THETA_ON_SIGMA
    angular = np.empty((params.n_orientations, rows, cols))
    for o in range(params.n_orientations):
        angle = o * np.pi / params.n_orientations
        ds = sintheta * np.cos(angle) - costheta * np.sin(angle)
        dc = costheta * np.cos(angle) + sintheta * np.sin(angle)
        dtheta = np.abs(np.arctan2(ds, dc))
        angular[o] = np.exp(-(dtheta**2) / (2.0 * theta_sigma**2))

    _BANK_CACHE[key] = (radial, angular)
    return radial, angular


def _odd_symmetry_energy(even: np.ndarray, odd: np.ndarray, polarity: str) -> np.ndarray:
    if polarity == "both":
        return np.abs(even) - np.abs(odd)
    if polarity == "bright":
        return even - np.abs(odd)
    return -even - np.abs(odd)


def phase_symmetry(img: np.ndarray, params: PhaseSymmetryParams = DEFAULT_PARAMS) -> np.ndarray:
    """Per-pixel local-symmetry map in [0, 1]."""
    img = np.asarray(img, dtype=np.float64)
    rows, cols = img.shape
    if min(rows, cols) < 2 * params.min_wavelength:
        raise FilterSizeError(
            f"image {cols}x{rows} too small for min_wavelength {params.min_wavelength}"
        )

    radial, angular = _filter_bank(rows, cols, params)
    spectrum = np.fft.fft2(img)

    total_energy = np.zeros((rows, cols))
    total_amplitude = np.zeros((rows, cols))

    for o in range(params.n_orientations):
        energy = np.zeros((rows, cols))
        sum_amp = np.zeros((rows, cols))
        tau = 0.0
        for s in range(params.n_scales):
            response = np.fft.ifft2(spectrum * radial[s] * angular[o])
            even = response.real
            odd = response.imag
            amplitude = np.abs(response)
            sum_amp += amplitude
            energy += _odd_symmetry_energy(even, odd, params.polarity)
            if s == 0:
                # Rayleigh noise estimate from the smallest-scale response.
                tau = np.median(amplitude) / np.sqrt(np.log(4.0))

        # Expected total noise amplitude over scales (geometric falloff),
        # then mean + k sigma of the corresponding Rayleigh energy.
        m = 1.0 / params.scale_multiplier
        total_tau = tau * (1.0 - m**params.n_scales) / (1.0 - m)
        noise_mean = total_tau * np.sqrt(np.pi / 2.0)
        noise_sigma = total_tau * np.sqrt((4.0 - np.pi) / 2.0)
        threshold = noise_mean + params.noise_k * noise_sigma

        total_energy += np.maximum(energy - threshold, 0.0)
        total_amplitude += sum_amp

    return total_energy / (total_amplitude + EPSILON)
