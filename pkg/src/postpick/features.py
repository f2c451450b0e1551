"""Per-image statistics used to discriminate particles from non-particles.

All features operate on the z-normalized image, so the whole feature
vector is invariant to affine intensity changes of the input.  The fixed
schema is given by FEATURE_NAMES; extract_features returns the values in
that order.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .image_io import normalize
from .phase_symmetry import DEFAULT_PARAMS, PhaseSymmetryParams, phase_symmetry

FEATURE_NAMES = (
    "radial_weighted_intensity",
    "blob_fraction",
    "dark_dot_dispersion",
    "q0",
    "q10",
    "q50",
    "q90",
    "q100",
    "foreground_fraction",
    "edge_count",
)

DARK_DOT_SIGMA = 2.0
CANNY_SIGMA = 1.4

EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)


def radial_weighted_intensity(img: np.ndarray) -> float:
    """Weighted mean intensity, weight 1/(1+d) with d the distance from center."""
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    y, x = np.mgrid[0:h, 0:w]
    weights = 1.0 / (1.0 + np.hypot(y - cy, x - cx))
    weights /= weights.sum()
    return float(np.sum(weights * img))


def otsu_threshold(img: np.ndarray) -> float:
    """Otsu threshold over 256 equal-width bins spanning [min, max].

    Candidate thresholds are the 255 interior bin boundaries; the boundary
    maximizing the between-class variance wins, ties going to the smallest.
    A constant image returns its constant value.
    """
    values = np.asarray(img, dtype=np.float64).ravel()
    lo, hi = values.min(), values.max()
    if lo == hi:
        return float(lo)
    counts, edges = np.histogram(values, bins=256, range=(lo, hi))
    n = values.size
    # Class 0 = bins below the boundary; cumulative counts and sums of bin centers.
    centers = (edges[:-1] + edges[1:]) / 2.0
    w0 = np.cumsum(counts)[:-1]
    w1 = n - w0
    sum0 = np.cumsum(counts * centers)[:-1]
    total = float(np.sum(counts * centers))
    with np.errstate(divide="ignore", invalid="ignore"):
        mu0 = sum0 / w0
        mu1 = (total - sum0) / w1
        var_between = w0 * w1 * (mu0 - mu1) ** 2
    var_between = np.where((w0 == 0) | (w1 == 0), -np.inf, var_between)
    best = int(np.argmax(var_between))  # argmax takes the first (smallest) tie
    return float(edges[best + 1])


def binarize(img: np.ndarray, threshold: float) -> np.ndarray:
    """Strictly-greater binarization, so constant images give empty foreground."""
    return np.asarray(img) > threshold


def blob_fraction(img: np.ndarray, params: PhaseSymmetryParams = DEFAULT_PARAMS) -> float:
    """Fraction of pixels that are 'on' after Otsu-binarizing the symmetry map."""
    sym = phase_symmetry(img, params)
    mask = binarize(sym, otsu_threshold(sym))
    return float(mask.mean())


def _gaussian_smooth(img: np.ndarray, sigma: float) -> np.ndarray:
    radius = int(np.ceil(3.0 * sigma))
    return ndimage.gaussian_filter(img, sigma, mode="reflect", radius=radius)


def nearest_rank_quantile(values: np.ndarray, q: float) -> float:
    """Nearest-rank quantile on the sorted multiset; q in [0, 1]."""
    ordered = np.sort(np.asarray(values).ravel())
    if q <= 0.0:
        return float(ordered[0])
    rank = int(np.ceil(q * ordered.size))
    return float(ordered[min(rank, ordered.size) - 1])


def dark_dot_dispersion(img: np.ndarray, sigma: float = DARK_DOT_SIGMA) -> float:
    """Spread of dark connected regions after Gaussian smoothing.

    Dark pixels are those below the 5% quantile of the smoothed image.
    Each 8-connected component contributes its coordinate centroid; the
    result is the mean squared distance of those centroids from their
    common centroid (0 with fewer than 2 components).
    """
    smoothed = _gaussian_smooth(np.asarray(img, dtype=np.float64), sigma)
    q = nearest_rank_quantile(smoothed, 0.05)
    dark = smoothed < q
    labels, n = ndimage.label(dark, structure=EIGHT_CONNECTED)
    if n < 2:
        return 0.0
    centers = np.array(ndimage.center_of_mass(dark, labels, range(1, n + 1)))
    centroid = centers.mean(axis=0)
    return float(np.mean(np.sum((centers - centroid) ** 2, axis=1)))


def intensity_quantiles(img: np.ndarray) -> tuple[float, float, float, float, float]:
    """(0%, 10%, 50%, 90%, 100%) nearest-rank quantiles of the pixel values."""
    ordered = np.sort(np.asarray(img, dtype=np.float64).ravel())
    n = ordered.size
    out = [float(ordered[0])]
    for q in (0.10, 0.50, 0.90, 1.00):
        rank = int(np.ceil(q * n))
        out.append(float(ordered[min(rank, n) - 1]))
    return tuple(out)


def foreground_fraction(img: np.ndarray) -> float:
    """Fraction of pixels above the Otsu threshold of the image itself."""
    mask = binarize(img, otsu_threshold(img))
    return float(mask.mean())


def _non_maximum_suppression(mag: np.ndarray, gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    """Keep gradient-magnitude pixels that are maximal along their gradient."""
    h, w = mag.shape
    angle = np.mod(np.arctan2(gy, gx), np.pi)
    sector = ((angle + np.pi / 8) // (np.pi / 4)).astype(int) % 4
    padded = np.pad(mag, 1, mode="constant")
    # neighbor offsets per sector: 0 = horizontal gradient, 1 = diag /,
    # 2 = vertical, 3 = diag \
    offsets = {0: ((0, 1), (0, -1)), 1: ((1, 1), (-1, -1)),
               2: ((1, 0), (-1, 0)), 3: ((1, -1), (-1, 1))}
    keep = np.zeros_like(mag, dtype=bool)
    for s, ((dy1, dx1), (dy2, dx2)) in offsets.items():
        n1 = padded[1 + dy1:1 + dy1 + h, 1 + dx1:1 + dx1 + w]
        n2 = padded[1 + dy2:1 + dy2 + h, 1 + dx2:1 + dx2 + w]
        keep |= (sector == s) & (mag >= n1) & (mag >= n2)
    return np.where(keep, mag, 0.0)


def canny_edges(img: np.ndarray, sigma: float = CANNY_SIGMA) -> np.ndarray:
    """Binary edge map: Gaussian smooth, Sobel, NMS, hysteresis."""
    smoothed = _gaussian_smooth(np.asarray(img, dtype=np.float64), sigma)
    gx = ndimage.sobel(smoothed, axis=1, mode="reflect")
    gy = ndimage.sobel(smoothed, axis=0, mode="reflect")
    mag = np.hypot(gx, gy)
    nonzero = mag[mag > 0]
    if nonzero.size == 0:
        return np.zeros_like(img, dtype=bool)
    high = np.percentile(nonzero, 90.0)
    low = 0.4 * high
    nms = _non_maximum_suppression(mag, gx, gy)
    strong = nms >= high
    weak = nms >= low
    # Keep weak-edge components touching at least one strong pixel.
    labels, n = ndimage.label(weak, structure=EIGHT_CONNECTED)
    if n == 0:
        return strong
    has_strong = ndimage.labeled_comprehension(
        strong, labels, range(1, n + 1), np.any, bool, False
    )
    return weak & has_strong[labels - 1] & (labels > 0)


def edge_count(img: np.ndarray) -> int:
    """Number of 8-connected edge contours found by the Canny pipeline."""
    edges = canny_edges(img)
    _, n = ndimage.label(edges, structure=EIGHT_CONNECTED)
    return int(n)


def write_feature_csv(path, rows: list[tuple[str, str, np.ndarray]]) -> None:
    """Feature matrix CSV: path,label then the schema columns, 9 sig. digits."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("path,label," + ",".join(FEATURE_NAMES) + "\n")
        for img_path, label, values in rows:
            cells = ",".join(f"{v:.9g}" for v in values)
            fh.write(f"{img_path},{label},{cells}\n")


def read_feature_csv(path) -> list[tuple[str, str, np.ndarray]]:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if header[:2] != ["path", "label"] or tuple(header[2:]) != FEATURE_NAMES:
            raise ValueError("feature CSV header does not match the feature schema")
        rows = []
        for line in fh:
            parts = line.strip().split(",")
            if len(parts) != 2 + len(FEATURE_NAMES):
                raise ValueError("malformed feature CSV row")
            rows.append((parts[0], parts[1], np.array([float(x) for x in parts[2:]])))
    return rows


def extract_features(
    img: np.ndarray, params: PhaseSymmetryParams = DEFAULT_PARAMS
) -> np.ndarray:
    """Normalize the image and compute the 10-feature schema in fixed order."""
    z = normalize(img)
    q0, q10, q50, q90, q100 = intensity_quantiles(z)
    return np.array(
        [
            radial_weighted_intensity(z),
            blob_fraction(z, params),
            dark_dot_dispersion(z),
            q0,
            q10,
            q50,
            q90,
            q100,
            foreground_fraction(z),
            float(edge_count(z)),
        ]
    )
