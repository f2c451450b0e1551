"""Synthetic windowed cryo-EM image generator for controlled benchmarking.

Pipeline per sample: project a 3D template under a uniform random
orientation, add structural noise to a target SNR, modulate with the
bright-field CTF, add shot noise to a (much lower) target SNR, band-pass
filter, z-normalize.  SNR is defined as signal variance over noise
variance.  Void templates have no signal; they enter the pipeline at the
CTF stage as unit-variance Gaussian fields.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict

import numpy as np

from ._projection import rotate_and_project
from .image_io import ManifestEntry, normalize

PARTICLE_KIND = "particle_proxy"
CONTAMINANT_KINDS = ("plate", "cylinder", "sphere", "void")
SCENARIOS = CONTAMINANT_KINDS + ("all",)

SOFT_EDGE_VOXELS = 1.5
TEMPLATE_EXTENT = 0.45  # templates are clipped to this fraction of the cube side


def splitmix64(x: int) -> int:
    """64-bit finalizing mix; used to derive independent per-sample seeds."""
    x = (x + 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    return z ^ (z >> 31)


def sample_seed(seed: int, index: int) -> int:
    return splitmix64((seed & 0xFFFFFFFFFFFFFFFF) ^ index)


@dataclass(frozen=True)
class CtfParams:
    accelerating_voltage_kv: float = 300.0
    defocus_um: float = 2.0  # underfocus positive
    spherical_aberration_mm: float = 2.0
    amplitude_contrast: float = 0.07
    pixel_size_a: float = 2.0

    def __post_init__(self):
        if self.accelerating_voltage_kv <= 0 or self.pixel_size_a <= 0:
            raise ValueError("voltage and pixel size must be positive")
        if not 0 <= self.amplitude_contrast < 1:
            raise ValueError("amplitude contrast must be in [0, 1)")

    @property
    def wavelength_a(self) -> float:
        """Relativistic electron wavelength in Angstrom."""
        v = self.accelerating_voltage_kv * 1e3
        return 12.2639 / np.sqrt(v * (1.0 + 0.97845e-6 * v))


@dataclass(frozen=True)
class SplitSpec:
    """Sample counts for one named dataset split.

    Either explicit per-class counts or a total drawn against
    particle_fraction.
    """

    name: str
    n_particles: int | None = None
    n_non_particles: int | None = None
    n_total: int | None = None


@dataclass(frozen=True)
class SimulationConfig:
    image_side: int = 64
    volume_side: int = 80
    structural_snr: float = 1.4
    shot_snr: float = 0.05
    ctf: CtfParams = field(default_factory=CtfParams)
    bandpass_low: float = 0.005
    bandpass_high: float = 0.10
    particle_fraction: float = 0.9
    scenario: str = "all"
    splits: tuple[SplitSpec, ...] = (SplitSpec("train", n_total=1000),)
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.shot_snr < self.structural_snr:
            raise ValueError("need 0 < shot_snr < structural_snr")
        if not 0 <= self.bandpass_low < self.bandpass_high <= 0.5:
            raise ValueError("need 0 <= low < high <= 0.5")
        if not 0 < self.particle_fraction <= 1:
            raise ValueError("particle_fraction must be in (0, 1]")
        if self.scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}")


def load_config(path) -> SimulationConfig:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    ctf = CtfParams(**doc.pop("ctf", {}))
    splits = tuple(SplitSpec(**s) for s in doc.pop("splits", []))
    if not splits:
        splits = (SplitSpec("train", n_total=1000),)
    return SimulationConfig(ctf=ctf, splits=splits, **doc)


def save_config(path, cfg: SimulationConfig) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(asdict(cfg), fh, indent=2)


def _soft_mask(distance: np.ndarray, radius: float, width: float = SOFT_EDGE_VOXELS) -> np.ndarray:
    """1 inside radius, 0 outside, linear ramp of the given width."""
    return np.clip((radius - distance) / width + 0.5, 0.0, 1.0)


def _coord_grid(side: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    c = (side - 1) / 2.0
    z, y, x = np.mgrid[0:side, 0:side, 0:side].astype(np.float64)
    return z - c, y - c, x - c


def make_volume(kind: str, side: int, seed: int = 0) -> np.ndarray:
    """Cubic density template; nonnegative, clipped to the inscribed sphere."""
    if side < 32:
        raise ValueError("volume side must be at least 32 voxels")
    if kind == "void":
        return np.zeros((side, side, side))
    z, y, x = _coord_grid(side)
    r = np.sqrt(z**2 + y**2 + x**2)
    bound = _soft_mask(r, TEMPLATE_EXTENT * side)
    if kind == "sphere":
        return _soft_mask(r, 0.3 * side)
    if kind == "plate":
        return _soft_mask(np.abs(z), 0.075 * side) * bound
    if kind == "cylinder":
        rng = np.random.default_rng(seed)
        axis = rng.standard_normal(3)
        axis /= np.linalg.norm(axis)
        pts = np.stack([z, y, x], axis=-1)
        along = pts @ axis
        perp = np.sqrt(np.maximum(np.sum(pts**2, axis=-1) - along**2, 0.0))
        return _soft_mask(perp, 0.12 * side) * bound
    if kind == PARTICLE_KIND:
        rng = np.random.default_rng(seed)
        density = np.zeros((side, side, side))
        n_lumps = 40
        # centers uniform inside a ball of radius 0.35*side
        directions = rng.standard_normal((n_lumps, 3))
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
        radii_pos = 0.35 * side * rng.uniform(0, 1, n_lumps) ** (1 / 3)
        centers = directions * radii_pos[:, None]
        lump_radii = rng.uniform(0.03, 0.08, n_lumps) * side
        for center, lr in zip(centers, lump_radii):
            d = np.sqrt((z - center[0]) ** 2 + (y - center[1]) ** 2 + (x - center[2]) ** 2)
            density = np.maximum(density, _soft_mask(d, lr))
        return density
    raise ValueError(f"unknown template kind {kind!r}")


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Uniform random 3D rotation matrix via quaternion sampling."""
    q = rng.standard_normal(4)
    q /= np.linalg.norm(q)
    w, xq, yq, zq = q
    return np.array(
        [
            [1 - 2 * (yq**2 + zq**2), 2 * (xq * yq - zq * w), 2 * (xq * zq + yq * w)],
            [2 * (xq * yq + zq * w), 1 - 2 * (xq**2 + zq**2), 2 * (yq * zq - xq * w)],
            [2 * (xq * zq - yq * w), 2 * (yq * zq + xq * w), 1 - 2 * (xq**2 + yq**2)],
        ]
    )


def project(volume: np.ndarray, rotation: np.ndarray | None = None, side: int | None = None) -> np.ndarray:
    """Rotate (trilinear resampling) and sum along z; optional center crop/pad."""
    if rotation is not None and not np.allclose(rotation, np.eye(3)):
        img = rotate_and_project(volume, rotation)
    else:
        img = volume.sum(axis=0)
    if side is not None and side != img.shape[0]:
        img = _center_crop_pad(img, side)
    return img


def _center_crop_pad(img: np.ndarray, side: int) -> np.ndarray:
    h, w = img.shape
    out = np.zeros((side, side))
    sy, oy = max(0, (h - side) // 2), max(0, (side - h) // 2)
    sx, ox = max(0, (w - side) // 2), max(0, (side - w) // 2)
    hh, ww = min(h, side), min(w, side)
    out[oy:oy + hh, ox:ox + ww] = img[sy:sy + hh, sx:sx + ww]
    return out


def add_noise_to_snr(img: np.ndarray, target_snr: float, seed: int) -> np.ndarray:
    """Add i.i.d. Gaussian noise with variance var(img)/target_snr."""
    if target_snr <= 0:
        raise ValueError("target_snr must be positive")
    var = float(np.var(img))
    if var == 0.0:
        raise ValueError("zero-variance input has no defined SNR")
    rng = np.random.default_rng(seed)
    return img + rng.normal(0.0, np.sqrt(var / target_snr), img.shape)


def ctf_curve(q: np.ndarray, p: CtfParams) -> np.ndarray:
    """CTF value at radial frequency q (1/Angstrom)."""
    lam = p.wavelength_a
    defocus_a = p.defocus_um * 1e4
    cs_a = p.spherical_aberration_mm * 1e7
    chi = np.pi * lam * defocus_a * q**2 - 0.5 * np.pi * cs_a * lam**3 * q**4
    a = p.amplitude_contrast
    return -(np.sqrt(1.0 - a**2) * np.sin(chi) + a * np.cos(chi))


def apply_ctf(img: np.ndarray, p: CtfParams) -> np.ndarray:
    """Multiply the image spectrum by the radially symmetric CTF."""
    h, w = img.shape
    if h != w:
        raise ValueError("CTF modulation requires a square image")
    fy = np.fft.fftfreq(h, d=p.pixel_size_a)
    fx = np.fft.fftfreq(w, d=p.pixel_size_a)
    q = np.hypot(*np.meshgrid(fy, fx, indexing="ij"))
    return np.fft.ifft2(np.fft.fft2(img) * ctf_curve(q, p)).real


def bandpass(img: np.ndarray, low: float, high: float, edge_width: float = 0.01) -> np.ndarray:
    """Radial Gaussian-edged band mask in cycles/pixel; DC kept iff low == 0.

    high == 0.5 is treated as all-pass on the upper side (no corner
    attenuation), so (0, 0.5) reproduces the input.
    """
    if not 0 <= low < high <= 0.5:
        raise ValueError("need 0 <= low < high <= 0.5")
    h, w = img.shape
    fy = np.fft.fftfreq(h)
    fx = np.fft.fftfreq(w)
    q = np.hypot(*np.meshgrid(fy, fx, indexing="ij"))
    mask = np.ones_like(q)
    if high < 0.5:
        outside = q > high
        mask[outside] = np.exp(-((q[outside] - high) ** 2) / (2.0 * edge_width**2))
    if low > 0.0:
        inside = q < low
        mask[inside] *= np.exp(-((q[inside] - low) ** 2) / (2.0 * edge_width**2))
        mask[0, 0] = 0.0
    return np.fft.ifft2(np.fft.fft2(img) * mask).real


def simulate_sample(
    volume: np.ndarray | None, cfg: SimulationConfig, seed: int, stages: dict | None = None
) -> np.ndarray:
    """Run one sample through the full pipeline.

    ``volume is None`` marks a void sample: a unit-variance Gaussian
    field replaces the noisy projection before the CTF stage.
    If given, ``stages`` collects intermediate images by name.
    """
    rng = np.random.default_rng(seed)
    side = cfg.image_side
    if volume is None:
        img = rng.standard_normal((side, side))
        if stages is not None:
            stages["projection"] = np.zeros((side, side))
            stages["structural_noise"] = img.copy()
    else:
        rotation = random_rotation(rng)
        img = project(volume, rotation, side)
        if stages is not None:
            stages["projection"] = img.copy()
        img = add_noise_to_snr(img, cfg.structural_snr, seed=int(rng.integers(2**63)))
        if stages is not None:
            stages["structural_noise"] = img.copy()
    img = apply_ctf(img, cfg.ctf)
    if stages is not None:
        stages["ctf"] = img.copy()
    img = add_noise_to_snr(img, cfg.shot_snr, seed=int(rng.integers(2**63)))
    if stages is not None:
        stages["shot_noise"] = img.copy()
    img = bandpass(img, cfg.bandpass_low, cfg.bandpass_high)
    if stages is not None:
        stages["bandpass"] = img.copy()
    return normalize(img)


def _volume_for(kind: str, cfg: SimulationConfig, cache: dict) -> np.ndarray | None:
    if kind == "void":
        return None
    if kind not in cache:
        kind_tag = {PARTICLE_KIND: 1, "plate": 2, "cylinder": 3, "sphere": 4}[kind]
        vseed = sample_seed(cfg.seed, 0x70_0000 + kind_tag)
        cache[kind] = make_volume(kind, cfg.volume_side, vseed)
    return cache[kind]


def _split_labels(spec: SplitSpec, cfg: SimulationConfig, rng: np.random.Generator) -> list[bool]:
    if spec.n_total is not None:
        return list(rng.uniform(size=spec.n_total) < cfg.particle_fraction)
    if spec.n_particles is None or spec.n_non_particles is None:
        raise ValueError(f"split {spec.name!r} needs n_total or both class counts")
    labels = [True] * spec.n_particles + [False] * spec.n_non_particles
    rng.shuffle(labels)
    return labels


def generate_split(cfg: SimulationConfig, spec: SplitSpec, index_base: int = 0):
    """Generate one split: (entries, images) with deterministic per-sample seeds.

    Manifest paths are placeholders '#<i>'; the caller prefixes the stack
    file name when writing to disk.
    """
    label_rng = np.random.default_rng(sample_seed(cfg.seed, 0x1ABE15 + index_base))
    is_particle = _split_labels(spec, cfg, label_rng)
    cache: dict[str, np.ndarray] = {}
    images = np.empty((len(is_particle), cfg.image_side, cfg.image_side), dtype=np.float64)
    entries = []
    for i, particle in enumerate(is_particle):
        sseed = sample_seed(cfg.seed, index_base + i)
        if particle:
            kind = PARTICLE_KIND
        elif cfg.scenario == "all":
            pick = np.random.default_rng(sseed).integers(len(CONTAMINANT_KINDS))
            kind = CONTAMINANT_KINDS[pick]
        else:
            kind = cfg.scenario
        volume = _volume_for(kind, cfg, cache)
        images[i] = simulate_sample(volume, cfg, sample_seed(sseed, 0xF00D))
        entries.append(
            ManifestEntry(
                path=f"#{i}",
                label="particle" if particle else "non_particle",
                source="simulator",
            )
        )
    return entries, images


def generate_dataset(cfg: SimulationConfig) -> dict[str, tuple[list[ManifestEntry], np.ndarray]]:
    """All configured splits, keyed by split name."""
    out = {}
    base = 0
    for spec in cfg.splits:
        entries, images = generate_split(cfg, spec, index_base=base)
        out[spec.name] = (entries, images)
        base += 1_000_000
    return out
