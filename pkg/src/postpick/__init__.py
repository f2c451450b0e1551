"""Post-picking toolkit: classify windowed cryo-EM candidates into
particles and non-particles, with a synthetic data simulator and a
human-in-the-loop curation service."""

__version__ = "0.1.0"
