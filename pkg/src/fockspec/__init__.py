"""High-precision spectral laboratory for Gaussian (Bargmann) Toeplitz
operators with sign-changing, compactly supported disc symbols."""

__version__ = "0.1.0"
