"""Independent verification kit: a brute-force propagation oracle and
figure scripts that consume the main toolkit's file formats. Keeps zero
shared code with the main implementation by design."""

__version__ = "0.1.0"
