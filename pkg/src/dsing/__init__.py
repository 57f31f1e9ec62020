"""Upper bounds on the distance to singularity of matrix-valued functions."""

__version__ = "0.1.0"
