"""Version information for the KANO tools."""

__version__ = "1.0.0"
__description__ = "Blind super-resolution by deep unfolding with Kolmogorov-Arnold spline networks"
