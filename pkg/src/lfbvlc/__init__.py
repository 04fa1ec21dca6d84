"""DCO-OFDM visible-light link simulation with luminous-feedback pre-distortion
and zero-forcing subcarrier pre-equalization."""

__version__ = "0.1.0"
