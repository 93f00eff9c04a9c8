"""File formats: entanglement keys, Netpbm images and CSV tables."""
