"""entlab - seeded computational-entanglement encoding, statistics and experiments."""

__version__ = "0.1.0"
