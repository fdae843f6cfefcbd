"""cq-stein: divergences and resource theories for classical-quantum channels."""
__version__ = "1.0.0"
