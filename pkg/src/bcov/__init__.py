"""Exact genus-zero BCOV theory and semi-infinite Hodge structures on finite dGBV models."""
