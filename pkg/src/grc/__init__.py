"""Generalized reversible computing toolkit."""
