"""Symbolic derivation of mean-field PDEs from lattice hopping models."""
