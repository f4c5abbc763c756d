"""Unsupervised style adaptation for artistic object recognition."""
