"""Core configuration, logging, errors and pipeline plumbing."""
