"""Domain layer: schemas, networks and services."""
