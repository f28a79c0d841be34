"""Geometry: cylindrical projection, region matching and stitching."""
