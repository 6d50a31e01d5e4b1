"""Canonical labeling of combinatorial objects via labeling cosets,
with a treewidth-parameterized graph isomorphism pipeline on top."""

__version__ = "0.1.0"
