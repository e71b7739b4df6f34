"""Composite Silhouette: subsampling-based cluster-count selection."""
