"""Single source of the package version for manifests and metadata."""

__version__ = "0.1.0"
