class NoLesionError(RuntimeError):
    """The pipeline found no region that could be the lesion."""
