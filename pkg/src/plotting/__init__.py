"""Static chart rendering from the solver CLI's CSV outputs."""

__all__ = ["render"]
