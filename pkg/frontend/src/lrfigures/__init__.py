from .figures import (FigureError, FigureSpec, render, render_all, validate)

__all__ = ["FigureError", "FigureSpec", "render", "render_all", "validate"]
