"""Construction and numerical certification of hamiltonian 2-form Calabi-Yau
metrics and gradient Kähler-Ricci solitons."""
import os

from .expcalc import ensure_precision

DEFAULT_BITS = 128

ensure_precision(int(os.environ.get("FORGE_BITS", DEFAULT_BITS)))

__version__ = "0.1.0"
