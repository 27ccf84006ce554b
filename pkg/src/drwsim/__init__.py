"""Mode, loss, bend, crosstalk and taper analysis of high-permittivity rectangular dielectric waveguides."""

__version__ = "0.1.0"

from .errors import DRWError  # noqa: E402
from .model import CrossSection, FrequencyGrid, Material, reference_cross_section  # noqa: E402

__all__ = ["CrossSection", "DRWError", "FrequencyGrid", "Material", "reference_cross_section", "__version__"]
