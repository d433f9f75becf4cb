"""Cross-cavity optical Stern-Gerlach simulator and atomic lithography planner."""

from .bogoliubov import b_matrix, bbar, fourier_table
from .errors import OSGError
from .kernel import GridSpec, MomentumGrid, f_transform, momentum_distribution
from .lithography import (FieldPlan, LithTarget, ScreenGeometry, locate_peak, peak_width,
                          plan_fields, predict_deflection, screen_map)
from .states import (AtomPrep, SimParams, TwoModeFockState, coherent_coeffs, mean_photon,
                     product_state, squeezed_coherent_coeffs)

__version__ = "0.1.0"
