"""Hall-Petresco progression densities over finite vector spaces over F_p."""

__version__ = "0.1.0"

from .bounds import BoundsReport, behrend_threshold, sandwich, simple_constants, solve_cp
from .counting import (hp_count, hp_density_subset, is_hp_free, nontrivial_hp_count,
                       s3_fourier, s3_fourier_exact, s_k_bruteforce)
from .errors import BudgetExceeded, DegenerateWarning
from .extremal import (EnvelopePoints, R_exact, SearchConfig, convex_envelope,
                       d_hp_search, r_k_exact)
from .groups import (DenseFunction, Element, GroupSpec, SubsetMask, add, binom_mod_p,
                     format_element, parse_element, product_mask, rank, scale, unrank)
from .hp import HPParams, HPSpec, hp_contains, hp_eval, hp_size, hp_tuple, is_trivial
from .ip import (CharacterId, IPWindow, MatrixSkewSystem, TranslationSystem,
                 double_limit_average, ip_char_average, ip_multiset, junta_projection,
                 junta_test, matrix_correlation, product_formula, weyl_limit_experiment)
from .montecarlo import (DistributionFn, SimReport, delta_k_experiment, sample_random_set,
                         verify_randomset)
from .pipeline import pipeline_envelope
