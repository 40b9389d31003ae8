import importlib.metadata

__version__ = importlib.metadata.version(__package__)

from .utils import ConfigError, ConsistencyError, DomainError, ShapeError, ValidationError, CheckReport
from .jets import Box, Jet, SmoothField, constant_field, directional, jacobian, second_directional, finite_difference
from .algebroid import (
    LocalAlgebroid,
    make_algebroid,
    builtin,
    bracket,
    jacobiator,
    anchor_morphism_defect,
    nijenhuis,
    lie_morphism_defect,
    transport,
)
from .forms import KForm, wedge, insert, exterior_derivative, lie_derivative_form, pullback_form, lam_defect
from .prolong import Fibration, Prolongation, build_prolongation, make_projectable, prolong_bracket, kernel_identity
from .connect import Connection, make_connection, projectors, horizontal_lift, apply_semi_basic, semi_basic_difference
from .towers import Tower, Level, Bonding, check_bonding_laws, limit_bracket_defect, make_thread
from .validator import validate, load_config
from .runner import run_suite
from .documentor import emit_report, create_table
