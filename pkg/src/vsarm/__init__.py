"""Two-link variable-stiffness assistive arm: deterministic simulator,
momentum-observer collision detection, workspace optimization, tracking
control, post-collision safety evaluation and the bimanual-task service."""

from .params import ArmParams, default_params
from .dynamics import ArmState, rest_state
from .kinematics import PlanarPose, forward_kinematics, inverse_kinematics, jacobian

__version__ = "0.1.0"

__all__ = [
    "ArmParams", "ArmState", "PlanarPose", "default_params", "rest_state",
    "forward_kinematics", "inverse_kinematics", "jacobian", "__version__",
]
