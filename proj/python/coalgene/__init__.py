from ._coalgene import *  # noqa: F401,F403
from ._coalgene import __doc__  # noqa: F401
