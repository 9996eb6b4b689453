from ._prose import *  # noqa: F401,F403
from ._prose import __doc__  # noqa: F401
