from .receding import *
from .closed_loop import *
