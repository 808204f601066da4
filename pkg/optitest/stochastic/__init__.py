from .ctmc import *
from .gillespie import *
from .ensemble import *
