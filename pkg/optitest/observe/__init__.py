from .twins import *
from .reconstruct import *
