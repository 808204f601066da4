from .config import *
from .artifacts import *
from .sweep import *
from .run import *
