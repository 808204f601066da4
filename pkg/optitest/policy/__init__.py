from .base import *
from .newton import *
from .shooting import *
from .theorem1 import *
from .constant import *
from .switching import *
from .cost import *
