from .ekf import *
from .beta import *
