from .params import *
from .beta import *
from .schedule import *
from .dynamics import *
from .trajectory import *
from .integrate import *
from .orbit import *
