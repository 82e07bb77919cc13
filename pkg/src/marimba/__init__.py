# __init__.py
#
# Date: 2026-09-15

# pyright: ignore [reportUnusedImport, reportUnusedClass]
#

from .common import *
from .errors import *
from .hyp2 import *
from .surface import *
from .flow import *
from .melody import *
from .spectra import *
from .arcs import *
from .constructions import *
from .teich import *
from .midi import *

__version__ = VERSION
