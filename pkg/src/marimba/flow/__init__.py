# __init__.py
#
# Date: 2026-09-17

# pyright: ignore [reportUnusedImport, reportUnusedClass]
#
from .state import *
from .sampling import *
from .tracer import *
from .logio import *
