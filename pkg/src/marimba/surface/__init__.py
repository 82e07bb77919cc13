# __init__.py
#
# Date: 2026-09-15

# pyright: ignore [reportUnusedImport, reportUnusedClass]
#
from .issues import *
from .spec import *
from .validate import *
from .hexagon import *
from .builder import *
