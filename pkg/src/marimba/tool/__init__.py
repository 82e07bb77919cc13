# __init__.py
#
# Date: 2026-09-23

# pyright: ignore [reportUnusedImport, reportUnusedClass]
#
from .main import tool_main
