"""Command tools; importing this package registers every handler"""
from gconvex.commands.tools import (  # noqa: F401
    classify_tools,
    connection_tools,
    density_tools,
    geodesic_tools,
    holonomy_tools,
)
