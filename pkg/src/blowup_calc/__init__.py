"""Exact calculus of blowups on the Berkovich projective line."""
from .farey import FareyPair
from .puiseux import PuiseuxGerm, PuiseuxJet
from .berkovich import PointI, PointII, Direction
from .models import VertexSet, BlowupScript

__version__ = "0.1.0"

__all__ = [
    "FareyPair",
    "PuiseuxGerm",
    "PuiseuxJet",
    "PointI",
    "PointII",
    "Direction",
    "VertexSet",
    "BlowupScript",
]
