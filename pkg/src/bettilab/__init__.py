"""Period maps, Betti coordinates and torsion tools for hyperelliptic families."""

__version__ = "0.1.0"
