"""Census of virtual morsifications of degree-4 Morse polynomials.

Closes seed states under flips, splits the result into subsets of
mutually reachable states, and checks the Card spectra and D-graphs.
"""

from .vmcore import Kind, PrincipalType, VirtualMorsification, canonical_key, parse, serialize, validate
from .flips import FlipConfig, FlipKind, apply_flip, enumerate_flips
from .explore import close_universe, partition_subsets, spectrum
from .kernel import BACKEND

__version__ = "0.1.0"
