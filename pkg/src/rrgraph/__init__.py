"""Random reversal graphs - simulation of the giant-component phase transition on B_n."""

__version__ = "0.1.0"
__author__ = "Random Reversal Graph Team"

from rrgraph.settings import Settings

__all__ = ["Settings", "__version__"]
