"""IoT network-flow intrusion detection: leakage-safe preprocessing,
from-scratch classifiers, voting hybrids, and evaluation."""

__version__ = "0.1.0"
