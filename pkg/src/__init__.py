"""
Harmonic Entanglement - entanglement entropy, mutual information and criticality of harmonic lattices.
"""

__version__ = "0.1.0"
