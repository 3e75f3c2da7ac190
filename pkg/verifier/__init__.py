"""
Verifier package.
Contains gate bindings, the circuit simulator, the program interpreters and the baselines.
"""

from verifier.interpreter import execute_output, unroll_concrete, verify_program
from verifier.simulator import SimCircuit, equivalent

__all__ = ["SimCircuit", "equivalent", "execute_output", "unroll_concrete", "verify_program"]
