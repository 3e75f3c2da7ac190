"""
Scheduling package.
Contains the dependence graph, the modulo scheduler, ASAP layering and code generation.
"""
