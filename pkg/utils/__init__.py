"""
Utilities package for the qlsp compiler.
Contains configuration, file and error helpers.
"""
