"""
Algebra package.
Contains the single-qubit gate algebra and the linear-index aliasing analysis.
"""
