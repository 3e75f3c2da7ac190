"""
Pipeline package.
Contains the compilation driver and depth statistics.
"""
