"""
Transforms package.
Contains loop body compaction, rotation and unrolling.
"""
