"""
Frontend package.
Contains the loop-language lexer and parser, and the output language AST, emitter and parser.
"""
