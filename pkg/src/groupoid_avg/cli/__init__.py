"""
Command-line interface for groupoid averaging runs.
"""
