"""
Run settings loaded from the environment and an optional .env file.
"""
