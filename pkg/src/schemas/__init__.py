"""
Run configuration and report models.
"""
