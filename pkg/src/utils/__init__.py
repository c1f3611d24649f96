"""
Configuration, logging and error hierarchy of the geodesic lab.
"""
