"""
Test package for qephonon
"""
