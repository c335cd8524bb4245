"""
Unit tests for the MGRN pipeline components.
"""
