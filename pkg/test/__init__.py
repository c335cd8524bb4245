"""
Testing folder for unit tests and user flow tests.
"""

