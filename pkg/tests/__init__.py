"""
Test package for pairwise-graphlimit.

This module is licensed under the MIT License.
"""
