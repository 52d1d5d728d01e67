"""
Core settings and logging
"""
