"""
Service layer - graph, metrics, drop and sampling logic
"""
