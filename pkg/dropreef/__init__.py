"""
DropReef - offline redundancy detection and dropping for large graphs
"""
__version__ = "1.0.0"
