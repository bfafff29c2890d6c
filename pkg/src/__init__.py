"""Robot workload monitoring and failure-mitigation simulator"""
__version__ = "0.1.0-dev"
