"""
Simulation kernel: event queue and trace, cluster (pods, deployments, CPU
sampling) and network policies. The scenario runner lives in
cluster.simulation and is imported from there.
"""

from cluster.cluster import Cluster, ClusterParams, CpuSample, PodPhase, PodRecord
from cluster.events import EventQueue, EventTrace, Priority, TraceRecord
from cluster.network import MONITOR_CONSUMER, Network, NetworkPolicy

__all__ = [
    "Cluster", "ClusterParams", "CpuSample", "PodPhase", "PodRecord",
    "EventQueue", "EventTrace", "Priority", "TraceRecord",
    "MONITOR_CONSUMER", "Network", "NetworkPolicy",
]
