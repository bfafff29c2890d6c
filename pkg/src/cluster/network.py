"""
Network policies and message delivery
=====================================

Every consumer (the mobile base, the arm, the monitor) reaches a logical
service (a workload) through exactly one provider deployment. Switching the
provider is a policy patch that takes policy_patch_latency to apply; the new
provider is connected and the old one disconnected at the same instant, so a
consumer never hears a service from two providers.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Optional

from cluster.events import EventQueue, EventTrace, Priority
from errors import ScenarioFault

logger = logging.getLogger(__name__)

MONITOR_CONSUMER = "monitor"


@dataclass(frozen=True)
class NetworkPolicy:
    consumer: str
    service: str
    provider: str      # deployment name
    enabled: bool = True


class Network:
    def __init__(self, queue: EventQueue, trace: EventTrace, patch_latency: Callable[[], int]):
        self.queue = queue
        self.trace = trace
        self._patch_latency = patch_latency
        self._policies = {}          # (consumer, service) -> NetworkPolicy
        self._subscriptions = {}     # consumer -> (topics or None for all, handler)
        self._providers = {}         # instance id -> (service, deployment)
        self._remapped = set()       # (instance id, topic)
        self._pending = {}           # (consumer, service) -> activation time

    # ---------- topology ----------

    def subscribe(self, consumer: str, handler: Callable, topics: Optional[set] = None) -> None:
        self._subscriptions[consumer] = (None if topics is None else set(topics), handler)

    def register_instance(self, instance_id: str, service: str, deployment: str) -> None:
        self._providers[instance_id] = (service, deployment)

    def connect(self, consumer: str, service: str, provider: str) -> NetworkPolicy:
        """Initial wiring, effective immediately."""
        policy = NetworkPolicy(consumer, service, provider)
        self._policies[(consumer, service)] = policy
        return policy

    def policy(self, consumer: str, service: str) -> Optional[NetworkPolicy]:
        return self._policies.get((consumer, service))

    def policies_for(self, service: str) -> list:
        return [p for (c, s), p in sorted(self._policies.items()) if s == service]

    def provider_of(self, service: str, consumer: str = MONITOR_CONSUMER) -> Optional[str]:
        policy = self._policies.get((consumer, service))
        return policy.provider if policy else None

    # ---------- patches ----------

    def patch_policy(self, consumer: str, service: str, new_provider: str,
                     on_applied: Optional[Callable[[NetworkPolicy], None]] = None) -> Optional[int]:
        """
        Point (consumer, service) at a new provider deployment.

        Returns:
            The time the patch takes effect, or None for a no-op patch.

        Raises:
            ScenarioFault: unknown consumer, service or provider.
        """
        key = (consumer, service)
        if key not in self._policies:
            raise ScenarioFault(f"no policy for consumer '{consumer}' on service '{service}'")
        if new_provider not in {dep for _, dep in self._providers.values()}:
            raise ScenarioFault(f"unknown provider '{new_provider}'")

        now = self.queue.now
        if self._policies[key].provider == new_provider:
            self.trace.record(now, "warning",
                              message=f"policy {consumer}->{service} already uses {new_provider}")
            return None

        applied_at = now + self._patch_latency()
        self._pending[key] = applied_at
        self.trace.record(now, "policy_patch", consumer=consumer, service=service,
                          provider=new_provider, applies_at=applied_at)
        self.queue.schedule(applied_at, Priority.CLUSTER, self._apply, key, new_provider, on_applied)
        return applied_at

    def _apply(self, key, provider, on_applied) -> None:
        consumer, service = key
        old = self._policies[key].provider
        policy = NetworkPolicy(consumer, service, provider)
        self._policies[key] = policy
        self._pending.pop(key, None)
        self.trace.record(self.queue.now, "policy", consumer=consumer, service=service,
                          provider=provider, previous=old)
        if on_applied:
            on_applied(policy)

    # ---------- injection ----------

    def silent_remap(self, instance_id: str, topic: str) -> None:
        """Messages keep reaching the monitor but no longer reach the plant."""
        self._remapped.add((instance_id, topic))

    def is_remapped(self, instance_id: str, topic: str) -> bool:
        return (instance_id, topic) in self._remapped

    # ---------- delivery ----------

    def publish(self, message, muted: bool = False) -> list:
        """
        Deliver a message to every consumer whose policy selects its sender.

        Returns:
            Names of the consumers that received the message.
        """
        reached = []
        provider = self._providers.get(message.source)
        if provider is not None and not muted:
            service, deployment = provider
            remapped = (message.source, message.topic) in self._remapped
            for consumer in sorted(self._subscriptions):
                topics, handler = self._subscriptions[consumer]
                if topics is not None and message.topic not in topics:
                    continue
                policy = self._policies.get((consumer, service))
                if policy is None or policy.provider != deployment or not policy.enabled:
                    continue
                if remapped and consumer != MONITOR_CONSUMER:
                    continue
                handler(message)
                reached.append(consumer)
        self.trace.record(message.t, "msg", topic=message.topic, source=message.source,
                          to=reached)
        return reached
