"""Planning and loss analysis for quantum metropolitan optical networks."""

from .capacity import (
    ChannelPlan, LimitingFactor, feasibility_of_extension, max_access_networks, synthesize_channel_plan,
)
from .catalog import DEFAULT_CATALOG, Action, Catalog, NodeKind, SignalClass, node_loss
from .loss import Budget, PathLossReport, entangled_link_loss, one_way_loss, worst_case_analysis
from .scheduler import DemandSet, NodeConfiguration, Schedule, schedule, validate_configuration
from .source import EntangledSourceSpec, plan_sources_for_pairs
from .topology import NetworkModel, TopologyKind, build_reference_network, enumerate_route
from .wdm_grid import Band, CwdmChannel, DwdmChannel, dwdm_channels_in, entangled_partner

__all__ = [
    "Action", "Band", "Budget", "Catalog", "ChannelPlan", "CwdmChannel", "DEFAULT_CATALOG", "DemandSet",
    "DwdmChannel", "EntangledSourceSpec", "LimitingFactor", "NetworkModel", "NodeConfiguration", "NodeKind",
    "PathLossReport", "Schedule", "SignalClass", "TopologyKind", "build_reference_network",
    "dwdm_channels_in", "entangled_link_loss", "entangled_partner", "enumerate_route",
    "feasibility_of_extension", "max_access_networks", "node_loss", "one_way_loss", "plan_sources_for_pairs",
    "schedule", "synthesize_channel_plan", "validate_configuration", "worst_case_analysis",
]
