"""Knowledge-centric vessel trajectory analysis.

Ingests raw AIS data, distills a tripartite knowledge graph over static
attributes, behavior patterns, and imputation methods, and uses it to
fill trajectory gaps with ranked method selection and evidence-backed
reports, served over HTTP and a CLI.
"""

from .ais import AisRecord, Gap, Segment, Trajectory
from .behavior import BehaviorPattern, PortDirectory, RuleConfig, classify, extract_features
from .graph import EmptyRanking, KnowledgeGraph, NodeId, UnknownNode
from .imputation import ImputedSegment, MethodRegistry, UnknownMethod, impute_gap
from .explanation import SegmentReport, compose, report_for_node
from .workflow import JobConfig, JobStatus, run_construction, run_imputation

__version__ = "0.1.0"

__all__ = [
    "AisRecord",
    "BehaviorPattern",
    "EmptyRanking",
    "Gap",
    "ImputedSegment",
    "JobConfig",
    "JobStatus",
    "KnowledgeGraph",
    "MethodRegistry",
    "NodeId",
    "PortDirectory",
    "RuleConfig",
    "Segment",
    "SegmentReport",
    "Trajectory",
    "UnknownMethod",
    "UnknownNode",
    "classify",
    "compose",
    "extract_features",
    "impute_gap",
    "report_for_node",
    "run_construction",
    "run_imputation",
    "__version__",
]
