"""semscan: semantic scanpaths from head-pose streams, an LLM tool-calling
agent that consumes them, and the offline evaluation harness."""

from .errors import DegenerateGeometryError, InputError, ParseError
from .geometry import (
    Aabb,
    HeadPoseSample,
    RankedFrame,
    Scene,
    SceneObject,
    Vec3,
    angular_offset_to_object,
    angular_speed,
    rank_objects,
    sample_aabb_surface,
)
from .scanpath import (
    SemanticScanpath,
    Utterance,
    compose,
    parse_prompt_text,
    prompt_equivalent,
    render_prompt_text,
)
from .segmentation import (
    FixationSegment,
    GazeHistory,
    SegmentationParams,
    StreamingSegmenter,
    build_gaze_history,
    candidate_set,
    merge_segments,
    segment_fixations,
    suppress_saccades,
)

__version__ = "0.1.0"

__all__ = [
    "Aabb",
    "DegenerateGeometryError",
    "FixationSegment",
    "GazeHistory",
    "HeadPoseSample",
    "InputError",
    "ParseError",
    "RankedFrame",
    "Scene",
    "SceneObject",
    "SegmentationParams",
    "SemanticScanpath",
    "StreamingSegmenter",
    "Utterance",
    "Vec3",
    "angular_offset_to_object",
    "angular_speed",
    "build_gaze_history",
    "candidate_set",
    "compose",
    "merge_segments",
    "parse_prompt_text",
    "prompt_equivalent",
    "rank_objects",
    "render_prompt_text",
    "sample_aabb_surface",
    "segment_fixations",
    "suppress_saccades",
    "__version__",
]
