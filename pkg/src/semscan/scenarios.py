"""Built-in tabletop scenarios and their disambiguation tasks.

Two scenes (breakfast, drink), five objects each plus the robot/camera
AOI, and three requests per scene with target/distractor/irrelevant
categorizations.  Object coordinates are fixed plausible placements on a
desk-scale table: right-handed frame, +Z up, meters, table top at
z=0.72, user seated at negative Y facing the robot at positive Y.
Placements are spread so that, from the default user head position,
aiming at one object's center keeps every other object outside the
default angular threshold.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InputError
from .geometry import Aabb, Scene, SceneObject, Vec3

# Default head position used by fixture/demo traces, matching the seated
# user the scenes were laid out for.
DEFAULT_HEAD_ORIGIN = Vec3(0.0, -0.45, 1.25)


@dataclass(frozen=True)
class TaskSpec:
    """One scripted user request with its ground-truth categorization."""

    scenario_id: str
    task_id: str
    abstract: str
    request: str
    inference: str
    targets: tuple[str, ...]
    distractors: tuple[str, ...]
    irrelevant: tuple[str, ...]

    def __post_init__(self):
        groups = (set(self.targets), set(self.distractors), set(self.irrelevant))
        total = sum(len(g) for g in groups)
        if len(groups[0] | groups[1] | groups[2]) != total:
            raise InputError(
                f"task {self.scenario_id}/{self.task_id}: target/distractor/"
                f"irrelevant sets overlap"
            )

    def category_of(self, object_id: str, robot_id: str) -> str:
        if object_id == robot_id:
            return "robot"
        if object_id in self.targets:
            return "targets"
        if object_id in self.distractors:
            return "distractors"
        return "irrelevant"


@dataclass(frozen=True)
class Scenario:
    id: str
    scene: Scene
    contents: dict[str, list[str]]
    tasks: tuple[TaskSpec, ...]

    def task(self, task_id: str) -> TaskSpec:
        for t in self.tasks:
            if t.task_id == task_id:
                return t
        raise KeyError(task_id)


def _box(cx: float, cy: float, sx: float, sy: float, sz: float, base_z: float = 0.72) -> Aabb:
    return Aabb(
        min=Vec3(cx - sx / 2, cy - sy / 2, base_z),
        max=Vec3(cx + sx / 2, cy + sy / 2, base_z + sz),
    )


ROBOT_ID = "the_robot"

_ROBOT = SceneObject(
    id=ROBOT_ID,
    label="the robot",
    kind="robot",
    aabb=Aabb(min=Vec3(-0.12, 1.39, 1.15), max=Vec3(0.12, 1.51, 1.35)),
)


# Object placements fan out on an arc around the seated user so every
# object occupies its own ~20 degree azimuth slot; keeps each line of
# sight clear of the neighbours at the default angular threshold.

def breakfast_scene() -> Scene:
    return Scene(
        objects=(
            SceneObject("cereal_box", "cereal box", _box(-0.68, 0.35, 0.08, 0.20, 0.30)),
            SceneObject("milk_bottle", "bottle of milk", _box(-0.36, 0.54, 0.08, 0.08, 0.24)),
            SceneObject("small_bowl", "small bowl", _box(0.0, 0.60, 0.10, 0.10, 0.06)),
            SceneObject("bowl", "large bowl", _box(0.36, 0.54, 0.18, 0.18, 0.09)),
            SceneObject("orange_juice", "bottle of orange juice", _box(0.68, 0.35, 0.08, 0.08, 0.26)),
            _ROBOT,
        )
    )


def drink_scene() -> Scene:
    return Scene(
        objects=(
            SceneObject("cola_bottle", "bottle of cola", _box(-0.68, 0.35, 0.08, 0.08, 0.28)),
            SceneObject("red_glass", "red glass", _box(-0.36, 0.54, 0.07, 0.07, 0.12)),
            SceneObject("bowl", "bowl with ice cubes", _box(0.0, 0.60, 0.16, 0.16, 0.08)),
            SceneObject("blue_glass", "blue glass", _box(0.36, 0.54, 0.07, 0.07, 0.12)),
            SceneObject("cola_zero_bottle", "bottle of cola zero", _box(0.68, 0.35, 0.08, 0.08, 0.28)),
            _ROBOT,
        )
    )


BREAKFAST_CONTENTS = {
    "cereal_box": ["cereal"],
    "orange_juice": ["orange juice"],
    "milk_bottle": ["milk"],
    "small_bowl": ["sugar"],
    "bowl": [],
}

DRINK_CONTENTS = {
    "cola_bottle": ["cola"],
    "cola_zero_bottle": ["cola zero"],
    "red_glass": [],
    "blue_glass": [],
    "bowl": ["ice cubes"],
}

_BREAKFAST_TASKS = (
    TaskSpec(
        scenario_id="breakfast",
        task_id="T1",
        abstract="Infer user intent",
        request="Can you help me with this?",
        inference="Pour cereal in the bowl",
        targets=("cereal_box", "bowl"),
        distractors=("orange_juice", "milk_bottle", "small_bowl"),
        irrelevant=(),
    ),
    TaskSpec(
        scenario_id="breakfast",
        task_id="T2",
        abstract="Disambiguate object",
        request="I'd like to prepare my cereals. Could you pass me that bottle?",
        inference="Pass the milk bottle for the cereal",
        targets=("milk_bottle",),
        distractors=("orange_juice",),
        irrelevant=("cereal_box", "small_bowl", "bowl"),
    ),
    TaskSpec(
        scenario_id="breakfast",
        task_id="T3",
        abstract="Infer content",
        request="Can I also have some sugar?",
        inference="Get the sugar bowl",
        targets=("small_bowl",),
        distractors=("milk_bottle", "orange_juice", "cereal_box"),
        irrelevant=("bowl",),
    ),
)

_DRINK_TASKS = (
    TaskSpec(
        scenario_id="drink",
        task_id="T1",
        abstract="Infer user preference",
        request="I'm thirsty, can I have a drink?",
        inference="Preference for the cola",
        targets=("cola_bottle",),
        distractors=("cola_zero_bottle",),
        irrelevant=("red_glass", "blue_glass", "bowl"),
    ),
    TaskSpec(
        scenario_id="drink",
        task_id="T2",
        abstract="Disambiguate object",
        request="The cola please. And could you use this glass?",
        inference="Use the glass in front of the user",
        targets=("red_glass",),
        distractors=("blue_glass",),
        irrelevant=("cola_zero_bottle", "cola_bottle", "bowl"),
    ),
    TaskSpec(
        scenario_id="drink",
        task_id="T3",
        abstract="Infer content",
        request="I'd like to have some ice cubes with it",
        inference="Get the bowl with the ice",
        targets=("bowl",),
        distractors=("blue_glass",),
        irrelevant=("cola_zero_bottle", "cola_bottle", "red_glass"),
    ),
)


def builtin_scenarios() -> dict[str, Scenario]:
    return {
        "breakfast": Scenario(
            id="breakfast",
            scene=breakfast_scene(),
            contents=BREAKFAST_CONTENTS,
            tasks=_BREAKFAST_TASKS,
        ),
        "drink": Scenario(
            id="drink",
            scene=drink_scene(),
            contents=DRINK_CONTENTS,
            tasks=_DRINK_TASKS,
        ),
    }


def builtin_scenario(scenario_id: str) -> Scenario:
    scenarios = builtin_scenarios()
    if scenario_id not in scenarios:
        raise InputError(
            f"unknown scenario {scenario_id!r}; available: {', '.join(sorted(scenarios))}"
        )
    return scenarios[scenario_id]


@dataclass(frozen=True)
class EvalCondition:
    """System variant under test: with or without the scene query tool."""

    scene_query_enabled: bool = True

    @property
    def name(self) -> str:
        return "speech+gaze+scene" if self.scene_query_enabled else "speech+gaze"
