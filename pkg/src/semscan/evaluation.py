"""Offline evaluation harness: combinatorial corpus expansion, scoring,
gaze-distribution analysis, and condition comparison statistics."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .agent import AgentSession, AgentTurn, Backend, build_tool_registry
from .agent.runtime import STATUS_COMPLETED
from .errors import InputError
from .scanpath import SemanticScanpath
from .scenarios import ROBOT_ID, EvalCondition, Scenario, TaskSpec, builtin_scenarios
from .segmentation import GazeHistory
from .stats import OddsRatioResult, chi_square_2x2, odds_ratio

CATEGORIES = ("robot", "targets", "distractors", "irrelevant")


@dataclass(frozen=True)
class TurnRecord:
    """One recorded user turn: who said what while gazing where."""

    user_id: str
    scenario_id: str
    task_id: str
    scanpath: SemanticScanpath
    agent_turn: AgentTurn | None = None


class RecordGrid:
    """Turn records indexed by (user, scenario, task)."""

    def __init__(self):
        self._records: dict[tuple[str, str, str], TurnRecord] = {}

    def add(self, record: TurnRecord) -> None:
        key = (record.user_id, record.scenario_id, record.task_id)
        if key in self._records:
            raise InputError(f"duplicate turn record for user={key[0]} scenario={key[1]} task={key[2]}")
        self._records[key] = record

    def __len__(self) -> int:
        return len(self._records)

    def get(self, user_id: str, scenario_id: str, task_id: str) -> TurnRecord:
        return self._records[(user_id, scenario_id, task_id)]

    def users(self) -> list[str]:
        return sorted({u for u, _, _ in self._records})

    def scenarios(self) -> list[str]:
        return sorted({s for _, s, _ in self._records})

    def tasks(self, scenario_id: str) -> list[str]:
        return sorted({t for _, s, t in self._records if s == scenario_id})

    def records_for_scenario(self, scenario_id: str) -> list[TurnRecord]:
        return [r for (_, s, _), r in sorted(self._records.items()) if s == scenario_id]

    def missing_cells(self) -> list[tuple[str, str, str]]:
        """Cells absent from the full users x scenarios x tasks cube."""
        missing = []
        for scenario in self.scenarios():
            for user in self.users():
                for task in self.tasks(scenario):
                    if (user, scenario, task) not in self._records:
                        missing.append((user, scenario, task))
        return missing

    def all_records(self) -> list[TurnRecord]:
        return [r for _, r in sorted(self._records.items())]


def combinatorial_interactions(records: Iterable[TurnRecord]) -> list[tuple[TurnRecord, ...]]:
    """Cartesian expansion of per-task user choices for one scenario.

    With U users and T tasks this yields U**T interactions, each an
    ordered (T1..Tn) tuple of records, enumerated odometer-style with the
    last task cycling fastest.
    """
    by_cell: dict[tuple[str, str], TurnRecord] = {}
    scenario_ids = set()
    for r in records:
        scenario_ids.add(r.scenario_id)
        key = (r.user_id, r.task_id)
        if key in by_cell:
            raise InputError(f"duplicate record for user={r.user_id} task={r.task_id}")
        by_cell[key] = r
    if len(scenario_ids) > 1:
        raise InputError(f"records span multiple scenarios: {sorted(scenario_ids)}")
    if not by_cell:
        return []
    users = sorted({u for u, _ in by_cell})
    tasks = sorted({t for _, t in by_cell})
    for user in users:
        for task in tasks:
            if (user, task) not in by_cell:
                raise InputError(f"missing turn record for user={user} task={task}")

    interactions: list[tuple[TurnRecord, ...]] = []
    choices: list[list[str]] = [[]]
    for _ in tasks:
        choices = [c + [u] for c in choices for u in users]
    for combo in choices:
        interactions.append(tuple(by_cell[(u, t)] for u, t in zip(combo, tasks)))
    return interactions


@dataclass(frozen=True)
class TurnScore:
    correct: bool
    scoreable: bool


def score_turn(turn: AgentTurn, task: TaskSpec) -> TurnScore:
    """Correct iff the turn completed and required_objects contains every
    target (containment, not equality)."""
    scoreable = turn.status == STATUS_COMPLETED and bool(turn.required_objects)
    correct = scoreable and set(task.targets) <= set(turn.required_objects or ())
    return TurnScore(correct=correct, scoreable=scoreable)


@dataclass(frozen=True)
class GazeDistribution:
    percent: dict[str, float]
    defined: bool

    def as_row(self) -> dict[str, float]:
        return {c: self.percent.get(c, 0.0) for c in CATEGORIES}


def gaze_distribution(
    history: GazeHistory, task: TaskSpec, robot_id: str = ROBOT_ID
) -> GazeDistribution:
    """Percent of dwell per category; mixed segments split dwell evenly."""
    totals = {c: 0.0 for c in CATEGORIES}
    for seg in history.segments:
        share = seg.duration_ms / len(seg.object_ids)
        for oid in seg.object_ids:
            totals[task.category_of(oid, robot_id)] += share
    grand = sum(totals.values())
    if grand == 0.0:
        return GazeDistribution(percent={c: 0.0 for c in CATEGORIES}, defined=False)
    return GazeDistribution(
        percent={c: 100.0 * v / grand for c, v in totals.items()}, defined=True
    )


@dataclass(frozen=True)
class TurnOutcome:
    scenario_id: str
    interaction_index: int
    task_id: str
    user_id: str
    status: str
    required_objects: tuple[str, ...] | None
    correct: bool
    scoreable: bool
    discarded: bool
    tool_names: tuple[str, ...]
    distribution: GazeDistribution

    def to_dict(self) -> dict:
        return {
            "scenario_id": self.scenario_id,
            "interaction_index": self.interaction_index,
            "task_id": self.task_id,
            "user_id": self.user_id,
            "status": self.status,
            "required_objects": list(self.required_objects or []) if self.required_objects is not None else None,
            "correct": self.correct,
            "scoreable": self.scoreable,
            "discarded": self.discarded,
            "tool_names": list(self.tool_names),
        }


@dataclass
class TaskMetrics:
    scenario_id: str
    task_id: str
    turns: int = 0
    counted: int = 0
    correct: int = 0
    wrong: int = 0
    discarded: int = 0
    unscoreable: int = 0
    dist_correct: dict[str, float] | None = None
    dist_wrong: dict[str, float] | None = None

    @property
    def accuracy(self) -> float:
        return self.correct / self.counted if self.counted else 0.0

    def to_dict(self) -> dict:
        return {
            "scenario_id": self.scenario_id,
            "task_id": self.task_id,
            "turns": self.turns,
            "counted": self.counted,
            "correct": self.correct,
            "wrong": self.wrong,
            "discarded": self.discarded,
            "unscoreable": self.unscoreable,
            "accuracy": self.accuracy,
            "gaze_distribution_correct": self.dist_correct,
            "gaze_distribution_wrong": self.dist_wrong,
        }


@dataclass
class EvalResult:
    condition: EvalCondition
    task_metrics: list[TaskMetrics] = field(default_factory=list)
    outcomes: list[TurnOutcome] = field(default_factory=list)
    interactions_per_scenario: dict[str, int] = field(default_factory=dict)

    def query_objects_calls(self) -> int:
        return sum(o.tool_names.count("query_objects") for o in self.outcomes)

    def metrics_for(self, scenario_id: str, task_id: str) -> TaskMetrics:
        for m in self.task_metrics:
            if m.scenario_id == scenario_id and m.task_id == task_id:
                return m
        raise KeyError((scenario_id, task_id))

    def to_dict(self, include_turns: bool = True) -> dict:
        out = {
            "condition": self.condition.name,
            "scene_query_enabled": self.condition.scene_query_enabled,
            "interactions_per_scenario": dict(self.interactions_per_scenario),
            "query_objects_calls": self.query_objects_calls(),
            "tasks": [m.to_dict() for m in self.task_metrics],
        }
        if include_turns:
            out["turns"] = [o.to_dict() for o in self.outcomes]
        return out


def _target_hit(record: TurnRecord, task: TaskSpec) -> bool:
    seen = {oid for seg in record.scanpath.gaze_history.segments for oid in seg.object_ids}
    return bool(seen & set(task.targets))


def _run_interaction(
    index: int,
    interaction: tuple[TurnRecord, ...],
    scenario: Scenario,
    condition: EvalCondition,
    backend: Backend,
    discard_missed_target: bool,
) -> list[TurnOutcome]:
    registry = build_tool_registry(condition, actions_enabled=False)
    session = AgentSession(
        scenario.scene, registry, backend, initial_contents=scenario.contents
    )
    outcomes = []
    for record in interaction:
        task = scenario.task(record.task_id)
        turn = session.run_turn(record.scanpath)
        score = score_turn(turn, task)
        discarded = discard_missed_target and not _target_hit(record, task)
        outcomes.append(
            TurnOutcome(
                scenario_id=scenario.id,
                interaction_index=index,
                task_id=record.task_id,
                user_id=record.user_id,
                status=turn.status,
                required_objects=turn.required_objects,
                correct=score.correct,
                scoreable=score.scoreable,
                discarded=discarded,
                tool_names=tuple(turn.tool_names()),
                distribution=gaze_distribution(
                    record.scanpath.gaze_history, task, scenario.scene.robot.id
                ),
            )
        )
    return outcomes


def _mean_distribution(dists: Sequence[GazeDistribution]) -> dict[str, float] | None:
    defined = [d for d in dists if d.defined]
    if not defined:
        return None
    return {
        c: sum(d.percent[c] for d in defined) / len(defined) for c in CATEGORIES
    }


def run_evaluation(
    grid: RecordGrid,
    condition: EvalCondition,
    backend_factory: Callable[[], Backend],
    *,
    scenarios: dict[str, Scenario] | None = None,
    parallelism: int = 1,
    discard_missed_target: bool = False,
) -> EvalResult:
    """Run every combinatorial interaction through the agent and score it.

    Backends are created per interaction so interactions stay independent;
    per-turn backend failures surface as error-status turns and the
    evaluation continues.
    """
    scenarios = scenarios if scenarios is not None else builtin_scenarios()
    result = EvalResult(condition=condition)

    for scenario_id in grid.scenarios():
        if scenario_id not in scenarios:
            raise InputError(f"records reference unknown scenario {scenario_id!r}")
        scenario = scenarios[scenario_id]
        interactions = combinatorial_interactions(grid.records_for_scenario(scenario_id))
        result.interactions_per_scenario[scenario_id] = len(interactions)

        def job(args):
            idx, interaction = args
            return _run_interaction(
                idx, interaction, scenario, condition, backend_factory(), discard_missed_target
            )

        if parallelism > 1:
            with ThreadPoolExecutor(max_workers=parallelism) as pool:
                per_interaction = list(pool.map(job, enumerate(interactions)))
        else:
            per_interaction = [job(item) for item in enumerate(interactions)]

        for outcomes in per_interaction:
            result.outcomes.extend(outcomes)

        for task_id in grid.tasks(scenario_id):
            metrics = TaskMetrics(scenario_id=scenario_id, task_id=task_id)
            task_outcomes = [
                o
                for o in result.outcomes
                if o.scenario_id == scenario_id and o.task_id == task_id
            ]
            metrics.turns = len(task_outcomes)
            counted = [o for o in task_outcomes if not o.discarded]
            metrics.counted = len(counted)
            metrics.discarded = metrics.turns - metrics.counted
            metrics.correct = sum(1 for o in counted if o.correct)
            metrics.wrong = metrics.counted - metrics.correct
            metrics.unscoreable = sum(1 for o in counted if not o.scoreable)
            metrics.dist_correct = _mean_distribution(
                [o.distribution for o in counted if o.correct]
            )
            metrics.dist_wrong = _mean_distribution(
                [o.distribution for o in counted if not o.correct]
            )
            result.task_metrics.append(metrics)

    return result


@dataclass(frozen=True)
class ConditionComparison:
    scenario_id: str
    task_id: str
    table: tuple[tuple[int, int], tuple[int, int]]  # rows: (full, ablated) x (correct, wrong)
    chi_square: float
    p_value: float
    odds: OddsRatioResult

    def to_dict(self) -> dict:
        return {
            "scenario_id": self.scenario_id,
            "task_id": self.task_id,
            "table": [list(self.table[0]), list(self.table[1])],
            "chi_square": self.chi_square,
            "p_value": self.p_value,
            "odds_ratio": self.odds.value,
            "odds_ratio_corrected": self.odds.corrected,
        }


def compare_conditions(full: EvalResult, ablated: EvalResult) -> list[ConditionComparison]:
    """Per-task correct/wrong contingency between two condition runs."""
    comparisons = []
    for m_full in full.task_metrics:
        try:
            m_abl = ablated.metrics_for(m_full.scenario_id, m_full.task_id)
        except KeyError:
            continue
        a, b = m_full.correct, m_full.wrong
        c, d = m_abl.correct, m_abl.wrong
        try:
            statistic, p = chi_square_2x2(a, b, c, d)
        except InputError:
            statistic, p = float("nan"), float("nan")
        comparisons.append(
            ConditionComparison(
                scenario_id=m_full.scenario_id,
                task_id=m_full.task_id,
                table=((a, b), (c, d)),
                chi_square=statistic,
                p_value=p,
                odds=odds_ratio(a, b, c, d),
            )
        )
    return comparisons


def render_result_text(result: EvalResult) -> str:
    """Plain-text accuracy and gaze-distribution tables."""
    lines = [f"condition: {result.condition.name}"]
    for scenario_id, count in sorted(result.interactions_per_scenario.items()):
        lines.append(f"{scenario_id}: {count} interactions")
    lines.append("")
    lines.append(f"{'scenario':<12}{'task':<6}{'turns':>7}{'correct':>9}{'accuracy':>10}")
    for m in result.task_metrics:
        lines.append(
            f"{m.scenario_id:<12}{m.task_id:<6}{m.counted:>7}{m.correct:>9}{m.accuracy:>9.1%}"
        )
    lines.append("")
    header = f"{'scenario':<12}{'task':<6}{'subset':<9}" + "".join(
        f"{c:>13}" for c in CATEGORIES
    )
    lines.append(header)
    for m in result.task_metrics:
        for subset, dist in (("correct", m.dist_correct), ("wrong", m.dist_wrong)):
            if dist is None:
                continue
            row = f"{m.scenario_id:<12}{m.task_id:<6}{subset:<9}" + "".join(
                f"{dist[c]:>12.1f}%" for c in CATEGORIES
            )
            lines.append(row)
    return "\n".join(lines)


def render_comparison_text(comparisons: list[ConditionComparison]) -> str:
    lines = [
        f"{'scenario':<12}{'task':<6}{'chi2':>10}{'p':>12}{'odds ratio':>12}"
    ]
    for c in comparisons:
        odds = f"{c.odds.value:.3f}" + ("*" if c.odds.corrected else "")
        lines.append(
            f"{c.scenario_id:<12}{c.task_id:<6}{c.chi_square:>10.2f}{c.p_value:>12.3g}{odds:>12}"
        )
    if any(c.odds.corrected for c in comparisons):
        lines.append("* Haldane-Anscombe corrected (zero cell)")
    return "\n".join(lines)


def distributions_csv(result: EvalResult) -> str:
    """CSV of mean gaze distributions per task and verdict subset."""
    rows = ["scenario,task,subset," + ",".join(CATEGORIES)]
    for m in result.task_metrics:
        for subset, dist in (("correct", m.dist_correct), ("wrong", m.dist_wrong)):
            if dist is None:
                continue
            rows.append(
                f"{m.scenario_id},{m.task_id},{subset},"
                + ",".join(f"{dist[c]:.6f}" for c in CATEGORIES)
            )
    return "\n".join(rows) + "\n"
