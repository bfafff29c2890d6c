import itertools
import random

import pytest

from behavior import (
    BTNode,
    NodeKind,
    TickContext,
    TickStatus,
    action,
    condition,
    fallback,
    inverter,
    parallel,
    reset,
    retry,
    sequence,
    tick,
    timeout,
    validate,
    walk,
)
from errors import ConfigurationError, TickOrderError

S, F, R = TickStatus.SUCCESS, TickStatus.FAILURE, TickStatus.RUNNING


def fixed(status):
    """Predicate returning the status stored in the leaf's `status` argument."""
    return lambda node, ctx: node.arg("status")


def ctx(t=0, visited=None, **handlers):
    return TickContext(
        sim_time=t,
        predicates={"fixed": fixed(None), **handlers},
        actions={"fixed": fixed(None), **handlers},
        visited=visited,
    )


def leaf(name, status, kind="condition"):
    make = condition if kind == "condition" else action
    return make(name, "fixed", status=status)


# ============================================================
# ORACLE
# ============================================================

def oracle(node):
    """Independent recursive evaluator for fixed-status leaves."""
    if node.kind.is_leaf:
        return node.arg("status")
    if node.kind is NodeKind.INVERTER:
        s = oracle(node.children[0])
        return {S: F, F: S, R: R}[s]
    statuses = [oracle(c) for c in node.children]
    if node.kind is NodeKind.SEQUENCE:
        return next((s for s in statuses if s is not S), S)
    if node.kind is NodeKind.FALLBACK:
        return next((s for s in statuses if s is not F), F)
    if node.kind is NodeKind.PARALLEL:
        if statuses.count(S) >= node.threshold:
            return S
        if len(statuses) - statuses.count(F) < node.threshold:
            return F
        return R
    raise AssertionError(node.kind)


def random_tree(rng, depth, counter):
    counter[0] += 1
    name = f"n{counter[0]}"
    if depth == 0 or rng.random() < 0.3:
        return leaf(name, rng.choice([S, F, R]))
    kind = rng.choice(["seq", "fb", "inv"])
    if kind == "inv":
        return inverter(name, random_tree(rng, depth - 1, counter))
    children = [random_tree(rng, depth - 1, counter) for _ in range(rng.randint(1, 3))]
    return (sequence if kind == "seq" else fallback)(name, *children)


# ============================================================
# TICK
# ============================================================

def test_sequence_of_successes_succeeds():
    assert tick(sequence("s", leaf("a", S), leaf("b", S)), ctx()) is S


def test_fallback_returns_first_non_failure():
    tree = fallback("f", leaf("a", F), leaf("b", R, kind="action"))
    assert tick(tree, ctx()) is R


@pytest.mark.parametrize("statuses", list(itertools.product([S, F, R], repeat=3)))
def test_parallel_matches_oracle_for_every_combination(statuses):
    for threshold in (1, 2, 3):
        tree = parallel("p", threshold, *(leaf(f"c{i}", s) for i, s in enumerate(statuses)))
        assert tick(tree, ctx()) is oracle(tree)


def test_parallel_threshold_two_of_three():
    tree = parallel("p", 2, leaf("a", S), leaf("b", F), leaf("c", S))
    assert tick(tree, ctx()) is S


def test_random_trees_match_recursive_oracle():
    rng = random.Random(7)
    for _ in range(500):
        tree = random_tree(rng, 3, [0])
        assert validate(tree) == []
        assert tick(tree, ctx()) is oracle(tree)


def test_sequence_and_fallback_tick_a_left_prefix():
    rng = random.Random(11)
    for _ in range(200):
        children = [leaf(f"c{i}", rng.choice([S, F, R])) for i in range(4)]
        for make in (sequence, fallback):
            visited = []
            tick(make("root", *children), ctx(visited=visited))
            names = visited[1:]
            assert names == [c.name for c in children[:len(names)]]


def test_double_inverter_is_identity():
    for s in (S, F, R):
        assert tick(inverter("i1", inverter("i2", leaf("a", s))), ctx()) is s


def test_truthy_handler_results_map_to_success_and_failure():
    tree = sequence("s", condition("yes", "yes"), condition("no", "no"))
    c = TickContext(0, predicates={"yes": lambda n, c: True, "no": lambda n, c: 0})
    assert tick(tree, c) is F


def test_unknown_predicate_raises_configuration_error():
    with pytest.raises(ConfigurationError, match="nope"):
        tick(condition("c", "nope"), ctx())


def test_unknown_action_raises_configuration_error():
    with pytest.raises(ConfigurationError):
        tick(action("a", "missing"), ctx())


def test_sim_time_must_not_go_backwards():
    tree = leaf("a", S)
    tick(tree, ctx(100))
    tick(tree, ctx(100))
    with pytest.raises(TickOrderError):
        tick(tree, ctx(99))


def test_ticks_are_deterministic():
    rng = random.Random(3)
    tree = random_tree(rng, 3, [0])
    first = [tick(tree, ctx(t)) for t in range(0, 500, 100)]
    second = [tick(tree, ctx(t)) for t in range(500, 1000, 100)]
    assert first == second


# ============================================================
# DECORATORS
# ============================================================

def counting(results):
    calls = []

    def handler(node, c):
        calls.append(c.sim_time)
        return results[min(len(calls) - 1, len(results) - 1)]
    return handler, calls


def test_retry_reticks_failing_child_within_one_tick():
    handler, calls = counting([F, F, S])
    tree = retry("r", 3, action("a", "flaky"))
    assert tick(tree, ctx(flaky=handler)) is S
    assert len(calls) == 3


def test_retry_gives_up_after_max_attempts():
    handler, calls = counting([F])
    tree = retry("r", 2, action("a", "flaky"))
    assert tick(tree, ctx(flaky=handler)) is F
    assert len(calls) == 2


def test_retry_budget_refills_after_reset():
    handler, calls = counting([F])
    tree = retry("r", 2, action("a", "flaky"))
    tick(tree, ctx(0, flaky=handler))
    reset(tree)
    calls.clear()
    assert tick(tree, ctx(10, flaky=handler)) is F
    assert len(calls) == 2


def test_timeout_fails_once_budget_is_exceeded():
    tree = timeout("t", 100, leaf("a", R, kind="action"))
    assert tick(tree, ctx(0)) is R
    assert tick(tree, ctx(100)) is R
    assert tick(tree, ctx(101)) is F


def test_reset_restarts_timeout_budget():
    tree = timeout("t", 100, leaf("a", R, kind="action"))
    tick(tree, ctx(0))
    tick(tree, ctx(90))
    reset(tree)
    assert tick(tree, ctx(180)) is R
    assert tick(tree, ctx(270)) is R


def test_reset_on_fresh_tree_changes_nothing():
    rng = random.Random(5)
    tree = random_tree(rng, 3, [0])
    expected = tick(tree, ctx())
    fresh = random_tree(random.Random(5), 3, [0])
    reset(fresh)
    assert tick(fresh, ctx()) is expected


# ============================================================
# VALIDATION
# ============================================================

def test_single_condition_is_valid():
    assert validate(leaf("a", S)) == []


def test_empty_sequence_is_reported_by_name():
    issues = validate(BTNode(NodeKind.SEQUENCE, "empty"))
    assert [i.node for i in issues] == ["empty"]


def test_parallel_threshold_out_of_range():
    tree = parallel("p", 4, leaf("a", S), leaf("b", S), leaf("c", S))
    issues = validate(tree)
    assert len(issues) == 1
    assert "threshold" in issues[0].message


def test_decorator_needs_exactly_one_child():
    tree = BTNode(NodeKind.INVERTER, "inv", (leaf("a", S), leaf("b", S)))
    assert [i.node for i in validate(tree)] == ["inv"]


def test_duplicate_names_are_reported():
    issues = validate(sequence("s", leaf("x", S), leaf("x", F)))
    assert any("duplicate" in i.message for i in issues)


def test_random_invalid_trees_are_detected():
    rng = random.Random(13)
    for _ in range(100):
        tree = random_tree(rng, 2, [0])
        nodes = [n for n in walk(tree) if n.kind.is_composite]
        if not nodes:
            continue
        rng.choice(nodes).children = ()
        assert validate(tree)


def test_walk_is_preorder_left_to_right():
    tree = sequence("root", fallback("f", leaf("a", S), leaf("b", S)), leaf("c", S))
    assert [n.name for n in walk(tree)] == ["root", "f", "a", "b", "c"]


def test_decorator_bookkeeping_does_not_affect_equality():
    a = retry("r", 2, leaf("x", S))
    b = retry("r", 2, leaf("x", S))
    a.attempts = 1
    assert a == b
