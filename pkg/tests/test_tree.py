"""Selection measures, induction, pruning, classification, serialization."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from icet.tree import (
    CSID3,
    ICF,
    IDX,
    DecisionTree,
    GainRatio,
    InductionParams,
    Leaf,
    Node,
    build_tree,
    cs_id3_score,
    estimated_errors,
    grow_tree,
    icf_score,
    idx_score,
    info_gain,
    prune,
    select_attribute,
)

from conftest import make_dataset, random_dataset
from oracles import oracle_best_gain, oracle_entropy, oracle_upper_rate


# ---------------------------------------------------------------------------
# measures


class TestInfoGain:
    def test_perfect_split(self):
        assert info_gain([0, 0, 1, 1], [0, 0, 1, 1]) == pytest.approx(1.0)

    def test_constant_attribute(self):
        assert info_gain([0, 0, 1, 1], [5, 5, 5, 5]) == 0.0

    def test_six_case_example(self):
        # 4 A and 2 B, split (2A) | (2A, 2B)
        g = info_gain(list("AAAABB"), [0, 0, 1, 1, 1, 1])
        expected = oracle_entropy("AAAABB") - 4 / 6 * 1.0
        assert g == pytest.approx(expected, abs=1e-12)
        assert g == pytest.approx(0.2516, abs=5e-5)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            info_gain([], [])


class TestScores:
    def test_icf_examples(self):
        assert icf_score(1.0, 1.0, 1.0) == pytest.approx(0.5)
        assert icf_score(0.0, 123.0, 0.3) == 0.0
        assert icf_score(1.0, 3.0, 0.0) == pytest.approx(1.0)

    def test_cs_id3_examples(self):
        assert cs_id3_score(1.0, 1.0) == pytest.approx(1.0)
        assert cs_id3_score(2.0, 4.0) == pytest.approx(1.0)
        assert cs_id3_score(0.2516, 7.27) == pytest.approx(0.2516**2 / 7.27, abs=1e-12)
        assert cs_id3_score(0.2516, 7.27) == pytest.approx(0.008707, abs=5e-7)

    def test_idx_examples(self):
        assert idx_score(1.0, 1.0) == pytest.approx(1.0)
        assert idx_score(2.0, 4.0) == pytest.approx(0.5)
        assert idx_score(0.2516, 7.27) == pytest.approx(0.03461, abs=5e-6)

    def test_zero_cost_rejected(self):
        with pytest.raises(ValueError):
            cs_id3_score(1.0, 0.0)
        with pytest.raises(ValueError):
            idx_score(1.0, 0.0)
        with pytest.raises(ValueError):
            CSID3(np.array([1.0, 0.0]))
        with pytest.raises(ValueError):
            IDX(np.array([0.0]))

    def test_omega_range(self):
        with pytest.raises(ValueError):
            ICF(np.ones(2), 1.5)
        with pytest.raises(ValueError):
            ICF(np.ones(2), -0.1)

    def test_cf_range(self):
        with pytest.raises(ValueError):
            InductionParams(cf=0.5)
        with pytest.raises(ValueError):
            InductionParams(cf=101)

    @settings(max_examples=200, deadline=None)
    @given(
        st.floats(0, 5),
        st.floats(0.01, 5),
        st.floats(0, 1e4),
        st.floats(0.01, 1),
    )
    def test_icf_monotone(self, g, dg, c, w):
        assert icf_score(g + dg, c, w) > icf_score(g, c, w)
        assert icf_score(g, c + 1.0, w) <= icf_score(g, c, w)

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.tuples(st.floats(0, 3), st.floats(0.5, 100)), min_size=2, max_size=8), st.floats(0.1, 50))
    def test_idx_scale_covariance(self, pairs, k):
        g = np.array([p[0] for p in pairs])
        c = np.array([p[1] for p in pairs])
        assert np.allclose(idx_score(g, c * k), idx_score(g, c) / k)
        assert np.allclose(cs_id3_score(g, c * k), cs_id3_score(g, c) / k)


class TestSelect:
    def test_single_useful_candidate(self):
        d = make_dataset([[0, 5], [0, 5], [1, 5], [1, 5]], [0, 0, 1, 1])
        assert select_attribute(d, [0, 1], GainRatio()).attribute == 0

    def test_tie_goes_to_lowest_index(self):
        X = [[0, 0], [0, 0], [1, 1], [1, 1]]
        d = make_dataset(X, [0, 0, 1, 1])
        assert select_attribute(d, [1, 0], ICF(np.ones(2), 1.0)).attribute == 0
        assert select_attribute(d, [0, 1], GainRatio()).attribute == 0

    def test_tie_goes_to_lowest_threshold(self):
        d = make_dataset([[0], [1], [2], [3]], [0, 1, 1, 0])
        choice = select_attribute(d, [0], ICF(np.ones(1), 0.0), min_cases_per_leaf=1)
        assert choice.threshold == pytest.approx(0.5)

    def test_all_zero_gain_is_none(self):
        d = make_dataset([[0, 0], [0, 1], [1, 0], [1, 1]], [0, 1, 1, 0])
        assert select_attribute(d, [0, 1], ICF(np.ones(2), 1.0), min_cases_per_leaf=1) is None

    def test_midpoint_threshold(self):
        d = make_dataset([[1.0], [2.0], [4.0], [6.0]], [0, 0, 1, 1])
        assert select_attribute(d, [0], GainRatio()).threshold == pytest.approx(3.0)

    def test_gain_matches_oracle(self, rng):
        for _ in range(20):
            d = random_dataset(rng, 30, 4)
            for j, a in enumerate(d.attributes):
                choice = select_attribute(d, [j], ICF(np.ones(4), 0.0))
                g = oracle_best_gain(d.X.tolist(), d.y.tolist(), j, a.is_discrete, 2)
                if choice is None:
                    assert g is None or g <= 1e-12
                else:
                    assert choice.gain == pytest.approx(g, abs=1e-9)

    def test_omega_zero_picks_max_gain(self, rng):
        for _ in range(100):
            d = random_dataset(rng, int(rng.integers(8, 30)), int(rng.integers(2, 5)))
            m = d.n_attributes
            costs = rng.uniform(1, 100, size=m)
            choice = select_attribute(d, range(m), ICF(costs, 0.0))
            gains = [oracle_best_gain(d.X.tolist(), d.y.tolist(), j, a.is_discrete, 2) for j, a in enumerate(d.attributes)]
            best = max((g for g in gains if g is not None), default=None)
            if best is None or best <= 1e-12:
                assert choice is None
            else:
                assert gains[choice.attribute] >= best - 1e-9
                # lowest index among the maximisers
                first = min(j for j, g in enumerate(gains) if g is not None and g >= best - 1e-9)
                assert choice.attribute == first


class TestBuild:
    def test_depth_one(self):
        d = make_dataset([[0, 3], [0, 1], [1, 2], [1, 1], [0, 2], [1, 3]], [0, 0, 1, 1, 0, 1], "dc")
        tree = build_tree(d, InductionParams(min_cases_per_leaf=1, cf=100))
        assert tree.depth == 1 and tree.root.attribute == 0
        assert np.array_equal(tree.predict(d.X), d.y)

    def test_single_class(self):
        d = make_dataset([[0], [1], [2]], [1, 1, 1], classes=("0", "1"))
        tree = build_tree(d)
        assert isinstance(tree.root, Leaf) and tree.root.label == 1

    def test_xor_before_pruning(self):
        d = make_dataset([[0, 0], [0, 1], [1, 0], [1, 1]], [0, 1, 1, 0], "dd")
        params = InductionParams(heuristic=ICF(np.ones(2), 1.0), min_cases_per_leaf=1, zero_gain_split=True, cf=100)
        root = grow_tree(d, params)
        tree = DecisionTree(root, ["a0", "a1"], d.classes)
        assert tree.depth == 2
        assert np.array_equal(tree.predict(d.X), d.y)

    def test_xor_default_stops(self):
        d = make_dataset([[0, 0], [0, 1], [1, 0], [1, 1]], [0, 1, 1, 0], "dd")
        root = grow_tree(d, InductionParams(heuristic=ICF(np.ones(2), 1.0), min_cases_per_leaf=1))
        assert isinstance(root, Leaf)

    def test_empty_train_rejected(self):
        d = make_dataset(np.zeros((0, 1)), np.zeros(0, dtype=int))
        with pytest.raises(ValueError):
            build_tree(d)

    def test_discrete_attribute_used_once_per_path(self, rng):
        for _ in range(10):
            d = random_dataset(rng, 60, 4, discrete_frac=0.7)
            tree = build_tree(d, InductionParams(min_cases_per_leaf=1, cf=100))

            def walk(node, used):
                if isinstance(node, Leaf):
                    return
                if node.threshold is None:
                    assert node.attribute not in used
                    used = used | {node.attribute}
                for c in node.children:
                    walk(c, used)

            walk(tree.root, set())

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(5, 40))
    def test_full_training_accuracy(self, seed, n):
        rng = np.random.default_rng(seed)
        d = random_dataset(rng, n, 3)
        # relabel deterministically from the attribute values: no conflicts
        keys = {tuple(r): int(rng.integers(0, 2)) for r in d.X.tolist()}
        y = np.array([keys[tuple(r)] for r in d.X.tolist()])
        d = make_dataset(d.X, y, "".join("d" if a.is_discrete else "c" for a in d.attributes),
                         {a.index: len(a.values) for a in d.attributes if a.is_discrete})
        tree = build_tree(d, InductionParams(min_cases_per_leaf=1, cf=100, zero_gain_split=True))
        assert np.array_equal(tree.predict(d.X), d.y)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.sets(st.integers(0, 4), max_size=5))
    def test_excluded_never_used(self, seed, excluded):
        rng = np.random.default_rng(seed)
        d = random_dataset(rng, 40, 5)
        for h in (GainRatio(), ICF(np.ones(5), 0.5), IDX(np.ones(5)), CSID3(np.ones(5))):
            tree = build_tree(d, InductionParams(heuristic=h, excluded=excluded, min_cases_per_leaf=1, cf=100))
            assert not (tree.attributes_used() & excluded)

    def test_nan_cost_marks_non_test(self):
        d = make_dataset([[0, 0], [0, 0], [1, 1], [1, 1]], [0, 0, 1, 1])
        tree = build_tree(d, InductionParams(heuristic=ICF(np.array([np.nan, 1.0]), 1.0), min_cases_per_leaf=1))
        assert tree.attributes_used() == {1}

    def test_leaf_labels_are_declared(self, rng):
        d = random_dataset(rng, 50, 3, n_classes=3)
        tree = build_tree(d)
        assert all(0 <= leaf.label < 3 for leaf in tree.leaves())


class TestPrune:
    def test_estimator_matches_binomial_oracle(self):
        for e, n in [(0, 1), (0, 5), (1, 5), (2, 5), (4, 10), (3, 20), (7, 20), (5, 10)]:
            for cf in (1, 10, 25, 50):
                assert estimated_errors((n - e, e), cf) == pytest.approx(n * oracle_upper_rate(e, n, cf / 100), abs=1e-7)

    def test_zero_error_closed_form(self):
        assert estimated_errors((6, 0), 25) == pytest.approx(6 * (1 - 0.25 ** (1 / 6)))

    def test_pure_leaf_unchanged(self):
        leaf = Leaf(0, (5, 0))
        assert prune(leaf, 25) == leaf

    def test_useless_split_collapses_at_cf1(self):
        # ten cases, both halves 3:2 -> the split buys nothing
        root = Node(0, 0.5, (Leaf(0, (3, 2)), Leaf(0, (3, 2))), (6, 4))
        leaf_est = 10 * oracle_upper_rate(4, 10, 0.01)
        split_est = 2 * 5 * oracle_upper_rate(2, 5, 0.01)
        assert leaf_est <= split_est + 0.1
        out = prune(root, 1)
        assert out == Leaf(0, (6, 4))

    def test_good_split_survives(self):
        root = Node(0, 0.5, (Leaf(0, (20, 0)), Leaf(1, (0, 20))), (20, 20))
        assert prune(root, 25) == root

    def test_lower_cf_prunes_more(self, rng):
        for _ in range(10):
            d = random_dataset(rng, 80, 4)
            root = grow_tree(d, InductionParams())
            sizes = [DecisionTree(prune(root, cf), [], d.classes).n_nodes for cf in (1, 10, 25, 50, 100)]
            assert sizes == sorted(sizes)
            assert sizes[-1] <= DecisionTree(root, [], d.classes).n_nodes

    def test_pruned_is_contraction(self, rng):
        d = random_dataset(rng, 80, 4)
        root = grow_tree(d, InductionParams())
        pruned = prune(root, 25)

        def contained(p, o):
            if isinstance(p, Leaf):
                return p.counts == o.counts
            return isinstance(o, Node) and p.attribute == o.attribute and p.threshold == o.threshold and all(
                contained(a, b) for a, b in zip(p.children, o.children)
            )

        assert contained(pruned, root)


class TestClassify:
    def test_single_leaf(self):
        tree = DecisionTree(Leaf(1, (0, 3)), ["a"], ("0", "1"))
        label, path = tree.classify([0.0])
        assert label == 1 and path == []

    def test_unseen_category_takes_largest_child(self):
        from icet.data import DISCRETE, AttributeMeta, Case

        attrs = (AttributeMeta("colour", DISCRETE, 0, ("red", "blue")),)
        root = Node(0, None, (Leaf(0, (2, 0)), Leaf(1, (0, 7))), (2, 7), default=1)
        tree = DecisionTree(root, ["colour"], ("0", "1"))
        label, path = tree.classify_case(Case(("purple",), None), attrs)
        assert label == "1" and path == [root]
        assert tree.predict(np.array([[np.nan], [5.0], [0.0]])).tolist() == [1, 1, 0]

    def test_default_is_largest_training_child(self, rng):
        d = random_dataset(rng, 60, 3, discrete_frac=1.0)
        tree = build_tree(d, InductionParams(min_cases_per_leaf=1, cf=100))
        for node in tree.nodes():
            if isinstance(node, Node) and node.threshold is None:
                sizes = [c.n_cases for c in node.children]
                assert node.default == int(np.argmax(sizes))

    def test_predict_agrees_with_classify(self, rng):
        d = random_dataset(rng, 60, 4)
        tree = build_tree(d, InductionParams(min_cases_per_leaf=1, cf=100))
        assert tree.predict(d.X).tolist() == [tree.classify(r)[0] for r in d.X]


class TestSerialize:
    def test_round_trip(self, rng):
        d = random_dataset(rng, 60, 4)
        tree = build_tree(d, InductionParams(min_cases_per_leaf=1, cf=100))
        assert DecisionTree.from_dict(tree.to_dict()) == tree
        assert DecisionTree.from_json(tree.to_json()) == tree
        assert DecisionTree.from_json(tree.to_json()).to_text() == tree.to_text()

    def test_text_form(self):
        root = Node(0, 2.5, (Leaf(0, (3, 0)), Leaf(1, (0, 4))), (3, 4))
        text = DecisionTree(root, ["age"], ("no", "yes")).to_text()
        assert text.splitlines() == [
            "age <= 2.5 (3/4)",
            "    yes: class no (3/0)",
            "    no: class yes (0/4)",
        ]
