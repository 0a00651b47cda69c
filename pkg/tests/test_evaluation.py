import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from chainbeam import (
    FixedHops,
    SearchConfig,
    StopReason,
    additional_hop_probe,
    aggregate_report,
    chain_top2_em,
    retrieval_em,
    retrieval_f1,
)
from chainbeam.engine import RetrievalResult
from chainbeam.errors import ChainTooShort, EmptyGold, NoLegalExpansion
from chainbeam.types import ChainHypothesis

from helpers import example, table_scorer

ids = st.sets(st.sampled_from([f"p{i}" for i in range(12)]), max_size=8)


class TestRetrievalEm:
    def test_order_irrespective(self):
        assert retrieval_em({"A", "B"}, ["B", "A"]) == 1

    def test_mismatch(self):
        assert retrieval_em({"A", "B"}, {"A", "C"}) == 0

    def test_over_retrieval_fails(self):
        assert retrieval_em({"A", "B", "C"}, {"A", "B"}) == 0

    @given(ids, ids)
    def test_permutation_invariance(self, pred, gold):
        shuffled_pred = list(pred)[::-1]
        assert retrieval_em(pred, gold) == retrieval_em(shuffled_pred, list(gold))


class TestRetrievalF1:
    def test_half_overlap(self):
        assert retrieval_f1({"A", "B"}, {"A", "C"}) == pytest.approx(0.5)

    def test_identity(self):
        assert retrieval_f1({"A", "B"}, {"B", "A"}) == 1.0

    def test_disjoint(self):
        assert retrieval_f1({"A"}, {"B"}) == 0.0

    def test_empty_prediction(self):
        assert retrieval_f1(set(), {"A"}) == 0.0

    def test_empty_gold_is_an_error(self):
        with pytest.raises(EmptyGold):
            retrieval_f1({"A"}, set())

    @given(ids.filter(bool), ids.filter(bool))
    def test_symmetry(self, a, b):
        assert retrieval_f1(a, b) == pytest.approx(retrieval_f1(b, a))

    @given(ids, ids.filter(bool))
    def test_em_one_implies_f1_one(self, pred, gold):
        if retrieval_em(pred, gold) == 1:
            assert retrieval_f1(pred, gold) == 1.0


class TestChainTop2Em:
    def test_set_equality(self):
        assert chain_top2_em([["A", "B"]], {"B", "A"}) == 1

    def test_mismatch(self):
        assert chain_top2_em([["A", "C"]], {"A", "B"}) == 0

    def test_only_top_two_count(self):
        assert chain_top2_em([["A", "B", "C"]], {"A", "B"}) == 1

    def test_accepts_ranked_pairs(self):
        ranked = [(("A", "B"), 0.9), (("C", "D"), 0.1)]
        assert chain_top2_em(ranked, {"A", "B"}) == 1

    def test_too_short(self):
        with pytest.raises(ChainTooShort):
            chain_top2_em([["A"]], {"A", "B"})

    def test_gold_size_enforced(self):
        with pytest.raises(ValueError):
            chain_top2_em([["A", "B"]], {"A"})


class TestAdditionalHopProbe:
    def test_constructed_table(self):
        ex = example(candidate_ids=["A", "B", "C"], gold_chain=["A", "B"])
        scorer = table_scorer(
            "q1",
            {
                ("A",): 2.0, ("B",): 0.1, ("C",): 0.0,
                ("A", "B"): 1.5, ("A", "C"): 0.2,
                ("A", "B", "C"): -3.0,
            },
        )
        assert additional_hop_probe(ex, scorer, SearchConfig(1, FixedHops(1)), 2) == pytest.approx(-3.0)

    def test_exhausted(self):
        ex = example(candidate_ids=["A", "B"], gold_chain=["A", "B"])
        scorer = table_scorer("q1", {("A",): 1.0, ("B",): 0.5, ("A", "B"): 0.7, ("B", "A"): 0.2})
        with pytest.raises(NoLegalExpansion):
            additional_hop_probe(ex, scorer, SearchConfig(1, FixedHops(1)), 2)

    def test_maximum_over_beams(self):
        ex = example(candidate_ids=["A", "B", "C"], gold_chain=["A", "B"])
        scorer = table_scorer(
            "q1",
            {
                ("A",): 2.0, ("B",): 1.9, ("C",): 0.0,
                ("A", "B"): -2.0, ("A", "C"): -2.5,
                ("B", "A"): -2.2, ("B", "C"): -2.1,
            },
        )
        # beam 2 at hop 1 keeps [A] and [B]; the best hop-2 expansion is -2.0
        assert additional_hop_probe(ex, scorer, SearchConfig(2, FixedHops(1)), 1) == pytest.approx(-2.0)


def result_for(chain_ids, score=1.0):
    return RetrievalResult(
        ChainHypothesis(tuple(chain_ids), score), len(chain_ids), (score,) * len(chain_ids),
        StopReason.FIXED_K_REACHED,
    )


class TestAggregateReport:
    def test_means(self):
        pairs = [
            (result_for(["A", "B"]), example(qid="q1", candidate_ids=["A", "B", "C"], gold_set={"A", "B"})),
            (result_for(["A", "C"]), example(qid="q2", candidate_ids=["A", "B", "C"], gold_set={"A", "B"})),
        ]
        report = aggregate_report(pairs)
        assert report.retrieval_em == pytest.approx(0.5)
        assert report.retrieval_f1 == pytest.approx(0.75)
        assert report.count == 2

    def test_perfect_run(self):
        pairs = [
            (result_for(["A", "B"]), example(qid=f"q{i}", candidate_ids=["A", "B", "C"], gold_set={"A", "B"}))
            for i in range(4)
        ]
        report = aggregate_report(pairs)
        assert report.retrieval_em == 1.0 and report.retrieval_f1 == 1.0

    def test_hop_groups_partition_total(self):
        pairs = [
            (result_for(["A", "B"]), example(qid="q1", candidate_ids=["A", "B", "C", "D"], gold_set={"A", "B"})),
            (result_for(["A", "B", "C", "D"]),
             example(qid="q2", candidate_ids=["A", "B", "C", "D"], gold_set={"A", "B", "C", "D"})),
            (result_for(["A", "C"]), example(qid="q3", candidate_ids=["A", "B", "C", "D"], gold_set={"A", "B"})),
        ]
        report = aggregate_report(pairs)
        assert set(report.per_hop) == {2, 4}
        assert sum(g.count for g in report.per_hop.values()) == report.count == 3

    def test_reorder_invariance(self):
        pairs = [
            (result_for(["A"]), example(qid=f"q{i}", candidate_ids=["A", "B"], gold_set={"A"} if i % 2 else {"B"}))
            for i in range(6)
        ]
        fwd = aggregate_report(pairs)
        rev = aggregate_report(pairs[::-1])
        assert fwd.retrieval_em == rev.retrieval_em
        assert fwd.retrieval_f1 == rev.retrieval_f1
        assert fwd.per_hop == rev.per_hop

    def test_json_schema(self):
        pairs = [
            (result_for(["A", "B"]), example(qid="q1", candidate_ids=["A", "B"], gold_set={"A", "B"})),
        ]
        out = aggregate_report(pairs, probe_scores=[(2, -2.5), (2, -3.5)]).to_json_dict()
        assert out["overall"] == {"em": 1.0, "f1": 1.0, "n": 1}
        assert out["by_hops"]["2"]["n"] == 1
        assert out["probe"]["2"] == {"mean": -3.0, "min": -3.5, "max": -2.5}

    def test_empty_is_an_error(self):
        with pytest.raises(ValueError):
            aggregate_report([])
