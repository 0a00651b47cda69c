import pytest
from hypothesis import given
from hypothesis import strategies as st

from chainbeam import (
    Beam,
    ChainHypothesis,
    ExpansionSet,
    extend_chain,
    validate_example,
)
from chainbeam.errors import DuplicatePassage
from chainbeam.types import seed_chain

from helpers import example


class TestExtendChain:
    def test_extends_prefix_and_replaces_score(self):
        chain = ChainHypothesis(("A",), 0.5)
        out = extend_chain(chain, "B", 0.8)
        assert out.prefix == ("A", "B")
        assert out.score == 0.8
        assert out.hop == 2

    def test_empty_prefix_base_case(self):
        out = extend_chain(seed_chain(), "A", 0.9)
        assert out.prefix == ("A",)
        assert out.score == 0.9
        assert out.hop == 1

    def test_duplicate_is_an_error(self):
        chain = ChainHypothesis(("A", "B"), 0.3)
        with pytest.raises(DuplicatePassage):
            extend_chain(chain, "A", 0.7)

    @given(st.lists(st.integers(0, 50), min_size=1, max_size=20, unique=True))
    def test_random_extension_sequences_never_duplicate(self, ids):
        chain = seed_chain()
        for i in ids:
            chain = extend_chain(chain, f"p{i}", 0.0)
        assert len(set(chain.prefix)) == len(chain.prefix)
        assert chain.hop == len(ids)


class TestChainInvariants:
    def test_hop_must_match_prefix_length(self):
        with pytest.raises(ValueError):
            ChainHypothesis(("A",), 0.1, hop=2)

    def test_duplicate_prefix_rejected(self):
        with pytest.raises(DuplicatePassage):
            ChainHypothesis(("A", "A"), 0.1)

    def test_non_finite_score_rejected(self):
        with pytest.raises(ValueError):
            ChainHypothesis(("A",), float("nan"))

    def test_sort_key_is_total_order(self):
        a = ChainHypothesis(("A", "B"), 0.5)
        b = ChainHypothesis(("A", "C"), 0.5)
        c = ChainHypothesis(("A", "A2"), 0.4)
        ranked = sorted([c, b, a], key=lambda h: h.sort_key)
        # equal scores break lexicographically, higher scores first
        assert ranked == [a, b, c]


class TestBeamAndExpansion:
    def test_beam_requires_sorted_hypotheses(self):
        lo = ChainHypothesis(("A",), 0.1)
        hi = ChainHypothesis(("B",), 0.9)
        with pytest.raises(ValueError):
            Beam(1, (lo, hi))
        beam = Beam(1, (hi, lo))
        assert beam.best is hi

    def test_beam_rejects_mixed_hops(self):
        with pytest.raises(ValueError):
            Beam(1, (ChainHypothesis(("A", "B"), 0.9),))

    def test_expansion_rejects_duplicate_prefixes(self):
        item = ChainHypothesis(("A",), 0.5)
        with pytest.raises(ValueError):
            ExpansionSet(1, (item, ChainHypothesis(("A",), 0.2)))


class TestValidateExample:
    def test_valid_instance(self):
        ex = example(candidate_ids=["P2", "P5", "P9"], gold_chain=["P2", "P5"])
        assert validate_example(ex) == []

    def test_duplicate_gold_chain(self):
        ex = example(candidate_ids=["P2", "P5"], gold_chain=["P2", "P2"])
        assert "gold_chain contains duplicate P2" in validate_example(ex)

    def test_gold_not_in_candidates(self):
        ex = example(candidate_ids=["P2", "P5"], gold_chain=["P9"])
        assert "gold passage P9 not in candidates" in validate_example(ex)

    def test_gold_set_only_membership(self):
        ex = example(candidate_ids=["P2"], gold_set={"P9"})
        assert "gold passage P9 not in candidates" in validate_example(ex)

    def test_hop_count_mismatch(self):
        ex = example(candidate_ids=["P2", "P5"], gold_chain=["P2", "P5"], hop_count=3)
        assert any("hop_count 3" in v for v in validate_example(ex))

    def test_gold_set_defaults_to_chain_elements(self):
        ex = example(candidate_ids=["P2", "P5"], gold_chain=["P5", "P2"])
        assert ex.gold_set == frozenset({"P2", "P5"})
        assert validate_example(ex) == []

    def test_single_passage_gold_chain_is_legal(self):
        ex = example(candidate_ids=["P1", "P2"], gold_chain=["P1"])
        assert validate_example(ex) == []
        assert ex.gold_hops() == 1
