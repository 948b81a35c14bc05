import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sibm.model import (
    LabeledGraph,
    SibmParams,
    ValidationError,
    check_partition,
    read_graph,
    read_samples,
    validate_params,
    write_graph,
    write_samples,
)


class TestValidateParams:
    def test_accepts_valid_and_derives_rates(self):
        params = validate_params(SibmParams(n=100, a=9, b=1, alpha=2, beta=0.1, m=3))
        # 9 ln(100) / 100
        assert params.p == pytest.approx(0.4144653167389282, rel=1e-12)
        assert params.q == pytest.approx(math.log(100) / 100, rel=1e-12)

    def test_rejects_a_not_above_b(self):
        with pytest.raises(ValidationError, match="a must exceed b"):
            validate_params(SibmParams(n=4, a=1, b=1, alpha=1, beta=1, m=1))

    def test_rejects_edge_probability_above_one(self):
        params = SibmParams(n=10, a=5, b=1, alpha=1, beta=1, m=1)
        assert params.p == pytest.approx(1.151292546, rel=1e-9)
        with pytest.raises(ValidationError, match="exceeds 1"):
            validate_params(params)

    @pytest.mark.parametrize("kwargs", [
        dict(n=7), dict(n=2), dict(n=100.0), dict(m=0), dict(alpha=0.0),
        dict(beta=-1.0), dict(b=0.0), dict(a=float("nan")),
    ])
    def test_rejects_bad_fields(self, kwargs):
        base = dict(n=100, a=9, b=1, alpha=2, beta=0.1, m=3)
        base.update(kwargs)
        with pytest.raises(ValidationError):
            validate_params(SibmParams(**base))

    def test_idempotent(self):
        params = SibmParams(n=100, a=9, b=1, alpha=2, beta=0.1, m=3)
        once = validate_params(params)
        assert validate_params(once) is once == params


class TestLabeledGraph:
    def test_from_edges_builds_sorted_symmetric_lists(self):
        g = LabeledGraph.from_edges([1, 1, -1, -1], [(2, 0), (0, 1), (3, 0)])
        assert g.neighbors(0).tolist() == [1, 2, 3]
        assert g.neighbors(3).tolist() == [0]
        assert g.edges().tolist() == [[0, 1], [0, 2], [0, 3]]
        assert g.n_edges == 3

    @pytest.mark.parametrize("edges", [[(0, 0)], [(0, 1), (1, 0)], [(0, 4)]])
    def test_rejects_invalid_edges(self, edges):
        with pytest.raises(ValidationError):
            LabeledGraph.from_edges([1, 1, -1, -1], edges)

    def test_rejects_asymmetric_csr(self):
        with pytest.raises(ValidationError, match="symmetric"):
            LabeledGraph([1, -1, 1, -1], [0, 1, 1, 1, 1], [1])

    def test_rejects_unbalanced_labels(self):
        with pytest.raises(ValidationError, match="balanced"):
            check_partition([1, 1, 1, -1])

    def test_arrays_are_read_only(self):
        g = LabeledGraph.from_edges([1, -1], [(0, 1)])
        with pytest.raises(ValueError):
            g.labels[0] = -1


@st.composite
def labeled_graphs(draw):
    half = draw(st.integers(1, 6))
    n = 2 * half
    labels = draw(st.permutations([1] * half + [-1] * half))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    mask = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return LabeledGraph.from_edges(labels, [p for p, keep in zip(pairs, mask) if keep])


class TestFileFormats:
    @settings(max_examples=50, deadline=None)
    @given(graph=labeled_graphs())
    def test_graph_round_trip(self, graph, tmp_path_factory):
        path = tmp_path_factory.mktemp("g") / "graph.txt"
        write_graph(graph, path)
        assert read_graph(path) == graph
        raw = path.read_bytes()
        assert b"\r" not in raw and raw.isascii()

    @settings(max_examples=50, deadline=None)
    @given(m=st.integers(1, 5), n=st.integers(1, 12), seed=st.integers(0, 2**32 - 1))
    def test_samples_round_trip(self, m, n, seed, tmp_path_factory):
        samples = np.random.default_rng(seed).choice(np.array([-1, 1], dtype=np.int8), size=(m, n))
        path = tmp_path_factory.mktemp("s") / "samples.txt"
        write_samples(samples, path)
        back = read_samples(path)
        assert back.dtype == np.int8 and np.array_equal(back, samples)

    def test_graph_file_layout(self, tmp_path):
        g = LabeledGraph.from_edges([1, 1, -1, -1], [(0, 1), (2, 3)])
        write_graph(g, tmp_path / "g.txt")
        assert (tmp_path / "g.txt").read_text() == "n 4\nlabels 1 1 -1 -1\nedge 0 1\nedge 2 3\n"

    def test_reads_plus_signed_tokens(self, tmp_path):
        (tmp_path / "s.txt").write_text("+1 -1\n-1 +1\n")
        assert read_samples(tmp_path / "s.txt").tolist() == [[1, -1], [-1, 1]]

    @pytest.mark.parametrize("text", [
        "n 4\nlabels 1 1 -1\n",
        "n 4\nlabels 1 1 -1 -1\nedge 1 0\n",
        "n 4\nlabels 1 1 -1 -1\nedge 0 1 2\n",
        "x 4\n",
    ])
    def test_rejects_malformed_graph_files(self, tmp_path, text):
        (tmp_path / "g.txt").write_text(text)
        with pytest.raises(ValidationError):
            read_graph(tmp_path / "g.txt")

    def test_rejects_ragged_samples(self, tmp_path):
        (tmp_path / "s.txt").write_text("1 -1\n1\n")
        with pytest.raises(ValidationError, match="common n"):
            read_samples(tmp_path / "s.txt")
