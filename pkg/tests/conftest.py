"""
Shared fixtures
"""
import numpy as np
import pytest

from dropreef.services.bundle_service import bundle_service
from dropreef.services.graph_service import graph_service

from tests.factories import clique_graph, path_graph, planted_hub_instance, star_graph


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def path3():
    return path_graph(3)


@pytest.fixture
def star4():
    return star_graph(4)


@pytest.fixture
def clique4():
    return clique_graph(4)


@pytest.fixture(scope="session")
def planted_hubs():
    return planted_hub_instance()


@pytest.fixture
def edge_list_file(tmp_path):
    """Ten-node graph: a heterophilic hub (node 0) on a homophilic path"""
    path = tmp_path / "edges.txt"
    lines = ["# hub and path"]
    lines += [f"0 {v}" for v in range(1, 10)]
    lines += [f"{v} {v + 1}" for v in range(1, 9)]
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture
def labels_file(tmp_path):
    path = tmp_path / "labels.txt"
    path.write_text("0\n" + "1\n" * 5 + "2\n" * 4)
    return path


@pytest.fixture
def split_file(tmp_path):
    path = tmp_path / "split.txt"
    path.write_text("train\n" * 7 + "val\ntest\ntest\n")
    return path


@pytest.fixture
def bundle_dir(tmp_path, edge_list_file, labels_file, split_file):
    pairs, n = bundle_service.read_edge_list(edge_list_file)
    graph = graph_service.build_csr(pairs, n)
    labels = bundle_service.read_labels(labels_file)
    split = bundle_service.read_split(split_file)
    directory = tmp_path / "bundle"
    bundle_service.save_bundle(directory, graph, labels, split)
    return directory
