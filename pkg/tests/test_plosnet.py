import itertools

import networkx as nx
import numpy as np
import pytest

from conftest import constant_instance, dominates_oracle, make_instance, ranks_oracle
from rmnklab.landscape import EnumeratedLandscape, enumerate_landscape, plos_mask
from rmnklab.plosnet import (
    FEATURE_NAMES,
    build_plos_net,
    compress,
    compute_features,
    feature_table,
    landscape_features,
    read_feature_table,
)
from rmnklab.rmnk import ProblemSpec, generate_instance


def landscape_from(F, n):
    """Landscape with hand-chosen objective vectors (the instance only carries n)."""
    F = np.asarray(F, dtype=float)
    rank = ranks_oracle(F)
    return EnumeratedLandscape(constant_instance(n, m=F.shape[1]), F, rank, rank == 0, plos_mask(F, n))


def hamming(a, b):
    return bin(a ^ b).count("1")


def oracle_features(land):
    """Straight-line recomputation of the catalog with networkx."""
    F, n = land.objectives, land.n
    plos = [s for s in range(F.shape[0]) if not any(dominates_oracle(F[s ^ (1 << j)], F[s]) for j in range(n))]
    G = nx.Graph()
    G.add_nodes_from(plos)
    G.add_edges_from((u, v) for u, v in itertools.combinations(plos, 2) if hamming(u, v) == 1)
    comps = [sorted(c) for c in nx.connected_components(G)]
    comp_of = {s: i for i, c in enumerate(comps) for s in c}
    C = len(comps)
    W = {}
    for u in plos:
        for v in plos:
            if comp_of[u] != comp_of[v] and hamming(u, v) == 2 and not dominates_oracle(F[u], F[v]):
                key = (comp_of[u], comp_of[v])
                W[key] = W.get(key, 0) + 1
    rank = land.rank
    pareto_c = [any(rank[s] == 0 for s in c) for c in comps]
    node_rank = [min(rank[s] for s in c) for c in comps]
    strength = [sum(w for (a, b), w in W.items() if b == c) for c in range(C)]
    sink = [not any(a == c for (a, b) in W) for c in range(C)]
    H = nx.Graph()
    H.add_nodes_from(range(C))
    H.add_edges_from(W)
    dist = []
    for c in range(C):
        lengths = nx.single_source_shortest_path_length(H, c)
        d = [lengths[p] for p in range(C) if pareto_c[p] and p in lengths]
        dist.append(min(d) if d else n)
    pair = [l for c in range(C) for t, l in nx.single_source_shortest_path_length(H, c).items() if t != c]

    def pearson(x, y):
        x, y = np.asarray(x, float), np.asarray(y, float)
        if len(x) < 2 or x.std() == 0 or y.std() == 0:
            return 0.0
        return float(np.corrcoef(x, y)[0, 1])

    if G.number_of_edges():
        a = nx.degree_pearson_correlation_coefficient(G)
        assort = 0.0 if not np.isfinite(a) else a
    else:
        assort = 0.0
    non_p = [d for d, p in zip(dist, pareto_c) if not p]
    return {
        "pos_num": int((rank == 0).sum()),
        "pos_strength": sum(s for s, p in zip(strength, pareto_c) if p),
        "node_pareto_n": sum(pareto_c),
        "plos_num": len(plos),
        "cnode_num": C,
        "cc_n": nx.number_connected_components(G),
        "cc_avg": len(plos) / C,
        "edge_cmpr": len(W) / max(1, G.number_of_edges()),
        "edge_weight_avg": np.mean(list(W.values())) if W else 0.0,
        "sink_num": sum(sink),
        "sink_strength": sum(s for s, k in zip(strength, sink) if k),
        "dist_pareto_avg": np.mean(dist),
        "dist_max": max(dist),
        "path_length_avg": np.mean(pair) if pair else 0.0,
        "path_pareto_avg": np.mean(non_p) if non_p else 0.0,
        "rank_strength_cor": pearson(node_rank, strength),
        "rdc": pearson(node_rank, dist),
        "assort_degree": assort,
    }


def test_incomparable_square():
    inst = make_instance(np.empty((2, 0)), [[[0.0, 0.2], [0.0, 0.6]], [[0.2, 0.0], [0.6, 0.0]]])
    net = build_plos_net(enumerate_landscape(inst))
    assert net.nodes.size == 4 and net.edges.shape == (4, 2)


def test_single_plos():
    inst = make_instance(np.empty((2, 0)), [[[0.2, 0.6], [0.4, 0.8]], [[0.5, 0.5], [0.3, 0.9]]])
    land = enumerate_landscape(inst)
    net = build_plos_net(land)
    assert net.nodes.tolist() == [3] and net.edges.shape == (0, 2)
    f = landscape_features(land)
    assert f["cc_n"] == 1 and f["sink_num"] == 1 and f["edge_cmpr"] == 0
    assert f["dist_max"] == 0 and f["rank_strength_cor"] == 0


def test_three_variable_cube_edges():
    inst = make_instance(np.empty((3, 0)), [[[0.0, 0.2], [0.0, 0.5], [0.0, 0.9]],
                                            [[0.2, 0.0], [0.5, 0.0], [0.9, 0.0]]])
    land = enumerate_landscape(inst)
    net = build_plos_net(land)
    brute = {(u, v) for u, v in itertools.combinations(land.plos().tolist(), 2) if hamming(u, v) == 1}
    assert {tuple(e) for e in net.edges.tolist()} == brute
    assert len(brute) == 12


def test_far_components_have_no_escape_edges():
    F = [[0.0, 0.0]] * 8
    F[0], F[7] = [1.0, 0.0], [0.0, 1.0]
    land = landscape_from(F, 3)
    cnet = compress(build_plos_net(land), land)
    assert land.plos().tolist() == [0, 7]
    assert cnet.n_cnodes == 2 and cnet.src.size == 0


def test_hand_two_component_features():
    # PLOS {000, 110}; 110 is dominated by 000 but has no dominating neighbour
    F = np.array([[0.1, 0.1]] * 8)
    F[0], F[3] = [1.0, 0.2], [0.2, 0.15]
    F[5] = F[6] = [0.05, 0.05]
    land = landscape_from(F, 3)
    net = build_plos_net(land)
    cnet = compress(net, land)
    assert land.plos().tolist() == [0, 3]
    c0, c3 = cnet.labels[net.node_index([0, 3])]
    assert list(zip(cnet.src, cnet.dst, cnet.weight)) == [(c3, c0, 1.0)]
    f = compute_features(net, cnet, land)
    expected = dict(pos_num=1, pos_strength=1, node_pareto_n=1, plos_num=2, cnode_num=2, cc_n=2, cc_avg=1,
                    edge_cmpr=1, edge_weight_avg=1, sink_num=1, sink_strength=1, dist_pareto_avg=0.5,
                    dist_max=1, path_length_avg=1, path_pareto_avg=1, rank_strength_cor=-1, rdc=1,
                    assort_degree=0)
    assert f == pytest.approx(expected, abs=1e-12)
    assert f == pytest.approx(oracle_features(land), abs=1e-12)


def test_single_component_has_no_cedges():
    land = enumerate_landscape(constant_instance(6, k=2))
    net = build_plos_net(land)
    cnet = compress(net, land)
    assert cnet.n_cnodes == 1 and cnet.src.size == 0
    f = compute_features(net, cnet, land)
    assert f["pos_num"] == 64 and f["node_pareto_n"] == 1 and f["pos_strength"] == 0 and f["cc_n"] == 1


@pytest.mark.parametrize("seed", range(8))
def test_features_match_networkx_oracle(seed):
    rho, m, k = [(-0.4, 2, 3), (0.0, 2, 1), (0.4, 3, 2), (0.0, 3, 4)][seed % 4]
    land = enumerate_landscape(generate_instance(ProblemSpec(rho=rho, m=m, n=8, k=k, instance_seed=seed)))
    got = landscape_features(land)
    assert list(got) == list(FEATURE_NAMES)
    assert got == pytest.approx(oracle_features(land), abs=1e-9)


def test_oracle_cases_include_escape_edges():
    # guard that the random oracle cases above are not all degenerate
    seen = 0
    for seed in range(8):
        rho, m, k = [(-0.4, 2, 3), (0.0, 2, 1), (0.4, 3, 2), (0.0, 3, 4)][seed % 4]
        land = enumerate_landscape(generate_instance(ProblemSpec(rho=rho, m=m, n=8, k=k, instance_seed=seed)))
        seen += landscape_features(land)["edge_weight_avg"] > 0
    assert seen >= 3


def permuted(inst, perm):
    """Same instance with variable j renamed to perm[j]."""
    n, k = inst.n, inst.k
    links = np.empty_like(inst.links)
    tables = np.empty_like(inst.tables)
    for j in range(n):
        new = perm[inst.links[j]]
        order = np.argsort(new)
        links[perm[j]] = new[order]
        for p_old in range(2 ** (k + 1)):
            bits_old = [(p_old >> (k - t)) & 1 for t in range(k + 1)]  # (x_j, link_0, ...)
            bits_new = [bits_old[0]] + [bits_old[1 + o] for o in order]
            p_new = sum(b << (k - t) for t, b in enumerate(bits_new))
            tables[:, perm[j], p_new] = inst.tables[:, j, p_old]
    return make_instance(links, tables, inst.spec.rho)


@pytest.mark.parametrize("seed", range(3))
def test_features_invariant_under_variable_relabeling(seed):
    inst = generate_instance(ProblemSpec(rho=0.0, m=2, n=10, k=2, instance_seed=seed))
    perm = np.random.default_rng(seed).permutation(10)
    a = landscape_features(enumerate_landscape(inst))
    b = landscape_features(enumerate_landscape(permuted(inst, perm)))
    assert a == pytest.approx(b, rel=1e-9, abs=1e-12)


def test_catalog_invariants(small_instances):
    for inst in small_instances:
        land = enumerate_landscape(inst)
        net = build_plos_net(land)
        cnet = compress(net, land)
        f = compute_features(net, cnet, land)
        total = cnet.weight.sum()
        assert cnet.sizes.sum() == f["plos_num"] == land.is_plos.sum()
        assert f["cc_avg"] * f["cc_n"] == pytest.approx(f["plos_num"])
        assert f["pos_strength"] <= total and f["sink_strength"] <= total
        assert f["dist_max"] >= f["dist_pareto_avg"] >= 0 and f["path_pareto_avg"] >= 0
        assert np.all(cnet.weight > 0) and np.all(cnet.src != cnet.dst)
        assert all(np.isfinite(v) for v in f.values())
        u, v = net.edges.T
        assert np.all(land.is_plos[u] & land.is_plos[v])


def test_feature_table_roundtrip(tmp_path, small_instances):
    rows = []
    for i, inst in enumerate(small_instances[:3]):
        s = inst.spec
        rows.append((f"inst{i}", {"rho": s.rho, "m": s.m, "n": s.n, "k": s.k},
                     landscape_features(enumerate_landscape(inst))))
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    feature_table(rows, p1)
    feature_table(rows, p2)
    assert p1.read_bytes() == p2.read_bytes()
    back = read_feature_table(p1)
    assert len(back) == 3
    assert back[1]["features"] == rows[1][2]
    assert p1.read_text().splitlines()[0].split(",")[:5] == ["instance_id", "rho", "m", "n", "k"]
    with pytest.raises(ValueError):
        feature_table([("x", rows[0][1], {})], tmp_path / "bad.csv")
