from __future__ import annotations

import itertools
import random

import pytest

from forcing_lab.errors import ForcingLabError
from forcing_lab.trees.namba import (
    NambaTree,
    lev_star,
    minimax_winner,
    namba_prune,
    namba_stem,
    ntext,
    parse_namba,
    refine_step,
    solve_open_game,
    successor_sizes,
    validate_strategy,
)

from corpus import NAMBA_FIXTURES as FIXTURES, full, tree
from oracles import game_minimax


@pytest.mark.parametrize("index", range(len(FIXTURES)))
def test_lev_star_fixture(index):
    T, levels = FIXTURES[index]
    for n, want in levels.items():
        if want is None:
            with pytest.raises(ForcingLabError) as e:
                lev_star(T, n)
            assert e.value.code == "NO_SPLIT_ABOVE"
        else:
            assert sorted(ntext(u) for u in lev_star(T, n)) == sorted(want.split())


class TestTree:
    def test_stem(self):
        assert namba_stem(full(3, 2, "21")) == (2, 1)
        assert namba_stem(full(3, 2)) == ()

    def test_parse(self):
        T = parse_namba("-\n0\n01\n02  # comment\n", 3)
        assert T == tree(3, "01", "02")
        with pytest.raises(ForcingLabError):
            parse_namba("0x\n", 3)

    def test_validation(self):
        with pytest.raises(ForcingLabError):
            NambaTree(frozenset({(0,)}), 2)
        with pytest.raises(ForcingLabError):
            NambaTree(frozenset({(), (5,)}), 3)

    def test_restrict(self):
        T = full(2, 2).restrict((1,))
        assert sorted(ntext(u) for u in T.nodes) == ["-", "1", "10", "11"]
        with pytest.raises(ForcingLabError) as e:
            tree(2, "0").restrict((1,))
        assert e.value.code == "NODE_NOT_IN_TREE"


class TestPrune:
    def test_partial_node(self):
        T = tree(4, "00", "01", "02", "03", "10", "11")
        P = namba_prune(T)
        assert successor_sizes(P) <= {1, 4}
        assert P.nodes <= T.nodes

    def test_full_tree_untouched(self):
        T = full(3, 2)
        assert namba_prune(T) == T

    def test_random_trees(self):
        rng = random.Random(4)
        for _ in range(50):
            lam = rng.randint(2, 4)
            leaves = {tuple(rng.randrange(lam) for _ in range(3)) for _ in range(rng.randint(1, 20))}
            P = namba_prune(NambaTree.from_leaves(leaves, lam))
            assert successor_sizes(P) <= {1, lam}


class TestRefine:
    def test_choose_leftmost_leaf(self):
        T = full(2, 3)

        def leftmost(s, Ts):
            u = s
            while Ts.suc(u):
                u = Ts.suc(u)[0]
            return u

        R = refine_step(T, 0, leftmost)
        assert sorted(ntext(u) for u in R.nodes if len(u) == 3) == ["000", "100"]

    def test_bad_choice(self):
        with pytest.raises(ForcingLabError):
            refine_step(full(2, 2), 0, lambda s, Ts: (1 - s[0],))


def _oracle_children(T):
    def split(u):
        while True:
            ch = T.suc(u)
            if len(ch) != 1:
                return u, ch
            u = ch[0]

    def children(history):
        _, ch = split(history[-1] if history else ())
        return ch

    return children


class TestGame:
    def test_constant_table(self):
        T = full(3, 2)
        table = {u: 1 for u in T.nodes}
        res = solve_open_game(T, table, [1, 1], 2, 2)
        assert res.winner == "II" and validate_strategy(T, table, [1, 1], res)

    def test_immediate_loss(self):
        T = full(3, 2)
        table = {u: 0 if len(u) == 1 else 1 for u in T.nodes}
        res = solve_open_game(T, table, [1, 1], 2, 1)
        assert res.winner == "I" and res.strategy["start"] == []

    def test_mixed_table_minimax(self):
        T = full(4, 2)
        table = {u: (sum(u) % 2) for u in T.nodes}
        x = [1, 0]
        res = solve_open_game(T, table, x, 2, 2)
        assert res.winner == game_minimax(_oracle_children(T), table, x, 2, 2)
        assert validate_strategy(T, table, x, res)

    def test_caps(self):
        T = full(2, 2)
        with pytest.raises(ForcingLabError) as e:
            solve_open_game(T, {}, [0, 0], 2, 2)
        assert e.value.code == "CONFIG_PARSE"
        with pytest.raises(ForcingLabError) as e:
            solve_open_game(full(2, 2), {}, [0] * 7, 7, 1)
        assert e.value.code == "SCALE_EXCEEDED"

    def test_random_nonfull_trees(self):
        rng = random.Random(8)
        checked = 0
        while checked < 150:
            lam = rng.randint(2, 4)
            depth = rng.randint(1, 3)
            cap = rng.randrange(0, min(3, lam))
            leaves = set()
            for w in itertools.product(range(lam), repeat=depth + 1):
                if rng.random() < 0.6:
                    leaves.add(w)
            if not leaves:
                continue
            T = NambaTree.from_leaves(leaves, lam)
            try:
                for n in range(depth):
                    lev_star(T, n)
            except ForcingLabError:
                continue
            table = {u: rng.randrange(2) for u in T.nodes}
            x = [rng.randrange(2) for _ in range(depth)]
            res = solve_open_game(T, table, x, depth, cap)
            assert res.winner == minimax_winner(T, table, x, depth, cap)
            assert res.winner == game_minimax(_oracle_children(T), table, x, depth, cap)
            assert validate_strategy(T, table, x, res)
            checked += 1
