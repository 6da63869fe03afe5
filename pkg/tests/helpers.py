"""Shared test utilities: profile sampling and brute-force oracles."""

import itertools

import numpy as np

from seqnash.games import ChanceNode, DecisionNode, TerminalNode


def random_plans(sf, rng):
    """Random realization plans, Dirichlet behavior at every infoset."""
    plans = []
    for p in range(sf.num_players):
        x = np.zeros(sf.dims[p])
        if sf.has_empty_sequence:
            x[0] = 1.0
            for rec in sf.infosets[p]:
                probs = rng.dirichlet(np.ones(len(rec.action_seqs)))
                for s, q in zip(rec.action_seqs, probs):
                    x[s] = x[rec.parent_seq] * q
        else:
            x[:] = rng.dirichlet(np.ones(sf.dims[p]))
        plans.append(x)
    return plans


def brute_force_best_response(game, profile, player):
    """Best payoff over every pure strategy of one player, everyone else fixed.

    Enumerates one action choice per infoset and evaluates each candidate with
    a fresh expectation walk over the tree. Exponential on purpose: this is
    the independent check for the dynamic-programming best response.
    """
    beh = [profile.behavioral_map(p) for p in range(len(profile.players))]
    infosets = sorted({(n.infoset, n.actions) for n in game.nodes
                       if isinstance(n, DecisionNode) and n.player == player})

    def walk(idx, pick):
        node = game.nodes[idx]
        if isinstance(node, TerminalNode):
            return float(node.payoffs[player])
        if isinstance(node, ChanceNode):
            return sum(float(pr) * walk(ch, pick)
                       for pr, ch in zip(node.probs, node.children))
        if node.player == player:
            k = pick[node.infoset]
            return walk(node.children[k], pick)
        probs = beh[node.player][node.infoset]
        total = 0.0
        for a, ch in zip(node.actions, node.children):
            q = probs[a]
            if q:
                total += q * walk(ch, pick)
        return total

    best = -np.inf
    for combo in itertools.product(*[range(len(a)) for _, a in infosets]):
        pick = {iset: k for (iset, _), k in zip(infosets, combo)}
        best = max(best, walk(game.root, pick))
    return best
