#!/usr/bin/env python3
"""Pre-measurement for the acceptance constants: report observed vs bound."""

import math
import statistics
import sys
import time

sys.path.insert(0, "src")

from congestsim.algorithms import greedy_call_lengths, make_factory, member_set
from congestsim.engine import run
from congestsim.graph import gen_gnp, gen_tight_example
from congestsim.verify import verify_ruling_set

t_start = time.time()


def stamp(msg):
    print(f"[{time.time() - t_start:7.1f}s] {msg}", flush=True)


SEEDS = range(12)  # scouting subset; acceptance uses the pinned counts

# Criterion 2/3/4 families
for n in (256, 1024, 4096):
    log_n = math.log2(n)
    for fam, p in (("sparse", 8 / n), ("dense", 0.5)):
        g = gen_gnp(n, p, seed=1000 + n)
        _ = g.peer_ports
        luby_rounds, msg_msgs, msg_rounds, worst_node = [], [], [], []
        for seed in SEEDS:
            r = run(g, make_factory("luby"), seed)
            luby_rounds.append(r.stats.rounds)
            r2 = run(g, make_factory("2rs-msg"), seed)
            msg_msgs.append(r2.stats.messages_total)
            msg_rounds.append(r2.stats.rounds)
            viol = 0
            for v, prog in enumerate(r2.programs):
                d = g.degree(v)
                dr = prog.decided_round or r2.stats.rounds
                if dr > 32 * d * log_n:
                    viol += 1
            worst_node.append(viol / n)
        stamp(
            f"n={n} {fam}: luby max rounds {max(luby_rounds)} vs {8*log_n:.0f} | "
            f"2rs-msg max msgs {max(msg_msgs)} vs {64*n*log_n**2:.0f} | "
            f"max rounds {max(msg_rounds)} vs {32*g.max_degree*log_n:.0f} | "
            f"decision-viol frac max {max(worst_node):.4f}"
        )

# Criterion 5: tight example
for n in (256, 1024):
    g = gen_tight_example(n, 0.5, 0.25, seed=7)
    rounds, msgs = [], []
    for seed in SEEDS:
        r = run(g, make_factory("2rs-msg"), seed)
        rounds.append(r.stats.rounds)
        msgs.append(r.stats.messages_total)
    stamp(
        f"tight n={n}: median rounds {statistics.median(rounds):.0f} vs >= {0.25*math.sqrt(n):.1f} "
        f"| max msgs {max(msgs)} vs {64*n*math.log2(n)**2:.0f}"
    )

# Criterion 6: fast 2rs
for n in (512, 4096):
    g = gen_gnp(n, 0.05, seed=2000 + n)
    _ = g.peer_ports
    ok, msgs, rounds = 0, [], []
    for seed in SEEDS:
        r = run(g, make_factory("2rs-fast"), seed)
        ok += verify_ruling_set(g, member_set(r.outputs), 2, 2).valid
        msgs.append(r.stats.messages_total)
        rounds.append(r.stats.rounds)
    stamp(
        f"fast n={n}: valid {ok}/{len(SEEDS)} | max msgs {max(msgs)} vs {8*n**1.5*math.log2(n):.0f} "
        f"| max rounds {max(rounds)} vs {16*math.log2(n):.0f}"
    )

# Criterion 7: 2rs-time sweeps (sparse, inside the scales regime)
for n in (512, 2048):
    bad_b, bad_m, runs = 0, 0, 0
    rounds_t = []
    log_n = math.log2(n)
    for seed in SEEDS:
        g = gen_gnp(n, 1.2 / n, seed=3000 + seed)
        r = run(g, make_factory("2rs-time"), seed)
        assert verify_ruling_set(g, member_set(r.outputs), 2, 2).valid
        rounds_t.append(r.stats.rounds)
        lengths = greedy_call_lengths(r.programs)
        runs += 1
        for tag, cyc in lengths.items():
            if tag[0] == "B" and cyc > 4 * math.sqrt(log_n):
                bad_b += 1
            if tag[0] == "M" and cyc > 4 * log_n / math.log2(log_n):
                bad_m += 1
    stamp(f"2rs-time n={n}: all valid, B-viol {bad_b} M-viol {bad_m} in {runs} runs; median rounds {statistics.median(rounds_t)}")

# Criterion 8: 5rs vs 2rs-time on identical pairs
for n in (1024, 2048):
    r5s, r2s = [], []
    for seed in SEEDS:
        g = gen_gnp(n, 1.2 / n, seed=4000 + seed)
        r5s.append(run(g, make_factory("5rs"), seed).stats.rounds)
        r2s.append(run(g, make_factory("2rs-time"), seed).stats.rounds)
    stamp(f"n={n}: 5rs median {statistics.median(r5s)} vs 2rs-time median {statistics.median(r2s)}")

# Criterion 9: sparsify contract
n = 4096
f = 2.0 ** math.ceil(math.sqrt(math.log2(n)))
ok = 0
for seed in SEEDS:
    g = gen_gnp(n, 64 / n, seed=5000 + seed)
    r = run(g, make_factory("sparsify", f=f), seed)
    members = member_set(r.outputs)
    assert verify_ruling_set(g, members, 1, 1).valid
    induced = max((sum(1 for u in g.adjacency[v] if u in members) for v in members), default=0)
    ok += induced <= 4 * f * math.log2(n)
stamp(f"sparsify n={n} f={f}: induced-degree bound holds {ok}/{len(SEEDS)}")

stamp("done")
