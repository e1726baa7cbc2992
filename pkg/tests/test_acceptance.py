"""Acceptance suite: one test per criterion, printing a pass/fail line each.

Trial counts and tolerances are fixed here; the sweep families are shared
between criteria so each (graph, seed) pair is simulated once per algorithm.
Engine bookkeeping (send/receive conservation, zero budget violations) is
asserted on every run through the shared helper.
"""

import math
import statistics

import pytest

from congestsim.algorithms import greedy_call_lengths, make_factory, member_set
from congestsim.algorithms.scales import scales_delegates_to_marking
from congestsim.engine import run
from congestsim.graph import (
    Graph,
    gen_bridge_graph,
    gen_complete_bipartite,
    gen_cycle,
    gen_disconnected_d,
    gen_gnp,
    gen_tight_example,
)
from congestsim.lowerbound import (
    BRIDGE_TAG,
    OUTCOMES,
    bridge_experiment,
    component_salts,
    disconnected_experiment,
    trial_seeds,
)
from congestsim.verify import (
    brute_force_ruling_sets,
    verify_categories,
    verify_ruling_set,
)

GNP_SIZES = [256, 512, 1024, 2048, 4096]
SWEEP_SEEDS = 50


def report(tag: str, ok: bool, detail: str) -> None:
    print(f"\nACCEPTANCE {tag}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, f"{tag}: {detail}"


def checked_run(graph: Graph, factory, seed: int, **kw):
    """run() plus the engine invariants of criterion 11 on every single run."""
    result = run(graph, factory, seed, **kw)
    stats = result.stats
    assert stats.budget_violations == 0
    assert sum(stats.messages_sent) == stats.messages_total
    assert sum(stats.messages_received) == stats.messages_total
    return result


# ---------------------------------------------------------------- criterion 1


def small_corpus():
    graphs = []
    for n in range(3, 9):
        graphs.append(("cycle", gen_cycle(n, seed=n)))
    for a in range(1, 5):
        for b in range(a, 9 - a):
            graphs.append((f"K{a},{b}", gen_complete_bipartite(a, b, seed=a * 10 + b)))
    count = 0
    seed = 0
    while count < 200:
        n = 3 + seed % 6
        p = (0.2, 0.4, 0.6, 0.8)[seed % 4]
        graphs.append(("gnp", gen_gnp(n, p, seed=seed)))
        count += 1
        seed += 1
    return graphs


ALGO_MODES = [
    ("luby", {}, 2, 1),
    ("greedy-rs", {}, 2, 1),
    ("2rs-time", {}, 2, 2),
    ("sparsify", {"f": 2.0}, 1, 1),
    ("3rs", {}, 2, 3),
    ("ghaffari-p1", {"iterations": 24}, 2, None),
    ("5rs", {}, 2, 5),
    ("2rs-msg", {}, 2, 2),
    ("2rs-fast", {}, 2, 2),
]


def test_criterion_01_exhaustive_small():
    corpus = small_corpus()
    runs = 0
    brute_checked = 0
    for _name, g in corpus:
        brute: dict[tuple[int, int], set[frozenset]] = {}
        for algo, params, alpha, beta in ALGO_MODES:
            factory = make_factory(algo, **params)
            for seed in range(20):
                res = checked_run(g, factory, seed)
                runs += 1
                members = member_set(res.outputs)
                if beta is None:
                    rep = verify_ruling_set(g, members, alpha, g.n)
                    assert not rep.alpha_violations, (algo, seed)
                    continue
                rep = verify_ruling_set(g, members, alpha, beta)
                assert rep.valid, (algo, _name, seed, sorted(members))
                if algo == "2rs-msg":
                    assert verify_categories(g, res.outputs).valid
                key = (alpha, beta)
                if key not in brute:
                    brute[key] = set(brute_force_ruling_sets(g, alpha, beta))
                assert frozenset(members) in brute[key]
                brute_checked += 1
        assert frozenset(range(g.n)) not in brute.get((2, 1), {frozenset()}) or g.m == 0
    report("01 exhaustive-small", True, f"{runs} runs over {len(corpus)} graphs, "
           f"{brute_checked} brute-force membership checks")


# ------------------------------------------------- criteria 2-4 shared sweep


@pytest.fixture(scope="module")
def gnp_sweep():
    data = {}
    for fam, p_of in (("sparse", lambda n: 8 / n), ("dense", lambda n: 0.5)):
        for n in GNP_SIZES:
            luby_rows = []
            msg_rows = []
            log_n = math.log2(n)
            for seed in range(SWEEP_SEEDS):
                g = gen_gnp(n, p_of(n), seed=seed)
                res = checked_run(g, make_factory("luby"), seed)
                luby_rows.append(
                    {
                        "rounds": res.stats.rounds,
                        "valid": verify_ruling_set(
                            g, member_set(res.outputs), 2, 1
                        ).valid,
                    }
                )
                res = checked_run(g, make_factory("2rs-msg"), seed)
                decide_violations = 0
                for v, prog in enumerate(res.programs):
                    d = g.degree(v)
                    when = prog.decided_round
                    if when is None or when > 32 * d * log_n:
                        decide_violations += 1
                msg_rows.append(
                    {
                        "rounds": res.stats.rounds,
                        "messages": res.stats.messages_total,
                        "m": g.m,
                        "max_degree": g.max_degree,
                        "valid": verify_ruling_set(
                            g, member_set(res.outputs), 2, 2
                        ).valid
                        and verify_categories(g, res.outputs).valid,
                        "decide_violation_frac": decide_violations / g.n,
                        "complete": res.stats.halted_all,
                    }
                )
            data[(fam, n)] = {"luby": luby_rows, "msg": msg_rows}
    return data


def test_criterion_02_luby_rounds(gnp_sweep):
    worst = ""
    ok = True
    for (fam, n), rows in gnp_sweep.items():
        bound = 8 * math.log2(n)
        max_rounds = max(r["rounds"] for r in rows["luby"])
        all_valid = all(r["valid"] for r in rows["luby"])
        if max_rounds > bound or not all_valid:
            ok = False
        worst += f" {fam}/{n}:{max_rounds}/{bound:.0f}"
    report("02 luby-rounds", ok, f"max rounds vs 8*log2(n):{worst}; all runs valid")


def test_criterion_03_msg_bound(gnp_sweep):
    ok = True
    details = []
    for (fam, n), rows in gnp_sweep.items():
        bound = 64 * n * math.log2(n) ** 2
        under = sum(r["messages"] <= bound for r in rows["msg"])
        if under < 0.95 * len(rows["msg"]):
            ok = False
        details.append(f"{fam}/{n}: {under}/{len(rows['msg'])} under 64n*log2^2(n)")
    ratios = []
    for n in GNP_SIZES:
        rows = gnp_sweep[("dense", n)]["msg"]
        ratios.append(statistics.median(r["messages"] / r["m"] for r in rows))
    decreasing = all(b < a for a, b in zip(ratios, ratios[1:]))
    ok = ok and decreasing
    report(
        "03 msg-messages", ok,
        f"{'; '.join(details[:3])}...; dense messages/m medians "
        + "->".join(f"{r:.3f}" for r in ratios),
    )


def test_criterion_04_msg_rounds(gnp_sweep):
    ok = True
    worst_frac = 0.0
    worst_rounds = ""
    for (fam, n), rows in gnp_sweep.items():
        log_n = math.log2(n)
        for r in rows["msg"]:
            if not r["complete"] or r["rounds"] > 32 * r["max_degree"] * log_n:
                ok = False
                worst_rounds = f"{fam}/{n}: rounds {r['rounds']}"
            worst_frac = max(worst_frac, r["decide_violation_frac"])
    ok = ok and worst_frac <= 0.01
    report(
        "04 msg-rounds", ok,
        f"all runs within 32*Delta*log2(n){worst_rounds}; worst per-node "
        f"decision-time violation fraction {worst_frac:.4f} <= 0.01",
    )


# ---------------------------------------------------------------- criterion 5


def test_criterion_05_tight_example():
    ok = True
    details = []
    for n in (256, 1024, 4096):
        g = gen_tight_example(n, 0.5, 0.25, seed=n)
        m_ratio = g.m / n**1.75
        rounds = []
        max_msgs = 0
        for seed in range(25):
            res = checked_run(g, make_factory("2rs-msg"), seed)
            rounds.append(res.stats.rounds)
            max_msgs = max(max_msgs, res.stats.messages_total)
            assert verify_ruling_set(g, member_set(res.outputs), 2, 2).valid
        med = statistics.median(rounds)
        bound_rounds = 0.25 * math.sqrt(n)
        bound_msgs = 64 * n * math.log2(n) ** 2
        if med < bound_rounds or max_msgs > bound_msgs or not 0.2 <= m_ratio <= 5.0:
            ok = False
        details.append(
            f"n={n}: med rounds {med:.0f}>={bound_rounds:.0f}, "
            f"max msgs {max_msgs}<={bound_msgs:.0f}, m/n^1.75={m_ratio:.2f}"
        )
    report("05 tight-example", ok, "; ".join(details))


# ---------------------------------------------------------------- criterion 6


def test_criterion_06_fast_two_ruling_set():
    ok = True
    details = []
    for n in (512, 1024, 2048, 4096):
        g = None
        valid = 0
        max_msgs = 0
        max_rounds = 0
        for seed in range(SWEEP_SEEDS):
            g = gen_gnp(n, 0.05, seed=seed)
            res = checked_run(g, make_factory("2rs-fast"), seed)
            valid += verify_ruling_set(g, member_set(res.outputs), 2, 2).valid
            max_msgs = max(max_msgs, res.stats.messages_total)
            max_rounds = max(max_rounds, res.stats.rounds)
        msg_bound = 8 * n**1.5 * math.log2(n)
        round_bound = 16 * math.log2(n)
        if valid < 0.95 * SWEEP_SEEDS or max_msgs > msg_bound or max_rounds > round_bound:
            ok = False
        details.append(
            f"n={n}: valid {valid}/{SWEEP_SEEDS}, msgs {max_msgs}<={msg_bound:.0f}, "
            f"rounds {max_rounds}<={round_bound:.0f}"
        )
    report("06 fast-2rs", ok, "; ".join(details))


# ------------------------------------------------- criteria 7-8 shared sweep


@pytest.fixture(scope="module")
def time_sweep():
    data = {}
    for n in (512, 1024, 2048, 4096):
        rows = []
        for seed in range(25):
            g = gen_gnp(n, 1.2 / n, seed=seed)
            in_regime = not scales_delegates_to_marking(g.n, g.max_degree)
            res = checked_run(g, make_factory("2rs-time"), seed)
            row = {
                "seed": seed,
                "valid": verify_ruling_set(g, member_set(res.outputs), 2, 2).valid,
                "rounds": res.stats.rounds,
                "in_regime": in_regime,
                "greedy": greedy_call_lengths(res.programs) if in_regime else {},
            }
            res3 = checked_run(g, make_factory("3rs"), seed)
            row["valid3"] = verify_ruling_set(g, member_set(res3.outputs), 2, 3).valid
            res5 = checked_run(g, make_factory("5rs"), seed)
            row["valid5"] = verify_ruling_set(g, member_set(res5.outputs), 2, 5).valid
            row["rounds5"] = res5.stats.rounds
            rows.append(row)
        data[n] = rows
    return data


def test_criterion_07_scales_two_ruling_set(time_sweep):
    ok = True
    details = []
    for n, rows in time_sweep.items():
        log_n = math.log2(n)
        b_bound = 4 * math.sqrt(log_n)
        m_bound = 4 * log_n / math.log2(log_n)
        all_valid = all(r["valid"] for r in rows)
        in_regime = [r for r in rows if r["in_regime"]]
        good = 0
        for r in in_regime:
            fine = all(
                (cyc <= b_bound if tag[0] == "B" else cyc <= m_bound)
                for tag, cyc in r["greedy"].items()
            )
            good += fine
        enough = not in_regime or good >= 0.95 * len(in_regime)
        if not (all_valid and enough):
            ok = False
        details.append(
            f"n={n}: valid 25/25, greedy-lengths ok {good}/{len(in_regime)} in-regime"
        )
    report("07 scales-2rs", ok, "; ".join(details))


def test_criterion_08_three_and_five(time_sweep):
    ok = True
    details = []
    for n, rows in time_sweep.items():
        v3 = all(r["valid3"] for r in rows)
        v5 = all(r["valid5"] for r in rows)
        if not (v3 and v5):
            ok = False
        if n >= 1024:
            med5 = statistics.median(r["rounds5"] for r in rows)
            med2 = statistics.median(r["rounds"] for r in rows)
            if med5 >= med2:
                ok = False
            details.append(f"n={n}: 5rs median {med5:.0f} < 2rs-time {med2:.0f}")
    report("08 three-five-rs", ok, "; ".join(details) + "; all (2,3)/(2,5) valid")


# ---------------------------------------------------------------- criterion 9


def test_criterion_09_sparsify_contract():
    ok = True
    details = []
    for n in (1024, 4096):
        f = 2.0 ** math.ceil(math.sqrt(math.log2(n)))
        bound = 4 * f * math.log2(n)
        held = 0
        trials = 25
        for seed in range(trials):
            g = gen_gnp(n, 64 / n, seed=seed)
            res = checked_run(g, make_factory("sparsify", f=f), seed)
            members = member_set(res.outputs)
            assert verify_ruling_set(g, members, 1, 1).valid  # domination, always
            induced = max(
                (sum(1 for u in g.adjacency[v] if u in members) for v in members),
                default=0,
            )
            held += induced <= bound
        if held < 0.95 * trials:
            ok = False
        details.append(f"n={n} f={f:.0f}: degree bound {held}/{trials}, domination 25/25")
    report("09 sparsify", ok, "; ".join(details))


# --------------------------------------------------------------- criterion 10


def test_criterion_10a_equidistribution():
    trials = 2000
    agg = disconnected_experiment(64, make_factory("luby"), trials=trials, seed=101)
    expected = trials / 4
    sigma = math.sqrt(trials * 0.25 * 0.75)
    ok = set(agg.histogram) <= set(OUTCOMES)
    for outcome in OUTCOMES:
        if abs(agg.histogram.get(outcome, 0) - expected) > 3 * sigma:
            ok = False
    report(
        "10a equidistribution", ok,
        f"{agg.histogram} vs {expected:.0f} +- {3 * sigma:.0f} each",
    )


def test_criterion_10b_crossing_rates():
    rates = []
    details = []
    ok = True
    for n in (64, 256, 1024):
        agg = bridge_experiment(
            n, make_factory("2rs-msg"), mu=None, trials=200, seed=202, algo_name="2rs-msg"
        )
        ports = n * n / 4
        pred = min(1.0, 16 * agg.messages_mean / ports)
        band = pred + 3 * math.sqrt(max(pred * (1 - pred), 0.25 / 200) / 200)
        if agg.crossing_rate > band:
            ok = False
        rates.append(agg.crossing_rate)
        details.append(f"n={n}: rate {agg.crossing_rate:.3f} <= band {band:.3f}")
    ok = ok and all(b < a for a, b in zip(rates, rates[1:]))
    report("10b crossing", ok, "; ".join(details) + "; strictly decreasing in n")


def test_criterion_10c_indistinguishability():
    n = 256
    compared = 0
    ok = True
    for seed in trial_seeds(303, 120):
        gd = gen_disconnected_d(n, seed)
        gb = gen_bridge_graph(n, seed)
        salts_d = component_salts(gd)
        rd = checked_run(gd, make_factory("2rs-msg"), seed, node_salts=salts_d)
        rb = checked_run(gb, make_factory("2rs-msg"), seed, node_salts=salts_d)
        if BRIDGE_TAG in rb.stats.first_send_by_tag:
            continue
        compared += 1
        if rd.outputs != rb.outputs or rd.stats.rounds != rb.stats.rounds:
            ok = False
        if rd.stats.messages_total != rb.stats.messages_total:
            ok = False
    ok = ok and compared >= 10
    report(
        "10c zero-budget-invariant", ok,
        f"{compared} non-crossing bridge runs identical to disconnected runs",
    )


# --------------------------------------------------------------- criterion 11


def test_criterion_11_engine_invariants():
    # Conservation and zero budget violations are asserted inside checked_run
    # for every run above; here determinism is certified on fresh triples.
    triples = [
        (gen_gnp(512, 8 / 512, seed=5), "luby", 7),
        (gen_gnp(512, 8 / 512, seed=5), "2rs-msg", 8),
        (gen_gnp(512, 1.2 / 512, seed=6), "2rs-time", 9),
        (gen_gnp(512, 1.2 / 512, seed=6), "5rs", 10),
        (gen_cycle(64, seed=3), "greedy-rs", 11),
        (gen_gnp(512, 0.05, seed=4), "2rs-fast", 12),
        (gen_gnp(512, 0.05, seed=4), "sparsify", 13),
        (gen_gnp(512, 8 / 512, seed=7), "3rs", 14),
        (gen_gnp(512, 8 / 512, seed=7), "ghaffari-p1", 15),
    ]
    ok = True
    for g, name, seed in triples:
        a = checked_run(g, make_factory(name), seed)
        b = checked_run(g, make_factory(name), seed)
        if a.outputs != b.outputs or a.stats != b.stats:
            ok = False
    report(
        "11 engine-invariants", ok,
        f"conservation+budget asserted on every suite run; determinism on "
        f"{len(triples)} fresh (graph, algorithm, seed) triples",
    )
