from rankpool.cutloop import run_cut_loop
from rankpool.pooling import GenParams, generate_random


def test_chain_converges_without_cuts(chain_instance):
    rep = run_cut_loop(chain_instance, "S")
    assert rep.converged
    assert len(rep.rounds) == 1
    assert rep.rounds[0][1] == 0
    assert abs(rep.final_value - rep.target_value) <= 1e-9


def test_zero_rounds_reports_base_value(chain_instance):
    rep = run_cut_loop(chain_instance, "S", max_rounds=0)
    assert not rep.converged
    assert len(rep.rounds) == 1
    assert rep.final_value is not None


def test_converges_to_extended_formulation_value(tense_params):
    hits = 0
    for seed in (1, 3, 5, 7, 8):
        inst = generate_random(tense_params, seed)
        rep = run_cut_loop(inst, "S", debug_check=True)
        if rep.final_value is None:
            continue                     # arc lower bounds made the LP infeasible
        hits += 1
        scale = max(1.0, abs(rep.target_value))
        assert abs(rep.final_value - rep.target_value) <= 1e-6 * scale
        # monotone bound improvement per round (min sense)
        vals = [r[0] for r in rep.rounds]
        for a, b in zip(vals, vals[1:]):
            assert b >= a - 1e-9 * scale
    assert hits >= 3


def test_cuts_actually_added_somewhere(tense_params):
    total = 0
    for seed in (5, 8, 9, 10):
        inst = generate_random(tense_params, seed)
        rep = run_cut_loop(inst, "S")
        if rep.final_value is not None:
            total += sum(r[1] for r in rep.rounds)
    assert total > 0


def test_terminal_side_loop(tense_params):
    inst = generate_random(tense_params, 8)
    rep = run_cut_loop(inst, "T", debug_check=True)
    if rep.final_value is not None:
        scale = max(1.0, abs(rep.target_value))
        assert abs(rep.final_value - rep.target_value) <= 1e-6 * scale


def test_csv_schema(chain_instance):
    rep = run_cut_loop(chain_instance, "S")
    lines = rep.to_csv().strip().split("\n")
    assert lines[0] == "round,value,cuts,max_violation"
    assert len(lines) == 1 + len(rep.rounds)
