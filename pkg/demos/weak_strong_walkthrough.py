"""Perturb the initial data by delta and watch the stability estimate.

The unperturbed run stands in for the strong solution. For each delta the
script reports R(0) = delta^2, the largest ratio LHS/RHS of the stability
estimate (at most 1 when it holds) and R(T)/R(0).

    python3 demos/weak_strong_walkthrough.py
"""
from vepflow import config as cf
from vepflow import experiments as ex

cfg = cf.load("demos/tg_yield.toml")
cfg.scenario.n = 32
cfg.solver.dt, cfg.solver.t_end = 2e-3, 0.5
cfg.output.record_every = 10

first = ex.weak_strong(cfg, delta=1e-2)
print(f"calibrated C = {first.weight.C:.3f}")
for delta in (1e-2, 5e-3, 2.5e-3):
    res = first if delta == 1e-2 else ex.weak_strong(cfg, delta=delta, base=first.base, weight=first.weight)
    s = res.series
    print(f"delta={delta:.1e}  R0={res.R0:.2e}  max LHS/RHS={res.max_ratio:.4f}  R(T)/R0={s.R[-1] / res.R0:.3f}")
