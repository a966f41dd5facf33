"""
Checking bandwidth sequences
============================

The kernel estimator converges uniformly when the bandwidth goes to zero,
but not too fast: n eta^{p-1} / log n must still diverge.  The checker
probes a schedule at a few sample sizes and reports each condition.
"""

from starshape import BandwidthSchedule, check_brz_conditions, constant_schedule, kernel_von_mises, power_schedule

probes = [10 ** k for k in range(2, 7)]
schedules = {
    "n^(-1/5)": power_schedule(2),
    "constant 0.3": constant_schedule(0.3),
    "1/n": BandwidthSchedule(lambda n: 1.0 / n, "1/n"),
}
for label, sched in schedules.items():
    rep = check_brz_conditions(kernel_von_mises(), sched, 2, probes)
    print(label)
    for k, c in enumerate(rep.checks, 1):
        print(f"  {k}. {c.name:<32} {c.status}")
