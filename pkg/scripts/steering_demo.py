"""Run a simulated steering session against a shipped environment and print
the interaction trace: executed policy, welfare, posterior summary, switches.

Usage:
    python3 scripts/steering_demo.py --env envs/bandit_two_arm.json \
        --true-weights 0.8,0.2 --steps 30 --seed 0
"""
import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from pluralis import (
    load_momdp_file,
    pareto_set_bruteforce,
    steering_session,
)


def parse_args():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--env", default="envs/bandit_two_arm.json")
    parser.add_argument("--true-weights", default="0.8,0.2")
    parser.add_argument("--steps", type=int, default=30)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument(
        "--flip-prob", type=float, default=None,
        help="probability the simulated user misreports (default: derived from beta)",
    )
    return parser.parse_args()


def main():
    args = parse_args()
    momdp = load_momdp_file(args.env)
    weights = [float(x) for x in args.true_weights.split(",")]
    cs = pareto_set_bruteforce(momdp)
    print(f"environment: {args.env} ({momdp.num_states} states, "
          f"{momdp.num_objectives} objectives)")
    print(f"coverage set: {len(cs)} entries")
    for entry in cs.entries:
        print(f"  policy {entry.policy.id}: value {entry.value.tolist()}")

    log = steering_session(
        momdp, cs, weights, steps=args.steps, seed=args.seed,
        user_flip_prob=args.flip_prob,
    )
    print(f"\nhidden user weights: {weights}")
    print(f"true optimum: policy {log.true_optimum_id}\n")
    for rec in log.records:
        kind = rec["record"]
        if kind == "step":
            print(f"  step {rec['step']:3d}  policy {rec['policy_id']}  "
                  f"welfare {rec['welfare']:+.4f}")
        elif kind == "episode_reset":
            print(f"  step {rec['step']:3d}  (episode {rec['episode']} begins)")
        elif kind == "feedback":
            mean = ", ".join(f"{x:.3f}" for x in rec["posterior"]["mean"])
            print(f"           user says {rec['kind']:<10s} posterior mean ({mean})")
        elif kind == "switch":
            print(f"           switched {rec['from_policy_id']} -> {rec['to_policy_id']}")
    print(f"\nswitches: {log.switches}")
    print(f"final policy: {log.final_policy_id} "
          f"({'matches' if log.final_policy_id == log.true_optimum_id else 'differs from'} "
          f"the true optimum)")


if __name__ == "__main__":
    main()
