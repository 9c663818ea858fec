"""quadbench: quadruped locomotion benchmarking on a shared rigid-body simulator.

Two controllers, one physics substrate: a derivative-free sampling MPC and a
from-scratch PPO learner, evaluated under a common protocol (standardized
walking, CoM perturbations, maximum-disturbance search, cost of transport,
terrain generalization).
"""

__version__ = "0.1.0"
