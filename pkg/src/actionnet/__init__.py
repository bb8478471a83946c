"""Extrema of action functionals with smooth MLPs trained by force-model minimax."""

from .functional import (Domain, FilmParams, GravityParams, Lagrangian, OpticsParams, action_estimate,
                         lagrangian_film, lagrangian_gravity, lagrangian_optics, sample_domain)
from .jets import Jet, Jet1, Jet2, lift_const, seed_input
from .network import BoundNetwork, NetworkSpec, forward, forward_jet, grad_params, init_params
from .solver import PathModel, Problem, Solution, State, TrainConfig, train

__version__ = "0.1.0"
