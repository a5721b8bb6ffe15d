#!/usr/bin/env python3
# commands/__init__.py - Package initialization

# Import all command handlers for easier importing in other modules
from commands.capacity import CapacityCommands
from commands.classify import ClassifyCommands, RegimesCommands
from commands.config import ConfigCommands
from commands.convergence import ConvergenceCommands
from commands.direct import SolveDirectCommands
from commands.gamma import GammaCommands
from commands.homogenized import SolveHomogCommands
from commands.tf_energy import TFEnergyCommands
