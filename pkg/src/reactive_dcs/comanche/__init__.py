"""Comanche HTTP server case study: behaviour models, platform configuration, composed model."""
from .config import (DEFAULT_CONFIG, Binding, ComancheConfig, ModelOptions, PlatformConfig, SimOptions,
                     Topology, load_config, parse_config)
from .library import (command_node, cost_node, delayable_node, fifo_node, lifecycle_node, position_node,
                      proc_node, twotasks_node)
from .model import ComancheModel, comanche_main
