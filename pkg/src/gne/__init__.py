"""Entropy of sparse random graphs with vertex-names."""
from .codec import BitStream, decode, encode, ideal_codelength
from .entropy import (J, RateConstants, bernoulli_entropy, conditional_entropy, ent, h_A, kappa,
                      large_dev_rate, log_choose, log_graph_count)
from .errors import CapacityError, DecodeError, ModelInvalidError, ParseError, ValidationError
from .graph import Dag, GraphWithNames
from .hybrid import (CopyTrace, HybridParams, collision_stats, e_series, gen_hybrid, mc_entropy,
                     rate_hybrid, rename_duplicates)
from .io import read_dag, read_graph, write_graph
from .linext import brute_force_extensions, count_linear_extensions, extension_lower_bound
from .models import (EntropyReport, ErBinary, ErNamed, Hamming, SmallWorld, TreeSequential,
                     TreeUniform, edge_length_stats, exact_entropy, generate, name_similarity_stats,
                     rate)
from .sweep import SweepSpec, run_sweep

__version__ = "0.1.0"
