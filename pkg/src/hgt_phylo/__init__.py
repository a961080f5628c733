"""Species-tree reconstruction under stochastic horizontal gene transfer.

Simulates gene trees evolving on a rooted ultrametric species phylogeny
by Poisson-distributed SPR transfers, produces imperfect observations
(epsilon-contractions and epsilon-distortions), reconstructs the species
topology from them by diluted-subtree cherry picking or median-driven
single linkage, and reproduces the coupling experiment showing that high
transfer rates make distinct phylogenies indistinguishable.
"""

__version__ = "0.1.0"

from .trees import (BoundedRates, GeneTree, Location, RootedTree,
                    SpeciesPhylogeny, TreeTopology, WeightedRootedTree,
                    graph_distance, leafsomorphic, random_phylogeny,
                    restrict, species_metric, validate)
from .newick import (NewickParseError, parse, parse_species, parse_topology,
                     serialize, serialize_topology)
from .hgt import (GeneSample, HgtEvent, contemporaneous_points, execute_hgt,
                  sample_events, simulate_batch, simulate_gene)
from .observe import (ContractedGeneTree, DistortedGeneTree, cleaned_rooted,
                      contract, distort, observed_distance)
from .diluted import (Match, QueryForest, RootedMatcher, UnrootedMatcher,
                      brute_force_oracle, enumerate_diluted_subtrees,
                      find_diluted_embedding, find_diluted_embedding_unrooted,
                      is_diluted_subtree, scan_diluted_embedding_unrooted)
from .reconstruct import (MedianEstimate, Pruning, ReconstructionError,
                          Truncation, initial_pruning, is_valid_pruning,
                          is_valid_truncation, median_leaf_distances,
                          reconstruct_from_contractions,
                          reconstruct_from_distortions,
                          single_linkage_truncation)
from .impossibility import (CoupledRun, LowerBoundPair, TransferDescriptor,
                            build_pair, coupled_run, indistinguishability_sweep)
