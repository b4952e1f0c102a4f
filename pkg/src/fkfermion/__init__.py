"""Fermionic observables of the critical FK-Ising model on small square-lattice domains."""

from .configuration import FkConfig, LoopSet, clusters, extract_loops
from .engines import (EnumerationCapError, ESChain, enumerate_reduce, exact_distribution,
                      run_chain)
from .estimator import FermionObservable
from .holomorphy import (HolomorphyError, build_midedge_field, cauchy_sums, pfaffian,
                         pfaffian_identity_check, residue_check, sholo_residuals)
from .lattice import LatticeDomain, LatticeError, build_domain
from .measures import (BETA_CRITICAL, P_CRITICAL, ModelParams, ParameterError, RoutingError,
                       SpinConfig, params_from)
from .observables import (InsertionSet, ObservableValue, check_equivalence,
                          exploration_tree_winding, fermion_exact, fermion_mc,
                          ising_fermion_exact)
from .winding import WindingError, path_winding, winding_phase

__version__ = "0.1.0"

__all__ = [
    "BETA_CRITICAL", "ESChain", "EnumerationCapError", "FermionObservable", "FkConfig",
    "HolomorphyError", "InsertionSet", "LatticeDomain", "LatticeError", "LoopSet",
    "ModelParams", "ObservableValue", "P_CRITICAL", "ParameterError", "RoutingError",
    "SpinConfig", "WindingError", "build_domain", "build_midedge_field", "cauchy_sums",
    "check_equivalence", "clusters", "enumerate_reduce", "exact_distribution",
    "exploration_tree_winding", "extract_loops", "fermion_exact", "fermion_mc",
    "ising_fermion_exact", "params_from", "path_winding", "pfaffian",
    "pfaffian_identity_check", "residue_check", "run_chain", "sholo_residuals",
    "winding_phase",
]
