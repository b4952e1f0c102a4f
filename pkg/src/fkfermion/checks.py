"""Verification suites: each returns named checks with a measured value and a pass flag.

These are the exhaustive and statistical identity checks used by the
``fkf verify`` command and by the acceptance tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, permutations
import math

import numpy as np

from .configuration import FkConfig, clusters, mirror_config
from .engines import (chain_histogram, config_table, enumerate_reduce, exact_distribution,
                      total_variation)
from .holomorphy import (cauchy_sums, corners_with_two_sites,
                         field_from_values, pfaffian_identity_check, r_function_residual,
                         residue_check, sholo_residuals, two_point_diagonal)
from .lattice import LatticeDomain
from .measures import (ModelParams, disorder_energy, es_joint_weight, fk_weight,
                       ising_weight, route_defect_line, spin_configs)
from .observables import (as_insertions, boundary_corners, check_equivalence,
                          cluster_connection_probability, config_contribution,
                          corner_extension_values, exploration_tree_winding, fermion_exact,
                          fermion_mc, ising_fermion_exact, permutation_sign, spin_correlation)
from .winding import orientation_eighth


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    tolerance: float
    passed: bool
    detail: str = ""

    def as_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "tolerance": self.tolerance,
                "passed": self.passed, "detail": self.detail}


def at_most(name: str, value: float, tol: float, detail: str = "") -> Check:
    value = float(value)
    return Check(name, value, tol, bool(value <= tol), detail)


def at_least(name: str, value: float, bound: float, detail: str = "") -> Check:
    value = float(value)
    return Check(name, value, bound, bool(value > bound), detail)


def count_zero(name: str, failures: int, detail: str = "") -> Check:
    return Check(name, float(failures), 0.0, failures == 0, detail)


# ----------------------------------------------------------------------
# corner sets

def well_separated_sets(domain: LatticeDomain, size: int, count: int) -> list[tuple[int, ...]]:
    """``count`` deterministic, evenly spread sets of well separated corners."""
    found = []
    corners = range(domain.n_corners)
    for combo in combinations(corners, size):
        if as_insertions(domain, combo).well_separated(domain):
            found.append(combo)
    if not found:
        return []
    step = max(1, len(found) // count)
    return found[::step][:count]


def default_insertion(domain: LatticeDomain) -> int:
    return domain.corner_by_spec(domain.width // 2, domain.height // 2, "NE")


# ----------------------------------------------------------------------
# loops and windings

def check_loop_lemma(domain: LatticeDomain) -> list[Check]:
    """Corners share a loop iff their vertices are connected and their duals too."""
    table = config_table(domain)
    u = np.array([c >> 2 for c in range(domain.n_corners)])
    w = np.array([domain.corner_dual(c) for c in range(domain.n_corners)])
    failures = 0
    for bits in range(1 << domain.n_edges):
        labels = table.labels[bits]
        loop_of = np.array(table.loops[bits].loop_of)
        P = np.array(labels.primal_label)[u]
        D = np.array(labels.dual_label)[w]
        same_loop = loop_of[:, None] == loop_of[None, :]
        same_both = (P[:, None] == P[None, :]) & (D[:, None] == D[None, :])
        failures += int(np.count_nonzero(same_loop != same_both))
    return [count_zero("loop events lemma", failures,
                       f"{1 << domain.n_edges} configurations, all corner pairs")]


def check_euler(domain: LatticeDomain) -> list[Check]:
    table = config_table(domain)
    bad = 0
    mirror_bad = 0
    for bits in range(1 << domain.n_edges):
        config = FkConfig(domain, bits)
        labels = table.labels[bits]
        n_loops = len(table.loops[bits].loops)
        bad += n_loops != labels.primal_count + labels.dual_count - 1
        mirrored = mirror_config(config).bits
        mirror_bad += len(table.loops[mirrored].loops) != n_loops
    return [count_zero("euler relation l = k + k* - 1", bad),
            count_zero("loop count invariant under reflection", mirror_bad)]


def _loop_phase_matrix(loops, k):
    loop = loops.loops[k]
    L = len(loop)
    prefix = np.array(loops.turn_prefix[k])
    pre, total = prefix[:-1], prefix[-1]
    idx = np.arange(L)
    Q = pre[None, :] - pre[:, None] + total * (idx[None, :] < idx[:, None])
    A = np.array([orientation_eighth(c) for c in loop])
    M = A[:, None] - A[None, :] - 2 * Q
    return M, idx


def check_winding(domain: LatticeDomain) -> list[Check]:
    """Integrality, complementary-arc antisymmetry and composition of winding phases."""
    table = config_table(domain)
    ill, anti, comp, totals = 0, 0, 0, 0
    for loops in table.loops:
        for k in range(len(loops.loops)):
            totals += abs(loops.total_turn(k)) != 4
            M, idx = _loop_phase_matrix(loops, k)
            L = len(idx)
            if L < 2:
                continue
            off = ~np.eye(L, dtype=bool)
            ill += int(np.count_nonzero((M % 8 != 0) & off))
            phi = 1 - 2 * ((M // 8) % 2)
            anti += int(np.count_nonzero(((phi * phi.T) != -1) & off))
            if L >= 3:
                R = (idx[None, :] - idx[:, None]) % L
                mask = (R[:, :, None] > 0) & (R[:, :, None] < R[:, None, :])
                lhs = phi[:, :, None] * phi[None, :, :]
                rhs = np.broadcast_to(phi[:, None, :], lhs.shape)
                comp += int(np.count_nonzero((lhs != rhs) & mask))
    return [count_zero("loop total turning is +-4 quarter turns", totals),
            count_zero("winding phase well defined (a1 - a2 - 2q = 0 mod 8)", ill),
            count_zero("complementary arcs: phi12 * phi21 = -1", anti),
            count_zero("composition: phi12 * phi23 = phi13", comp)]


# ----------------------------------------------------------------------
# measures

def check_coupling(domain: LatticeDomain, params: ModelParams, n_sweeps: int = 0,
                   seed: int = 0, tol: float = 1e-12) -> list[Check]:
    """Edwards-Sokal marginals (with and without a defect line) and spin-cluster identity."""
    spins = list(spin_configs(domain))
    configs = [FkConfig(domain, b) for b in range(1 << domain.n_edges)]
    z1 = domain.corner_by_spec(0, 0, "NE")
    z2 = domain.corner_by_spec(domain.width - 1, domain.height - 1, "SW")
    line = route_defect_line(domain, z1, z2)
    out = []
    for label, ln in (("", None), (" with defect line", line)):
        mu = np.array([[es_joint_weight(s, c, params, ln) for c in configs] for s in spins])
        spin_marg = mu.sum(axis=1)
        fk_marg = mu.sum(axis=0)
        pi = np.array([ising_weight(s, params) for s in spins])
        if ln is not None:
            pi = pi * np.array([math.exp(-2 * params.beta * disorder_energy(s, ln))
                                for s in spins])
        rho = np.array([fk_weight(c, params) for c in configs])
        if ln is not None:
            w1, w2 = domain.corner_dual(z1), domain.corner_dual(z2)
            conn = np.array([clusters(c).dual_label[w1] == clusters(c).dual_label[w2]
                             for c in configs])
            rho = rho * conn
        out.append(at_most("spin marginal matches Ising" + label,
                           np.abs(spin_marg / spin_marg.sum() - pi / pi.sum()).max(), tol))
        out.append(at_most("edge marginal matches FK" + label,
                           np.abs(fk_marg / fk_marg.sum() - rho / rho.sum()).max(), tol))
    worst = 0.0
    for x, y in combinations(range(domain.n_vertices), 2):
        worst = max(worst, abs(spin_correlation(domain, params, x, y)
                               - cluster_connection_probability(domain, params, x, y)))
    out.append(at_most("<sigma_x sigma_y> = P[x <-> y]", worst, tol))
    if n_sweeps:
        hist = chain_histogram(domain, params, n_sweeps, min(1000, n_sweeps // 10), seed)
        tv = total_variation(hist / hist.sum(), exact_distribution(domain, params))
        out.append(at_most("chain stationarity (total variation)", tv, 0.01,
                           f"{n_sweeps} sweeps"))
    return out


# ----------------------------------------------------------------------
# observables

def check_antisymmetry(domain: LatticeDomain, params: ModelParams, insertions,
                       tol: float = 1e-12) -> list[Check]:
    ins = as_insertions(domain, insertions).corners
    base = fermion_exact(domain, params, ins).real
    worst = 0.0
    for perm in permutations(range(len(ins))):
        v = fermion_exact(domain, params, tuple(ins[i] for i in perm)).real
        worst = max(worst, abs(v - permutation_sign(perm) * base))
    return [at_most(f"antisymmetry over all permutations at p={params.p:.6g}", worst, tol,
                    f"f = {base:.17g}")]


def check_equivalence_sets(domain: LatticeDomain, params: ModelParams, sets,
                           tol: float = 1e-10) -> list[Check]:
    worst = 0.0
    bookkeeping = True
    for ins in sets:
        rep = check_equivalence(domain, params, ins)
        worst = max(worst, rep.difference)
        bookkeeping = bookkeeping and rep.bookkeeping_ok
    return [at_most(f"FK = Ising observable at beta={params.beta:.6g}", worst, tol,
                    f"{len(sets)} corner sets"),
            count_zero("low-temperature bookkeeping identity", 0 if bookkeeping else 1)]


def all_pairs(domain: LatticeDomain) -> list[tuple[int, int]]:
    return list(permutations(range(domain.n_corners), 2))


def check_line_independence(domain: LatticeDomain, params: ModelParams, z1: int, z2: int,
                            lines, tol: float = 1e-12) -> list[Check]:
    values = [ising_fermion_exact(domain, params, (z1, z2), [ln]).real for ln in lines]
    spread = max(values) - min(values)
    return [at_most("observable independent of the defect line", spread, tol,
                    f"{len(lines)} routings")]


def check_exploration(domain: LatticeDomain, params: ModelParams, insertion_sets,
                      tol: float = 1e-12) -> list[Check]:
    table = config_table(domain)
    roots = boundary_corners(domain)
    root_bad = 0
    match_bad = 0
    worst = 0.0
    for ins in insertion_sets:
        for loops in table.loops:
            vals = {exploration_tree_winding(loops, r, ins) for r in roots}
            root_bad += len(vals) != 1
            match_bad += vals != {config_contribution(loops, ins)}
        red = enumerate_reduce(domain, params,
                               lambda c, loops, ins=ins: exploration_tree_winding(loops, roots[0],
                                                                                  ins))
        worst = max(worst, abs(red.mean - fermion_exact(domain, params, ins).real))
    return [count_zero("exploration winding independent of the root", root_bad),
            count_zero("exploration winding equals the loop contribution", match_bad),
            at_most("E[W(T)] = f", worst, tol)]


def check_mc(domain: LatticeDomain, params: ModelParams, insertions, n_sweeps: int,
             seed: int, n_sigma: float = 4.0) -> list[Check]:
    ins = as_insertions(domain, insertions).corners
    exact = fermion_exact(domain, params, ins).real
    est = fermion_mc(domain, params, ins, n_sweeps, seed)
    z = abs(est.real - exact) / est.stderr if est.stderr > 0 else (
        0.0 if est.real == exact else math.inf)
    return [at_most(f"Monte Carlo within {n_sigma:g} stderr ({len(ins)}-point)", z, n_sigma,
                    f"exact {exact:.6g}, estimate {est.real:.6g} +- {est.stderr:.2g}")]


# ----------------------------------------------------------------------
# holomorphy

def check_sholo(domain: LatticeDomain, params: ModelParams, insertion: int,
                tol: float = 1e-12) -> list[Check]:
    """s-holomorphicity, pairing agreement and Cauchy sums for one fixed corner.

    Works at any parameter; off the critical point the checks are expected
    to fail, which is how the negative control is reported.
    """
    values = corner_extension_values(domain, params, (insertion,))
    field = field_from_values(domain, params, (insertion,), values)
    res = sholo_residuals(field)
    sums = cauchy_sums(field)
    return [at_most("NW+SE and NE+SW pairings agree", field.pairing_mismatch, tol),
            at_most("s-holomorphicity residual", max(res.values(), default=0.0), tol,
                    f"{len(res)} eligible corners"),
            at_most("discrete Cauchy sums vanish", max(sums.values(), default=0.0), tol,
                    f"{len(sums)} plaquettes")]


def check_residue(domain: LatticeDomain, params: ModelParams, triples,
                  tol: float = 1e-10) -> list[Check]:
    bad = 0
    for c in corners_with_two_sites(domain):
        fp, fm = two_point_diagonal(domain, params, c)
        if abs(abs(fp - fm) - 2.0) > 1e-12 or abs(abs(fp) - 1.0) > 1e-12:
            bad += 1
    worst = 0.0
    worst_r = 0.0
    for ins in triples:
        for row in residue_check(domain, params, ins):
            worst = max(worst, row.error)
        worst_r = max(worst_r, r_function_residual(domain, params, ins))
    return [count_zero("|f+(z,z) - f-(z,z)| = 2 with unit values", bad,
                       f"{len(corners_with_two_sites(domain))} corners with two mid-edges"),
            at_most("residue factorization", worst, tol, f"{len(triples)} corner triples"),
            at_most("r-function vanishes on every mid-edge", worst_r, tol)]


def check_pfaffian(domain: LatticeDomain, params: ModelParams, sets,
                   tol: float = 1e-10) -> list[Check]:
    worst = 0.0
    for ins in sets:
        worst = max(worst, pfaffian_identity_check(domain, params, ins).difference)
    return [at_most("f(z1..z2n) = Pf(two-point matrix)", worst, tol, f"{len(sets)} corner sets")]


__all__ = [
    "Check", "all_pairs", "at_least", "at_most", "check_antisymmetry",
    "check_coupling", "check_equivalence_sets", "check_euler", "check_exploration",
    "check_line_independence", "check_loop_lemma", "check_mc", "check_pfaffian",
    "check_residue", "check_sholo", "check_winding", "count_zero", "default_insertion",
    "well_separated_sets",
]
