use serde::{Deserialize, Serialize};

use super::ReducedInstance;
use crate::error::{invalid, Error, Result};
use crate::projection_games::{list_agreeing_vertices, Labeling, ProjectionGame};
use crate::set_systems::PartitionSystem;
use crate::setcover::{Cover, SetCoverInstance};
use crate::Fraction;

/// Universe `β × B`: element `x` of block `b` sits at `(b·m + x)·t + c`
/// for copy `c < t`, where `t` is the duplication factor (1 by default).
/// Subset `S_{a,σ}` has index `a·|Σ_A| + σ`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoshkovitzInstanceMap {
    pub instance: SetCoverInstance,
    pub partition_system: PartitionSystem,
    pub a_count: usize,
    pub sigma_a: usize,
    pub b_count: usize,
    pub duplication: usize,
}

impl MoshkovitzInstanceMap {
    pub fn set_index(&self, a: usize, sigma: usize) -> usize {
        a * self.sigma_a + sigma
    }

    pub fn set_key(&self, index: usize) -> (usize, usize) {
        (index / self.sigma_a, index % self.sigma_a)
    }

    /// `{S_{a, φ_A(a)}}`.
    pub fn witness(&self, labeling: &Labeling) -> Cover {
        Cover {
            chosen: labeling
                .labels_a
                .iter()
                .enumerate()
                .map(|(a, &s)| self.set_index(a, s as usize))
                .collect(),
        }
    }
}

impl ReducedInstance for MoshkovitzInstanceMap {
    fn instance(&self) -> &SetCoverInstance {
        &self.instance
    }
}

pub fn moshkovitz_reduce(pg: &ProjectionGame, ps: &PartitionSystem) -> Result<MoshkovitzInstanceMap> {
    moshkovitz_reduce_padded(pg, ps, 1)
}

/// `S_{a,σ}` is the union over edges `e = (a, b)` of part `slot(e)` of
/// partition `π_e(σ)`, placed in block `b`. `duplication` replaces every
/// element by that many copies.
pub fn moshkovitz_reduce_padded(
    pg: &ProjectionGame,
    ps: &PartitionSystem,
    duplication: usize,
) -> Result<MoshkovitzInstanceMap> {
    if duplication == 0 {
        return Err(invalid("duplication factor must be at least 1"));
    }
    if ps.l() != pg.sigma_b {
        return Err(invalid(format!("need one partition per B symbol: L = {} but |Σ_B| = {}", ps.l(), pg.sigma_b)));
    }
    let (_, d_b) = pg
        .biregularity()
        .ok_or_else(|| invalid("projection game is not bi-regular"))?;
    if ps.k != d_b {
        return Err(invalid(format!("need k = D_B = {d_b}, got {}", ps.k)));
    }
    let m = ps.m;
    let t = duplication;
    let mut subsets = vec![Vec::new(); pg.a_count * pg.sigma_a];
    for (e, &(a, b)) in pg.edges.iter().enumerate() {
        for sigma in 0..pg.sigma_a {
            let part = ps.part(pg.project(e, sigma), pg.edge_slot[e]);
            subsets[a * pg.sigma_a + sigma].extend(part.iter().flat_map(|&x| (0..t).map(move |c| (b * m + x) * t + c)));
        }
    }
    let instance = SetCoverInstance::new(m * pg.b_count * t, subsets)?
        .with_provenance("reduction", "moshkovitz")
        .with_provenance("a_count", pg.a_count)
        .with_provenance("b_count", pg.b_count)
        .with_provenance("sigma_a", pg.sigma_a)
        .with_provenance("sigma_b", pg.sigma_b)
        .with_provenance("D_B", d_b)
        .with_provenance("m", m)
        .with_provenance("certified_d", ps.certified_d)
        .with_provenance("duplication", t);
    Ok(MoshkovitzInstanceMap {
        instance,
        partition_system: ps.clone(),
        a_count: pg.a_count,
        sigma_a: pg.sigma_a,
        b_count: pg.b_count,
        duplication: t,
    })
}

/// Reads a list labeling off a cover: `a` gets every `σ` with `S_{a,σ}`
/// chosen, padded with the smallest unused symbols to the largest list.
/// On a `b` whose block meets fewer than `certified_d` chosen sets, two
/// parts of one partition are used, so two incident edges agree. When
/// those edges leave distinct `A` vertices (always, on a simple graph) the
/// lists do not totally list-disagree on `b`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoshkovitzDiagnostic {
    pub ell: usize,
    pub lists: Vec<Vec<u32>>,
    /// Fraction of `b` whose block meets fewer than `certified_d` chosen sets.
    pub low_cost_fraction: Fraction,
    /// Fraction of `b` where the lists do not totally list-disagree.
    pub agreeing_fraction: Fraction,
    /// Low-cost `b` on which the lists totally list-disagree.
    pub violations: Vec<usize>,
    /// No `b` has two edges from the same `a`.
    pub simple: bool,
}

pub fn moshkovitz_cost_diagnostic(
    map: &MoshkovitzInstanceMap,
    pg: &ProjectionGame,
    cover: &Cover,
) -> Result<MoshkovitzDiagnostic> {
    let limit = map.instance.subsets.len();
    if let Some(&i) = cover.chosen.iter().find(|&&i| i >= limit) {
        return Err(Error::IndexOutOfRange { index: i, limit });
    }
    let mut lists: Vec<Vec<u32>> = vec![Vec::new(); pg.a_count];
    for &i in &cover.chosen {
        let (a, s) = map.set_key(i);
        lists[a].push(s as u32);
    }
    for l in lists.iter_mut() {
        l.sort_unstable();
        l.dedup();
    }
    let ell = lists.iter().map(Vec::len).max().unwrap_or(0).max(1);
    for l in lists.iter_mut() {
        let mut s = 0;
        while l.len() < ell {
            if !l.contains(&s) {
                l.push(s);
            }
            s += 1;
        }
        l.sort_unstable();
    }
    // c(b): chosen sets S_{a,σ} with an edge (a, b).
    let inc = pg.b_incidence();
    let chosen_by_a: Vec<usize> = {
        let mut c = vec![0; pg.a_count];
        for &i in &cover.chosen {
            c[map.set_key(i).0] += 1;
        }
        c
    };
    let costs: Vec<usize> = inc
        .iter()
        .map(|edges| {
            let mut ends: Vec<usize> = edges.iter().map(|&e| pg.edges[e].0).collect();
            ends.sort_unstable();
            ends.dedup();
            ends.iter().map(|&a| chosen_by_a[a]).sum()
        })
        .collect();
    let agreeing = list_agreeing_vertices(pg, &lists);
    let d = map.partition_system.certified_d;
    let low: Vec<usize> = (0..pg.b_count).filter(|&b| costs[b] < d).collect();
    let violations = low.iter().copied().filter(|&b| !agreeing[b]).collect();
    let simple = inc.iter().all(|edges| {
        let mut ends: Vec<usize> = edges.iter().map(|&e| pg.edges[e].0).collect();
        ends.sort_unstable();
        ends.windows(2).all(|w| w[0] != w[1])
    });
    let bc = pg.b_count as u64;
    Ok(MoshkovitzDiagnostic {
        ell,
        lists,
        low_cost_fraction: Fraction::new(low.len() as u64, bc),
        agreeing_fraction: Fraction::new(agreeing.iter().filter(|&&x| x).count() as u64, bc),
        violations,
        simple,
    })
}
