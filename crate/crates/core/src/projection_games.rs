//! Projection games: labelings, exact value, agreement and list-agreement
//! soundness by enumeration, the bi-regular partition-property checker, and
//! a configuration-model supplier of random bi-regular games.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::combin::{combinations, digits};
use crate::error::{binomial, check_budget, invalid, sat_pow, Error, Result};
use crate::{par, rng, Fraction};

/// Work cap for labeling enumeration (labelings × per-labeling cost).
pub const LABELING_BUDGET: u128 = 1 << 30;

/// Bipartite game on `A ∪ B`; edge `e = (a, b)` carries `projections[e]`,
/// a map `[sigma_a] → [sigma_b]`, and `edge_slot[e]`, its index among the
/// edges of `b`. Parallel edges are distinct edges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectionGame {
    pub a_count: usize,
    pub b_count: usize,
    pub sigma_a: usize,
    pub sigma_b: usize,
    pub edges: Vec<(usize, usize)>,
    pub projections: Vec<Vec<u32>>,
    pub edge_slot: Vec<usize>,
}

impl ProjectionGame {
    /// Slots are assigned per `b` in edge order.
    pub fn new(
        a_count: usize,
        b_count: usize,
        sigma_a: usize,
        sigma_b: usize,
        edges: Vec<(usize, usize)>,
        projections: Vec<Vec<u32>>,
    ) -> Result<Self> {
        let mut next = vec![0usize; b_count];
        let mut edge_slot = Vec::with_capacity(edges.len());
        for &(_, b) in &edges {
            if b >= b_count {
                return Err(Error::IndexOutOfRange { index: b, limit: b_count });
            }
            edge_slot.push(next[b]);
            next[b] += 1;
        }
        Self::with_slots(a_count, b_count, sigma_a, sigma_b, edges, projections, edge_slot)
    }

    pub fn with_slots(
        a_count: usize,
        b_count: usize,
        sigma_a: usize,
        sigma_b: usize,
        edges: Vec<(usize, usize)>,
        projections: Vec<Vec<u32>>,
        edge_slot: Vec<usize>,
    ) -> Result<Self> {
        if edges.is_empty() {
            return Err(invalid("a projection game needs at least one edge"));
        }
        if sigma_a == 0 || sigma_b == 0 {
            return Err(invalid("alphabets must be non-empty"));
        }
        if projections.len() != edges.len() || edge_slot.len() != edges.len() {
            return Err(invalid("one projection and one slot per edge required"));
        }
        for (e, &(a, b)) in edges.iter().enumerate() {
            if a >= a_count {
                return Err(Error::IndexOutOfRange { index: a, limit: a_count });
            }
            if b >= b_count {
                return Err(Error::IndexOutOfRange { index: b, limit: b_count });
            }
            let p = &projections[e];
            if p.len() != sigma_a || p.iter().any(|&x| x as usize >= sigma_b) {
                return Err(invalid(format!("projection of edge {e} is not a map [{sigma_a}] → [{sigma_b}]")));
            }
        }
        let game = ProjectionGame {
            a_count,
            b_count,
            sigma_a,
            sigma_b,
            edges,
            projections,
            edge_slot,
        };
        for (b, inc) in game.b_incidence().iter().enumerate() {
            let mut slots: Vec<usize> = inc.iter().map(|&e| game.edge_slot[e]).collect();
            slots.sort_unstable();
            if slots.windows(2).any(|w| w[0] == w[1]) || slots.last().is_some_and(|&s| s >= inc.len()) {
                return Err(invalid(format!("edge slots at b = {b} are not a permutation of its edges")));
            }
        }
        Ok(game)
    }

    /// Edge indices incident to each `b`, in edge order.
    pub fn b_incidence(&self) -> Vec<Vec<usize>> {
        let mut inc = vec![Vec::new(); self.b_count];
        for (e, &(_, b)) in self.edges.iter().enumerate() {
            inc[b].push(e);
        }
        inc
    }

    pub fn a_incidence(&self) -> Vec<Vec<usize>> {
        let mut inc = vec![Vec::new(); self.a_count];
        for (e, &(a, _)) in self.edges.iter().enumerate() {
            inc[a].push(e);
        }
        inc
    }

    /// `(D_A, D_B)` when every vertex on each side has the same degree.
    pub fn biregularity(&self) -> Option<(usize, usize)> {
        let da: Vec<usize> = self.a_incidence().iter().map(Vec::len).collect();
        let db: Vec<usize> = self.b_incidence().iter().map(Vec::len).collect();
        let uniform = |v: &[usize]| v.first().copied().filter(|&x| v.iter().all(|&y| y == x));
        Some((uniform(&da)?, uniform(&db)?))
    }

    #[inline]
    pub fn project(&self, edge: usize, label: usize) -> usize {
        self.projections[edge][label] as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Labeling {
    pub labels_a: Vec<u32>,
    pub labels_b: Vec<u32>,
}

/// `ell` labels per `A` vertex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LLabeling {
    pub ell: usize,
    pub labels_a: Vec<Vec<u32>>,
}

impl LLabeling {
    pub fn new(ell: usize, labels_a: Vec<Vec<u32>>) -> Result<Self> {
        for (a, l) in labels_a.iter().enumerate() {
            let mut s = l.clone();
            s.sort_unstable();
            s.dedup();
            if s.len() != ell || l.len() != ell {
                return Err(invalid(format!("vertex {a} has {} distinct labels, expected {ell}", s.len())));
            }
        }
        Ok(LLabeling { ell, labels_a })
    }
}

pub fn satisfied_fraction(pg: &ProjectionGame, labeling: &Labeling) -> Result<Fraction> {
    if labeling.labels_a.len() != pg.a_count || labeling.labels_b.len() != pg.b_count {
        return Err(invalid("labeling is not total"));
    }
    if labeling.labels_a.iter().any(|&l| l as usize >= pg.sigma_a)
        || labeling.labels_b.iter().any(|&l| l as usize >= pg.sigma_b)
    {
        return Err(invalid("label outside its alphabet"));
    }
    let sat = pg
        .edges
        .iter()
        .enumerate()
        .filter(|&(e, &(a, b))| pg.project(e, labeling.labels_a[a] as usize) == labeling.labels_b[b] as usize)
        .count();
    Ok(Fraction::new(sat as u64, pg.edges.len() as u64))
}

fn labeling_space(pg: &ProjectionGame, options: usize, per_labeling: u128) -> Result<u64> {
    let count = sat_pow(options as u128, pg.a_count as u64);
    check_budget("labeling enumeration", count.saturating_mul(per_labeling.max(1)), LABELING_BUDGET)?;
    Ok(count as u64)
}

fn better(a: (usize, u64), b: (usize, u64)) -> (usize, u64) {
    if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
        b
    } else {
        a
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BestValue {
    pub value: Fraction,
    pub witness: Labeling,
}

/// Exact value. `A` labelings are enumerated lexicographically (vertex 0
/// most significant); each `b` then takes its most popular projected label,
/// smallest on ties, which is optimal because an edge touches a single `b`.
pub fn best_value(pg: &ProjectionGame) -> Result<BestValue> {
    let count = labeling_space(pg, pg.sigma_a, pg.edges.len() as u128)?;
    let inc = pg.b_incidence();
    let b_labels = |la: &[usize]| -> (usize, Vec<u32>) {
        let mut total = 0;
        let mut labels = Vec::with_capacity(pg.b_count);
        let mut tally = vec![0usize; pg.sigma_b];
        for edges in &inc {
            tally.iter_mut().for_each(|t| *t = 0);
            for &e in edges {
                tally[pg.project(e, la[pg.edges[e].0])] += 1;
            }
            let (best, hits) = tally
                .iter()
                .enumerate()
                .fold((0, 0), |acc, (l, &c)| if c > acc.1 { (l, c) } else { acc });
            total += hits;
            labels.push(best as u32);
        }
        (total, labels)
    };
    let (best, t) = par::map_reduce(
        0..count,
        || (0, u64::MAX),
        |t| (b_labels(&digits(t, pg.sigma_a, pg.a_count)).0, t),
        better,
    );
    let la = digits(t, pg.sigma_a, pg.a_count);
    let labels_b = b_labels(&la).1;
    Ok(BestValue {
        value: Fraction::new(best as u64, pg.edges.len() as u64),
        witness: Labeling {
            labels_a: la.into_iter().map(|l| l as u32).collect(),
            labels_b,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SoundnessValue {
    pub value: Fraction,
    /// Maximizing `A` labeling (list per vertex), lexicographically first.
    pub witness: Vec<Vec<u32>>,
}

/// Whether the neighbors of each `b` fail to totally disagree under `labels`:
/// some two edges with distinct `A` endpoints project their labels to the
/// same symbol. Vertices of degree below two totally disagree vacuously.
pub fn agreeing_vertices(pg: &ProjectionGame, labels_a: &[u32]) -> Vec<bool> {
    pg.b_incidence()
        .iter()
        .map(|edges| {
            edges.iter().enumerate().any(|(i, &e1)| {
                edges[i + 1..].iter().any(|&e2| {
                    let (a1, a2) = (pg.edges[e1].0, pg.edges[e2].0);
                    a1 != a2 && pg.project(e1, labels_a[a1] as usize) == pg.project(e2, labels_a[a2] as usize)
                })
            })
        })
        .collect()
}

/// As [`agreeing_vertices`] with label lists: some two edges with distinct
/// `A` endpoints have intersecting projected images.
pub fn list_agreeing_vertices(pg: &ProjectionGame, lists: &[Vec<u32>]) -> Vec<bool> {
    let image = |e: usize, a: usize| -> Vec<usize> {
        let mut v: Vec<usize> = lists[a].iter().map(|&l| pg.project(e, l as usize)).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    pg.b_incidence()
        .iter()
        .map(|edges| {
            let images: Vec<Vec<usize>> = edges.iter().map(|&e| image(e, pg.edges[e].0)).collect();
            (0..edges.len()).any(|i| {
                (i + 1..edges.len()).any(|j| {
                    pg.edges[edges[i]].0 != pg.edges[edges[j]].0
                        && images[i].iter().any(|x| images[j].binary_search(x).is_ok())
                })
            })
        })
        .collect()
}

/// Maximum over `A` labelings of the fraction of `b` on which `A`'s
/// vertices do not totally disagree.
pub fn agreement_soundness(pg: &ProjectionGame) -> Result<SoundnessValue> {
    let e = pg.edges.len() as u128;
    let count = labeling_space(pg, pg.sigma_a, e * e)?;
    let score = |t: u64| {
        let la: Vec<u32> = digits(t, pg.sigma_a, pg.a_count).into_iter().map(|x| x as u32).collect();
        agreeing_vertices(pg, &la).into_iter().filter(|&x| x).count()
    };
    let (best, t) = par::map_reduce(0..count, || (0, u64::MAX), |t| (score(t), t), better);
    Ok(SoundnessValue {
        value: Fraction::new(best as u64, pg.b_count as u64),
        witness: digits(t, pg.sigma_a, pg.a_count)
            .into_iter()
            .map(|x| vec![x as u32])
            .collect(),
    })
}

/// Maximum over `ell`-labelings of the fraction of `b` on which `A`'s
/// vertices do not totally list-disagree. Lists are `ell`-subsets of
/// `[sigma_a]` in lexicographic order.
pub fn list_agreement_soundness(pg: &ProjectionGame, ell: usize) -> Result<SoundnessValue> {
    if ell == 0 || ell > pg.sigma_a {
        return Err(invalid(format!("list size {ell} must be in 1..={}", pg.sigma_a)));
    }
    let subsets: Vec<Vec<u32>> = combinations(pg.sigma_a, ell)
        .into_iter()
        .map(|s| s.into_iter().map(|x| x as u32).collect())
        .collect();
    let e = pg.edges.len() as u128;
    let options = binomial(pg.sigma_a as u64, ell as u64) as usize;
    let count = labeling_space(pg, options, e * e * (ell * ell) as u128)?;
    let lists_for = |t: u64| -> Vec<Vec<u32>> {
        digits(t, options, pg.a_count)
            .into_iter()
            .map(|i| subsets[i].clone())
            .collect()
    };
    let score = |t: u64| list_agreeing_vertices(pg, &lists_for(t)).into_iter().filter(|&x| x).count();
    let (best, t) = par::map_reduce(0..count, || (0, u64::MAX), |t| (score(t), t), better);
    Ok(SoundnessValue {
        value: Fraction::new(best as u64, pg.b_count as u64),
        witness: lists_for(t),
    })
}

/// Bipartite graph given by the neighbor lists of its `V` side.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BipartiteGraph {
    pub u_count: usize,
    pub v_neighbors: Vec<Vec<usize>>,
}

impl BipartiteGraph {
    /// `U = A`, `V = B`.
    pub fn from_game(pg: &ProjectionGame) -> Self {
        BipartiteGraph {
            u_count: pg.a_count,
            v_neighbors: pg
                .b_incidence()
                .iter()
                .map(|inc| inc.iter().map(|&e| pg.edges[e].0).collect())
                .collect(),
        }
    }

    /// Common degree of the `V` side.
    pub fn v_degree(&self) -> Result<usize> {
        let d = self.v_neighbors.first().map_or(0, Vec::len);
        if self.v_neighbors.iter().any(|n| n.len() != d) {
            return Err(invalid("V side is not regular"));
        }
        Ok(d)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionPropertyReport {
    pub holds: bool,
    /// `V` vertices with two distinct neighbors in one part.
    pub offending: usize,
    pub v_count: usize,
    /// `eps · D²`
    pub bound: f64,
}

/// For a partition of `U` (`part_of[u]` is the part of `u`) with every part
/// of size at most `eps·|U|`, tests whether the fraction of `v` having two
/// distinct neighbors in a common part is at most `eps·D²`.
pub fn check_partition_property(
    graph: &BipartiteGraph,
    part_of: &[usize],
    eps: f64,
) -> Result<PartitionPropertyReport> {
    if part_of.len() != graph.u_count {
        return Err(invalid("partition must assign every U vertex"));
    }
    let d = graph.v_degree()?;
    let parts = part_of.iter().max().map_or(0, |&p| p + 1);
    let mut sizes = vec![0usize; parts];
    for &p in part_of {
        sizes[p] += 1;
    }
    let cap = eps * graph.u_count as f64;
    if let Some((p, &s)) = sizes.iter().enumerate().find(|&(_, &s)| s as f64 > cap + 1e-9) {
        return Err(invalid(format!("part {p} has {s} vertices, above eps·|U| = {cap}")));
    }
    let offending = graph
        .v_neighbors
        .iter()
        .filter(|nb| {
            let mut us: Vec<usize> = nb.to_vec();
            us.sort_unstable();
            us.dedup();
            let mut ps: Vec<usize> = us.iter().map(|&u| part_of[u]).collect();
            ps.sort_unstable();
            ps.windows(2).any(|w| w[0] == w[1])
        })
        .count();
    let v_count = graph.v_neighbors.len();
    let bound = eps * (d * d) as f64;
    Ok(PartitionPropertyReport {
        holds: offending as f64 <= bound * v_count as f64 + 1e-9,
        offending,
        v_count,
        bound,
    })
}

/// Configuration-model bi-regular multigraph with uniform random projections.
/// `A` stubs are shuffled; `b` takes the next `d_b` stubs, and edge slots
/// follow creation order.
pub fn random_biregular_game(
    a_count: usize,
    b_count: usize,
    d_a: usize,
    d_b: usize,
    sigma_a: usize,
    sigma_b: usize,
    seed: u64,
) -> Result<ProjectionGame> {
    if a_count * d_a != b_count * d_b {
        return Err(invalid(format!(
            "degree equation violated: {a_count}·{d_a} ≠ {b_count}·{d_b}"
        )));
    }
    if a_count * d_a == 0 {
        return Err(invalid("game must have edges"));
    }
    let mut rng = rng::seeded(seed);
    let mut stubs: Vec<usize> = (0..a_count).flat_map(|a| std::iter::repeat_n(a, d_a)).collect();
    stubs.shuffle(&mut rng);
    let edges: Vec<(usize, usize)> = (0..b_count)
        .flat_map(|b| (0..d_b).map(move |j| (b, j)))
        .map(|(b, j)| (stubs[b * d_b + j], b))
        .collect();
    let projections = (0..edges.len())
        .map(|_| (0..sigma_a).map(|_| rng.gen_range(0..sigma_b) as u32).collect())
        .collect();
    ProjectionGame::new(a_count, b_count, sigma_a, sigma_b, edges, projections)
}

/// Rewrites one entry per edge so a random labeling satisfies every edge.
pub fn plant_satisfying_labeling(pg: &ProjectionGame, seed: u64) -> (ProjectionGame, Labeling) {
    let mut rng = rng::seeded(seed);
    let labels_a: Vec<u32> = (0..pg.a_count).map(|_| rng.gen_range(0..pg.sigma_a) as u32).collect();
    let labels_b: Vec<u32> = (0..pg.b_count).map(|_| rng.gen_range(0..pg.sigma_b) as u32).collect();
    let mut planted = pg.clone();
    for (e, &(a, b)) in pg.edges.iter().enumerate() {
        planted.projections[e][labels_a[a] as usize] = labels_b[b];
    }
    (planted, Labeling { labels_a, labels_b })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Two `A` vertices sharing one `b`.
    fn fig3(p1: Vec<u32>, p2: Vec<u32>) -> ProjectionGame {
        ProjectionGame::new(2, 1, p1.len(), 3, vec![(0, 0), (1, 0)], vec![p1, p2]).unwrap()
    }

    #[test]
    fn fig3_labeling() {
        // sigma_1 = 0, sigma_2 = 1 both project to nu = 2
        let g = fig3(vec![2, 0], vec![1, 2]);
        let good = Labeling { labels_a: vec![0, 1], labels_b: vec![2] };
        assert_eq!(satisfied_fraction(&g, &good).unwrap(), Fraction::new(1, 1));
        let bad = Labeling { labels_a: vec![0, 1], labels_b: vec![1] };
        assert_eq!(satisfied_fraction(&g, &bad).unwrap(), Fraction::new(0, 1));
        assert!(satisfied_fraction(&g, &Labeling { labels_a: vec![0], labels_b: vec![0] }).is_err());
    }

    #[test]
    fn disjoint_images_give_half() {
        let g = fig3(vec![0, 0], vec![1, 1]);
        assert_eq!(best_value(&g).unwrap().value, Fraction::new(1, 2));
    }

    #[test]
    fn constant_projections_give_one() {
        let g = fig3(vec![1, 1], vec![1, 1]);
        let v = best_value(&g).unwrap();
        assert_eq!(v.value, Fraction::new(1, 1));
        assert_eq!(v.witness.labels_a, vec![0, 0]);
        assert_eq!(v.witness.labels_b, vec![1]);
        assert_eq!(satisfied_fraction(&g, &v.witness).unwrap(), v.value);
    }

    #[test]
    fn degree_one_b_totally_disagrees() {
        let g = ProjectionGame::new(2, 2, 2, 2, vec![(0, 0), (1, 1)], vec![vec![0, 1], vec![0, 1]]).unwrap();
        assert_eq!(agreement_soundness(&g).unwrap().value, Fraction::new(0, 1));
    }

    #[test]
    fn identical_projections_always_agree() {
        let g = fig3(vec![0, 1], vec![0, 1]);
        assert_eq!(agreement_soundness(&g).unwrap().value, Fraction::new(1, 1));
    }

    #[test]
    fn full_lists_agree_when_images_meet() {
        let g = fig3(vec![0, 1], vec![1, 2]);
        assert_eq!(list_agreement_soundness(&g, 2).unwrap().value, Fraction::new(1, 1));
        assert!(list_agreement_soundness(&g, 0).is_err());
        assert!(list_agreement_soundness(&g, 3).is_err());
    }

    #[test]
    fn parallel_edges_from_one_vertex_do_not_agree() {
        let g = ProjectionGame::new(1, 1, 2, 2, vec![(0, 0), (0, 0)], vec![vec![0, 1], vec![1, 0]]).unwrap();
        assert_eq!(agreement_soundness(&g).unwrap().value, Fraction::new(0, 1));
        assert_eq!(list_agreement_soundness(&g, 2).unwrap().value, Fraction::new(0, 1));
    }

    #[test]
    fn fig3_topology_from_generator() {
        let g = random_biregular_game(2, 1, 1, 2, 2, 3, 9).unwrap();
        assert_eq!(g.edges.len(), 2);
        assert_eq!(g.biregularity(), Some((1, 2)));
        let mut ends: Vec<usize> = g.edges.iter().map(|e| e.0).collect();
        ends.sort();
        assert_eq!(ends, vec![0, 1]);
        assert_eq!(g.edge_slot, vec![0, 1]);
    }

    #[test]
    fn generator_errors_and_determinism() {
        assert!(random_biregular_game(3, 2, 2, 2, 2, 2, 0).is_err());
        let a = random_biregular_game(4, 2, 2, 4, 3, 3, 5).unwrap();
        assert_eq!(a, random_biregular_game(4, 2, 2, 4, 3, 3, 5).unwrap());
        assert_ne!(a, random_biregular_game(4, 2, 2, 4, 3, 3, 6).unwrap());
    }

    #[test]
    fn planted_labeling_satisfies() {
        let g = random_biregular_game(3, 3, 2, 2, 3, 3, 1).unwrap();
        let (p, l) = plant_satisfying_labeling(&g, 4);
        assert_eq!(satisfied_fraction(&p, &l).unwrap(), Fraction::new(1, 1));
        assert_eq!(best_value(&p).unwrap().value, Fraction::new(1, 1));
    }

    #[test]
    fn slot_validation() {
        let r = ProjectionGame::with_slots(2, 1, 1, 1, vec![(0, 0), (1, 0)], vec![vec![0], vec![0]], vec![0, 0]);
        assert!(r.is_err());
    }

    #[test]
    fn singleton_partition_holds() {
        let g = random_biregular_game(4, 4, 2, 2, 2, 2, 3).unwrap();
        let graph = BipartiteGraph::from_game(&g);
        let r = check_partition_property(&graph, &[0, 1, 2, 3], 0.25).unwrap();
        assert!(r.holds);
        assert_eq!(r.offending, 0);
    }

    #[test]
    fn whole_part_counts_degree_two() {
        let graph = BipartiteGraph {
            u_count: 3,
            v_neighbors: vec![vec![0, 1], vec![2, 2], vec![1, 2]],
        };
        let r = check_partition_property(&graph, &[0, 0, 0], 1.0).unwrap();
        assert_eq!(r.offending, 2);
        assert!(r.holds);
        assert!(check_partition_property(&graph, &[0, 0, 0], 0.5).is_err());
    }

    #[test]
    fn llabeling_validation() {
        assert!(LLabeling::new(2, vec![vec![0, 1]]).is_ok());
        assert!(LLabeling::new(2, vec![vec![0, 0]]).is_err());
    }
}
