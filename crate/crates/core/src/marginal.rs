//! Partitions of a model's cliques that isolate the summed-out variables, and
//! the marginal and conditional networks built from them.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::factor::Factor;
use crate::graph::{kappa, ChordalGraph, UndirectedGraph};
use crate::model::{mn_quotient, DecomposableModel, MarkovNetwork, NetFactor};
use crate::VarId;

/// One part of a partition: a set of maximal cliques and their vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Group {
    /// Indices into the model's clique list, ascending.
    pub cliques: Vec<usize>,
    /// Union of the member cliques, sorted.
    pub vertices: Vec<VarId>,
}

/// Maximal cliques grouped so that every summed-out variable lives in
/// exactly one group.
#[derive(Clone, Debug)]
pub struct NPartition<'m> {
    model: &'m DecomposableModel,
    kept: Vec<VarId>,
    groups: Vec<Group>,
}

/// Groups the cliques of `model`: two cliques end up in the same group when
/// they are linked by a chain of cliques sharing variables outside `kept`.
pub fn n_partition<'m>(model: &'m DecomposableModel, kept: &[VarId]) -> Result<NPartition<'m>> {
    let n = model.variables().len();
    let kept: BTreeSet<VarId> = kept.iter().copied().collect();
    if let Some(&v) = kept.iter().find(|&&v| v >= n) {
        return Err(Error::InvalidRequest(format!("unknown variable {v}")));
    }
    let cliques = model.cliques();
    let mut parent: Vec<usize> = (0..cliques.len()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut first_with: Vec<Option<usize>> = vec![None; n];
    for (i, c) in cliques.iter().enumerate() {
        for &v in c.iter().filter(|v| !kept.contains(v)) {
            match first_with[v] {
                None => first_with[v] = Some(i),
                Some(j) => {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Group> = Vec::new();
    let mut slot = vec![usize::MAX; cliques.len()];
    for i in 0..cliques.len() {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Group {
                cliques: Vec::new(),
                vertices: Vec::new(),
            });
        }
        groups[slot[r]].cliques.push(i);
    }
    for g in &mut groups {
        let vs: BTreeSet<VarId> = g.cliques.iter().flat_map(|&c| cliques[c].iter().copied()).collect();
        g.vertices = vs.into_iter().collect();
    }
    Ok(NPartition {
        model,
        kept: kept.into_iter().collect(),
        groups,
    })
}

impl<'m> NPartition<'m> {
    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    pub fn kept(&self) -> &[VarId] {
        &self.kept
    }

    pub fn model(&self) -> &'m DecomposableModel {
        self.model
    }

    /// Vertices of `group` that are kept.
    pub fn kept_part(&self, group: usize) -> Vec<VarId> {
        self.groups[group]
            .vertices
            .iter()
            .copied()
            .filter(|v| self.kept.binary_search(v).is_ok())
            .collect()
    }

    /// Vertices of `group` that are summed out.
    pub fn eliminated_part(&self, group: usize) -> Vec<VarId> {
        self.groups[group]
            .vertices
            .iter()
            .copied()
            .filter(|v| self.kept.binary_search(v).is_err())
            .collect()
    }

    /// Product of the group's tables with its eliminated variables summed out,
    /// by variable elimination in min-fill order.
    pub fn marginalized_factor(&self, group: usize) -> Result<Factor> {
        let cpts = self.model.cpts();
        let mut pool: Vec<Factor> = self.groups[group].cliques.iter().map(|&c| cpts[c].clone()).collect();
        let mut pending: BTreeSet<VarId> = self.eliminated_part(group).into_iter().collect();
        while !pending.is_empty() {
            let v = next_to_eliminate(&pool, &pending);
            pending.remove(&v);
            let (touching, rest): (Vec<Factor>, Vec<Factor>) = pool.into_iter().partition(|f| f.scope().contains(&v));
            pool = rest;
            let mut prod = Factor::scalar(1.0);
            for f in &touching {
                prod = prod.multiply(f)?;
            }
            pool.push(prod.marginalize(&[v]));
        }
        let mut out = Factor::scalar(1.0);
        for f in &pool {
            out = out.multiply(f)?;
        }
        Ok(out)
    }

    /// Each group's kept vertices joined into a clique; chordal by construction.
    pub fn gamma(&self) -> Result<ChordalGraph> {
        let sets: Vec<Vec<VarId>> = (0..self.groups.len()).map(|g| self.kept_part(g)).collect();
        let mut g = kappa(&sets);
        for &v in &self.kept {
            g.add_vertex(v);
        }
        ChordalGraph::from_graph(g).map_err(|_| Error::Internal(format!("kept-variable graph over {:?} is not chordal", self.kept)))
    }

    /// Kept-variable graph taken literally as the induced subgraph of the
    /// groups' clique graph.
    pub fn gamma_by_induction(&self) -> UndirectedGraph {
        let sets: Vec<Vec<VarId>> = self.groups.iter().map(|g| g.vertices.clone()).collect();
        let mut g = kappa(&sets).induced_subgraph(&self.kept.iter().copied().collect());
        for &v in &self.kept {
            g.add_vertex(v);
        }
        g
    }
}

/// Variable whose elimination adds the fewest edges among the current
/// factors' scopes, ties to the smallest id.
fn next_to_eliminate(pool: &[Factor], pending: &BTreeSet<VarId>) -> VarId {
    let mut best = (usize::MAX, VarId::MAX);
    for &v in pending {
        let mut nbrs = BTreeSet::new();
        for f in pool.iter().filter(|f| f.scope().contains(&v)) {
            nbrs.extend(f.scope().iter().copied().filter(|&u| u != v));
        }
        let nbrs: Vec<VarId> = nbrs.into_iter().collect();
        let mut fill = 0;
        for (i, &a) in nbrs.iter().enumerate() {
            for &b in &nbrs[i + 1..] {
                if !pool.iter().any(|f| f.scope().contains(&a) && f.scope().contains(&b)) {
                    fill += 1;
                }
            }
        }
        if (fill, v) < best {
            best = (fill, v);
        }
    }
    best.1
}

/// Network whose factor product is the marginal of `model` on `kept`.
/// Scalar factors of fully summed-out groups are folded into one scalar.
pub fn marginal_network(model: &DecomposableModel, kept: &[VarId]) -> Result<MarkovNetwork> {
    let part = n_partition(model, kept)?;
    let graph = part.gamma()?;
    let mut factors = Vec::with_capacity(part.groups().len());
    let mut scalar = None;
    for g in 0..part.groups().len() {
        let f = part.marginalized_factor(g)?;
        if f.is_scalar() {
            scalar = Some(scalar.unwrap_or(1.0) * f.values()[0]);
        } else {
            factors.push(NetFactor::plain(f));
        }
    }
    if let Some(s) = scalar {
        factors.push(NetFactor::plain(Factor::scalar(s)));
    }
    MarkovNetwork::new(graph, factors)
}

/// Network for the conditional of `target` given `given`.
pub fn conditional_network(model: &DecomposableModel, target: &[VarId], given: &[VarId]) -> Result<MarkovNetwork> {
    check_split(model.variables().len(), target, given)?;
    let mut w: Vec<VarId> = target.iter().chain(given).copied().collect();
    w.sort_unstable();
    let num = marginal_network(model, &w)?;
    let den = marginal_network(model, given)?;
    mn_quotient(&num, &den)
}

pub(crate) fn check_split(n: usize, target: &[VarId], given: &[VarId]) -> Result<()> {
    if target.is_empty() {
        return Err(Error::InvalidRequest("conditional target set is empty".into()));
    }
    if let Some(&v) = target.iter().chain(given).find(|&&v| v >= n) {
        return Err(Error::InvalidRequest(format!("unknown variable {v}")));
    }
    if let Some(v) = target.iter().find(|v| given.contains(v)) {
        return Err(Error::InvalidRequest(format!("variable {v} is both target and given")));
    }
    Ok(())
}
