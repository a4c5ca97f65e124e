//! Seeded generators for random structures, models and samples.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::factor::Factor;
use crate::graph::{ChordalGraph, CliqueTree, UndirectedGraph};
use crate::inference;
use crate::model::{rooted_parents, DecomposableModel, SampleDataset, VariableTable};
use crate::VarId;

/// Chordal graph on `0..n` whose edges only join vertices at most `width`
/// apart, so its treewidth (and that of any union of such graphs) is at most
/// `width`. Each vertex joins a random clique among its predecessors.
pub fn random_banded_chordal_graph<R: Rng>(rng: &mut R, n: usize, width: usize) -> ChordalGraph {
    let mut g = UndirectedGraph::with_vertices(0..n);
    for v in 1..n {
        let mut window: Vec<VarId> = (v.saturating_sub(width)..v).collect();
        window.shuffle(rng);
        let mut clique: Vec<VarId> = Vec::new();
        for u in window {
            let p = if clique.is_empty() { 0.9 } else { 0.5 };
            if rng.gen_bool(p) && clique.iter().all(|&c| g.has_edge(c, u)) {
                clique.push(u);
            }
        }
        for u in clique {
            g.add_edge(u, v);
        }
    }
    ChordalGraph::from_graph(g).expect("simplicial insertion yields a chordal graph")
}

/// Banded chordal graph with vertex labels shuffled.
pub fn random_chordal_graph<R: Rng>(rng: &mut R, n: usize, width: usize) -> ChordalGraph {
    let banded = random_banded_chordal_graph(rng, n, width);
    let mut label: Vec<VarId> = (0..n).collect();
    label.shuffle(rng);
    let mut g = UndirectedGraph::with_vertices(0..n);
    for (u, v) in banded.graph().edges() {
        g.add_edge(label[u], label[v]);
    }
    ChordalGraph::from_graph(g).expect("relabelling preserves chordality")
}

/// Random strictly positive model on `graph`: the first clique gets a random
/// joint table and every other clique a random conditional given its
/// separator towards it.
pub fn random_model<R: Rng>(rng: &mut R, vars: &VariableTable, graph: &ChordalGraph) -> Result<DecomposableModel> {
    random_model_with(rng, vars, graph, 0.05)
}

/// As [`random_model`], with unnormalised weights drawn from `[floor, 1)`.
pub fn random_model_with<R: Rng>(
    rng: &mut R,
    vars: &VariableTable,
    graph: &ChordalGraph,
    floor: f64,
) -> Result<DecomposableModel> {
    let mut g = graph.graph().clone();
    for v in 0..vars.len() {
        g.add_vertex(v);
    }
    let full = ChordalGraph::from_graph(g)?;
    let cliques = full.maximal_cliques();
    let tree = CliqueTree::build(cliques.clone());
    let parents = rooted_parents(&tree, 0);
    let mut cpts = Vec::with_capacity(cliques.len());
    for (c, scope) in cliques.iter().enumerate() {
        let cards: Vec<usize> = scope.iter().map(|&v| vars.cardinality(v)).collect();
        let raw = Factor::from_fn(scope, &cards, |_| rng.gen_range(floor..1.0));
        let sep: &[VarId] = match parents[c] {
            Some((_, e)) => &tree.edges()[e].separator,
            None => &[],
        };
        cpts.push(raw.divide(&raw.marginalize_onto(sep))?);
    }
    DecomposableModel::new(vars.clone(), cpts)
}

/// Draws `rows` complete samples clique by clique from the root outwards.
pub fn sample<R: Rng>(rng: &mut R, model: &DecomposableModel, rows: usize) -> Result<SampleDataset> {
    let tree = model.clique_tree();
    let cal = inference::calibrate(&model.domain(), &[&model.network()])?;
    // a chordal graph triangulates without fill, so beliefs follow the model's clique order
    let beliefs = cal.beliefs();
    if cal.clique_tree().cliques() != model.cliques() {
        return Err(Error::Internal("calibration changed the clique list".into()));
    }
    let parents = rooted_parents(tree, 0);
    let mut order = vec![0];
    let mut head = 0;
    while head < order.len() {
        let c = order[head];
        head += 1;
        for &(k, _) in tree.neighbors(c) {
            if parents[k].is_some_and(|(p, _)| p == c) {
                order.push(k);
            }
        }
    }
    if order.len() != tree.cliques().len() {
        return Err(Error::Internal("clique tree is not connected".into()));
    }
    let n = model.variables().len();
    let mut out = Vec::with_capacity(rows);
    let mut assigned = vec![false; n];
    for _ in 0..rows {
        let mut row = vec![0; n];
        assigned.iter_mut().for_each(|a| *a = false);
        for &c in &order {
            let b = &beliefs[c];
            let scope = b.scope();
            let consistent = |i: usize| {
                b.assignment(i)
                    .iter()
                    .zip(scope)
                    .all(|(&x, &v)| !assigned[v] || row[v] == x)
            };
            let total: f64 = (0..b.len()).filter(|&i| consistent(i)).map(|i| b.values()[i]).sum();
            let mut u = rng.gen_range(0.0..1.0) * total;
            let mut pick = None;
            for i in (0..b.len()).filter(|&i| consistent(i)) {
                pick = Some(i);
                u -= b.values()[i];
                if u < 0.0 {
                    break;
                }
            }
            let pick = pick.ok_or_else(|| Error::Internal("no consistent clique assignment".into()))?;
            for (&x, &v) in b.assignment(pick).iter().zip(scope) {
                row[v] = x;
                assigned[v] = true;
            }
        }
        out.push(row);
    }
    SampleDataset::new(model.variables().clone(), out)
}

/// Replaces each value of variable `v` with a different uniformly chosen
/// value with probability `eps[v]`.
pub fn flip_noise<R: Rng>(rng: &mut R, data: &SampleDataset, eps: &[f64]) -> Result<SampleDataset> {
    let vars = data.variables();
    if eps.len() != vars.len() {
        return Err(Error::InvalidRequest(format!(
            "{} noise levels for {} variables",
            eps.len(),
            vars.len()
        )));
    }
    let rows = data
        .rows()
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .map(|(v, &x)| {
                    if rng.gen_bool(eps[v]) {
                        let other = rng.gen_range(0..vars.cardinality(v) - 1);
                        if other >= x {
                            other + 1
                        } else {
                            other
                        }
                    } else {
                        x
                    }
                })
                .collect()
        })
        .collect();
    SampleDataset::new(vars.clone(), rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::is_chordal;
    use crate::model::fit_parameters;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn banded_graphs_are_chordal_and_narrow() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let g = random_banded_chordal_graph(&mut rng, 30, 3);
            assert!(is_chordal(g.graph()));
            assert!(g.treewidth() <= 3);
            assert!(g.graph().edges().iter().all(|&(u, v)| v - u <= 3));
            let h = random_chordal_graph(&mut rng, 12, 3);
            assert!(g.treewidth() <= 3 && h.treewidth() <= 3);
        }
    }

    #[test]
    fn random_models_are_normalized() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let vars = VariableTable::with_cardinalities(&[2, 3, 2, 4, 2]).unwrap();
        let g = random_chordal_graph(&mut rng, 5, 2);
        let m = random_model(&mut rng, &vars, &g).unwrap();
        assert!(m.cpts().iter().all(|t| t.values().iter().all(|&v| v > 0.0 && v <= 1.0)));
    }

    #[test]
    fn fitted_marginals_converge() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let vars = VariableTable::binary(4);
        let g = random_chordal_graph(&mut rng, 4, 2);
        let truth = random_model(&mut rng, &vars, &g).unwrap();
        let data = sample(&mut rng, &truth, 1_000_000).unwrap();
        let fitted = fit_parameters(truth.graph(), &data, 0.0).unwrap();
        let a = inference::calibrate(&truth.domain(), &[&truth.network()]).unwrap();
        let b = inference::calibrate(&fitted.domain(), &[&fitted.network()]).unwrap();
        for c in truth.cliques() {
            let x = a.clique_sum_product(c).unwrap();
            let y = b.clique_sum_product(c).unwrap();
            for (p, q) in x.values().iter().zip(y.values()) {
                assert!((p - q).abs() < 0.01);
            }
        }
    }

    #[test]
    fn flip_noise_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let data = SampleDataset::new(VariableTable::binary(2), vec![vec![0, 0]; 20_000]).unwrap();
        let noisy = flip_noise(&mut rng, &data, &[0.0, 0.2]).unwrap();
        let ones: usize = noisy.rows().iter().map(|r| r[1]).sum();
        assert!(noisy.rows().iter().all(|r| r[0] == 0));
        assert!((ones as f64 / 20_000.0 - 0.2).abs() < 0.01);
    }
}
