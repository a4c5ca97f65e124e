//! Clique-tree calibration over arbitrary collections of factors.

use crate::error::{Error, Result};
use crate::factor::Factor;
use crate::graph::{computation_graph, ChordalGraph, CliqueTree, Triangulation, UndirectedGraph};
use crate::model::{rooted_parents, Domain, MarkovNetwork, NetFactor};
use crate::VarId;

/// Clique beliefs after a collect/distribute pass.
#[derive(Clone, Debug)]
pub struct CalibratedTree {
    tree: CliqueTree,
    beliefs: Vec<Factor>,
    free_multiplier: f64,
    /// Product of scalar factors when the tree has no cliques at all.
    constant: f64,
    treewidth: usize,
    max_table_cells: usize,
}

impl CalibratedTree {
    pub fn clique_tree(&self) -> &CliqueTree {
        &self.tree
    }

    pub fn beliefs(&self) -> &[Factor] {
        &self.beliefs
    }

    /// Product of the cardinalities of universe variables outside every clique.
    pub fn free_multiplier(&self) -> f64 {
        self.free_multiplier
    }

    /// Sum of the factor product over the whole universe.
    pub fn partition_function(&self) -> f64 {
        match self.beliefs.first() {
            Some(b) => b.sum() * self.free_multiplier,
            None => self.constant * self.free_multiplier,
        }
    }

    pub fn treewidth(&self) -> usize {
        self.treewidth
    }

    /// Largest table built during calibration.
    pub fn max_table_cells(&self) -> usize {
        self.max_table_cells
    }

    /// Belief of the first clique containing `scope`, summed down to `scope`.
    /// Sums over free variables are not included.
    pub fn clique_sum_product(&self, scope: &[VarId]) -> Result<Factor> {
        if self.beliefs.is_empty() {
            if scope.is_empty() {
                return Ok(Factor::scalar(self.constant));
            }
            return Err(Error::ScopeNotCovered(scope.to_vec()));
        }
        let c = self
            .tree
            .covering_clique(scope)
            .ok_or_else(|| Error::ScopeNotCovered(scope.to_vec()))?;
        Ok(self.beliefs[c].marginalize_onto(scope))
    }
}

/// Sum-product of the factors of `nets` over `universe`, on the min-fill
/// completion of their joint graph.
pub fn calibrate(universe: &Domain, nets: &[&MarkovNetwork]) -> Result<CalibratedTree> {
    calibrate_with(universe, nets, Triangulation::MinFill)
}

pub fn calibrate_with(universe: &Domain, nets: &[&MarkovNetwork], heuristic: Triangulation) -> Result<CalibratedTree> {
    let graphs: Vec<&UndirectedGraph> = nets.iter().map(|n| n.graph().graph()).collect();
    let graph = computation_graph(&graphs, heuristic);
    let factors: Vec<&NetFactor> = nets.iter().flat_map(|n| n.factors()).collect();
    calibrate_factors(universe, &graph, &factors, &[])
}

/// Calibrates `factors` together with plain `extra` tables (which may be
/// negative, such as log tables) on `graph`. Fails when a reciprocal factor
/// vanishes where the product of the plain factors does not.
pub(crate) fn calibrate_factors(
    universe: &Domain,
    graph: &ChordalGraph,
    factors: &[&NetFactor],
    extra: &[Factor],
) -> Result<CalibratedTree> {
    let plain: Vec<Factor> = factors
        .iter()
        .filter(|nf| !nf.reciprocal)
        .map(|nf| nf.factor.clone())
        .collect();
    let cliques = graph.maximal_cliques();
    let tree = CliqueTree::build(cliques);
    for nf in factors.iter().filter(|nf| nf.reciprocal) {
        if nf.factor.values().contains(&0.0) {
            let mask = nf.factor.map(|v| if v == 0.0 { 1.0 } else { 0.0 });
            let mut check = plain.clone();
            check.push(mask);
            let mass = run(universe, &tree, check)?.partition_function();
            if mass > 0.0 {
                return Err(Error::UndefinedQuotient {
                    what: format!(
                        "denominator factor over {:?} is zero where the numerator has mass",
                        nf.factor.scope()
                    ),
                });
            }
        }
    }
    let mut tables: Vec<Factor> = factors.iter().map(|nf| nf.materialize()).collect();
    tables.extend(extra.iter().cloned());
    run(universe, &tree, tables)
}

fn run(universe: &Domain, tree: &CliqueTree, factors: Vec<Factor>) -> Result<CalibratedTree> {
    let cliques = tree.cliques();
    let m = cliques.len();
    let mut in_clique = std::collections::BTreeSet::new();
    for c in cliques {
        in_clique.extend(c.iter().copied());
    }
    let mut free_multiplier = 1.0;
    for (&v, &card) in universe.vars().iter().zip(universe.cards()) {
        if !in_clique.contains(&v) {
            free_multiplier *= card as f64;
        }
    }
    let treewidth = cliques.iter().map(|c| c.len()).max().unwrap_or(1).saturating_sub(1);

    if m == 0 {
        let mut constant = 1.0;
        for f in &factors {
            if !f.is_scalar() {
                return Err(Error::ScopeNotCovered(f.scope().to_vec()));
            }
            constant *= f.values()[0];
        }
        if !constant.is_finite() {
            return Err(Error::NonFinite {
                what: "scalar product".into(),
            });
        }
        return Ok(CalibratedTree {
            tree: tree.clone(),
            beliefs: Vec::new(),
            free_multiplier,
            constant,
            treewidth,
            max_table_cells: 1,
        });
    }

    let card_of = |v: VarId, fs: &[Factor]| -> Result<usize> {
        universe
            .cardinality(v)
            .or_else(|| fs.iter().find_map(|f| f.cardinality_of(v)))
            .ok_or_else(|| Error::Internal(format!("no cardinality for variable {v}")))
    };
    let mut potentials = Vec::with_capacity(m);
    let mut max_cells = 1;
    for c in cliques {
        let cards = c.iter().map(|&v| card_of(v, &factors)).collect::<Result<Vec<_>>>()?;
        let ones = Factor::ones(c, &cards);
        max_cells = max_cells.max(ones.len());
        potentials.push(ones);
    }
    for f in factors {
        let c = if f.is_scalar() {
            0
        } else {
            tree.covering_clique(f.scope())
                .ok_or_else(|| Error::ScopeNotCovered(f.scope().to_vec()))?
        };
        potentials[c] = potentials[c].multiply(&f)?;
    }

    let root = (0..m).fold(0, |best, c| if cliques[c].len() > cliques[best].len() { c } else { best });
    let parents = rooted_parents(tree, root);
    let mut order = Vec::with_capacity(m);
    order.push(root);
    let mut head = 0;
    while head < order.len() {
        let c = order[head];
        head += 1;
        for &(n, _) in tree.neighbors(c) {
            if parents[n].is_some_and(|(p, _)| p == c) {
                order.push(n);
            }
        }
    }
    if order.len() != m {
        return Err(Error::Internal("clique tree is not connected".into()));
    }

    // message from each clique up to its parent, and down from the parent
    let mut up: Vec<Option<Factor>> = vec![None; m];
    let mut down: Vec<Option<Factor>> = vec![None; m];
    let mut kids: Vec<Vec<usize>> = vec![Vec::new(); m];
    for &c in &order[1..] {
        kids[parents[c].unwrap().0].push(c);
    }

    for &c in order.iter().rev() {
        if let Some((_, e)) = parents[c] {
            let mut t = potentials[c].clone();
            for &k in &kids[c] {
                t = t.multiply(up[k].as_ref().unwrap())?;
            }
            up[c] = Some(t.marginalize_onto(&tree.edges()[e].separator));
        }
    }

    let mut beliefs: Vec<Option<Factor>> = vec![None; m];
    for &c in &order {
        let kids = &kids[c];
        // prefix[i] = potential * down message * up messages of kids[..i]
        let mut prefix = potentials[c].clone();
        if let Some(d) = &down[c] {
            prefix = prefix.multiply(d)?;
        }
        let mut suffix: Vec<Option<Factor>> = vec![None; kids.len() + 1];
        for i in (0..kids.len()).rev() {
            let msg = up[kids[i]].as_ref().unwrap();
            suffix[i] = Some(match &suffix[i + 1] {
                Some(s) => s.multiply(msg)?,
                None => msg.clone(),
            });
        }
        for (i, &k) in kids.iter().enumerate() {
            let out = match &suffix[i + 1] {
                Some(s) => prefix.multiply(s)?,
                None => prefix.clone(),
            };
            let sep = &tree.edges()[parents[k].unwrap().1].separator;
            down[k] = Some(out.marginalize_onto(sep));
            prefix = prefix.multiply(up[k].as_ref().unwrap())?;
        }
        if !prefix.all_finite() {
            return Err(Error::NonFinite {
                what: format!("belief over clique {:?}", cliques[c]),
            });
        }
        beliefs[c] = Some(prefix);
    }

    Ok(CalibratedTree {
        tree: tree.clone(),
        beliefs: beliefs.into_iter().map(|b| b.unwrap()).collect(),
        free_multiplier,
        constant: 1.0,
        treewidth,
        max_table_cells: max_cells,
    })
}

/// `Σ_x (∏ weights)(x) · ∏ log_factors(x)` in one calibration whose graph
/// also makes every log factor's scope a clique.
pub fn weighted_log_moment(universe: &Domain, weight_nets: &[&MarkovNetwork], log_factors: &[Factor]) -> Result<f64> {
    Ok(weighted_log_moment_tree(universe, weight_nets, log_factors, Triangulation::MinFill)?.partition_function())
}

pub(crate) fn weighted_log_moment_tree(
    universe: &Domain,
    weight_nets: &[&MarkovNetwork],
    log_factors: &[Factor],
    heuristic: Triangulation,
) -> Result<CalibratedTree> {
    let completes: Vec<UndirectedGraph> = log_factors.iter().map(|f| UndirectedGraph::complete(f.scope())).collect();
    let mut graphs: Vec<&UndirectedGraph> = weight_nets.iter().map(|n| n.graph().graph()).collect();
    graphs.extend(completes.iter());
    let graph = computation_graph(&graphs, heuristic);
    let factors: Vec<&NetFactor> = weight_nets.iter().flat_map(|n| n.factors()).collect();
    calibrate_factors(universe, &graph, &factors, log_factors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{mn_quotient, DecomposableModel, VariableTable};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn f(scope: &[VarId], values: &[f64]) -> Factor {
        Factor::new(scope.to_vec(), vec![2; scope.len()], values.to_vec()).unwrap()
    }

    fn random_factor(rng: &mut ChaCha8Rng, scope: &[VarId]) -> Factor {
        Factor::from_fn(scope, &vec![2; scope.len()], |_| rng.gen_range(0.1..2.0))
    }

    fn brute_sum(n: usize, factors: &[Factor], keep: &[VarId]) -> Factor {
        let mut out = Factor::filled(keep, &vec![2; keep.len()], 0.0);
        let mut vals = out.values().to_vec();
        for idx in 0..1usize << n {
            let full: Vec<usize> = (0..n).map(|v| (idx >> (n - 1 - v)) & 1).collect();
            let p: f64 = factors.iter().map(|t| t.value_at_full(&full)).product();
            let k = keep.iter().fold(0, |a, &v| a * 2 + full[v]);
            vals[k] += p;
        }
        out = Factor::new(keep.to_vec(), vec![2; keep.len()], vals).unwrap();
        out
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
    }

    #[test]
    fn free_multiplier_counts_missing_variables() {
        let net = MarkovNetwork::from_factors(vec![f(&[0], &[2.0, 3.0])]).unwrap();
        let t = calibrate(&VariableTable::binary(2).domain(), &[&net]).unwrap();
        assert_eq!(t.beliefs()[0].values(), &[2.0, 3.0]);
        assert_eq!(t.free_multiplier(), 2.0);
        assert_eq!(t.partition_function(), 10.0);
        assert_eq!(t.clique_sum_product(&[]).unwrap().values(), &[5.0]);
    }

    #[test]
    fn empty_network_counts_domain() {
        let net = MarkovNetwork::from_factors(vec![]).unwrap();
        let t = calibrate(&VariableTable::binary(3).domain(), &[&net]).unwrap();
        assert_eq!(t.partition_function(), 8.0);
        let scalar = MarkovNetwork::from_factors(vec![Factor::scalar(0.5)]).unwrap();
        let t = calibrate(&VariableTable::binary(3).domain(), &[&scalar]).unwrap();
        assert_eq!(t.partition_function(), 4.0);
    }

    #[test]
    fn conditional_slices_sum_to_one_each() {
        let joint = f(&[0, 1], &[0.1, 0.3, 0.4, 0.2]);
        let num = MarkovNetwork::from_factors(vec![joint.clone()]).unwrap();
        let den = MarkovNetwork::from_factors(vec![joint.marginalize(&[1])]).unwrap();
        let q = mn_quotient(&num, &den).unwrap();
        let t = calibrate(&VariableTable::binary(2).domain(), &[&q]).unwrap();
        assert!(close(t.partition_function(), 2.0, 1e-12));
    }

    #[test]
    fn undefined_quotient_is_reported() {
        let num = MarkovNetwork::from_factors(vec![f(&[0], &[1.0, 1.0])]).unwrap();
        let den = MarkovNetwork::from_factors(vec![f(&[0], &[1.0, 0.0])]).unwrap();
        let q = mn_quotient(&num, &den).unwrap();
        let r = calibrate(&VariableTable::binary(1).domain(), &[&q]);
        assert!(matches!(r, Err(Error::UndefinedQuotient { .. })));

        // 0/0 is fine
        let num = MarkovNetwork::from_factors(vec![f(&[0], &[1.0, 0.0])]).unwrap();
        let q = mn_quotient(&num, &den).unwrap();
        let t = calibrate(&VariableTable::binary(1).domain(), &[&q]).unwrap();
        assert_eq!(t.partition_function(), 1.0);
    }

    #[test]
    fn normalized_model_beliefs_are_marginals() {
        let a = f(&[0, 1], &[0.1, 0.2, 0.3, 0.4]);
        let b = f(&[1, 2], &[0.5, 0.5, 0.25, 0.75]);
        let b = b.divide(&b.marginalize(&[2])).unwrap();
        let m = DecomposableModel::new(VariableTable::binary(3), vec![a.clone(), b.clone()]).unwrap();
        let t = calibrate(&m.domain(), &[&m.network()]).unwrap();
        assert!(close(t.partition_function(), 1.0, 1e-12));
        let p2 = t.clique_sum_product(&[2]).unwrap();
        let want = brute_sum(3, &[a, b], &[2]);
        for (x, y) in p2.values().iter().zip(want.values()) {
            assert!(close(*x, *y, 1e-12));
        }
    }

    #[test]
    fn log_moment_examples() {
        let d = VariableTable::binary(2).domain();
        let l = f(&[0], &[0.0, 2f64.ln()]);
        let v = weighted_log_moment(&d, &[], &[l]).unwrap();
        assert!((v - 2.0 * 2f64.ln()).abs() < 1e-15);
        let zero = f(&[0, 1], &[0.0; 4]);
        let w = MarkovNetwork::from_factors(vec![f(&[0, 1], &[0.25; 4])]).unwrap();
        assert_eq!(weighted_log_moment(&d, &[&w], &[zero]).unwrap(), 0.0);
    }

    #[test]
    fn two_log_factors_match_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 6;
        let d = VariableTable::binary(n).domain();
        for _ in 0..20 {
            let w = MarkovNetwork::from_factors(vec![
                random_factor(&mut rng, &[0, 1]),
                random_factor(&mut rng, &[1, 2, 3]),
                random_factor(&mut rng, &[4]),
            ])
            .unwrap();
            let l1 = random_factor(&mut rng, &[2, 5]).map(|v| v.ln());
            let l2 = random_factor(&mut rng, &[0, 5]).map(|v| v.ln());
            let got = weighted_log_moment(&d, &[&w], &[l1.clone(), l2.clone()]).unwrap();
            let mut all: Vec<Factor> = w.factors().iter().map(|nf| nf.factor.clone()).collect();
            all.push(l1);
            all.push(l2);
            let want = brute_sum(n, &all, &[]).values()[0];
            assert!((got - want).abs() <= 1e-10 * want.abs().max(1.0), "{got} vs {want}");
        }
    }

    #[test]
    fn random_collections_match_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for case in 0..40 {
            let n = rng.gen_range(2..=9);
            let mut factors = Vec::new();
            for _ in 0..rng.gen_range(1..6) {
                let k = rng.gen_range(1..=3.min(n));
                let mut scope: Vec<VarId> = rand::seq::index::sample(&mut rng, n, k).into_vec();
                scope.sort_unstable();
                factors.push(random_factor(&mut rng, &scope));
            }
            let net = MarkovNetwork::from_factors(factors.clone()).unwrap();
            let d = VariableTable::binary(n).domain();
            let t = calibrate(&d, &[&net]).unwrap();
            let z = brute_sum(n, &factors, &[]).values()[0];
            assert!(close(t.partition_function(), z, 1e-9), "case {case}");
            for (c, b) in t.clique_tree().cliques().iter().zip(t.beliefs()) {
                // beliefs leave out free variables, the brute force sums them
                let want = brute_sum(n, &factors, c).scale(1.0 / t.free_multiplier());
                for (x, y) in b.values().iter().zip(want.values()) {
                    assert!(close(*x, *y, 1e-9), "case {case} clique {c:?}");
                }
            }
            let rev = calibrate_with(&d, &[&net], Triangulation::ReverseId).unwrap();
            assert!(close(rev.partition_function(), z, 1e-9));
        }
    }

    #[test]
    fn adjacent_beliefs_agree_on_separators() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let factors = vec![
            random_factor(&mut rng, &[0, 1]),
            random_factor(&mut rng, &[1, 2]),
            random_factor(&mut rng, &[1, 3]),
            random_factor(&mut rng, &[3, 4, 5]),
        ];
        let net = MarkovNetwork::from_factors(factors).unwrap();
        let t = calibrate(&VariableTable::binary(6).domain(), &[&net]).unwrap();
        for e in t.clique_tree().edges() {
            let a = t.beliefs()[e.a].marginalize_onto(&e.separator);
            let b = t.beliefs()[e.b].marginalize_onto(&e.separator);
            for (x, y) in a.values().iter().zip(b.values()) {
                assert!(close(*x, *y, 1e-9));
            }
        }
        assert!(t.max_table_cells() <= 1 << (t.treewidth() + 1));
        assert!(matches!(t.clique_sum_product(&[0, 5]), Err(Error::ScopeNotCovered(_))));
    }
}
