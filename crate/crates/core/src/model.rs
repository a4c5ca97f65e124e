//! Markov networks, decomposable models and fitting from samples.

use crate::error::{Error, Result};
use crate::factor::Factor;
use crate::graph::{computation_graph, kappa, ChordalGraph, CliqueTree, Triangulation, UndirectedGraph};
use crate::inference;
use crate::VarId;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Variable {
    pub cardinality: usize,
    pub name: Option<String>,
}

/// The variables of a problem. Ids are dense: variable `i` is entry `i`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct VariableTable {
    vars: Vec<Variable>,
}

impl VariableTable {
    pub fn new(vars: Vec<Variable>) -> Result<Self> {
        if let Some((i, v)) = vars.iter().enumerate().find(|(_, v)| v.cardinality < 2) {
            return Err(Error::InvalidModel(format!(
                "variable {i} has cardinality {} (need at least 2)",
                v.cardinality
            )));
        }
        Ok(VariableTable { vars })
    }

    /// `n` unnamed binary variables.
    pub fn binary(n: usize) -> Self {
        Self::with_cardinalities(&vec![2; n]).unwrap()
    }

    pub fn with_cardinalities(cards: &[usize]) -> Result<Self> {
        Self::new(
            cards
                .iter()
                .map(|&c| Variable {
                    cardinality: c,
                    name: None,
                })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn cardinality(&self, v: VarId) -> usize {
        self.vars[v].cardinality
    }

    pub fn cardinalities(&self) -> Vec<usize> {
        self.vars.iter().map(|v| v.cardinality).collect()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.vars
    }

    /// The declared name, or `x{id}` when none was given.
    pub fn name(&self, v: VarId) -> String {
        self.vars[v].name.clone().unwrap_or_else(|| format!("x{v}"))
    }

    pub fn id_of(&self, name: &str) -> Option<VarId> {
        (0..self.len()).find(|&v| self.name(v) == name)
    }

    pub fn domain(&self) -> Domain {
        Domain::new((0..self.len()).map(|v| (v, self.cardinality(v))).collect())
    }

    pub fn subdomain(&self, vars: &[VarId]) -> Result<Domain> {
        if let Some(&v) = vars.iter().find(|&&v| v >= self.len()) {
            return Err(Error::InvalidRequest(format!("unknown variable {v}")));
        }
        Ok(Domain::new(vars.iter().map(|&v| (v, self.cardinality(v))).collect()))
    }
}

/// A set of variables with their cardinalities, sorted by id.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Domain {
    vars: Vec<VarId>,
    cards: Vec<usize>,
}

impl Domain {
    pub fn new(mut pairs: Vec<(VarId, usize)>) -> Self {
        pairs.sort_unstable();
        pairs.dedup();
        Domain {
            vars: pairs.iter().map(|p| p.0).collect(),
            cards: pairs.iter().map(|p| p.1).collect(),
        }
    }

    pub fn vars(&self) -> &[VarId] {
        &self.vars
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    pub fn cardinality(&self, v: VarId) -> Option<usize> {
        self.vars.binary_search(&v).ok().map(|i| self.cards[i])
    }

    pub fn contains(&self, v: VarId) -> bool {
        self.vars.binary_search(&v).is_ok()
    }

    /// Number of joint assignments, as a float so large domains do not overflow.
    pub fn size(&self) -> f64 {
        self.cards.iter().map(|&c| c as f64).product()
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }
}

/// A factor of a Markov network, possibly standing for its reciprocal.
#[derive(Clone, Debug, PartialEq)]
pub struct NetFactor {
    pub factor: Factor,
    /// When set, the network uses `1 / factor` (with 1/0 = 0).
    pub reciprocal: bool,
}

impl NetFactor {
    pub fn plain(factor: Factor) -> Self {
        NetFactor {
            factor,
            reciprocal: false,
        }
    }

    /// `(self)^exponent`, keeping the reciprocal flag lazy where possible.
    pub fn power(&self, exponent: f64) -> Result<NetFactor> {
        if self.reciprocal && exponent < 0.0 {
            return Ok(NetFactor::plain(self.factor.map_power(-exponent)?));
        }
        Ok(NetFactor {
            factor: self.factor.map_power(exponent)?,
            reciprocal: self.reciprocal,
        })
    }

    /// Table of `ln(self)`; reciprocal factors give `-ln(factor)`.
    pub fn log(&self) -> Result<Factor> {
        let l = self.factor.map_log()?;
        Ok(if self.reciprocal { l.scale(-1.0) } else { l })
    }

    /// The table the network multiplies in.
    pub fn materialize(&self) -> Factor {
        if self.reciprocal {
            self.factor.pseudo_reciprocal()
        } else {
            self.factor.clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MarkovNetwork {
    graph: ChordalGraph,
    factors: Vec<NetFactor>,
}

impl MarkovNetwork {
    pub fn new(graph: ChordalGraph, factors: Vec<NetFactor>) -> Result<Self> {
        for nf in &factors {
            if !graph.graph().is_clique(nf.factor.scope()) && !nf.factor.is_scalar() {
                return Err(Error::InvalidModel(format!(
                    "factor over {:?} is not inside a clique of the network graph",
                    nf.factor.scope()
                )));
            }
            if nf.factor.values().iter().any(|&v| v < 0.0 || v.is_nan()) {
                return Err(Error::InvalidModel(format!(
                    "factor over {:?} has a negative entry",
                    nf.factor.scope()
                )));
            }
        }
        Ok(MarkovNetwork { graph, factors })
    }

    pub fn graph(&self) -> &ChordalGraph {
        &self.graph
    }

    pub fn factors(&self) -> &[NetFactor] {
        &self.factors
    }

    /// Network of plain factors whose graph is the union of their scopes.
    pub fn from_factors(factors: Vec<Factor>) -> Result<Self> {
        let scopes: Vec<Vec<VarId>> = factors.iter().map(|f| f.scope().to_vec()).collect();
        let graph = ChordalGraph::triangulate(&kappa(&scopes), Triangulation::MinFill);
        Self::new(graph, factors.into_iter().map(NetFactor::plain).collect())
    }

    /// Every factor scaled by `c` (used for positive-measure checks).
    pub fn scaled(&self, c: f64) -> MarkovNetwork {
        let mut out = self.clone();
        for nf in &mut out.factors {
            nf.factor = nf.factor.scale(c);
        }
        out
    }
}

fn check_cardinalities<'a>(factors: impl Iterator<Item = &'a NetFactor>) -> Result<()> {
    let mut seen: std::collections::BTreeMap<VarId, usize> = Default::default();
    for nf in factors {
        for (&v, &c) in nf.factor.scope().iter().zip(nf.factor.cards()) {
            let prev = *seen.entry(v).or_insert(c);
            if prev != c {
                return Err(Error::CardinalityMismatch {
                    var: v,
                    left: prev,
                    right: c,
                });
            }
        }
    }
    Ok(())
}

/// Product of networks: chordal completion of the union graph, all factors kept.
pub fn mn_product(nets: &[&MarkovNetwork]) -> Result<MarkovNetwork> {
    check_cardinalities(nets.iter().flat_map(|n| n.factors.iter()))?;
    let graphs: Vec<&UndirectedGraph> = nets.iter().map(|n| n.graph.graph()).collect();
    let graph = computation_graph(&graphs, Triangulation::MinFill);
    let factors = nets.iter().flat_map(|n| n.factors.iter().cloned()).collect();
    Ok(MarkovNetwork { graph, factors })
}

/// Quotient `num / den`: the denominator's factors enter as reciprocals.
pub fn mn_quotient(num: &MarkovNetwork, den: &MarkovNetwork) -> Result<MarkovNetwork> {
    check_cardinalities(num.factors.iter().chain(&den.factors))?;
    let graph = computation_graph(&[num.graph.graph(), den.graph.graph()], Triangulation::MinFill);
    let mut factors = num.factors.clone();
    factors.extend(den.factors.iter().map(|nf| NetFactor {
        factor: nf.factor.clone(),
        reciprocal: !nf.reciprocal,
    }));
    Ok(MarkovNetwork { graph, factors })
}

/// Chordal graph plus one table per maximal clique whose product is a
/// normalised joint distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct DecomposableModel {
    variables: VariableTable,
    graph: ChordalGraph,
    cliques: Vec<Vec<VarId>>,
    tree: CliqueTree,
    cpts: Vec<Factor>,
}

const NORMALIZATION_TOL: f64 = 1e-9;

impl DecomposableModel {
    /// Assembles a model from per-clique tables. The tables' scopes must be
    /// exactly the maximal cliques of the graph they induce (variables in no
    /// table are not allowed), entries must lie in [0, 1] and the product must
    /// sum to one.
    pub fn new(variables: VariableTable, cpts: Vec<Factor>) -> Result<Self> {
        let mut g = UndirectedGraph::with_vertices(0..variables.len());
        for t in &cpts {
            for (&v, &c) in t.scope().iter().zip(t.cards()) {
                if v >= variables.len() {
                    return Err(Error::InvalidModel(format!("unknown variable {v}")));
                }
                if variables.cardinality(v) != c {
                    return Err(Error::CardinalityMismatch {
                        var: v,
                        left: variables.cardinality(v),
                        right: c,
                    });
                }
            }
            g.add_clique(t.scope());
        }
        let graph = ChordalGraph::from_graph(g)?;
        let cliques = graph.maximal_cliques();
        let mut scopes: Vec<Vec<VarId>> = cpts.iter().map(|t| t.scope().to_vec()).collect();
        scopes.sort();
        if scopes != cliques {
            return Err(Error::InvalidModel(format!(
                "tables over {scopes:?} do not match the maximal cliques {cliques:?}"
            )));
        }
        let mut cpts = cpts;
        cpts.sort_by(|a, b| a.scope().cmp(b.scope()));
        for t in &cpts {
            if t.values().iter().any(|&v| !(0.0..=1.0 + 1e-12).contains(&v)) {
                return Err(Error::InvalidModel(format!(
                    "table over {:?} has an entry outside [0, 1]",
                    t.scope()
                )));
            }
        }
        let tree = CliqueTree::build(cliques.clone());
        let model = DecomposableModel {
            variables,
            graph,
            cliques,
            tree,
            cpts,
        };
        let z = inference::calibrate(&model.variables.domain(), &[&model.network()])?.partition_function();
        if (z - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidModel(format!("tables multiply to total mass {z}, not 1")));
        }
        Ok(model)
    }

    /// Builds a model from consistent clique marginals: the root (clique 0)
    /// keeps its marginal, every other clique is divided by its own marginal
    /// on the separator towards the root.
    pub fn from_clique_marginals(variables: VariableTable, marginals: Vec<Factor>) -> Result<Self> {
        let mut marginals = marginals;
        marginals.sort_by(|a, b| a.scope().cmp(b.scope()));
        let tree = CliqueTree::build(marginals.iter().map(|m| m.scope().to_vec()).collect());
        let parents = rooted_parents(&tree, 0);
        let mut cpts = Vec::with_capacity(marginals.len());
        for (c, m) in marginals.iter().enumerate() {
            match parents[c] {
                None => cpts.push(m.clone()),
                Some((_, edge)) => {
                    let sep = &tree.edges()[edge].separator;
                    cpts.push(m.divide(&m.marginalize_onto(sep))?);
                }
            }
        }
        Self::new(variables, cpts)
    }

    pub fn variables(&self) -> &VariableTable {
        &self.variables
    }

    pub fn graph(&self) -> &ChordalGraph {
        &self.graph
    }

    pub fn cliques(&self) -> &[Vec<VarId>] {
        &self.cliques
    }

    pub fn clique_tree(&self) -> &CliqueTree {
        &self.tree
    }

    /// Tables aligned with [`DecomposableModel::cliques`].
    pub fn cpts(&self) -> &[Factor] {
        &self.cpts
    }

    pub fn treewidth(&self) -> usize {
        self.cliques.iter().map(|c| c.len()).max().unwrap_or(1) - 1
    }

    pub fn domain(&self) -> Domain {
        self.variables.domain()
    }

    pub fn network(&self) -> MarkovNetwork {
        MarkovNetwork {
            graph: self.graph.clone(),
            factors: self.cpts.iter().cloned().map(NetFactor::plain).collect(),
        }
    }

    /// Product of the clique tables at a full assignment.
    pub fn joint_probability(&self, assignment: &[usize]) -> f64 {
        self.cpts.iter().map(|t| t.value_at_full(assignment)).product()
    }

    /// Sum of `ln P(row)` over the rows of a dataset.
    pub fn log_likelihood(&self, data: &SampleDataset) -> f64 {
        data.rows().iter().map(|r| self.joint_probability(r).ln()).sum()
    }
}

/// Parent `(clique, edge)` of every clique when the tree is rooted at `root`.
pub(crate) fn rooted_parents(tree: &CliqueTree, root: usize) -> Vec<Option<(usize, usize)>> {
    let m = tree.cliques().len();
    let mut parent = vec![None; m];
    let mut seen = vec![false; m];
    if m == 0 {
        return parent;
    }
    let mut stack = vec![root];
    seen[root] = true;
    while let Some(c) = stack.pop() {
        for &(n, e) in tree.neighbors(c) {
            if !seen[n] {
                seen[n] = true;
                parent[n] = Some((c, e));
                stack.push(n);
            }
        }
    }
    parent
}

/// Complete observations of every variable.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleDataset {
    variables: VariableTable,
    rows: Vec<Vec<usize>>,
}

impl SampleDataset {
    pub fn new(variables: VariableTable, rows: Vec<Vec<usize>>) -> Result<Self> {
        for (r, row) in rows.iter().enumerate() {
            if row.len() != variables.len() {
                return Err(Error::InvalidData(format!(
                    "row {r} has {} values, expected {}",
                    row.len(),
                    variables.len()
                )));
            }
            for (v, &x) in row.iter().enumerate() {
                if x >= variables.cardinality(v) {
                    return Err(Error::InvalidData(format!(
                        "row {r}: value {x} out of range for {} (cardinality {})",
                        variables.name(v),
                        variables.cardinality(v)
                    )));
                }
            }
        }
        Ok(SampleDataset { variables, rows })
    }

    pub fn variables(&self) -> &VariableTable {
        &self.variables
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Smoothed joint frequency table over `scope` (sorted):
    /// `(count + pseudocount) / (N + pseudocount * cells)`.
    pub fn smoothed_table(&self, scope: &[VarId], pseudocount: f64) -> Result<Factor> {
        let cards: Vec<usize> = scope.iter().map(|&v| self.variables.cardinality(v)).collect();
        let cells: usize = cards.iter().product();
        let mut raw = vec![0.0; cells];
        for row in &self.rows {
            let idx = scope.iter().zip(&cards).fold(0, |acc, (&v, &c)| acc * c + row[v]);
            raw[idx] += 1.0;
        }
        let denom = self.rows.len() as f64 + pseudocount * cells as f64;
        if denom <= 0.0 {
            return Err(Error::EmptyDataset);
        }
        let values = raw.iter().map(|c| (c + pseudocount) / denom).collect();
        Factor::new(scope.to_vec(), cards, values)
    }
}

/// Fits clique tables by smoothed counting over the maximal cliques of
/// `structure`. Variables of the dataset missing from the structure become
/// isolated cliques.
pub fn fit_parameters(structure: &ChordalGraph, data: &SampleDataset, pseudocount: f64) -> Result<DecomposableModel> {
    if pseudocount < 0.0 || !pseudocount.is_finite() {
        return Err(Error::InvalidData(format!("pseudocount {pseudocount} must be a finite value >= 0")));
    }
    if data.is_empty() && pseudocount == 0.0 {
        return Err(Error::EmptyDataset);
    }
    let n = data.variables().len();
    let mut g = structure.graph().clone();
    if let Some(v) = g.vertices().find(|&v| v >= n) {
        return Err(Error::InvalidModel(format!("structure mentions variable {v} absent from the data")));
    }
    for v in 0..n {
        g.add_vertex(v);
    }
    let full = ChordalGraph::from_graph(g)?;
    let marginals = full
        .maximal_cliques()
        .iter()
        .map(|c| data.smoothed_table(c, pseudocount))
        .collect::<Result<Vec<_>>>()?;
    DecomposableModel::from_clique_marginals(data.variables().clone(), marginals)
}

fn mutual_information(joint: &Factor) -> f64 {
    let a = joint.marginalize(&[joint.scope()[1]]);
    let b = joint.marginalize(&[joint.scope()[0]]);
    let mut mi = 0.0;
    for i in 0..joint.cards()[0] {
        for j in 0..joint.cards()[1] {
            let p = joint.value(&[i, j]);
            if p > 0.0 {
                mi += p * (p / (a.values()[i] * b.values()[j])).ln();
            }
        }
    }
    mi
}

/// Maximum spanning tree over pairwise empirical mutual information, ties by
/// lexicographic edge.
pub fn chow_liu_structure(data: &SampleDataset, pseudocount: f64) -> Result<ChordalGraph> {
    let n = data.variables().len();
    if n < 2 {
        return Err(Error::InvalidData(format!("need at least 2 variables, got {n}")));
    }
    let mut scored = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let mi = mutual_information(&data.smoothed_table(&[i, j], pseudocount)?);
            scored.push((mi, i, j));
        }
    }
    scored.sort_by(|x, y| y.0.total_cmp(&x.0).then((x.1, x.2).cmp(&(y.1, y.2))));
    let mut comp: Vec<usize> = (0..n).collect();
    fn find(c: &mut [usize], mut x: usize) -> usize {
        while c[x] != x {
            c[x] = c[c[x]];
            x = c[x];
        }
        x
    }
    let mut g = UndirectedGraph::with_vertices(0..n);
    for (_, i, j) in scored {
        let (ri, rj) = (find(&mut comp, i), find(&mut comp, j));
        if ri != rj {
            comp[ri.max(rj)] = ri.min(rj);
            g.add_edge(i, j);
        }
    }
    ChordalGraph::from_graph(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::is_chordal;

    fn f(scope: &[VarId], values: &[f64]) -> Factor {
        Factor::new(scope.to_vec(), vec![2; scope.len()], values.to_vec()).unwrap()
    }

    fn path(edges: &[(VarId, VarId)], n: usize) -> ChordalGraph {
        let mut g = UndirectedGraph::with_vertices(0..n);
        for &(u, v) in edges {
            g.add_edge(u, v);
        }
        ChordalGraph::from_graph(g).unwrap()
    }

    #[test]
    fn laplace_smoothing() {
        let data = SampleDataset::new(VariableTable::binary(1), vec![vec![0], vec![0]]).unwrap();
        let m = fit_parameters(&path(&[], 1), &data, 1.0).unwrap();
        assert!((m.joint_probability(&[0]) - 0.75).abs() < 1e-15);
        assert!((m.joint_probability(&[1]) - 0.25).abs() < 1e-15);

        let uniform = SampleDataset::new(VariableTable::binary(1), vec![vec![0], vec![1]]).unwrap();
        for pc in [0.0, 0.5, 3.0] {
            let m = fit_parameters(&path(&[], 1), &uniform, pc).unwrap();
            assert!((m.joint_probability(&[0]) - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn empty_data_needs_pseudocount() {
        let data = SampleDataset::new(VariableTable::binary(2), vec![]).unwrap();
        assert_eq!(fit_parameters(&path(&[(0, 1)], 2), &data, 0.0), Err(Error::EmptyDataset));
        let m = fit_parameters(&path(&[(0, 1)], 2), &data, 1.0).unwrap();
        assert!((m.joint_probability(&[1, 0]) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn fitted_chain_is_normalized() {
        let rows = vec![vec![0, 0, 1], vec![1, 1, 1], vec![0, 1, 0], vec![1, 1, 0], vec![0, 0, 0]];
        let data = SampleDataset::new(VariableTable::binary(3), rows).unwrap();
        let m = fit_parameters(&path(&[(0, 1), (1, 2)], 3), &data, 1.0).unwrap();
        let mut total = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    total += m.joint_probability(&[a, b, c]);
                }
            }
        }
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(m.cliques(), &[vec![0, 1], vec![1, 2]]);
    }

    #[test]
    fn uniform_chain_probabilities() {
        let t = f(&[0, 1], &[0.25; 4]);
        let c = f(&[1, 2], &[0.5; 4]);
        let m = DecomposableModel::new(VariableTable::binary(3), vec![t, c]).unwrap();
        assert!((m.joint_probability(&[1, 0, 1]) - 0.125).abs() < 1e-15);
    }

    #[test]
    fn model_validation() {
        // does not sum to one
        let bad = DecomposableModel::new(VariableTable::binary(1), vec![f(&[0], &[0.5, 0.6])]);
        assert!(matches!(bad, Err(Error::InvalidModel(_))));
        // variable 1 has no table
        let missing = DecomposableModel::new(VariableTable::binary(2), vec![f(&[0], &[0.5, 0.5])]);
        assert!(matches!(missing, Err(Error::InvalidModel(_))));
        // non-maximal table
        let sub = DecomposableModel::new(
            VariableTable::binary(2),
            vec![f(&[0, 1], &[0.25; 4]), f(&[0], &[1.0, 1.0])],
        );
        assert!(matches!(sub, Err(Error::InvalidModel(_))));
    }

    #[test]
    fn chow_liu_copies_and_noise() {
        let rows: Vec<Vec<usize>> = (0..400).map(|i| vec![i % 2, i % 2, (i / 2) % 2]).collect();
        let data = SampleDataset::new(VariableTable::binary(3), rows).unwrap();
        let g = chow_liu_structure(&data, 1.0).unwrap();
        assert_eq!(g.graph().edges(), vec![(0, 1), (0, 2)]);

        let two = SampleDataset::new(VariableTable::binary(2), vec![vec![0, 1]]).unwrap();
        assert_eq!(chow_liu_structure(&two, 1.0).unwrap().graph().edges(), vec![(0, 1)]);
        let one = SampleDataset::new(VariableTable::binary(1), vec![vec![0]]).unwrap();
        assert!(chow_liu_structure(&one, 1.0).is_err());
    }

    #[test]
    fn product_and_quotient_structure() {
        let a = MarkovNetwork::from_factors(vec![f(&[0], &[1.0, 2.0])]).unwrap();
        let b = MarkovNetwork::from_factors(vec![f(&[1], &[3.0, 4.0])]).unwrap();
        let p = mn_product(&[&a, &b]).unwrap();
        assert_eq!(p.graph().maximal_cliques(), vec![vec![0], vec![1]]);
        assert_eq!(p.factors().len(), 2);

        let chain = MarkovNetwork::from_factors(vec![f(&[0, 1], &[1.0; 4]), f(&[1, 2], &[1.0; 4])]).unwrap();
        let edge = MarkovNetwork::from_factors(vec![f(&[0, 2], &[1.0; 4])]).unwrap();
        let tri = mn_product(&[&chain, &edge]).unwrap();
        assert_eq!(tri.graph().maximal_cliques(), vec![vec![0, 1, 2]]);
        assert_eq!(tri.factors().len(), 3);
        assert!(is_chordal(tri.graph().graph()));

        let single = mn_product(&[&chain]).unwrap();
        assert_eq!(single.factors(), chain.factors());

        let two = MarkovNetwork::from_factors(vec![Factor::scalar(2.0)]).unwrap();
        let q = mn_quotient(&a, &two).unwrap();
        assert_eq!(q.factors().len(), 2);
        assert_eq!(q.factors()[1].materialize().values(), &[0.5]);

        let three = MarkovNetwork::from_factors(vec![Factor::new(vec![0], vec![3], vec![1.0; 3]).unwrap()]).unwrap();
        assert!(matches!(mn_product(&[&a, &three]), Err(Error::CardinalityMismatch { .. })));
    }
}
