//! Alpha-beta divergences between joint, marginal and conditional
//! distributions of decomposable models.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use itertools::Itertools;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::factor::Factor;
use crate::graph::{computation_graph, ChordalGraph, Triangulation, UndirectedGraph};
use crate::inference::{calibrate_factors, weighted_log_moment_tree, CalibratedTree};
use crate::marginal::{check_split, conditional_network, marginal_network};
use crate::model::{DecomposableModel, Domain, MarkovNetwork, NetFactor};
use crate::VarId;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    General,
    AlphaOnly,
    Opposite,
    BetaOnly,
    BothZero,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::General => "general",
            Branch::AlphaOnly => "alpha-only",
            Branch::Opposite => "opposite",
            Branch::BetaOnly => "beta-only",
            Branch::BothZero => "both-zero",
        })
    }
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct ABParams {
    alpha: f64,
    beta: f64,
}

impl ABParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::InvalidRequest(format!("alpha={alpha}, beta={beta} must be finite")));
        }
        Ok(ABParams { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn branch(&self) -> Branch {
        let (a, b) = (self.alpha, self.beta);
        match (a == 0.0, b == 0.0) {
            (true, true) => Branch::BothZero,
            (false, true) => Branch::AlphaOnly,
            (true, false) => Branch::BetaOnly,
            (false, false) if a + b == 0.0 => Branch::Opposite,
            _ => Branch::General,
        }
    }
}

/// Which distribution of the two models is compared.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Scope {
    Joint,
    /// Marginal on the listed variables.
    Marginal(Vec<VarId>),
    /// Conditional of `target` given `given`, averaged over the first model's
    /// distribution of `given`.
    Conditional { target: Vec<VarId>, given: Vec<VarId> },
}

impl Scope {
    fn normalized(&self, n: usize) -> Result<Scope> {
        let clean = |vs: &[VarId]| vs.iter().copied().sorted_unstable().dedup().collect::<Vec<_>>();
        match self {
            Scope::Joint => Ok(Scope::Joint),
            Scope::Marginal(z) => {
                let z = clean(z);
                if z.is_empty() {
                    return Err(Error::InvalidRequest("marginal variable set is empty".into()));
                }
                if let Some(&v) = z.iter().find(|&&v| v >= n) {
                    return Err(Error::InvalidRequest(format!("unknown variable {v}")));
                }
                Ok(Scope::Marginal(z))
            }
            Scope::Conditional { target, given } => {
                let (target, given) = (clean(target), clean(given));
                check_split(n, &target, &given)?;
                Ok(Scope::Conditional { target, given })
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DivergenceRequest {
    pub params: ABParams,
    pub scope: Scope,
    pub triangulation: Triangulation,
}

impl DivergenceRequest {
    pub fn new(params: ABParams, scope: Scope) -> Self {
        DivergenceRequest {
            params,
            scope,
            triangulation: Triangulation::MinFill,
        }
    }

    pub fn joint(alpha: f64, beta: f64) -> Result<Self> {
        Ok(Self::new(ABParams::new(alpha, beta)?, Scope::Joint))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    /// Treewidth of the computation graph behind each sum term, in evaluation order.
    pub treewidths: Vec<usize>,
    /// Largest table built in any calibration.
    pub max_table_cells: usize,
    pub calibrations: usize,
    pub millis: f64,
}

impl Diagnostics {
    fn record(&mut self, t: &CalibratedTree) {
        self.max_table_cells = self.max_table_cells.max(t.max_table_cells());
        self.calibrations += 1;
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DivergenceResult {
    pub value: f64,
    pub params: ABParams,
    pub scope: Scope,
    pub diagnostics: Diagnostics,
}

/// The two networks being compared, with an optional weight network
/// multiplied into every sum, over a fixed universe of variables.
#[derive(Clone, Debug)]
pub struct Problem<'a> {
    p: &'a MarkovNetwork,
    q: &'a MarkovNetwork,
    weight: Option<&'a MarkovNetwork>,
    universe: Domain,
    heuristic: Triangulation,
}

fn powered(net: &MarkovNetwork, e: f64, label: &str) -> Result<Vec<NetFactor>> {
    net.factors()
        .iter()
        .map(|nf| nf.power(e).map_err(|err| err.in_context(label)))
        .collect()
}

impl<'a> Problem<'a> {
    pub fn new(p: &'a MarkovNetwork, q: &'a MarkovNetwork, universe: Domain) -> Self {
        Problem {
            p,
            q,
            weight: None,
            universe,
            heuristic: Triangulation::MinFill,
        }
    }

    pub fn weighted(mut self, weight: &'a MarkovNetwork) -> Self {
        self.weight = Some(weight);
        self
    }

    pub fn triangulation(mut self, heuristic: Triangulation) -> Self {
        self.heuristic = heuristic;
        self
    }

    fn graph(&self, use_p: bool, use_q: bool, extra: &[UndirectedGraph]) -> ChordalGraph {
        let mut graphs: Vec<&UndirectedGraph> = Vec::new();
        if use_p {
            graphs.push(self.p.graph().graph());
        }
        if use_q {
            graphs.push(self.q.graph().graph());
        }
        if let Some(w) = self.weight {
            graphs.push(w.graph().graph());
        }
        graphs.extend(extra);
        computation_graph(&graphs, self.heuristic)
    }

    /// Factors of `w · P^a · Q^b`; a zero exponent drops that side.
    fn weight_factors(&self, a: f64, b: f64) -> Result<Vec<NetFactor>> {
        let mut fs = Vec::new();
        if a != 0.0 {
            fs.extend(powered(self.p, a, "first model")?);
        }
        if b != 0.0 {
            fs.extend(powered(self.q, b, "second model")?);
        }
        if let Some(w) = self.weight {
            fs.extend(w.factors().iter().cloned());
        }
        Ok(fs)
    }

    fn calibrate(&self, graph: &ChordalGraph, factors: &[NetFactor], diag: &mut Diagnostics) -> Result<CalibratedTree> {
        let refs: Vec<&NetFactor> = factors.iter().collect();
        let t = calibrate_factors(&self.universe, graph, &refs, &[])?;
        diag.record(&t);
        diag.treewidths.push(t.treewidth());
        Ok(t)
    }

    /// `S(a, b) = Σ_x w(x) P(x)^a Q(x)^b`.
    pub fn power_sum(&self, a: f64, b: f64, diag: &mut Diagnostics) -> Result<f64> {
        let graph = self.graph(a != 0.0, b != 0.0, &[]);
        let factors = self.weight_factors(a, b)?;
        Ok(self.calibrate(&graph, &factors, diag)?.partition_function())
    }

    /// `T(a, b; c, d) = Σ_x w(x) P(x)^a Q(x)^b ln(P(x)^c Q(x)^d)`, one
    /// calibration followed by a per-factor inner product.
    pub fn log_moment_sum(&self, a: f64, b: f64, c: f64, d: f64, diag: &mut Diagnostics) -> Result<f64> {
        let graph = self.graph(a != 0.0 || c != 0.0, b != 0.0 || d != 0.0, &[]);
        let factors = self.weight_factors(a, b)?;
        let tree = self.calibrate(&graph, &factors, diag)?;
        let mut terms = Vec::new();
        for (net, coef, label) in [(self.p, c, "first model"), (self.q, d, "second model")] {
            if coef == 0.0 {
                continue;
            }
            for nf in net.factors() {
                let log = nf.log().map_err(|e| e.in_context(label))?;
                let sp = tree.clique_sum_product(log.scope())?;
                terms.push(coef * log.dot(&sp)? * tree.free_multiplier());
            }
        }
        finite(cancel(&terms), "log moment")
    }

    /// `Σ_x w(x) (ln P(x) − ln Q(x))²`, expanded over pairs of log factors.
    pub fn log_square_sum(&self, diag: &mut Diagnostics) -> Result<f64> {
        let mut logs: Vec<Factor> = Vec::new();
        for (net, sign, label) in [(self.p, 1.0, "first model"), (self.q, -1.0, "second model")] {
            for nf in net.factors() {
                logs.push(nf.log().map_err(|e| e.in_context(label))?.scale(sign));
            }
        }
        let weights: Vec<&MarkovNetwork> = self.weight.into_iter().collect();
        let mut terms = Vec::new();
        let mut width = 0;
        for i in 0..logs.len() {
            for j in i..logs.len() {
                let pair = if i == j {
                    vec![logs[i].map(|v| v * v)]
                } else {
                    vec![logs[i].clone(), logs[j].clone()]
                };
                let t = weighted_log_moment_tree(&self.universe, &weights, &pair, self.heuristic)?;
                diag.record(&t);
                width = width.max(t.treewidth());
                let m = if i == j { 1.0 } else { 2.0 };
                terms.push(m * t.partition_function());
            }
        }
        diag.treewidths.push(width);
        finite(cancel(&terms), "log square sum")
    }

    /// Divergence between the networks under `params`. `count` is the
    /// constant used by the opposite branch: the number of cells summed over,
    /// counted per conditioning value when weighted.
    pub fn divergence(&self, params: ABParams, count: f64, diag: &mut Diagnostics) -> Result<f64> {
        let (a, b) = (params.alpha, params.beta);
        let v = match params.branch() {
            Branch::General => {
                let s = a + b;
                let cross = self.power_sum(a, b, diag)?;
                let pp = self.power_sum(s, 0.0, diag)?;
                let qq = self.power_sum(0.0, s, diag)?;
                -cancel(&[cross, -a / s * pp, -b / s * qq]) / (a * b)
            }
            Branch::AlphaOnly => {
                let t = self.log_moment_sum(a, 0.0, a, -a, diag)?;
                let (pp, qq) = (self.power_sum(a, 0.0, diag)?, self.power_sum(0.0, a, diag)?);
                cancel(&[t, -pp, qq]) / (a * a)
            }
            Branch::Opposite => {
                let t = self.log_moment_sum(0.0, 0.0, -a, a, diag)?;
                cancel(&[t, self.power_sum(a, -a, diag)?, -count]) / (a * a)
            }
            Branch::BetaOnly => {
                let t = self.log_moment_sum(0.0, b, -b, b, diag)?;
                let (qq, pp) = (self.power_sum(0.0, b, diag)?, self.power_sum(b, 0.0, diag)?);
                cancel(&[t, -qq, pp]) / (b * b)
            }
            Branch::BothZero => 0.5 * self.log_square_sum(diag)?,
        };
        finite(v, "divergence")
    }
}

/// Sum of `terms`, taken as exactly zero when it is below the rounding noise
/// of the summands (so identical models give 0 rather than ±1e-17).
fn cancel(terms: &[f64]) -> f64 {
    let sum: f64 = terms.iter().sum();
    let scale: f64 = terms.iter().map(|t| t.abs()).sum();
    if sum.abs() <= 16.0 * f64::EPSILON * scale {
        0.0
    } else {
        sum
    }
}

fn finite(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite { what: what.into() })
    }
}

/// `S(a, b)` between two networks over `universe`.
pub fn power_sum(p: &MarkovNetwork, q: &MarkovNetwork, a: f64, b: f64, universe: &Domain) -> Result<f64> {
    Problem::new(p, q, universe.clone()).power_sum(a, b, &mut Diagnostics::default())
}

/// `T(a, b; c, d)` between two networks over `universe`.
pub fn log_moment_sum(
    p: &MarkovNetwork,
    q: &MarkovNetwork,
    (a, b): (f64, f64),
    (c, d): (f64, f64),
    universe: &Domain,
) -> Result<f64> {
    Problem::new(p, q, universe.clone()).log_moment_sum(a, b, c, d, &mut Diagnostics::default())
}

/// `Σ_x w(x) (ln P(x) − ln Q(x))²` between two networks over `universe`.
pub fn log_square_sum(
    p: &MarkovNetwork,
    q: &MarkovNetwork,
    weight: Option<&MarkovNetwork>,
    universe: &Domain,
) -> Result<f64> {
    let mut prob = Problem::new(p, q, universe.clone());
    if let Some(w) = weight {
        prob = prob.weighted(w);
    }
    prob.log_square_sum(&mut Diagnostics::default())
}

/// Exact alpha-beta divergence of `q` from `p` on the requested scope.
pub fn ab_divergence(p: &DecomposableModel, q: &DecomposableModel, request: &DivergenceRequest) -> Result<DivergenceResult> {
    let start = Instant::now();
    if p.variables().cardinalities() != q.variables().cardinalities() {
        return Err(Error::InvalidModel("models are over different variable tables".into()));
    }
    let n = p.variables().len();
    let scope = request.scope.normalized(n)?;
    let mut diag = Diagnostics::default();
    let vars = p.variables();
    let value = match &scope {
        Scope::Joint => {
            let (pn, qn) = (p.network(), q.network());
            let universe = vars.domain();
            let count = universe.size();
            Problem::new(&pn, &qn, universe)
                .triangulation(request.triangulation)
                .divergence(request.params, count, &mut diag)?
        }
        Scope::Marginal(z) => {
            let pn = marginal_network(p, z)?;
            let qn = marginal_network(q, z)?;
            let universe = vars.subdomain(z)?;
            let count = universe.size();
            Problem::new(&pn, &qn, universe)
                .triangulation(request.triangulation)
                .divergence(request.params, count, &mut diag)?
        }
        Scope::Conditional { target, given } => {
            let pn = conditional_network(p, target, given)?;
            let qn = conditional_network(q, target, given)?;
            let weight = marginal_network(p, given)?;
            let w: Vec<VarId> = target.iter().chain(given).copied().sorted_unstable().collect();
            let universe = vars.subdomain(&w)?;
            let count = vars.subdomain(target)?.size();
            Problem::new(&pn, &qn, universe)
                .weighted(&weight)
                .triangulation(request.triangulation)
                .divergence(request.params, count, &mut diag)?
        }
    };
    diag.millis = start.elapsed().as_secs_f64() * 1e3;
    Ok(DivergenceResult {
        value,
        params: request.params,
        scope,
        diagnostics: diag,
    })
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum NamedDivergence {
    Kl,
    ReverseKl,
    Hellinger,
    ItakuraSaito,
    LogL2,
}

impl NamedDivergence {
    pub const ALL: [NamedDivergence; 5] = [
        NamedDivergence::Kl,
        NamedDivergence::ReverseKl,
        NamedDivergence::Hellinger,
        NamedDivergence::ItakuraSaito,
        NamedDivergence::LogL2,
    ];

    pub fn params(self) -> ABParams {
        let (a, b) = match self {
            NamedDivergence::Kl => (1.0, 0.0),
            NamedDivergence::ReverseKl => (0.0, 1.0),
            NamedDivergence::Hellinger => (0.5, 0.5),
            NamedDivergence::ItakuraSaito => (1.0, -1.0),
            NamedDivergence::LogL2 => (0.0, 0.0),
        };
        ABParams { alpha: a, beta: b }
    }

    pub fn name(self) -> &'static str {
        match self {
            NamedDivergence::Kl => "kl",
            NamedDivergence::ReverseKl => "reverse-kl",
            NamedDivergence::Hellinger => "hellinger",
            NamedDivergence::ItakuraSaito => "itakura-saito",
            NamedDivergence::LogL2 => "log-l2",
        }
    }

    /// Maps the raw divergence to the reported value. Hellinger is reported
    /// as a distance in [0, 1].
    pub fn finish(self, raw: f64) -> f64 {
        match self {
            NamedDivergence::Hellinger => (raw / 4.0).max(0.0).sqrt(),
            _ => raw,
        }
    }
}

impl fmt::Display for NamedDivergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NamedDivergence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        NamedDivergence::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| Error::InvalidRequest(format!("unknown divergence '{s}'")))
    }
}

pub fn named_divergence(
    p: &DecomposableModel,
    q: &DecomposableModel,
    name: NamedDivergence,
    scope: Scope,
) -> Result<DivergenceResult> {
    let mut r = ab_divergence(p, q, &DivergenceRequest::new(name.params(), scope))?;
    r.value = name.finish(r.value);
    Ok(r)
}

/// Every sorted `order`-tuple of `0..n`, lexicographically.
pub fn tuples(n: usize, order: usize) -> Vec<Vec<VarId>> {
    (0..n).combinations(order).collect()
}

/// Named marginal divergence for every tuple of variables of the given order
/// (or for the listed tuples), in lexicographic tuple order. Runs on the
/// current rayon pool.
pub fn divergence_grid(
    p: &DecomposableModel,
    q: &DecomposableModel,
    order: usize,
    name: NamedDivergence,
    filter: Option<&[Vec<VarId>]>,
) -> Result<Vec<(Vec<VarId>, f64)>> {
    let n = p.variables().len();
    let mut list: Vec<Vec<VarId>> = match filter {
        Some(f) => f
            .iter()
            .map(|t| t.iter().copied().sorted_unstable().dedup().collect())
            .collect(),
        None => {
            if order == 0 || order > n {
                return Err(Error::InvalidRequest(format!("tuple order {order} for {n} variables")));
            }
            tuples(n, order)
        }
    };
    list.sort();
    list.dedup();
    list.par_iter()
        .map(|t| named_divergence(p, q, name, Scope::Marginal(t.clone())).map(|r| (t.clone(), r.value)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::VariableTable;
    use crate::oracle;
    use crate::synth;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn uni(p: &[f64]) -> DecomposableModel {
        let f = Factor::new(vec![0], vec![p.len()], p.to_vec()).unwrap();
        DecomposableModel::new(VariableTable::with_cardinalities(&[p.len()]).unwrap(), vec![f]).unwrap()
    }

    fn joint(p: &DecomposableModel, q: &DecomposableModel, a: f64, b: f64) -> f64 {
        ab_divergence(p, q, &DivergenceRequest::joint(a, b).unwrap()).unwrap().value
    }

    #[test]
    fn branch_classification() {
        let b = |a, c| ABParams::new(a, c).unwrap().branch();
        assert_eq!(b(1.5, 0.5), Branch::General);
        assert_eq!(b(1.0, 0.0), Branch::AlphaOnly);
        assert_eq!(b(2.0, -2.0), Branch::Opposite);
        assert_eq!(b(0.0, 3.0), Branch::BetaOnly);
        assert_eq!(b(0.0, 0.0), Branch::BothZero);
        assert!(ABParams::new(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn univariate_examples() {
        let p = uni(&[0.5, 0.5]);
        let q = uni(&[0.25, 0.75]);
        let kl = 0.5 * 2f64.ln() + 0.5 * (2.0f64 / 3.0).ln();
        assert!((joint(&p, &q, 1.0, 0.0) - kl).abs() < 1e-14);
        assert!((kl - 0.143841).abs() < 1e-6);
        let l2 = 0.5 * (2f64.ln().powi(2) + (2.0f64 / 3.0).ln().powi(2));
        assert!((joint(&p, &q, 0.0, 0.0) - l2).abs() < 1e-14);

        let (pn, qn) = (p.network(), q.network());
        let d = p.domain();
        let t = log_moment_sum(&pn, &qn, (1.0, 0.0), (1.0, -1.0), &d).unwrap();
        assert!((t - kl).abs() < 1e-14);
        let sq = log_square_sum(&pn, &qn, None, &d).unwrap();
        assert!((sq - 0.644855).abs() < 1e-6);
        assert_eq!(log_moment_sum(&pn, &pn, (1.0, 0.0), (1.0, -1.0), &d).unwrap(), 0.0);
        assert_eq!(log_square_sum(&pn, &pn, None, &d).unwrap(), 0.0);
    }

    #[test]
    fn disjoint_supports() {
        let p = uni(&[1.0, 0.0]);
        let q = uni(&[0.0, 1.0]);
        assert_eq!(power_sum(&p.network(), &q.network(), 0.5, 0.5, &p.domain()).unwrap(), 0.0);
        assert!((joint(&p, &q, 0.5, 0.5) - 4.0).abs() < 1e-14);
        let h = named_divergence(&p, &q, NamedDivergence::Hellinger, Scope::Joint).unwrap();
        assert!((h.value - 1.0).abs() < 1e-14);
        // log branches reject zeros
        let r = ab_divergence(&p, &q, &DivergenceRequest::joint(1.0, 0.0).unwrap());
        assert!(matches!(r, Err(Error::NonPositive { .. })));
    }

    #[test]
    fn power_sum_examples() {
        let p = uni(&[0.3, 0.7]);
        assert!((power_sum(&p.network(), &p.network(), 1.0, 0.0, &p.domain()).unwrap() - 1.0).abs() < 1e-15);
        let empty = MarkovNetwork::from_factors(vec![]).unwrap();
        let d = VariableTable::binary(5).domain();
        assert_eq!(power_sum(&empty, &empty, 0.0, 0.0, &d).unwrap(), 32.0);
    }

    fn random_pair(rng: &mut ChaCha8Rng, n: usize) -> (DecomposableModel, DecomposableModel) {
        let vars = VariableTable::binary(n);
        let gp = synth::random_chordal_graph(rng, n, 3);
        let gq = synth::random_chordal_graph(rng, n, 3);
        (
            synth::random_model(rng, &vars, &gp).unwrap(),
            synth::random_model(rng, &vars, &gq).unwrap(),
        )
    }

    #[test]
    fn matches_oracle_on_every_branch_and_scope() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..15 {
            let n = rng.gen_range(3..=6);
            let (p, q) = random_pair(&mut rng, n);
            let (jp, jq) = (oracle::joint_table(&p).unwrap(), oracle::joint_table(&q).unwrap());
            let k = rng.gen_range(1..n);
            let z: Vec<VarId> = rand::seq::index::sample(&mut rng, n, k).into_vec();
            let y = vec![(0..n).find(|v| !z.contains(v)).unwrap()];
            let given: Vec<VarId> = z.iter().copied().take(1).collect();
            for scope in [
                Scope::Joint,
                Scope::Marginal(z.clone()),
                Scope::Conditional { target: y.clone(), given },
            ] {
                for (a, b) in [(1.5, 0.5), (1.0, 0.0), (1.0, -1.0), (0.0, 1.0), (0.0, 0.0), (-0.5, 2.0)] {
                    let req = DivergenceRequest::new(ABParams::new(a, b).unwrap(), scope.clone());
                    let got = ab_divergence(&p, &q, &req).unwrap().value;
                    let want = oracle::oracle_divergence(&jp, &jq, &req).unwrap();
                    assert!(
                        (got - want).abs() <= 1e-9 || (got - want).abs() <= 1e-6 * want.abs(),
                        "{scope:?} ({a},{b}): {got} vs {want}"
                    );
                }
            }
        }
    }

    #[test]
    fn marginal_on_everything_is_joint() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let (p, q) = random_pair(&mut rng, 6);
        for (a, b) in [(1.5, 0.5), (1.0, 0.0), (0.0, 0.0)] {
            let params = ABParams::new(a, b).unwrap();
            let j = ab_divergence(&p, &q, &DivergenceRequest::new(params, Scope::Joint)).unwrap().value;
            let m = ab_divergence(&p, &q, &DivergenceRequest::new(params, Scope::Marginal((0..6).collect())))
                .unwrap()
                .value;
            assert!((j - m).abs() <= 1e-9 * j.abs().max(1e-12));
        }
    }

    #[test]
    fn general_branch_approaches_alpha_only() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..5 {
            let (p, q) = random_pair(&mut rng, 5);
            let near = joint(&p, &q, 1.0, 1e-7);
            let at = joint(&p, &q, 1.0, 0.0);
            assert!((near - at).abs() < 1e-4, "{near} vs {at}");
        }
    }

    #[test]
    fn general_branch_scales_with_measure() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let (p, q) = random_pair(&mut rng, 5);
        let params = ABParams::new(1.5, 0.5).unwrap();
        let d = |pn: &MarkovNetwork, qn: &MarkovNetwork| {
            Problem::new(pn, qn, p.domain())
                .divergence(params, 0.0, &mut Diagnostics::default())
                .unwrap()
        };
        let base = d(&p.network(), &q.network());
        // scale one factor of each network, so each measure is multiplied by c
        let c: f64 = 3.0;
        let scale_one = |net: MarkovNetwork| {
            let mut fs: Vec<NetFactor> = net.factors().to_vec();
            fs[0].factor = fs[0].factor.scale(c);
            MarkovNetwork::new(net.graph().clone(), fs).unwrap()
        };
        let scaled = d(&scale_one(p.network()), &scale_one(q.network()));
        assert!((scaled - c.powf(2.0) * base).abs() <= 1e-9 * scaled.abs());
    }

    #[test]
    fn hellinger_is_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        for _ in 0..10 {
            let (p, q) = random_pair(&mut rng, 6);
            let a = named_divergence(&p, &q, NamedDivergence::Hellinger, Scope::Joint).unwrap().value;
            let b = named_divergence(&q, &p, NamedDivergence::Hellinger, Scope::Joint).unwrap().value;
            assert!((a - b).abs() < 1e-9);
            assert!((0.0..=1.0).contains(&a));
        }
    }

    #[test]
    fn grid_orders_and_argmax() {
        let mut rng = ChaCha8Rng::seed_from_u64(26);
        let n = 5;
        let vars = VariableTable::binary(n);
        let mut edge = UndirectedGraph::with_vertices(0..n);
        edge.add_edge(0, 1);
        let p = synth::random_model(&mut rng, &vars, &ChordalGraph::from_graph(edge).unwrap()).unwrap();
        // perturb the singleton clique of variable 3
        let mut cpts = p.cpts().to_vec();
        let k = p.cliques().iter().position(|c| c == &vec![3]).unwrap();
        cpts[k] = Factor::new(vec![3], vec![2], vec![0.9, 0.1]).unwrap();
        let q = DecomposableModel::new(vars, cpts).unwrap();

        let same = divergence_grid(&p, &p, 1, NamedDivergence::Hellinger, None).unwrap();
        assert!(same.iter().all(|(_, v)| v.abs() < 1e-9));
        let diff = divergence_grid(&p, &q, 1, NamedDivergence::Hellinger, None).unwrap();
        let best = diff.iter().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
        assert_eq!(best.0, vec![3]);
        assert!(diff.iter().filter(|(t, _)| t != &vec![3]).all(|(_, v)| *v < best.1));
        let pairs = divergence_grid(&p, &q, 2, NamedDivergence::Hellinger, None).unwrap();
        assert_eq!(pairs.len(), 10);
        assert!(pairs.windows(2).all(|w| w[0].0 < w[1].0));
    }

    #[test]
    fn request_validation() {
        let p = uni(&[0.5, 0.5]);
        let bad = |scope| ab_divergence(&p, &p, &DivergenceRequest::new(ABParams::new(1.0, 0.0).unwrap(), scope));
        assert!(bad(Scope::Marginal(vec![])).is_err());
        assert!(bad(Scope::Marginal(vec![3])).is_err());
        assert!(bad(Scope::Conditional {
            target: vec![0],
            given: vec![0]
        })
        .is_err());
        let two = DecomposableModel::new(
            VariableTable::binary(2),
            vec![Factor::new(vec![0, 1], vec![2, 2], vec![0.25; 4]).unwrap()],
        )
        .unwrap();
        assert!(matches!(
            ab_divergence(&p, &two, &DivergenceRequest::joint(1.0, 0.0).unwrap()),
            Err(Error::InvalidModel(_))
        ));
    }
}
