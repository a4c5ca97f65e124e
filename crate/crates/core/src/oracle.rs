//! Brute-force reference values computed on explicit joint tables.

use crate::divergence::{Branch, DivergenceRequest, Scope};
use crate::error::{Error, Result};
use crate::factor::Factor;
use crate::model::{DecomposableModel, MarkovNetwork, VariableTable};
use crate::VarId;

/// Default cap on the number of cells of an explicit joint table.
pub const MAX_ORACLE_CELLS: f64 = (1u64 << 24) as f64;

/// Explicit distribution over every variable, laid out like a [`Factor`]
/// over the sorted variable ids.
#[derive(Clone, Debug, PartialEq)]
pub struct JointTable {
    variables: VariableTable,
    table: Factor,
}

impl JointTable {
    pub fn variables(&self) -> &VariableTable {
        &self.variables
    }

    pub fn probabilities(&self) -> &[f64] {
        self.table.values()
    }

    pub fn as_factor(&self) -> &Factor {
        &self.table
    }

    /// Sum over everything outside `keep`.
    pub fn marginalize(&self, keep: &[VarId]) -> Factor {
        self.table.marginalize_onto(keep)
    }
}

pub fn joint_table(model: &DecomposableModel) -> Result<JointTable> {
    joint_table_limited(model, MAX_ORACLE_CELLS)
}

pub fn joint_table_limited(model: &DecomposableModel, limit: f64) -> Result<JointTable> {
    let vars = model.variables().clone();
    guard(&vars, limit)?;
    let all: Vec<VarId> = (0..vars.len()).collect();
    let cards = vars.cardinalities();
    let table = Factor::from_fn(&all, &cards, |x| model.joint_probability(x));
    Ok(JointTable { variables: vars, table })
}

/// The product of a network's factors (reciprocals with 1/0 = 0) tabulated
/// over every variable of `vars`.
pub fn network_table(net: &MarkovNetwork, vars: &VariableTable) -> Result<JointTable> {
    guard(vars, MAX_ORACLE_CELLS)?;
    let all: Vec<VarId> = (0..vars.len()).collect();
    let tables: Vec<Factor> = net.factors().iter().map(|f| f.materialize()).collect();
    let table = Factor::from_fn(&all, &vars.cardinalities(), |x| tables.iter().map(|t| t.value_at_full(x)).product());
    Ok(JointTable {
        variables: vars.clone(),
        table,
    })
}

fn guard(vars: &VariableTable, limit: f64) -> Result<()> {
    let cells = vars.domain().size();
    if cells > limit {
        return Err(Error::DomainTooLarge { cells, limit });
    }
    Ok(())
}

fn log_of(x: f64, what: &str) -> Result<f64> {
    if x <= 0.0 {
        return Err(Error::NonPositive {
            what: format!("{what} probability {x}"),
        });
    }
    Ok(x.ln())
}

fn pow(x: f64, e: f64, what: &str) -> Result<f64> {
    if e < 0.0 && x <= 0.0 {
        return Err(Error::NonPositive {
            what: format!("{what} probability {x} raised to {e}"),
        });
    }
    Ok(if e == 0.0 { 1.0 } else { x.powf(e) })
}

/// One summand of the divergence sum at a point with probabilities `p`, `q`.
fn pointwise(branch: Branch, a: f64, b: f64, p: f64, q: f64) -> Result<f64> {
    Ok(match branch {
        Branch::General => {
            let s = a + b;
            -(pow(p, a, "P")? * pow(q, b, "Q")? - a / s * pow(p, s, "P")? - b / s * pow(q, s, "Q")?) / (a * b)
        }
        Branch::AlphaOnly => {
            let (pa, qa) = (pow(p, a, "P")?, pow(q, a, "Q")?);
            (pa * (log_of(pa, "P")? - log_of(qa, "Q")?) - pa + qa) / (a * a)
        }
        Branch::Opposite => {
            let r = pow(q, a, "Q")? / pow(p, a, "P")?;
            (log_of(r, "Q/P")? + 1.0 / r - 1.0) / (a * a)
        }
        Branch::BetaOnly => {
            let (pb, qb) = (pow(p, b, "P")?, pow(q, b, "Q")?);
            (qb * (log_of(qb, "Q")? - log_of(pb, "P")?) - qb + pb) / (b * b)
        }
        Branch::BothZero => {
            let d = log_of(p, "P")? - log_of(q, "Q")?;
            0.5 * d * d
        }
    })
}

fn sum_pointwise(branch: Branch, a: f64, b: f64, p: &[f64], q: &[f64]) -> Result<f64> {
    let mut total = 0.0;
    for (&x, &y) in p.iter().zip(q) {
        total += pointwise(branch, a, b, x, y)?;
    }
    Ok(total)
}

fn quotient(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// The divergence summed literally over the explicit tables.
pub fn oracle_divergence(p: &JointTable, q: &JointTable, request: &DivergenceRequest) -> Result<f64> {
    if p.variables.cardinalities() != q.variables.cardinalities() {
        return Err(Error::InvalidModel("tables are over different variables".into()));
    }
    let (a, b) = (request.params.alpha(), request.params.beta());
    let branch = request.params.branch();
    match &request.scope {
        Scope::Joint => sum_pointwise(branch, a, b, p.probabilities(), q.probabilities()),
        Scope::Marginal(z) => {
            let (pz, qz) = (p.marginalize(z), q.marginalize(z));
            sum_pointwise(branch, a, b, pz.values(), qz.values())
        }
        Scope::Conditional { target, given } => {
            let mut w: Vec<VarId> = target.iter().chain(given).copied().collect();
            w.sort_unstable();
            w.dedup();
            let (pw, qw) = (p.marginalize(&w), q.marginalize(&w));
            let (pz, qz) = (p.marginalize(given), q.marginalize(given));
            let mut x = vec![0; p.variables.len()];
            let mut total = 0.0;
            for i in 0..pw.len() {
                for (&v, &val) in w.iter().zip(&pw.assignment(i)) {
                    x[v] = val;
                }
                let weight = pz.value_at_full(&x);
                if weight == 0.0 {
                    continue;
                }
                let pc = quotient(pw.values()[i], weight);
                let qc = quotient(qw.values()[i], qz.value_at_full(&x));
                total += weight * pointwise(branch, a, b, pc, qc)?;
            }
            Ok(total)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergence::ABParams;

    fn uni(p: &[f64]) -> JointTable {
        let f = Factor::new(vec![0], vec![2], p.to_vec()).unwrap();
        let m = DecomposableModel::new(VariableTable::binary(1), vec![f]).unwrap();
        joint_table(&m).unwrap()
    }

    fn req(a: f64, b: f64) -> DivergenceRequest {
        DivergenceRequest::joint(a, b).unwrap()
    }

    #[test]
    fn tables_of_simple_models() {
        assert_eq!(uni(&[0.5, 0.5]).probabilities(), &[0.5, 0.5]);
        let three: Vec<Factor> = (0..3)
            .map(|v| Factor::new(vec![v], vec![2], vec![0.5, 0.5]).unwrap())
            .collect();
        let m = DecomposableModel::new(VariableTable::binary(3), three).unwrap();
        assert_eq!(joint_table(&m).unwrap().probabilities(), &[0.125; 8]);
    }

    #[test]
    fn hand_values() {
        let p = uni(&[0.5, 0.5]);
        let q = uni(&[0.25, 0.75]);
        assert!((oracle_divergence(&p, &q, &req(1.0, 0.0)).unwrap() - 0.143841).abs() < 1e-6);
        assert!((oracle_divergence(&p, &q, &req(0.0, 0.0)).unwrap() - 0.322427).abs() < 1e-6);
        for (a, b) in [(1.5, 0.5), (1.0, 0.0), (1.0, -1.0), (0.0, 1.0), (0.0, 0.0)] {
            assert!(oracle_divergence(&p, &p, &req(a, b)).unwrap().abs() < 1e-12);
        }
        let x = uni(&[1.0, 0.0]);
        let y = uni(&[0.0, 1.0]);
        assert!((oracle_divergence(&x, &y, &req(0.5, 0.5)).unwrap() - 4.0).abs() < 1e-12);
        assert!(oracle_divergence(&x, &y, &req(1.0, 0.0)).is_err());
    }

    #[test]
    fn marginal_of_everything_is_joint() {
        let f = Factor::new(vec![0, 1], vec![2, 2], vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let g = Factor::new(vec![0, 1], vec![2, 2], vec![0.4, 0.3, 0.2, 0.1]).unwrap();
        let p = joint_table(&DecomposableModel::new(VariableTable::binary(2), vec![f]).unwrap()).unwrap();
        let q = joint_table(&DecomposableModel::new(VariableTable::binary(2), vec![g]).unwrap()).unwrap();
        let params = ABParams::new(1.5, 0.5).unwrap();
        let j = oracle_divergence(&p, &q, &DivergenceRequest::new(params, Scope::Joint)).unwrap();
        let m = oracle_divergence(&p, &q, &DivergenceRequest::new(params, Scope::Marginal(vec![0, 1]))).unwrap();
        assert_eq!(j, m);
    }

    #[test]
    fn domain_guard() {
        let vars = VariableTable::binary(13);
        let cpts = (0..13).map(|v| Factor::new(vec![v], vec![2], vec![0.5, 0.5]).unwrap()).collect();
        let m = DecomposableModel::new(vars, cpts).unwrap();
        assert!(matches!(joint_table_limited(&m, 4096.0), Err(Error::DomainTooLarge { .. })));
        assert!(joint_table_limited(&m, 8192.0).is_ok());
    }
}
