//! Dense tables over discrete variables.
//!
//! A [`Factor`] stores one value per joint assignment of its scope. Scopes
//! are always kept sorted by variable id and values are laid out row-major
//! with the last scope variable varying fastest, so two factors over the same
//! scope are index-aligned without any permutation.

use std::fmt;

use crate::error::{Error, Result};
use crate::VarId;

#[derive(Clone, PartialEq)]
pub struct Factor {
    scope: Vec<VarId>,
    cards: Vec<usize>,
    values: Vec<f64>,
}

impl fmt::Debug for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Factor")
            .field("scope", &self.scope)
            .field("cards", &self.cards)
            .field("values", &self.values)
            .finish()
    }
}

fn strides(cards: &[usize]) -> Vec<usize> {
    let mut s = vec![1; cards.len()];
    for k in (0..cards.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * cards[k + 1];
    }
    s
}

/// Odometer over the joint assignments of `cards`, tracking one flat offset
/// per operand. `operand_strides[j][k]` is operand j's stride for digit k
/// (zero when the operand does not contain that variable).
struct Odometer<'a> {
    cards: &'a [usize],
    digits: Vec<usize>,
    operand_strides: Vec<Vec<usize>>,
    offsets: Vec<usize>,
}

impl<'a> Odometer<'a> {
    fn new(cards: &'a [usize], operand_strides: Vec<Vec<usize>>) -> Self {
        let n = operand_strides.len();
        Odometer {
            cards,
            digits: vec![0; cards.len()],
            operand_strides,
            offsets: vec![0; n],
        }
    }

    fn advance(&mut self) {
        for k in (0..self.cards.len()).rev() {
            self.digits[k] += 1;
            for (off, st) in self.offsets.iter_mut().zip(&self.operand_strides) {
                *off += st[k];
            }
            if self.digits[k] < self.cards[k] {
                return;
            }
            self.digits[k] = 0;
            for (off, st) in self.offsets.iter_mut().zip(&self.operand_strides) {
                *off -= st[k] * self.cards[k];
            }
        }
    }
}

/// Strides of `factor` laid out against the digits of `scope`.
fn aligned_strides(factor: &Factor, scope: &[VarId]) -> Vec<usize> {
    let own = strides(&factor.cards);
    scope
        .iter()
        .map(|v| match factor.scope.binary_search(v) {
            Ok(pos) => own[pos],
            Err(_) => 0,
        })
        .collect()
}

impl Factor {
    /// Builds a factor from a scope in any order; values follow that order with
    /// the last listed variable varying fastest. The result is canonicalised to
    /// sorted scope order.
    pub fn new(scope: Vec<VarId>, cards: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if scope.len() != cards.len() {
            return Err(Error::InvalidModel(format!(
                "scope of length {} with {} cardinalities",
                scope.len(),
                cards.len()
            )));
        }
        if let Some(&c) = cards.iter().find(|&&c| c == 0) {
            return Err(Error::InvalidModel(format!("cardinality {c} in factor")));
        }
        let expected: usize = cards.iter().product();
        if values.len() != expected {
            return Err(Error::InvalidModel(format!(
                "factor over {:?} needs {} values, got {}",
                scope,
                expected,
                values.len()
            )));
        }
        let mut order: Vec<usize> = (0..scope.len()).collect();
        order.sort_by_key(|&i| scope[i]);
        if order.windows(2).any(|w| scope[w[0]] == scope[w[1]]) {
            return Err(Error::InvalidModel(format!(
                "duplicate variable in scope {scope:?}"
            )));
        }
        if order.iter().enumerate().all(|(i, &o)| i == o) {
            return Ok(Factor {
                scope,
                cards,
                values,
            });
        }
        let sorted_scope: Vec<VarId> = order.iter().map(|&i| scope[i]).collect();
        let sorted_cards: Vec<usize> = order.iter().map(|&i| cards[i]).collect();
        // digit k of the sorted layout reads the source stride of order[k]
        let src = strides(&cards);
        let src_strides: Vec<usize> = order.iter().map(|&i| src[i]).collect();
        let mut out = Vec::with_capacity(expected);
        let mut odo = Odometer::new(&sorted_cards, vec![src_strides]);
        for _ in 0..expected {
            out.push(values[odo.offsets[0]]);
            odo.advance();
        }
        Ok(Factor {
            scope: sorted_scope,
            cards: sorted_cards,
            values: out,
        })
    }

    pub fn scalar(value: f64) -> Self {
        Factor {
            scope: Vec::new(),
            cards: Vec::new(),
            values: vec![value],
        }
    }

    pub fn filled(scope: &[VarId], cards: &[usize], value: f64) -> Self {
        let mut pairs: Vec<(VarId, usize)> = scope.iter().copied().zip(cards.iter().copied()).collect();
        pairs.sort_unstable();
        let len = pairs.iter().map(|p| p.1).product();
        Factor {
            scope: pairs.iter().map(|p| p.0).collect(),
            cards: pairs.iter().map(|p| p.1).collect(),
            values: vec![value; len],
        }
    }

    pub fn ones(scope: &[VarId], cards: &[usize]) -> Self {
        Self::filled(scope, cards, 1.0)
    }

    /// Builds a factor over a sorted scope by evaluating `f` at every assignment.
    pub fn from_fn(scope: &[VarId], cards: &[usize], mut f: impl FnMut(&[usize]) -> f64) -> Self {
        debug_assert!(scope.windows(2).all(|w| w[0] < w[1]));
        let len: usize = cards.iter().product();
        let mut values = Vec::with_capacity(len);
        let mut digits = vec![0; cards.len()];
        for _ in 0..len {
            values.push(f(&digits));
            for k in (0..cards.len()).rev() {
                digits[k] += 1;
                if digits[k] < cards[k] {
                    break;
                }
                digits[k] = 0;
            }
        }
        Factor {
            scope: scope.to_vec(),
            cards: cards.to_vec(),
            values,
        }
    }

    pub fn scope(&self) -> &[VarId] {
        &self.scope
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_scalar(&self) -> bool {
        self.scope.is_empty()
    }

    pub fn cardinality_of(&self, var: VarId) -> Option<usize> {
        self.scope.binary_search(&var).ok().map(|i| self.cards[i])
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Flat offset of an assignment given in scope order.
    pub fn flat_index(&self, assignment: &[usize]) -> usize {
        debug_assert_eq!(assignment.len(), self.scope.len());
        assignment
            .iter()
            .zip(&self.cards)
            .fold(0, |acc, (&a, &c)| acc * c + a)
    }

    /// Inverse of [`Factor::flat_index`].
    pub fn assignment(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.cards.len()];
        for k in (0..self.cards.len()).rev() {
            out[k] = index % self.cards[k];
            index /= self.cards[k];
        }
        out
    }

    pub fn value(&self, assignment: &[usize]) -> f64 {
        self.values[self.flat_index(assignment)]
    }

    /// Value at a full assignment indexed by variable id.
    pub fn value_at_full(&self, full: &[usize]) -> f64 {
        let idx = self
            .scope
            .iter()
            .zip(&self.cards)
            .fold(0, |acc, (&v, &c)| acc * c + full[v]);
        self.values[idx]
    }

    fn union_scope(a: &Factor, b: &Factor) -> Result<(Vec<VarId>, Vec<usize>)> {
        let mut scope = Vec::with_capacity(a.scope.len() + b.scope.len());
        let mut cards = Vec::with_capacity(scope.capacity());
        let (mut i, mut j) = (0, 0);
        while i < a.scope.len() || j < b.scope.len() {
            if j == b.scope.len() || (i < a.scope.len() && a.scope[i] < b.scope[j]) {
                scope.push(a.scope[i]);
                cards.push(a.cards[i]);
                i += 1;
            } else if i == a.scope.len() || b.scope[j] < a.scope[i] {
                scope.push(b.scope[j]);
                cards.push(b.cards[j]);
                j += 1;
            } else {
                if a.cards[i] != b.cards[j] {
                    return Err(Error::CardinalityMismatch {
                        var: a.scope[i],
                        left: a.cards[i],
                        right: b.cards[j],
                    });
                }
                scope.push(a.scope[i]);
                cards.push(a.cards[i]);
                i += 1;
                j += 1;
            }
        }
        Ok((scope, cards))
    }

    fn combine(&self, other: &Factor, mut f: impl FnMut(f64, f64) -> Result<f64>) -> Result<Factor> {
        let (scope, cards) = Self::union_scope(self, other)?;
        let len: usize = cards.iter().product();
        let sa = aligned_strides(self, &scope);
        let sb = aligned_strides(other, &scope);
        let mut values = Vec::with_capacity(len);
        let mut odo = Odometer::new(&cards, vec![sa, sb]);
        for _ in 0..len {
            values.push(f(self.values[odo.offsets[0]], other.values[odo.offsets[1]])?);
            odo.advance();
        }
        Ok(Factor {
            scope,
            cards,
            values,
        })
    }

    pub fn multiply(&self, other: &Factor) -> Result<Factor> {
        self.combine(other, |x, y| Ok(x * y))
    }

    /// Aligned quotient with the convention 0/0 = 0.
    pub fn divide(&self, other: &Factor) -> Result<Factor> {
        self.combine(other, |x, y| {
            if y == 0.0 {
                if x == 0.0 {
                    Ok(0.0)
                } else {
                    Err(Error::UndefinedQuotient {
                        what: format!("{x} / 0"),
                    })
                }
            } else {
                Ok(x / y)
            }
        })
    }

    /// Sums out every variable of `drop` that is in scope.
    pub fn marginalize(&self, drop: &[VarId]) -> Factor {
        let keep: Vec<usize> = (0..self.scope.len())
            .filter(|&i| !drop.contains(&self.scope[i]))
            .collect();
        self.sum_onto_positions(&keep)
    }

    /// Sums out everything outside `keep`.
    pub fn marginalize_onto(&self, keep: &[VarId]) -> Factor {
        let keep: Vec<usize> = (0..self.scope.len())
            .filter(|&i| keep.contains(&self.scope[i]))
            .collect();
        self.sum_onto_positions(&keep)
    }

    fn sum_onto_positions(&self, keep: &[usize]) -> Factor {
        if keep.len() == self.scope.len() {
            return self.clone();
        }
        let scope: Vec<VarId> = keep.iter().map(|&i| self.scope[i]).collect();
        let cards: Vec<usize> = keep.iter().map(|&i| self.cards[i]).collect();
        let out_strides = strides(&cards);
        let mut st = vec![0; self.scope.len()];
        for (k, &i) in keep.iter().enumerate() {
            st[i] = out_strides[k];
        }
        let mut values = vec![0.0; cards.iter().product()];
        let mut odo = Odometer::new(&self.cards, vec![st]);
        for &v in &self.values {
            values[odo.offsets[0]] += v;
            odo.advance();
        }
        Factor {
            scope,
            cards,
            values,
        }
    }

    /// Elementwise power with 0^e = 0 for e > 0 and x^0 = 1.
    pub fn map_power(&self, exponent: f64) -> Result<Factor> {
        if exponent == 1.0 {
            return Ok(self.clone());
        }
        if exponent < 0.0 {
            if self.values.iter().any(|&v| v <= 0.0) {
                return Err(Error::NonPositive {
                    what: format!("factor over {:?} raised to {exponent}", self.scope),
                });
            }
        } else if self.values.iter().any(|&v| v < 0.0) {
            return Err(Error::NonPositive {
                what: format!("factor over {:?} with negative entry", self.scope),
            });
        }
        let values = if exponent == 0.0 {
            vec![1.0; self.values.len()]
        } else if exponent == 0.5 {
            self.values.iter().map(|v| v.sqrt()).collect()
        } else if exponent == 2.0 {
            self.values.iter().map(|v| v * v).collect()
        } else {
            self.values.iter().map(|v| v.powf(exponent)).collect()
        };
        Ok(self.with_values(values))
    }

    /// Elementwise natural logarithm.
    pub fn map_log(&self) -> Result<Factor> {
        if self.values.iter().any(|&v| v <= 0.0) {
            return Err(Error::NonPositive {
                what: format!("log of factor over {:?}", self.scope),
            });
        }
        Ok(self.with_values(self.values.iter().map(|v| v.ln()).collect()))
    }

    /// Elementwise 1/x with 1/0 taken as 0, so that products with a numerator
    /// that vanishes at the same assignments follow the 0/0 = 0 rule.
    pub fn pseudo_reciprocal(&self) -> Factor {
        self.with_values(
            self.values
                .iter()
                .map(|&v| if v == 0.0 { 0.0 } else { 1.0 / v })
                .collect(),
        )
    }

    pub fn scale(&self, c: f64) -> Factor {
        self.with_values(self.values.iter().map(|v| v * c).collect())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Factor {
        self.with_values(self.values.iter().map(|&v| f(v)).collect())
    }

    fn with_values(&self, values: Vec<f64>) -> Factor {
        Factor {
            scope: self.scope.clone(),
            cards: self.cards.clone(),
            values,
        }
    }

    /// Inner product with a factor over the same scope.
    pub fn dot(&self, other: &Factor) -> Result<f64> {
        if self.scope != other.scope {
            return Err(Error::Internal(format!(
                "dot product of {:?} and {:?}",
                self.scope, other.scope
            )));
        }
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum())
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}
