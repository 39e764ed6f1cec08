//! Dense factors over discrete variables, row-major with the last variable
//! varying fastest.

use crate::error::{Error, Result};

/// Largest intermediate factor the eliminator will materialize.
pub(crate) const MAX_FACTOR_ENTRIES: u128 = 1 << 28;

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Factor {
    pub vars: Vec<usize>,
    pub cards: Vec<usize>,
    pub values: Vec<f64>,
}

impl Factor {
    pub fn scalar(value: f64) -> Self {
        Self {
            vars: Vec::new(),
            cards: Vec::new(),
            values: vec![value],
        }
    }

    pub fn indicator(var: usize, card: usize, state: usize) -> Self {
        let mut values = vec![0.0; card];
        values[state] = 1.0;
        Self {
            vars: vec![var],
            cards: vec![card],
            values,
        }
    }

    fn strides(cards: &[usize]) -> Vec<usize> {
        let mut strides = vec![1; cards.len()];
        for i in (0..cards.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * cards[i + 1];
        }
        strides
    }

    pub fn position(&self, var: usize) -> Option<usize> {
        self.vars.iter().position(|&v| v == var)
    }

    /// Fixes `var` to `state` and drops it from the scope.
    pub fn restrict(&self, var: usize, state: usize) -> Self {
        let Some(axis) = self.position(var) else {
            return self.clone();
        };
        let strides = Self::strides(&self.cards);
        let inner = strides[axis];
        let span = inner * self.cards[axis];
        let outer = self.values.len() / span;
        let mut values = Vec::with_capacity(outer * inner);
        for o in 0..outer {
            let base = o * span + state * inner;
            values.extend_from_slice(&self.values[base..base + inner]);
        }
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        vars.remove(axis);
        cards.remove(axis);
        Self {
            vars,
            cards,
            values,
        }
    }

    /// Pointwise product over the union scope (`self`'s variables first).
    pub fn product(&self, other: &Self) -> Result<Self> {
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        for (&v, &c) in other.vars.iter().zip(&other.cards) {
            if !vars.contains(&v) {
                vars.push(v);
                cards.push(c);
            }
        }
        let size = cards.iter().map(|&c| c as u128).product::<u128>();
        if size > MAX_FACTOR_ENTRIES {
            return Err(Error::CapExceeded {
                what: "intermediate factor",
                size,
                cap: MAX_FACTOR_ENTRIES,
            });
        }
        let a_strides = Self::strides(&self.cards);
        let b_strides = Self::strides(&other.cards);
        // per output axis: how far a and b move when that axis increments
        let step_a: Vec<usize> = vars
            .iter()
            .map(|&v| self.position(v).map_or(0, |i| a_strides[i]))
            .collect();
        let step_b: Vec<usize> = vars
            .iter()
            .map(|&v| other.position(v).map_or(0, |i| b_strides[i]))
            .collect();

        let size = size as usize;
        let mut values = Vec::with_capacity(size);
        let mut counter = vec![0usize; vars.len()];
        let (mut ia, mut ib) = (0usize, 0usize);
        for _ in 0..size {
            values.push(self.values[ia] * other.values[ib]);
            for axis in (0..vars.len()).rev() {
                counter[axis] += 1;
                ia += step_a[axis];
                ib += step_b[axis];
                if counter[axis] < cards[axis] {
                    break;
                }
                ia -= step_a[axis] * cards[axis];
                ib -= step_b[axis] * cards[axis];
                counter[axis] = 0;
            }
        }
        Ok(Self {
            vars,
            cards,
            values,
        })
    }

    pub fn sum_out(&self, var: usize) -> Self {
        let Some(axis) = self.position(var) else {
            return self.clone();
        };
        let strides = Self::strides(&self.cards);
        let inner = strides[axis];
        let card = self.cards[axis];
        let span = inner * card;
        let outer = self.values.len() / span;
        let mut values = vec![0.0; outer * inner];
        for o in 0..outer {
            for s in 0..card {
                let base = o * span + s * inner;
                let row = &self.values[base..base + inner];
                for (acc, &x) in values[o * inner..(o + 1) * inner].iter_mut().zip(row) {
                    *acc += x;
                }
            }
        }
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        vars.remove(axis);
        cards.remove(axis);
        Self {
            vars,
            cards,
            values,
        }
    }

    /// Reorders the scope to `order` (which must be a permutation of it).
    pub fn permuted(&self, order: &[usize]) -> Self {
        if order == self.vars.as_slice() {
            return self.clone();
        }
        let cards: Vec<usize> = order
            .iter()
            .map(|&v| self.cards[self.position(v).unwrap()])
            .collect();
        let src_strides = Self::strides(&self.cards);
        let step: Vec<usize> = order
            .iter()
            .map(|&v| src_strides[self.position(v).unwrap()])
            .collect();
        let mut values = Vec::with_capacity(self.values.len());
        let mut counter = vec![0usize; order.len()];
        let mut src = 0usize;
        for _ in 0..self.values.len() {
            values.push(self.values[src]);
            for axis in (0..order.len()).rev() {
                counter[axis] += 1;
                src += step[axis];
                if counter[axis] < cards[axis] {
                    break;
                }
                src -= step[axis] * cards[axis];
                counter[axis] = 0;
            }
        }
        Self {
            vars: order.to_vec(),
            cards,
            values,
        }
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn scale(&mut self, by: f64) {
        for x in &mut self.values {
            *x *= by;
        }
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}
