use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::program::{BlockKind, ConicProgram, LinExpr, Part, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalTrouble,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// Largest linear-constraint violation of the returned primal point.
    pub primal: f64,
    /// Backend-reported dual residual.
    pub dual: f64,
    /// `|primal - dual| / max(1, |primal|)`.
    pub gap: f64,
    /// Most negative eigenvalue over all PSD blocks (0 when none is negative).
    pub psd: f64,
}

/// Farkas ray for an infeasible program: multipliers `y` (one per
/// constraint) with `sum_i y_i a_i` vanishing on the feasible cone and
/// `sum_i y_i rhs_i = value < 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub multipliers: Vec<f64>,
    pub value: f64,
}

/// Layout of the flat variable vector: one offset per block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct Layout {
    pub offsets: Vec<usize>,
    pub kinds: Vec<BlockKind>,
}

impl Layout {
    pub fn of(p: &ConicProgram) -> Self {
        let mut offsets = Vec::with_capacity(p.blocks.len());
        let mut at = 0;
        for b in &p.blocks {
            offsets.push(at);
            at += b.kind.num_vars();
        }
        Layout { offsets, kinds: p.blocks.iter().map(|b| b.kind).collect() }
    }

    pub fn index(&self, v: Var) -> usize {
        let base = self.offsets[v.block];
        match self.kinds[v.block] {
            BlockKind::Free { .. } | BlockKind::Nonneg { .. } => base + v.row,
            BlockKind::Symmetric { .. } => base + v.col * (v.col + 1) / 2 + v.row,
            BlockKind::Hermitian { dim } => match v.part {
                Part::Re => base + v.col * (v.col + 1) / 2 + v.row,
                Part::Im => base + dim * (dim + 1) / 2 + v.col * (v.col - 1) / 2 + v.row,
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Solution {
    pub status: Status,
    /// Objective in the program's own sense (includes the constant term).
    pub objective: f64,
    /// Dual bound in the program's own sense: for maximisation it is an
    /// upper bound on `objective` up to the residuals.
    pub dual_objective: f64,
    /// One multiplier per constraint, normalised so that for `Max` the dual
    /// bound reads `sum_i y_i rhs_i` and `Le` rows carry `y >= 0`.
    pub duals: Vec<f64>,
    pub certificate: Option<Certificate>,
    pub residuals: Residuals,
    pub iterations: u32,
    /// True when the backend reported reduced accuracy.
    pub reduced_accuracy: bool,
    pub backend_status: String,
    pub(crate) x: Vec<f64>,
    pub(crate) layout: Layout,
}

impl Solution {
    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }

    pub fn value(&self, v: Var) -> f64 {
        self.x[self.layout.index(v)]
    }

    pub fn eval(&self, e: &LinExpr) -> f64 {
        e.eval(|v| self.value(v))
    }

    pub fn scalars(&self, block: usize) -> Vec<f64> {
        match self.layout.kinds[block] {
            BlockKind::Free { len } | BlockKind::Nonneg { len } => {
                (0..len).map(|i| self.value(Var::scalar(block, i))).collect()
            }
            _ => panic!("block {block} is not a scalar block"),
        }
    }

    pub fn symmetric(&self, block: usize) -> DMatrix<f64> {
        let BlockKind::Symmetric { dim } = self.layout.kinds[block] else {
            panic!("block {block} is not symmetric");
        };
        DMatrix::from_fn(dim, dim, |i, j| {
            let (row, col) = if i <= j { (i, j) } else { (j, i) };
            self.value(Var { block, row, col, part: Part::Re })
        })
    }

    pub fn hermitian(&self, block: usize) -> DMatrix<Complex64> {
        let BlockKind::Hermitian { dim } = self.layout.kinds[block] else {
            panic!("block {block} is not hermitian");
        };
        DMatrix::from_fn(dim, dim, |i, j| {
            let (row, col) = if i <= j { (i, j) } else { (j, i) };
            let re = self.value(Var { block, row, col, part: Part::Re });
            let im = if i == j {
                0.0
            } else {
                let v = self.value(Var { block, row, col, part: Part::Im });
                if i < j { v } else { -v }
            };
            Complex64::new(re, im)
        })
    }

    /// Raw flat primal vector in backend order.
    pub fn raw_primal(&self) -> &[f64] {
        &self.x
    }
}
