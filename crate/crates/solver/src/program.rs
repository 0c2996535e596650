//! Sparse description of a linear/semidefinite program.
//!
//! A [`ConicProgram`] owns a list of variable blocks (free scalars,
//! nonnegative scalars, real symmetric PSD matrices, complex Hermitian PSD
//! matrices) and linear constraints over individual block entries. Matrix
//! entries are always addressed through their canonical upper-triangle
//! representative, so `X[1][0]` and `X[0][1]` refer to the same variable.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::SolverError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Max,
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum BlockKind {
    /// Unconstrained real scalars.
    Free { len: usize },
    /// Real scalars constrained to be `>= 0`.
    Nonneg { len: usize },
    /// Real symmetric `dim x dim` matrix constrained PSD.
    Symmetric { dim: usize },
    /// Complex Hermitian `dim x dim` matrix constrained PSD. Solved through
    /// the real embedding `[[A, -B], [B, A]]` of size `2 dim`.
    Hermitian { dim: usize },
}

impl BlockKind {
    /// Number of real decision variables carried by the block.
    pub fn num_vars(&self) -> usize {
        match *self {
            BlockKind::Free { len } | BlockKind::Nonneg { len } => len,
            BlockKind::Symmetric { dim } => dim * (dim + 1) / 2,
            BlockKind::Hermitian { dim } => dim * dim,
        }
    }

    /// Side length of the real PSD cone the block lives in (0 for scalars).
    pub fn psd_dim(&self) -> usize {
        match *self {
            BlockKind::Symmetric { dim } => dim,
            BlockKind::Hermitian { dim } => 2 * dim,
            _ => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(flatten)]
    pub kind: BlockKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Part {
    Re,
    Im,
}

/// Handle to one real decision variable.
///
/// Scalars use `row = index, col = 0, part = Re`. Symmetric entries use
/// `row <= col`. Hermitian entries use `row <= col` for the real part and
/// `row < col` for the imaginary part; the constructor helpers enforce this.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Var {
    pub block: usize,
    pub row: usize,
    pub col: usize,
    pub part: Part,
}

impl Var {
    pub fn scalar(block: usize, index: usize) -> Self {
        Var { block, row: index, col: 0, part: Part::Re }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = match self.part {
            Part::Re => "re",
            Part::Im => "im",
        };
        write!(f, "b{}[{},{}].{}", self.block, self.row, self.col, p)
    }
}

/// Sparse real-linear expression `sum coeff * var + constant`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LinExpr {
    pub terms: Vec<(Var, f64)>,
    #[serde(default)]
    pub constant: f64,
}

impl LinExpr {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        LinExpr { terms: Vec::new(), constant: c }
    }

    pub fn var(v: Var) -> Self {
        LinExpr { terms: vec![(v, 1.0)], constant: 0.0 }
    }

    pub fn add_term(&mut self, v: Var, c: f64) -> &mut Self {
        if c != 0.0 {
            self.terms.push((v, c));
        }
        self
    }

    pub fn add_constant(&mut self, c: f64) -> &mut Self {
        self.constant += c;
        self
    }

    pub fn add_expr(&mut self, other: &LinExpr, scale: f64) -> &mut Self {
        for &(v, c) in &other.terms {
            self.add_term(v, c * scale);
        }
        self.constant += other.constant * scale;
        self
    }

    pub fn scaled(&self, s: f64) -> LinExpr {
        let mut e = LinExpr::new();
        e.add_expr(self, s);
        e
    }

    /// Merge duplicate variables and drop zero coefficients.
    pub fn normalize(&mut self) {
        let mut acc: BTreeMap<Var, f64> = BTreeMap::new();
        for &(v, c) in &self.terms {
            *acc.entry(v).or_insert(0.0) += c;
        }
        self.terms = acc.into_iter().filter(|&(_, c)| c != 0.0).collect();
    }

    pub fn normalized(mut self) -> Self {
        self.normalize();
        self
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|&(_, c)| c == 0.0)
    }

    pub fn eval(&self, value: impl Fn(Var) -> f64) -> f64 {
        self.terms.iter().map(|&(v, c)| c * value(v)).sum::<f64>() + self.constant
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "==")]
    Eq,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
}

/// `lhs (rel) rhs`, where any constant inside `lhs` is moved to the right.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub lhs: LinExpr,
    pub rel: Relation,
    pub rhs: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl Constraint {
    /// Row coefficients and right-hand side with the constant folded in.
    pub fn row(&self) -> (Vec<(Var, f64)>, f64) {
        let e = self.lhs.clone().normalized();
        (e.terms, self.rhs - e.constant)
    }

    /// Signed violation: positive means the constraint is violated by that much.
    pub fn violation(&self, value: impl Fn(Var) -> f64) -> f64 {
        let lhs = self.lhs.eval(value);
        match self.rel {
            Relation::Eq => (lhs - self.rhs).abs(),
            Relation::Le => lhs - self.rhs,
            Relation::Ge => self.rhs - lhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConicProgram {
    pub sense: Sense,
    pub blocks: Vec<Block>,
    pub constraints: Vec<Constraint>,
    pub objective: LinExpr,
    /// Optional diagonal quadratic term `1/2 sum w_i x_i^2`, only meaningful
    /// with [`Sense::Min`].
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub quadratic: Vec<(Var, f64)>,
}

impl ConicProgram {
    pub fn new(sense: Sense) -> Self {
        ConicProgram {
            sense,
            blocks: Vec::new(),
            constraints: Vec::new(),
            objective: LinExpr::new(),
            quadratic: Vec::new(),
        }
    }

    fn push_block(&mut self, name: Option<&str>, kind: BlockKind) -> usize {
        self.blocks.push(Block { name: name.map(str::to_owned), kind });
        self.blocks.len() - 1
    }

    pub fn add_free(&mut self, len: usize, name: Option<&str>) -> usize {
        self.push_block(name, BlockKind::Free { len })
    }

    pub fn add_nonneg(&mut self, len: usize, name: Option<&str>) -> usize {
        self.push_block(name, BlockKind::Nonneg { len })
    }

    pub fn add_symmetric(&mut self, dim: usize, name: Option<&str>) -> usize {
        self.push_block(name, BlockKind::Symmetric { dim })
    }

    pub fn add_hermitian(&mut self, dim: usize, name: Option<&str>) -> usize {
        self.push_block(name, BlockKind::Hermitian { dim })
    }

    /// Entry `(i, j)` of a symmetric block.
    pub fn sym(&self, block: usize, i: usize, j: usize) -> Var {
        let (row, col) = if i <= j { (i, j) } else { (j, i) };
        Var { block, row, col, part: Part::Re }
    }

    /// Real-linear expression for `Re H[i][j]` of a Hermitian block.
    pub fn herm_re(&self, block: usize, i: usize, j: usize) -> LinExpr {
        let (row, col) = if i <= j { (i, j) } else { (j, i) };
        LinExpr::var(Var { block, row, col, part: Part::Re })
    }

    /// Real-linear expression for `Im H[i][j]`; zero on the diagonal and
    /// sign-flipped below it.
    pub fn herm_im(&self, block: usize, i: usize, j: usize) -> LinExpr {
        use std::cmp::Ordering::*;
        match i.cmp(&j) {
            Equal => LinExpr::new(),
            Less => LinExpr::var(Var { block, row: i, col: j, part: Part::Im }),
            Greater => {
                let mut e = LinExpr::new();
                e.add_term(Var { block, row: j, col: i, part: Part::Im }, -1.0);
                e
            }
        }
    }

    pub fn add_constraint(&mut self, lhs: LinExpr, rel: Relation, rhs: f64) {
        self.constraints.push(Constraint { lhs, rel, rhs, label: None });
    }

    pub fn add_labeled(&mut self, lhs: LinExpr, rel: Relation, rhs: f64, label: impl Into<String>) {
        self.constraints.push(Constraint { lhs, rel, rhs, label: Some(label.into()) });
    }

    /// Sum of real PSD cone side lengths (Hermitian blocks count twice).
    pub fn total_psd_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.kind.psd_dim()).sum()
    }

    pub fn num_vars(&self) -> usize {
        self.blocks.iter().map(|b| b.kind.num_vars()).sum()
    }

    /// Check that every variable reference points inside a declared block and
    /// uses the canonical orientation.
    pub fn validate(&self) -> Result<(), SolverError> {
        let check = |v: &Var| -> Result<(), SolverError> {
            let bad = |why: &str| SolverError::Malformed(format!("{v}: {why}"));
            let block = self.blocks.get(v.block).ok_or_else(|| bad("unknown block"))?;
            match block.kind {
                BlockKind::Free { len } | BlockKind::Nonneg { len } => {
                    if v.row >= len || v.col != 0 || v.part != Part::Re {
                        return Err(bad("scalar index out of range"));
                    }
                }
                BlockKind::Symmetric { dim } => {
                    if v.col >= dim || v.row > v.col || v.part != Part::Re {
                        return Err(bad("symmetric entry not in upper triangle"));
                    }
                }
                BlockKind::Hermitian { dim } => {
                    let ok = v.col < dim
                        && match v.part {
                            Part::Re => v.row <= v.col,
                            Part::Im => v.row < v.col,
                        };
                    if !ok {
                        return Err(bad("hermitian entry not canonical"));
                    }
                }
            }
            Ok(())
        };
        for c in &self.constraints {
            for (v, _) in &c.lhs.terms {
                check(v)?;
            }
        }
        for (v, _) in &self.objective.terms {
            check(v)?;
        }
        for (v, _) in &self.quadratic {
            check(v)?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String, SolverError> {
        serde_json::to_string_pretty(self).map_err(|e| SolverError::Io(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self, SolverError> {
        let p: ConicProgram =
            serde_json::from_str(s).map_err(|e| SolverError::Malformed(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    pub fn dump(&self, path: &Path) -> Result<(), SolverError> {
        std::fs::write(path, self.to_json()?).map_err(|e| SolverError::Io(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, SolverError> {
        let s = std::fs::read_to_string(path).map_err(|e| SolverError::Io(e.to_string()))?;
        Self::from_json(&s)
    }
}
