use std::fmt;

use serde::{Deserialize, Serialize};

/// Letter of an operator word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Atom {
    U { y: usize, k: usize },
    Udag { y: usize, k: usize },
    Proj { y: usize, k: usize },
    StateProj { x: usize },
}

impl Atom {
    pub fn dagger(self) -> Atom {
        match self {
            Atom::U { y, k } => Atom::Udag { y, k },
            Atom::Udag { y, k } => Atom::U { y, k },
            a => a,
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::U { y, k } => write!(f, "U{y}_{k}"),
            Atom::Udag { y, k } => write!(f, "U{y}_{k}+"),
            Atom::Proj { y, k } => write!(f, "P{y}_{k}"),
            Atom::StateProj { x } => write!(f, "S{x}"),
        }
    }
}

/// Product of atoms; the empty word is the identity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OperatorWord(pub Vec<Atom>);

impl OperatorWord {
    pub fn identity() -> Self {
        OperatorWord(Vec::new())
    }

    pub fn atom(a: Atom) -> Self {
        OperatorWord(vec![a])
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dagger(&self) -> Self {
        OperatorWord(self.0.iter().rev().map(|a| a.dagger()).collect())
    }

    pub fn concat(&self, other: &OperatorWord) -> Self {
        OperatorWord(self.0.iter().chain(&other.0).copied().collect())
    }

    /// Normal form under `P P = P` and `P^y_k P^y_l = 0` for `k != l`;
    /// `None` for the zero operator.
    pub fn reduce_projective(&self) -> Option<OperatorWord> {
        let mut out: Vec<Atom> = Vec::with_capacity(self.0.len());
        for &a in &self.0 {
            match (out.last(), a) {
                (Some(&Atom::Proj { y: y0, k: k0 }), Atom::Proj { y, k }) if y0 == y => {
                    if k0 != k {
                        return None;
                    }
                }
                _ => out.push(a),
            }
        }
        Some(OperatorWord(out))
    }
}

impl fmt::Display for OperatorWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "I");
        }
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

/// `I, U^0_0, U^0_0+, U^0_1, ...`: position `2(K-1)y + 2k + u + 1`.
pub fn unitary_words(y: usize, k: usize) -> Vec<OperatorWord> {
    let mut w = vec![OperatorWord::identity()];
    for yy in 0..y {
        for kk in 0..k.saturating_sub(1) {
            w.push(OperatorWord::atom(Atom::U { y: yy, k: kk }));
            w.push(OperatorWord::atom(Atom::Udag { y: yy, k: kk }));
        }
    }
    w
}

/// Reduced nonzero projector words of length at most `level`.
pub fn projective_words(y: usize, k: usize, level: usize) -> Vec<OperatorWord> {
    let atoms: Vec<Atom> =
        (0..y).flat_map(|yy| (0..k.saturating_sub(1)).map(move |kk| Atom::Proj { y: yy, k: kk })).collect();
    let mut words = vec![OperatorWord::identity()];
    let mut frontier = vec![OperatorWord::identity()];
    for _ in 0..level {
        let mut next = Vec::new();
        for w in &frontier {
            for &a in &atoms {
                if let (Some(Atom::Proj { y: y0, .. }), Atom::Proj { y: y1, .. }) = (w.0.last(), a) {
                    if *y0 == y1 {
                        continue;
                    }
                }
                let mut v = w.clone();
                v.0.push(a);
                next.push(v);
            }
        }
        words.extend(next.iter().cloned());
        frontier = next;
    }
    words
}
