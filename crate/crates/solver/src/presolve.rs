use std::collections::{BTreeMap, HashMap};

use crate::program::{ConicProgram, Relation, Var};

/// Echelon basis over the equality rows seen so far. Each stored row is
/// keyed by its smallest column and scaled so that entry is 1.
#[derive(Default)]
struct Echelon {
    pivots: HashMap<usize, Vec<(usize, f64)>>,
}

impl Echelon {
    /// Reduce `row` (right-hand side in column `usize::MAX`) against the
    /// basis and store it if it adds a direction. Otherwise returns the
    /// reduced right-hand side and the scale it should be judged against.
    fn insert(&mut self, row: BTreeMap<usize, f64>, tol: f64) -> Result<(), (f64, f64)> {
        let mut r = row;
        let scale = r.iter().filter(|(&c, _)| c != usize::MAX).fold(0.0_f64, |m, (_, v)| m.max(v.abs()));
        if scale == 0.0 {
            return Err((r.get(&usize::MAX).copied().unwrap_or(0.0), 1.0));
        }
        let cut = tol * scale;
        let mut cursor = 0usize;
        loop {
            let next = r.range(cursor..).map(|(&c, &v)| (c, v)).find(|&(c, v)| {
                c != usize::MAX && (v.abs() <= cut || self.pivots.contains_key(&c))
            });
            let Some((c, v)) = next else { break };
            if v.abs() <= cut {
                r.remove(&c);
            } else {
                let p = &self.pivots[&c];
                for &(cc, pv) in p {
                    *r.entry(cc).or_insert(0.0) -= v * pv;
                }
                r.remove(&c);
            }
            cursor = c + 1;
        }
        r.retain(|&c, v| c == usize::MAX || v.abs() > cut);
        let Some((&lead, &lv)) = r.iter().find(|(&c, _)| c != usize::MAX) else {
            return Err((r.get(&usize::MAX).copied().unwrap_or(0.0), scale));
        };
        let stored = r.iter().map(|(&c, &v)| (c, v / lv)).collect();
        debug_assert!(!self.pivots.contains_key(&lead));
        self.pivots.insert(lead, stored);
        Ok(())
    }
}

impl ConicProgram {
    /// Drop equality constraints that are linear combinations of earlier
    /// ones (relative tolerance `tol`). Inconsistent rows are kept so that
    /// the solver still reports infeasibility. Returns the number removed.
    pub fn remove_dependent_equalities(&mut self, tol: f64) -> usize {
        let mut cols: HashMap<Var, usize> = HashMap::new();
        let mut vars: Vec<Var> = self
            .constraints
            .iter()
            .filter(|c| c.rel == Relation::Eq)
            .flat_map(|c| c.lhs.terms.iter().map(|(v, _)| *v))
            .collect();
        vars.sort();
        vars.dedup();
        for (i, v) in vars.into_iter().enumerate() {
            cols.insert(v, i);
        }
        let mut ech = Echelon::default();
        let mut keep = Vec::with_capacity(self.constraints.len());
        for c in &self.constraints {
            if c.rel != Relation::Eq {
                keep.push(true);
                continue;
            }
            let mut row: BTreeMap<usize, f64> = BTreeMap::new();
            for (v, a) in &c.lhs.terms {
                *row.entry(cols[v]).or_insert(0.0) += a;
            }
            row.insert(usize::MAX, c.rhs - c.lhs.constant);
            // a dependent row survives only if it contradicts the others
            keep.push(match ech.insert(row, tol) {
                Ok(()) => true,
                Err((rhs, scale)) => rhs.abs() > 1e3 * tol * scale.max(1.0),
            });
        }
        let before = self.constraints.len();
        let mut it = keep.into_iter();
        self.constraints.retain(|_| it.next().unwrap());
        before - self.constraints.len()
    }
}

#[cfg(test)]
mod tests {
    use crate::program::{ConicProgram, LinExpr, Relation, Sense, Var};

    fn row(terms: &[(usize, f64)]) -> LinExpr {
        let mut e = LinExpr::new();
        for &(i, c) in terms {
            e.add_term(Var::scalar(0, i), c);
        }
        e
    }

    #[test]
    fn drops_combinations_keeps_conflicts() {
        let mut p = ConicProgram::new(Sense::Max);
        p.add_free(3, None);
        p.add_constraint(row(&[(0, 1.0), (1, 1.0)]), Relation::Eq, 1.0);
        p.add_constraint(row(&[(1, 1.0), (2, -1.0)]), Relation::Eq, 0.0);
        p.add_constraint(row(&[(0, 2.0), (1, 3.0), (2, -1.0)]), Relation::Eq, 2.0);
        p.add_constraint(row(&[(0, 1.0), (2, 1.0)]), Relation::Eq, 5.0);
        p.add_constraint(row(&[(0, 3.0), (1, 3.0)]), Relation::Eq, 3.0);
        p.add_constraint(row(&[(0, 1.0)]), Relation::Le, 7.0);
        assert_eq!(p.remove_dependent_equalities(1e-10), 2);
        assert_eq!(p.constraints.len(), 4);
        // x0 + x1 = 1 and x1 = x2 give x0 + x2 = 1; the row asking for 5 stays.
        assert_eq!(p.constraints[2].rhs, 5.0);
    }
}
