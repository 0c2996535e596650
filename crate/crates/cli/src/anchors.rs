//! Reference values and tolerances, read from the versioned data file.

use serde::Deserialize;

const BUNDLED: &str = include_str!("../data/anchors.toml");

#[derive(Debug, Clone, Deserialize)]
pub struct Anchors {
    pub version: u32,
    pub table1: Table1,
    pub appendix_b: AppendixB,
    pub porac: Porac,
    pub table2: Table2,
    pub table3: Table3,
    pub fig2: Fig2,
    pub prop6: Prop6,
    pub prop7: Prop7,
    pub monogamy: Monogamy,
    pub keyrate: KeyRate,
}

#[derive(Debug, Clone, Deserialize)]
pub struct Table1 {
    pub tol_lp: f64,
    pub tol_q: f64,
    pub seesaw_dim: usize,
    pub restarts: usize,
    pub s_c: Vec<f64>,
    pub s_nc: Vec<f64>,
    pub s_q: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct AppendixB {
    pub tol: f64,
    pub s_q1: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct Porac {
    pub n: Vec<usize>,
    pub tol_lp: f64,
    pub tol_q: f64,
    pub s_nc: Vec<f64>,
    pub s_q: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct Table2 {
    pub n: Vec<usize>,
    pub tol_lp: f64,
    pub tol_q: f64,
    pub s_nc: Vec<f64>,
    pub s_q: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct Table3 {
    pub n: Vec<usize>,
    pub tol_lp: f64,
    pub tol_q: f64,
    pub seesaw_dim: usize,
    pub restarts: usize,
    pub s_c: Vec<f64>,
    pub s_nc: Vec<f64>,
    pub s_q1: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct Fig2 {
    pub alpha: Vec<f64>,
    pub tol: f64,
    pub seesaw_dim: usize,
    pub max_dim: usize,
    pub restarts: usize,
}

#[derive(Debug, Clone, Deserialize)]
pub struct Prop6 {
    pub tol_lp: f64,
    pub s_nc: f64,
    pub projective_max: f64,
    pub seesaw_dim: usize,
    pub restarts: usize,
    pub seesaw_min: f64,
    pub q1_max: f64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct Prop7 {
    pub tol: f64,
    pub s_nc: f64,
    pub s_q1: f64,
    pub pure_max: f64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct Monogamy {
    pub tol_ns: f64,
    pub ns: f64,
    pub tol_q: f64,
    pub q_sum: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Deserialize)]
pub struct KeyRate {
    pub points: usize,
}

impl Anchors {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED).expect("bundled anchors parse")
    }

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &std::path::Path) -> anyhow::Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_file_is_consistent() {
        let a = Anchors::bundled();
        assert_eq!(a.version, 1);
        assert_eq!(a.table1.s_q.len(), 6);
        assert_eq!(a.appendix_b.s_q1.len(), 7);
        assert_eq!(a.porac.n.len(), a.porac.s_q.len());
        assert_eq!(a.table3.n.len(), a.table3.s_q1.len());
        assert_eq!(a.table2.n.len(), a.table2.s_q.len());
    }
}
