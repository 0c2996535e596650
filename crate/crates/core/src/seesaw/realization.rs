use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scenario::{Behaviour, Scenario};

pub type CMat = DMatrix<Complex64>;

pub const PSD_TOL: f64 = 1e-9;
pub const TRACE_TOL: f64 = 1e-10;
pub const COMPLETENESS_TOL: f64 = 1e-9;
pub const EQUIVALENCE_TOL: f64 = 1e-8;

/// States `rho_x` and POVMs `{M^y_k}` on a `dim`-dimensional space.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumRealization {
    pub dim: usize,
    pub states: Vec<CMat>,
    pub measurements: Vec<Vec<CMat>>,
}

pub(crate) fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()).unscale(2.0)
}

fn eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let e = hermitize(m).symmetric_eigen();
    (e.eigenvalues.iter().copied().collect(), e.eigenvectors)
}

pub(crate) fn min_eigenvalue(m: &CMat) -> f64 {
    eigen(m).0.into_iter().fold(f64::INFINITY, f64::min)
}

/// `V f(D) V+` for the eigen-decomposition of the Hermitian part of `m`.
pub(crate) fn spectral_map(m: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (vals, v) = eigen(m);
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        vals.len(),
        vals.iter().map(|&x| Complex64::new(f(x), 0.0)),
    ));
    &v * d * v.adjoint()
}

pub(crate) fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |a, z| a.max(z.norm()))
}

/// `Re tr(a b)`.
pub(crate) fn re_trace_product(a: &CMat, b: &CMat) -> f64 {
    let n = a.nrows();
    let mut t = 0.0;
    for i in 0..n {
        for j in 0..n {
            t += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    t
}

/// Clip negative eigenvalues and rescale to unit trace.
pub(crate) fn tidy_state(m: &CMat) -> CMat {
    let r = spectral_map(m, |x| x.max(0.0));
    let t = r.trace().re;
    r.unscale(t)
}

/// Clip negative eigenvalues, then restore completeness by the congruence
/// `S^{-1/2} M_k S^{-1/2}`, which keeps linear relations between effects.
pub(crate) fn tidy_povm(effects: &[CMat]) -> Vec<CMat> {
    let clipped: Vec<CMat> = effects.iter().map(|m| spectral_map(m, |x| x.max(0.0))).collect();
    let n = clipped[0].nrows();
    let s = clipped.iter().fold(CMat::zeros(n, n), |a, m| a + m);
    let t = spectral_map(&s, |x| 1.0 / x.max(1e-300).sqrt());
    clipped.iter().map(|m| hermitize(&(&t * m * &t))).collect()
}

impl QuantumRealization {
    /// Maximally mixed states and the trivial POVM `I/K`.
    pub fn trivial(dim: usize, x: usize, y: usize, k: usize) -> Self {
        let rho = CMat::identity(dim, dim).unscale(dim as f64);
        let m = CMat::identity(dim, dim).unscale(k as f64);
        QuantumRealization { dim, states: vec![rho; x], measurements: vec![vec![m; k]; y] }
    }

    pub fn num_outcomes(&self) -> usize {
        self.measurements.first().map_or(0, Vec::len)
    }

    /// Positivity, normalisation and completeness.
    pub fn check(&self) -> Result<()> {
        let d = self.dim;
        let id = CMat::identity(d, d);
        let k = self.num_outcomes();
        for (x, rho) in self.states.iter().enumerate() {
            if rho.shape() != (d, d) {
                return Err(Error::Shape(format!("state {x} is {:?}, expected {d}x{d}", rho.shape())));
            }
            let herm = max_abs(&(rho - rho.adjoint()));
            let lo = min_eigenvalue(rho);
            let tr = rho.trace();
            if herm > PSD_TOL || lo < -PSD_TOL || (tr - 1.0).norm() > TRACE_TOL {
                return Err(Error::Numerical(format!(
                    "state {x}: hermiticity {herm:.1e}, min eigenvalue {lo:.1e}, trace {tr}"
                )));
            }
        }
        for (y, povm) in self.measurements.iter().enumerate() {
            if povm.len() != k {
                return Err(Error::Shape(format!("measurement {y} has {} outcomes, expected {k}", povm.len())));
            }
            let mut sum = CMat::zeros(d, d);
            for (kk, m) in povm.iter().enumerate() {
                if m.shape() != (d, d) {
                    return Err(Error::Shape(format!("effect ({y},{kk}) is {:?}", m.shape())));
                }
                let herm = max_abs(&(m - m.adjoint()));
                let lo = min_eigenvalue(m);
                if herm > PSD_TOL || lo < -PSD_TOL {
                    return Err(Error::Numerical(format!(
                        "effect ({y},{kk}): hermiticity {herm:.1e}, min eigenvalue {lo:.1e}"
                    )));
                }
                sum += m;
            }
            let gap = max_abs(&(sum - &id));
            if gap > COMPLETENESS_TOL {
                return Err(Error::Numerical(format!("measurement {y}: completeness off by {gap:.1e}")));
            }
        }
        Ok(())
    }

    /// Largest entrywise gap between the mixtures of any equivalence class.
    pub fn equivalence_violation(&self, s: &Scenario) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for class in s.prep_f64() {
            let mix: Vec<CMat> = class
                .iter()
                .map(|a| a.iter().zip(&self.states).fold(CMat::zeros(d, d), |acc, (&c, r)| acc + r.scale(c)))
                .collect();
            for m in &mix[1..] {
                worst = worst.max(max_abs(&(m - &mix[0])));
            }
        }
        for class in s.meas_f64() {
            let mix: Vec<CMat> = class
                .iter()
                .map(|b| {
                    let mut acc = CMat::zeros(d, d);
                    for (i, &c) in b.iter().enumerate() {
                        if c != 0.0 {
                            acc += self.measurements[i / s.k][i % s.k].scale(c);
                        }
                    }
                    acc
                })
                .collect();
            for m in &mix[1..] {
                worst = worst.max(max_abs(&(m - &mix[0])));
            }
        }
        worst
    }

    /// All invariants, including the scenario's equivalences.
    pub fn check_for(&self, s: &Scenario) -> Result<()> {
        if self.states.len() != s.x || self.measurements.len() != s.y || self.num_outcomes() != s.k {
            return Err(Error::Shape(format!(
                "realization has {} states, {} measurements, {} outcomes; scenario wants {}, {}, {}",
                self.states.len(),
                self.measurements.len(),
                self.num_outcomes(),
                s.x,
                s.y,
                s.k
            )));
        }
        self.check()?;
        let v = self.equivalence_violation(s);
        if v > EQUIVALENCE_TOL {
            return Err(Error::Numerical(format!("equivalences violated by {v:.1e}")));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("realization serialises")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::parse("realization", e))
    }
}

/// `p(k|x,y) = tr(rho_x M^y_k)`, clipped into `[0, 1]`.
pub fn behaviour_of(r: &QuantumRealization) -> Result<Behaviour> {
    r.check()?;
    let (x, y, k) = (r.states.len(), r.measurements.len(), r.num_outcomes());
    let mut b = Behaviour::zeros(x, y, k);
    for (xi, rho) in r.states.iter().enumerate() {
        for (yi, povm) in r.measurements.iter().enumerate() {
            for (ki, m) in povm.iter().enumerate() {
                let p = re_trace_product(rho, m);
                if !(-1e-8..=1.0 + 1e-8).contains(&p) {
                    return Err(Error::Numerical(format!("p({ki}|{xi},{yi}) = {p}")));
                }
                b.set(xi, yi, ki, p.clamp(0.0, 1.0));
            }
        }
    }
    Ok(b)
}

type Flat = Vec<[f64; 2]>;

fn flatten(m: &CMat) -> Flat {
    let n = m.nrows();
    (0..n * n).map(|i| m[(i / n, i % n)]).map(|z| [z.re, z.im]).collect()
}

fn unflatten<E: serde::de::Error>(f: &Flat, d: usize) -> std::result::Result<CMat, E> {
    if f.len() != d * d {
        return Err(E::custom(format!("matrix has {} entries, expected {}", f.len(), d * d)));
    }
    Ok(CMat::from_fn(d, d, |i, j| {
        let [re, im] = f[i * d + j];
        Complex64::new(re, im)
    }))
}

#[derive(Serialize, Deserialize)]
struct Wire {
    dim: usize,
    states: Vec<Flat>,
    measurements: Vec<Vec<Flat>>,
}

impl Serialize for QuantumRealization {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        Wire {
            dim: self.dim,
            states: self.states.iter().map(flatten).collect(),
            measurements: self.measurements.iter().map(|p| p.iter().map(flatten).collect()).collect(),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for QuantumRealization {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let w = Wire::deserialize(de)?;
        if w.dim == 0 {
            return Err(D::Error::custom("dim must be positive"));
        }
        let states = w.states.iter().map(|f| unflatten(f, w.dim)).collect::<std::result::Result<_, _>>()?;
        let measurements = w
            .measurements
            .iter()
            .map(|p| p.iter().map(|f| unflatten(f, w.dim)).collect::<std::result::Result<_, _>>())
            .collect::<std::result::Result<_, _>>()?;
        Ok(QuantumRealization { dim: w.dim, states, measurements })
    }
}
