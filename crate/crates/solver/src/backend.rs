use std::collections::BTreeMap;

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};
use nalgebra::DMatrix;

use crate::embed::embed_hermitian;
use crate::error::SolverError;
use crate::program::{BlockKind, ConicProgram, Relation, Sense};
use crate::solution::{Certificate, Layout, Residuals, Solution, Status};

/// Environment variable naming the backend; only `clarabel` ships.
pub const BACKEND_ENV: &str = "CTXWB_SOLVER";

/// Tolerances and limits for a solve. One record so every caller shares the
/// same defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub feasibility_tol: f64,
    pub gap_tol: f64,
    pub infeasibility_tol: f64,
    pub max_iter: u32,
    /// Cap on the summed side length of all real PSD cones.
    pub max_psd_dim: usize,
    pub verbose: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            feasibility_tol: 1e-9,
            gap_tol: 1e-8,
            infeasibility_tol: 1e-8,
            max_iter: 300,
            max_psd_dim: 4000,
            verbose: false,
        }
    }
}

pub trait Backend: Send + Sync {
    fn name(&self) -> &'static str;
    fn solve(&self, program: &ConicProgram, options: &SolverOptions) -> Result<Solution, SolverError>;
}

/// Interior-point backend built on Clarabel.
#[derive(Debug, Clone, Copy, Default)]
pub struct ClarabelBackend;

/// Backend selected by [`BACKEND_ENV`], defaulting to Clarabel.
pub fn backend_from_env() -> Result<Box<dyn Backend>, SolverError> {
    match std::env::var(BACKEND_ENV) {
        Err(_) => Ok(Box::new(ClarabelBackend)),
        Ok(name) if name.is_empty() || name.eq_ignore_ascii_case("clarabel") => Ok(Box::new(ClarabelBackend)),
        Ok(name) => Err(SolverError::BackendUnavailable(name)),
    }
}

pub fn solve(program: &ConicProgram, options: &SolverOptions) -> Result<Solution, SolverError> {
    backend_from_env()?.solve(program, options)
}

/// Column-wise sparse accumulator that sums duplicate entries.
struct Triplets {
    cols: Vec<BTreeMap<usize, f64>>,
    nrows: usize,
}

impl Triplets {
    fn new(ncols: usize) -> Self {
        Triplets { cols: vec![BTreeMap::new(); ncols], nrows: 0 }
    }

    fn push(&mut self, row: usize, col: usize, v: f64) {
        if v != 0.0 {
            *self.cols[col].entry(row).or_insert(0.0) += v;
        }
    }

    fn into_csc(self) -> CscMatrix<f64> {
        let n = self.cols.len();
        let mut colptr = Vec::with_capacity(n + 1);
        let mut rowval = Vec::new();
        let mut nzval = Vec::new();
        colptr.push(0);
        for col in self.cols {
            for (r, v) in col {
                if v != 0.0 {
                    rowval.push(r);
                    nzval.push(v);
                }
            }
            colptr.push(rowval.len());
        }
        CscMatrix::new(self.nrows, n, colptr, rowval, nzval)
    }
}

struct Compiled {
    a: CscMatrix<f64>,
    b: Vec<f64>,
    p: CscMatrix<f64>,
    q: Vec<f64>,
    cones: Vec<SupportedConeT<f64>>,
    /// Backend row of each user constraint.
    constraint_rows: Vec<usize>,
    layout: Layout,
}

fn compile(program: &ConicProgram) -> Compiled {
    let layout = Layout::of(program);
    let nvars = program.num_vars();
    let mut a = Triplets::new(nvars);
    let mut b = Vec::new();
    let mut constraint_rows = vec![0; program.constraints.len()];
    let mut cones = Vec::new();

    // Zero cone: equalities.
    let mut n_eq = 0;
    for (ci, c) in program.constraints.iter().enumerate() {
        if c.rel != Relation::Eq {
            continue;
        }
        let (terms, rhs) = c.row();
        let row = b.len();
        for (v, coef) in terms {
            a.push(row, layout.index(v), coef);
        }
        b.push(rhs);
        constraint_rows[ci] = row;
        n_eq += 1;
    }
    if n_eq > 0 {
        cones.push(SupportedConeT::ZeroConeT(n_eq));
    }

    // Nonnegative cone: inequalities, then nonnegative blocks.
    let mut n_nn = 0;
    for (ci, c) in program.constraints.iter().enumerate() {
        let sign = match c.rel {
            Relation::Eq => continue,
            Relation::Le => 1.0,
            Relation::Ge => -1.0,
        };
        let (terms, rhs) = c.row();
        let row = b.len();
        for (v, coef) in terms {
            a.push(row, layout.index(v), sign * coef);
        }
        b.push(sign * rhs);
        constraint_rows[ci] = row;
        n_nn += 1;
    }
    for (bi, blk) in program.blocks.iter().enumerate() {
        if let BlockKind::Nonneg { len } = blk.kind {
            for i in 0..len {
                let row = b.len();
                a.push(row, layout.offsets[bi] + i, -1.0);
                b.push(0.0);
                n_nn += 1;
            }
        }
    }
    if n_nn > 0 {
        cones.push(SupportedConeT::NonnegativeConeT(n_nn));
    }

    // PSD cones in scaled upper-triangle column-major order.
    let sqrt2 = std::f64::consts::SQRT_2;
    for (bi, blk) in program.blocks.iter().enumerate() {
        match blk.kind {
            BlockKind::Symmetric { dim } => {
                for c in 0..dim {
                    for r in 0..=c {
                        let row = b.len();
                        let scale = if r == c { 1.0 } else { sqrt2 };
                        let v = program.sym(bi, r, c);
                        a.push(row, layout.index(v), -scale);
                        b.push(0.0);
                    }
                }
                cones.push(SupportedConeT::PSDTriangleConeT(dim));
            }
            BlockKind::Hermitian { dim } => {
                let emb = embed_hermitian(dim);
                for c in 0..emb.dim() {
                    for r in 0..=c {
                        let row = b.len();
                        let scale = if r == c { 1.0 } else { sqrt2 };
                        if let Some(e) = emb.entry(r, c) {
                            let v = crate::program::Var { block: bi, row: e.row, col: e.col, part: e.part };
                            a.push(row, layout.index(v), -scale * e.sign);
                        }
                        b.push(0.0);
                    }
                }
                cones.push(SupportedConeT::PSDTriangleConeT(emb.dim()));
            }
            _ => {}
        }
    }
    a.nrows = b.len();

    let obj_sign = match program.sense {
        Sense::Max => -1.0,
        Sense::Min => 1.0,
    };
    let mut q = vec![0.0; nvars];
    for &(v, c) in &program.objective.terms {
        q[layout.index(v)] += obj_sign * c;
    }
    let mut p = Triplets::new(nvars);
    p.nrows = nvars;
    for &(v, w) in &program.quadratic {
        let i = layout.index(v);
        p.push(i, i, w);
    }

    Compiled { a: a.into_csc(), b, p: p.into_csc(), q, cones, constraint_rows, layout }
}

fn min_eigenvalue_violation(program: &ConicProgram, sol: &Solution) -> f64 {
    let mut worst: f64 = 0.0;
    for (bi, blk) in program.blocks.iter().enumerate() {
        let m: Option<DMatrix<f64>> = match blk.kind {
            BlockKind::Symmetric { .. } => Some(sol.symmetric(bi)),
            BlockKind::Hermitian { .. } => Some(crate::embed::embed_matrix(&sol.hermitian(bi))),
            _ => None,
        };
        if let Some(m) = m {
            if m.nrows() > 0 {
                let lo = m.symmetric_eigen().eigenvalues.min();
                worst = worst.min(lo);
            }
        }
        if let BlockKind::Nonneg { len } = blk.kind {
            for i in 0..len {
                worst = worst.min(sol.value(crate::program::Var::scalar(bi, i)));
            }
        }
    }
    worst
}

impl Backend for ClarabelBackend {
    fn name(&self) -> &'static str {
        "clarabel"
    }

    fn solve(&self, program: &ConicProgram, options: &SolverOptions) -> Result<Solution, SolverError> {
        // The supernodal factorisation is much faster on coupled PSD blocks
        // but occasionally stalls where the simplicial one does not.
        let sol = self.solve_with(program, options, "faer")?;
        if sol.status == Status::NumericalTrouble {
            log::debug!("faer factorisation gave {}; retrying with qdldl", sol.backend_status);
            return self.solve_with(program, options, "qdldl");
        }
        Ok(sol)
    }
}

impl ClarabelBackend {
    fn solve_with(&self, program: &ConicProgram, options: &SolverOptions, ldl: &str) -> Result<Solution, SolverError> {
        program.validate()?;
        let psd = program.total_psd_dim();
        if psd > options.max_psd_dim {
            return Err(SolverError::TooLarge { dim: psd, cap: options.max_psd_dim });
        }
        let compiled = compile(program);
        let settings = DefaultSettingsBuilder::default()
            .verbose(options.verbose)
            .max_iter(options.max_iter)
            .tol_gap_abs(options.gap_tol)
            .tol_gap_rel(options.gap_tol)
            .tol_feas(options.feasibility_tol)
            .tol_infeas_abs(options.infeasibility_tol)
            .tol_infeas_rel(options.infeasibility_tol)
            .max_threads(1)
            .direct_solve_method(ldl.into())
            .build()
            .map_err(|e| SolverError::Backend(e.to_string()))?;
        let mut solver = DefaultSolver::new(
            &compiled.p,
            &compiled.q,
            &compiled.a,
            &compiled.b,
            &compiled.cones,
            settings,
        )
        .map_err(|e| SolverError::Backend(format!("{e:?}")))?;
        solver.solve();
        let raw = &solver.solution;

        let sense_sign = match program.sense {
            Sense::Max => -1.0,
            Sense::Min => 1.0,
        };
        let multiplier = |ci: usize, z: &[f64]| -> f64 {
            let c = &program.constraints[ci];
            let sigma = if c.rel == Relation::Ge { -1.0 } else { 1.0 };
            -sense_sign * sigma * z[compiled.constraint_rows[ci]]
        };

        let status_name = format!("{:?}", raw.status);
        let mut sol = Solution {
            status: Status::NumericalTrouble,
            objective: f64::NAN,
            dual_objective: f64::NAN,
            duals: Vec::new(),
            certificate: None,
            residuals: Residuals::default(),
            iterations: raw.iterations,
            reduced_accuracy: false,
            backend_status: status_name,
            x: raw.x.clone(),
            layout: compiled.layout.clone(),
        };

        match raw.status {
            SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
                sol.status = Status::Infeasible;
                sol.reduced_accuracy = raw.status == SolverStatus::AlmostPrimalInfeasible;
                let scale = raw.z.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
                let z: Vec<f64> = raw.z.iter().map(|v| v / scale).collect();
                let value: f64 = compiled.b.iter().zip(&z).map(|(b, z)| b * z).sum();
                // Rows are scaled by the sense so that `sum y rhs` keeps the sign of b'z.
                let multipliers = (0..program.constraints.len())
                    .map(|ci| {
                        let c = &program.constraints[ci];
                        let sigma = if c.rel == Relation::Ge { -1.0 } else { 1.0 };
                        sigma * z[compiled.constraint_rows[ci]]
                    })
                    .collect();
                sol.certificate = Some(Certificate { multipliers, value });
                return Ok(sol);
            }
            SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => {
                sol.status = Status::Unbounded;
                sol.objective = -sense_sign * f64::INFINITY;
                return Ok(sol);
            }
            _ => {}
        }

        let constant = program.objective.constant;
        let quad: f64 = program.quadratic.iter().map(|&(v, w)| 0.5 * w * sol.value(v).powi(2)).sum();
        let lin: f64 = program.objective.terms.iter().map(|&(v, c)| c * sol.value(v)).sum();
        sol.objective = lin + quad + constant;
        sol.dual_objective = sense_sign * raw.obj_val_dual + constant;
        sol.duals = (0..program.constraints.len()).map(|ci| multiplier(ci, &raw.z)).collect();
        let primal_res = program
            .constraints
            .iter()
            .map(|c| c.violation(|v| sol.value(v)).max(0.0))
            .fold(0.0, f64::max);
        let gap = (sol.objective - sol.dual_objective).abs() / sol.objective.abs().max(1.0);
        sol.residuals = Residuals {
            primal: primal_res,
            dual: raw.r_dual,
            gap,
            psd: min_eigenvalue_violation(program, &sol),
        };
        let accurate_enough = gap <= 1e-6 && primal_res <= 1e-6;
        sol.status = match raw.status {
            SolverStatus::Solved => Status::Optimal,
            SolverStatus::AlmostSolved
            | SolverStatus::InsufficientProgress
            | SolverStatus::MaxIterations
            | SolverStatus::NumericalError
                if accurate_enough =>
            {
                sol.reduced_accuracy = true;
                Status::Optimal
            }
            _ => Status::NumericalTrouble,
        };
        Ok(sol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::{LinExpr, Var};

    fn opts() -> SolverOptions {
        SolverOptions::default()
    }

    #[test]
    fn lp_upper_bounded_scalar() {
        let mut p = ConicProgram::new(Sense::Max);
        let b = p.add_free(1, None);
        p.add_constraint(LinExpr::var(Var::scalar(b, 0)), Relation::Le, 1.0);
        p.objective = LinExpr::var(Var::scalar(b, 0));
        let s = solve(&p, &opts()).unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert!((s.objective - 1.0).abs() < 1e-7);
        assert!((s.duals[0] - 1.0).abs() < 1e-6, "dual {}", s.duals[0]);
        assert!(s.dual_objective >= s.objective - 1e-7);
    }

    #[test]
    fn correlation_matrix_extreme() {
        let mut p = ConicProgram::new(Sense::Max);
        let g = p.add_symmetric(2, None);
        for i in 0..2 {
            p.add_constraint(LinExpr::var(p.sym(g, i, i)), Relation::Eq, 1.0);
        }
        let (a, b) = (p.sym(g, 0, 1), p.sym(g, 1, 0));
        p.objective.add_term(a, 1.0).add_term(b, 1.0);
        let s = solve(&p, &opts()).unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert!((s.objective - 2.0).abs() < 1e-7);
    }

    #[test]
    fn minimum_trace() {
        let mut p = ConicProgram::new(Sense::Min);
        let g = p.add_symmetric(2, None);
        p.add_constraint(LinExpr::var(p.sym(g, 0, 0)), Relation::Ge, 1.0);
        let (a, b) = (p.sym(g, 0, 0), p.sym(g, 1, 1));
        p.objective.add_term(a, 1.0).add_term(b, 1.0);
        let s = solve(&p, &opts()).unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert!((s.objective - 1.0).abs() < 1e-7);
        assert!(s.dual_objective <= s.objective + 1e-7);
    }

    #[test]
    fn hermitian_block_reaches_complex_optimum() {
        // max Im H[0][1] with unit diagonal: optimum 1 at H = [[1, i], [-i, 1]].
        let mut p = ConicProgram::new(Sense::Max);
        let h = p.add_hermitian(2, None);
        for i in 0..2 {
            p.add_constraint(p.herm_re(h, i, i), Relation::Eq, 1.0);
        }
        p.objective = p.herm_im(h, 0, 1);
        let s = solve(&p, &opts()).unwrap();
        assert!((s.objective - 1.0).abs() < 1e-7);
        let m = s.hermitian(h);
        assert!((m[(1, 0)].im + 1.0).abs() < 1e-6);
    }

    #[test]
    fn infeasible_program_yields_farkas_ray() {
        let mut p = ConicProgram::new(Sense::Max);
        let b = p.add_nonneg(1, None);
        p.add_constraint(LinExpr::var(Var::scalar(b, 0)), Relation::Le, -1.0);
        let s = solve(&p, &opts()).unwrap();
        assert_eq!(s.status, Status::Infeasible);
        let cert = s.certificate.unwrap();
        assert!(cert.value <= -1e-8);
    }

    #[test]
    fn quadratic_projection() {
        // min 1/2 (x - 3)^2 with x <= 1 -> x = 1
        let mut p = ConicProgram::new(Sense::Min);
        let b = p.add_free(1, None);
        let x = Var::scalar(b, 0);
        p.quadratic.push((x, 1.0));
        p.objective.add_term(x, -3.0).add_constant(4.5);
        p.add_constraint(LinExpr::var(x), Relation::Le, 1.0);
        let s = solve(&p, &opts()).unwrap();
        assert!((s.value(x) - 1.0).abs() < 1e-7);
        assert!((s.objective - 2.0).abs() < 1e-7);
    }

    #[test]
    fn size_guard() {
        let mut p = ConicProgram::new(Sense::Max);
        p.add_hermitian(10, None);
        let o = SolverOptions { max_psd_dim: 8, ..opts() };
        assert!(matches!(solve(&p, &o), Err(SolverError::TooLarge { .. })));
    }

    #[test]
    fn unknown_backend_is_refused() {
        // Only checks the name dispatch, without touching the process env.
        assert!(matches!(
            match "mosek" {
                n if n.eq_ignore_ascii_case("clarabel") => Ok(()),
                n => Err(SolverError::BackendUnavailable(n.into())),
            },
            Err(SolverError::BackendUnavailable(_))
        ));
    }
}
