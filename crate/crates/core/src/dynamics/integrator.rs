use std::collections::BTreeMap;
use std::sync::Arc;

use super::model::{Coeff, LindbladModel};
use crate::error::{Error, Result};
use crate::qcore::{hermitian_eigen, CMatrix, HilbertSpace, Operator, QuantumState, C64};

#[derive(Debug, Clone)]
pub struct EvolveOptions {
    /// Absolute and relative local error tolerance.
    pub tol: f64,
    /// Upper bound on the step, in ns.
    pub max_step: f64,
    /// Steps below this are treated as failure, in ns.
    pub min_step: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_step: f64::INFINITY, min_step: 1e-9 }
    }
}

impl EvolveOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<QuantumState>,
    pub observables: BTreeMap<String, Vec<f64>>,
}

impl Trajectory {
    /// Adds the series Re Tr(ρ(t) O) under `name`.
    pub fn observe(&mut self, name: &str, op: &Operator) {
        let series = self.states.iter().map(|s| op.expect(s).re).collect();
        self.observables.insert(name.to_string(), series);
    }

    pub fn last(&self) -> &QuantumState {
        self.states.last().expect("trajectory is never empty")
    }

    pub fn space(&self) -> &Arc<HilbertSpace> {
        self.states[0].space()
    }
}

/// Sparse matrix as (row, col, value) triplets.
type Triplets = Vec<(usize, usize, C64)>;

fn triplets(m: &CMatrix) -> Triplets {
    let mut out = Vec::new();
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            let z = m[(r, c)];
            if z.norm_sqr() > 0.0 {
                out.push((r, c, z));
            }
        }
    }
    out
}

struct CompiledCollapse {
    coeffs: Vec<Coeff>,
    ops: Vec<Triplets>,
    /// O_k† O_l for every part pair.
    pairs: Vec<Vec<CMatrix>>,
}

/// Right-hand side dρ/dt = −i(H_eff ρ − ρ H_eff†) + Σ X ρ X†.
struct Rhs {
    dim: usize,
    h_eff_const: CMatrix,
    h_td: Vec<(Coeff, CMatrix)>,
    const_jumps: Vec<Triplets>,
    td_collapse: Vec<CompiledCollapse>,
}

impl Rhs {
    fn compile(model: &LindbladModel) -> Self {
        let d = model.space.dim();
        let mut h_eff_const = CMatrix::zeros(d, d);
        let mut h_td = Vec::new();
        for h in &model.hamiltonian {
            match h.coeff {
                Coeff::Const(c) => h_eff_const += h.op.matrix() * C64::new(c, 0.0),
                Coeff::Func(_) => h_td.push((h.coeff.clone(), h.op.matrix().clone())),
            }
        }
        let mut const_jumps = Vec::new();
        let mut td_collapse = Vec::new();
        for c in &model.collapse {
            if c.parts.iter().all(|p| p.coeff.is_const()) {
                let x = c.at(0.0);
                let xdx = x.matrix().adjoint() * x.matrix();
                h_eff_const -= xdx * C64::new(0.0, 0.5);
                const_jumps.push(triplets(x.matrix()));
            } else {
                let pairs = c
                    .parts
                    .iter()
                    .map(|a| c.parts.iter().map(|b| a.op.matrix().adjoint() * b.op.matrix()).collect())
                    .collect();
                td_collapse.push(CompiledCollapse {
                    coeffs: c.parts.iter().map(|p| p.coeff.clone()).collect(),
                    ops: c.parts.iter().map(|p| triplets(p.op.matrix())).collect(),
                    pairs,
                });
            }
        }
        Self { dim: d, h_eff_const, h_td, const_jumps, td_collapse }
    }

    fn eval(&self, t: f64, rho: &CMatrix, out: &mut CMatrix) {
        let mut h = self.h_eff_const.clone();
        for (c, m) in &self.h_td {
            let v = c.at(t);
            if v != 0.0 {
                h += m * C64::new(v, 0.0);
            }
        }
        let mut jumps: Vec<&Triplets> = self.const_jumps.iter().collect();
        let mut owned = Vec::with_capacity(self.td_collapse.len());
        for cc in &self.td_collapse {
            let vals: Vec<f64> = cc.coeffs.iter().map(|c| c.at(t)).collect();
            if vals.iter().all(|&v| v == 0.0) {
                continue;
            }
            for (k, &vk) in vals.iter().enumerate() {
                for (l, &vl) in vals.iter().enumerate() {
                    if vk * vl != 0.0 {
                        h -= &cc.pairs[k][l] * C64::new(0.0, 0.5 * vk * vl);
                    }
                }
            }
            let mut x = Triplets::new();
            for (k, &vk) in vals.iter().enumerate() {
                if vk != 0.0 {
                    x.extend(cc.ops[k].iter().map(|&(r, c, z)| (r, c, z * vk)));
                }
            }
            owned.push(x);
        }
        jumps.extend(owned.iter());

        // −i(Hρ − ρH†)
        let hr = &h * rho;
        out.copy_from(&((&hr - hr.adjoint()) * C64::new(0.0, -1.0)));
        for x in jumps {
            for &(a, i, xa) in x {
                for &(b, j, xb) in x {
                    out[(a, b)] += xa * rho[(i, j)] * xb.conj();
                }
            }
        }
        debug_assert_eq!(out.nrows(), self.dim);
    }
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] =
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

struct Stepper<'a> {
    rhs: &'a Rhs,
    opts: &'a EvolveOptions,
    h: f64,
    k: Vec<CMatrix>,
}

impl Stepper<'_> {
    /// Advances `rho` from `t0` to exactly `t1`; coefficients are only
    /// sampled strictly inside each step so breakpoints at the ends are
    /// seen from the correct side.
    fn advance(&mut self, t0: f64, t1: f64, rho: &mut CMatrix) -> Result<()> {
        let mut t = t0;
        let tol = self.opts.tol;
        while t < t1 {
            let remaining = t1 - t;
            let mut h = self.h.min(self.opts.max_step);
            let last = h >= remaining * (1.0 - 1e-12);
            if last {
                h = remaining;
            }
            let edge = 1e-9 * h;
            for s in 0..7 {
                let mut y = rho.clone();
                for (j, &a) in A[s].iter().enumerate().take(s) {
                    if a != 0.0 {
                        y += &self.k[j] * C64::new(a * h, 0.0);
                    }
                }
                let ts = (t + C[s] * h).clamp(t + edge, t + h - edge);
                let mut out = CMatrix::zeros(self.rhs.dim, self.rhs.dim);
                self.rhs.eval(ts, &y, &mut out);
                self.k[s] = out;
            }
            let mut y5 = rho.clone();
            let mut err = CMatrix::zeros(self.rhs.dim, self.rhs.dim);
            for s in 0..7 {
                if B5[s] != 0.0 {
                    y5 += &self.k[s] * C64::new(B5[s] * h, 0.0);
                }
                err += &self.k[s] * C64::new((B5[s] - B4[s]) * h, 0.0);
            }
            let mut norm: f64 = 0.0;
            for ((e, a), b) in err.iter().zip(rho.iter()).zip(y5.iter()) {
                let scale = tol + tol * a.norm().max(b.norm());
                norm = norm.max(e.norm() / scale);
            }
            if !norm.is_finite() {
                return Err(Error::IntegrationFailure { t, reason: "non-finite state".into() });
            }
            if norm <= 1.0 {
                t = if last { t1 } else { t + h };
                *rho = y5;
                let grow = if norm == 0.0 { 5.0 } else { (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0) };
                // a step shortened to hit t1 says nothing about the natural step
                if !last || h >= self.h {
                    self.h = h * grow;
                }
            } else {
                self.h = h * (0.9 * norm.powf(-0.2)).max(0.1);
                if self.h < self.opts.min_step {
                    return Err(Error::IntegrationFailure {
                        t,
                        reason: format!("step size underflow ({:e} ns)", self.h),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Integrate the master equation with default options and tolerance `tol`.
pub fn evolve(model: &LindbladModel, rho0: &QuantumState, grid: &[f64], tol: f64) -> Result<Trajectory> {
    evolve_with(model, rho0, grid, &EvolveOptions::with_tol(tol))
}

/// Integrate the master equation, reporting the state at every grid time.
/// The first grid time is the initial time.
pub fn evolve_with(
    model: &LindbladModel,
    rho0: &QuantumState,
    grid: &[f64],
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    model.validate()?;
    if **rho0.space() != *model.space {
        return Err(Error::InvalidParameters("initial state is on a different space".into()));
    }
    if grid.is_empty() {
        return Err(Error::InvalidParameters("empty time grid".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameters("time grid must be strictly increasing".into()));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParameters("tolerance must be positive".into()));
    }

    let rhs = Rhs::compile(model);
    let mut stepper =
        Stepper { rhs: &rhs, opts, h: initial_step(grid, opts), k: vec![CMatrix::zeros(rhs.dim, rhs.dim); 7] };
    let mut bps: Vec<f64> = model.breakpoints.iter().copied().filter(|b| b.is_finite()).collect();
    bps.sort_by(f64::total_cmp);

    let mut rho = rho0.rho().clone();
    let mut states = vec![checked(rho0.space(), &rho, grid[0], opts.tol)?];
    for w in grid.windows(2) {
        let mut t = w[0];
        for &b in bps.iter().filter(|&&b| b > w[0] && b < w[1]) {
            stepper.advance(t, b, &mut rho)?;
            t = b;
        }
        stepper.advance(t, w[1], &mut rho)?;
        let st = checked(rho0.space(), &rho, w[1], opts.tol)?;
        rho = st.rho().clone();
        states.push(st);
    }
    Ok(Trajectory { times: grid.to_vec(), states, observables: BTreeMap::new() })
}

fn initial_step(grid: &[f64], opts: &EvolveOptions) -> f64 {
    let span = grid.last().unwrap() - grid[0];
    (span.max(1e-3) * 1e-3).min(opts.max_step).max(opts.min_step * 10.0)
}

/// Diagnostics at an output time: trace drift, Hermiticity, positivity.
fn checked(space: &Arc<HilbertSpace>, rho: &CMatrix, t: f64, tol: f64) -> Result<QuantumState> {
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > 100.0 * tol || tr.im.abs() > 100.0 * tol {
        return Err(Error::Diagnostics { t, reason: format!("trace drifted to {tr}") });
    }
    let anti = (rho - rho.adjoint()).iter().fold(0.0f64, |m, z| m.max(z.norm()));
    if anti > 10.0 * tol.max(1e-12) {
        return Err(Error::Diagnostics { t, reason: format!("Hermiticity violated by {anti:e}") });
    }
    let h = (rho + rho.adjoint()) * C64::new(0.5, 0.0);
    let (ev, vecs) = hermitian_eigen(&h);
    if ev[0] < -1e-8 {
        return Err(Error::Diagnostics { t, reason: format!("negative eigenvalue {:e}", ev[0]) });
    }
    if ev[0] < 0.0 {
        let clipped: Vec<f64> = ev.iter().map(|&v| v.max(0.0)).collect();
        let total: f64 = clipped.iter().sum();
        let m = crate::qcore::rebuild_from_eigen(&vecs, &clipped) * C64::new(1.0 / total, 0.0);
        return Ok(QuantumState::from_parts(space.clone(), m));
    }
    Ok(QuantumState::from_parts(space.clone(), h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::model::CollapseTerm;
    use crate::qcore::{embed, lowering, raising, HilbertSpace};

    fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
    }

    fn qubit() -> Arc<HilbertSpace> {
        Arc::new(HilbertSpace::qubits(&["q"]).unwrap())
    }

    #[test]
    fn free_evolution_is_identity() {
        let s = qubit();
        let rho0 =
            QuantumState::from_ket(s.clone(), &nalgebra::dvector![C64::new(0.6, 0.0), C64::new(0.0, 0.8)]).unwrap();
        let tr = evolve(&LindbladModel::new(s), &rho0, &linspace(0.0, 50.0, 11), 1e-8).unwrap();
        for st in &tr.states {
            assert!(crate::qcore::max_abs(&(st.rho() - rho0.rho())) < 1e-14);
        }
    }

    #[test]
    fn exponential_decay() {
        let s = qubit();
        let kappa: f64 = 0.13;
        let sm = embed(&lowering(2), "q", &s).unwrap();
        let model = LindbladModel::new(s.clone()).with_collapse(CollapseTerm::single(kappa.sqrt(), sm));
        let rho0 = QuantumState::basis(s, &[1]).unwrap();
        let grid = linspace(0.0, 40.0, 41);
        let tr = evolve(&model, &rho0, &grid, 1e-8).unwrap();
        for (t, st) in grid.iter().zip(&tr.states) {
            let pe = st.rho()[(1, 1)].re;
            assert!((pe - (-kappa * t).exp()).abs() < 1e-7, "t={t} pe={pe}");
        }
    }

    #[test]
    fn time_dependent_decay_honours_breakpoint() {
        let s = qubit();
        let sm = embed(&lowering(2), "q", &s).unwrap();
        let rate = |t: f64| -> f64 {
            if t < 10.0 {
                0.0
            } else {
                0.2
            }
        };
        let mut model =
            LindbladModel::new(s.clone()).with_collapse(CollapseTerm::single(Coeff::func(move |t| rate(t).sqrt()), sm));
        model.breakpoints.push(10.0);
        let rho0 = QuantumState::basis(s, &[1]).unwrap();
        let tr = evolve(&model, &rho0, &[0.0, 30.0], 1e-9).unwrap();
        assert!((tr.last().rho()[(1, 1)].re - (-0.2f64 * 20.0).exp()).abs() < 1e-8);
    }

    #[test]
    fn resonant_rabi() {
        let s = Arc::new(HilbertSpace::new(&[2, 2], &["q", "a"]).unwrap());
        let g = 0.05;
        let x = &embed(&raising(2), "q", &s).unwrap() * &embed(&lowering(2), "a", &s).unwrap();
        let h = &x + &x.dagger();
        let model = LindbladModel::new(s.clone()).with_term(g, h);
        let rho0 = QuantumState::basis(s, &[1, 0]).unwrap();
        let tq = std::f64::consts::FRAC_PI_2 / g;
        let grid = linspace(0.0, tq, 9);
        let tr = evolve(&model, &rho0, &grid, 1e-10).unwrap();
        for (t, st) in grid.iter().zip(&tr.states) {
            let pe = st.mode_population("q", 1).unwrap();
            assert!((pe - (g * t).cos().powi(2)).abs() < 1e-8);
        }
        assert!(tr.last().mode_population("q", 1).unwrap() < 1e-8);
    }

    /// Qubit coupled to three lossy modes; capped and full bases must agree.
    #[test]
    fn capped_matches_full_tensor() {
        let labels = ["q", "a0", "a1", "a2"];
        let full = Arc::new(HilbertSpace::qubits(&labels).unwrap());
        let capped = Arc::new(HilbertSpace::with_cap(&[2; 4], &labels, 1).unwrap());
        let run = |s: &Arc<HilbertSpace>| {
            let sp = embed(&raising(2), "q", s).unwrap();
            let mut m = LindbladModel::new(s.clone());
            for (j, l) in labels[1..].iter().enumerate() {
                let a = embed(&lowering(2), l, s).unwrap();
                let x = &sp * &a;
                m = m.with_term(0.03, &x + &x.dagger());
                m = m.with_term(0.01 * j as f64, &a.dagger() * &a);
                m = m.with_collapse(CollapseTerm::single(0.02f64.sqrt(), a));
            }
            m = m.with_collapse(CollapseTerm::single(0.01, sp.dagger()));
            let rho0 = QuantumState::basis(s.clone(), &[1, 0, 0, 0]).unwrap();
            let tr = evolve(&m, &rho0, &linspace(0.0, 100.0, 21), 1e-10).unwrap();
            tr.states.iter().map(|st| st.mode_population("q", 1).unwrap()).collect::<Vec<_>>()
        };
        let a = run(&full);
        let b = run(&capped);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-8);
        }
    }

    #[test]
    fn trace_and_hermiticity_along_trajectory() {
        let s = Arc::new(HilbertSpace::qubits(&["a", "b"]).unwrap());
        let sa = embed(&lowering(2), "a", &s).unwrap();
        let sb = embed(&lowering(2), "b", &s).unwrap();
        let x = &sa.dagger() * &sb;
        let model = LindbladModel::new(s.clone())
            .with_term(Coeff::func(|t| 0.1 * (0.05 * t).sin()), &x + &x.dagger())
            .with_collapse(CollapseTerm::sum(vec![
                super::super::model::Term::new(Coeff::func(|t| (0.01 * t).cos().abs()), sa.clone()),
                super::super::model::Term::new(0.2, sb.clone()),
            ]));
        let ket = nalgebra::DVector::from_vec(vec![
            C64::new(0.1, 0.0),
            C64::new(0.5, 0.2),
            C64::new(0.3, -0.4),
            C64::new(0.6, 0.0),
        ]);
        let rho0 = QuantumState::from_ket(s, &ket).unwrap();
        let tr = evolve(&model, &rho0, &linspace(0.0, 60.0, 61), 1e-8).unwrap();
        for st in &tr.states {
            assert!((st.rho().trace().re - 1.0).abs() <= 1e-8);
            assert!(crate::qcore::max_abs(&(st.rho() - st.rho().adjoint())) <= 1e-7);
        }
    }

    #[test]
    fn bad_inputs() {
        let s = qubit();
        let rho0 = QuantumState::basis(s.clone(), &[0]).unwrap();
        let m = LindbladModel::new(s);
        assert!(evolve(&m, &rho0, &[], 1e-8).is_err());
        assert!(evolve(&m, &rho0, &[0.0, 0.0], 1e-8).is_err());
        let sm = embed(&lowering(2), "q", &m.space).unwrap();
        let nonherm = m.clone().with_term(1.0, sm);
        assert!(evolve(&nonherm, &rho0, &[0.0, 1.0], 1e-8).is_err());
    }

    #[test]
    fn stiff_problem_underflows() {
        let s = qubit();
        let sm = embed(&lowering(2), "q", &s).unwrap();
        let model = LindbladModel::new(s.clone()).with_collapse(CollapseTerm::single(1e9, sm));
        let rho0 = QuantumState::basis(s, &[1]).unwrap();
        let opts = EvolveOptions { min_step: 1e-6, ..EvolveOptions::default() };
        let err = evolve_with(&model, &rho0, &[0.0, 1.0], &opts).unwrap_err();
        assert!(matches!(err, Error::IntegrationFailure { .. }));
    }
}
