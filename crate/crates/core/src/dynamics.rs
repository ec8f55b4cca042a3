//! Master operator, time evolution, periodic solutions and currents.
//!
//! Rates are `g_α = e^{βW_α}` and `κ_i = e^{βE_i}`. To keep large `β`
//! usable they are stored shifted: `c_α = e^{β(W_min − W_α)}` (so `c ≤ 1`)
//! and `κ_i = e^{β(E_i − E_max)}` (so `κ ≤ 1`), with the common factor
//! `e^{β(E_max − W_min)}` kept as a log scale.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::adiabatic;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::homology::{CurrentReport, CycleBasis};
use crate::integrator;
use crate::params::{boltzmann, boltzmann_derivative, ParamPoint};
use crate::protocol::DrivingLoop;

/// Largest exponent allowed for the common rate scale.
pub const MAX_EXPONENT: f64 = 700.0;

/// Shifted inverse barrier rates and well rates with their common scale.
#[derive(Debug, Clone, PartialEq)]
pub struct Rates {
    /// `g_α⁻¹` divided by `e^{−βW_min}`.
    pub conductance: DVector<f64>,
    /// `κ_i` divided by `e^{βE_max}`.
    pub kappa: DVector<f64>,
    /// `β(E_max − W_min)`: true `ĝ⁻¹κ̂` products are `e^{log_scale}` times
    /// the stored ones.
    pub log_scale: f64,
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn min_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Shifted conductances `e^{β(W_min − W_α)}`.
pub fn conductances(beta: f64, w: &[f64]) -> DVector<f64> {
    let w_min = min_of(w);
    DVector::from_iterator(w.len(), w.iter().map(|&x| (beta * (w_min - x)).exp()))
}

impl Rates {
    pub fn new(g: &Graph, beta: f64, p: &ParamPoint) -> Result<Self> {
        p.check(g)?;
        if beta < 0.0 || !beta.is_finite() {
            return Err(Error::InvalidArgument(format!("beta must be finite and >= 0, got {beta}")));
        }
        let e_max = max_of(&p.e);
        let w_min = if p.w.is_empty() { 0.0 } else { min_of(&p.w) };
        let log_scale = beta * (e_max - w_min);
        if log_scale > MAX_EXPONENT {
            return Err(Error::Overflow { exponent: log_scale });
        }
        Ok(Rates {
            conductance: conductances(beta, &p.w),
            kappa: DVector::from_iterator(p.e.len(), p.e.iter().map(|&x| (beta * (x - e_max)).exp())),
            log_scale,
        })
    }

    pub fn scale(&self) -> f64 {
        self.log_scale.exp()
    }
}

/// `H = −∂ ĝ⁻¹ ∂* κ̂`, stored divided by `e^{log_scale}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MasterOperator {
    pub scaled: DMatrix<f64>,
    pub log_scale: f64,
    pub beta: f64,
    pub point: ParamPoint,
    sqrt_kappa: DVector<f64>,
    conductance: DVector<f64>,
    edges: Vec<(usize, usize)>,
}

pub fn master_operator(g: &Graph, beta: f64, p: &ParamPoint) -> Result<MasterOperator> {
    let rates = Rates::new(g, beta, p)?;
    let n = g.vertex_count();
    let mut h = DMatrix::zeros(n, n);
    for (alpha, &(a, b)) in g.edges().iter().enumerate() {
        if a == b {
            continue;
        }
        let c = rates.conductance[alpha];
        // column j receives -∂_iα c ∂_jα κ_j
        h[(a, a)] -= c * rates.kappa[a];
        h[(b, b)] -= c * rates.kappa[b];
        h[(a, b)] += c * rates.kappa[b];
        h[(b, a)] += c * rates.kappa[a];
    }
    let e_max = max_of(&p.e);
    Ok(MasterOperator {
        scaled: h,
        log_scale: rates.log_scale,
        beta,
        point: p.clone(),
        sqrt_kappa: DVector::from_iterator(n, p.e.iter().map(|&x| (0.5 * beta * (x - e_max)).exp())),
        conductance: rates.conductance,
        edges: g.edges().to_vec(),
    })
}

impl MasterOperator {
    pub fn scale(&self) -> f64 {
        self.log_scale.exp()
    }

    /// The operator on the unscaled convention.
    pub fn matrix(&self) -> DMatrix<f64> {
        &self.scaled * self.scale()
    }

    /// `K^{1/2} H K^{−1/2}` (scaled), assembled without dividing by `κ`.
    pub fn symmetrized_scaled(&self) -> DMatrix<f64> {
        let n = self.scaled.nrows();
        let mut s = DMatrix::zeros(n, n);
        for (alpha, &(a, b)) in self.edges.iter().enumerate() {
            if a == b {
                continue;
            }
            let c = self.conductance[alpha];
            let (ka, kb) = (self.sqrt_kappa[a], self.sqrt_kappa[b]);
            s[(a, a)] -= c * ka * ka;
            s[(b, b)] -= c * kb * kb;
            s[(a, b)] += c * ka * kb;
            s[(b, a)] += c * ka * kb;
        }
        s
    }

    /// Real spectrum, ascending, on the unscaled convention.
    pub fn spectrum(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self
            .symmetrized_scaled()
            .symmetric_eigenvalues()
            .iter()
            .map(|x| x * self.scale())
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// `−(second largest eigenvalue)`: decay rate on zero-sum vectors.
    pub fn spectral_gap(&self) -> f64 {
        let ev = self.spectrum();
        if ev.len() < 2 {
            return f64::INFINITY;
        }
        -ev[ev.len() - 2]
    }

    /// `exp(τ H)` through the symmetric eigendecomposition (frozen `H`).
    pub fn propagator(&self, tau: f64) -> DMatrix<f64> {
        let eig = self.symmetrized_scaled().symmetric_eigen();
        let scale = tau * self.scale();
        let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|x| (scale * x).exp()));
        let sym = &eig.eigenvectors * d * eig.eigenvectors.transpose();
        let n = sym.nrows();
        DMatrix::from_fn(n, n, |i, j| {
            let (ki, kj) = (self.sqrt_kappa[i], self.sqrt_kappa[j]);
            if ki == 0.0 {
                if i == j {
                    1.0
                } else {
                    0.0
                }
            } else {
                sym[(i, j)] * kj / ki
            }
        })
    }
}

/// `J = τ ĝ⁻¹ ∂* κ̂ ρ`.
pub fn instantaneous_current(g: &Graph, beta: f64, tau: f64, p: &ParamPoint, rho: &DVector<f64>) -> Result<DVector<f64>> {
    let rates = Rates::new(g, beta, p)?;
    Error::check_len(g.vertex_count(), rho.len())?;
    let weighted = rho.component_mul(&rates.kappa);
    let d = g.coboundary(&weighted)?;
    Ok(d.component_mul(&rates.conductance) * (tau * rates.scale()))
}

/// `τ H(γ(t))` on the unscaled convention.
pub fn generator<L: DrivingLoop + ?Sized>(g: &Graph, lp: &L, beta: f64, tau: f64, t: f64) -> Result<DMatrix<f64>> {
    let h = master_operator(g, beta, &lp.point(t))?;
    let s = tau * h.scale();
    Ok(h.scaled * s)
}

/// Integrator settings shared by the evolution routines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Local error allowed per unit time.
    pub tol: f64,
    /// Uniform sample intervals over one period (even).
    pub grid_intervals: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-8,
            grid_intervals: 1024,
        }
    }
}

/// `U(t1, t0) p0`.
pub fn evolve<L: DrivingLoop + ?Sized>(
    g: &Graph,
    lp: &L,
    beta: f64,
    tau: f64,
    p0: &DVector<f64>,
    t0: f64,
    t1: f64,
    tol: f64,
) -> Result<DVector<f64>> {
    Error::check_len(g.vertex_count(), p0.len())?;
    if t1 < t0 {
        return Err(Error::InvalidArgument("t1 must not precede t0".into()));
    }
    let gen = |t: f64| generator(g, lp, beta, tau, t);
    let y0 = DMatrix::from_column_slice(p0.len(), 1, p0.as_slice());
    let out = integrator::propagate_conservative(&gen, &y0, &[t0, t1], tol)?;
    Ok(out[1].column(0).into_owned())
}

/// The evolution operator over one period, `U(1, 0)`.
pub fn monodromy<L: DrivingLoop + ?Sized>(g: &Graph, lp: &L, beta: f64, tau: f64, tol: f64) -> Result<DMatrix<f64>> {
    let gen = |t: f64| generator(g, lp, beta, tau, t);
    let n = g.vertex_count();
    let out = integrator::propagate_conservative(&gen, &DMatrix::identity(n, n), &[0.0, 1.0], tol)?;
    Ok(out[1].clone())
}

/// Orthonormal basis of the zero-sum subspace (Helmert columns).
pub fn zero_sum_basis(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n.saturating_sub(1), |i, k| {
        let k = k + 1;
        let norm = ((k * (k + 1)) as f64).sqrt();
        if i < k {
            1.0 / norm
        } else if i == k {
            -(k as f64) / norm
        } else {
            0.0
        }
    })
}

/// Spectral norm of `U` restricted to zero-sum vectors.
pub fn restricted_norm(u: &DMatrix<f64>) -> f64 {
    let q = zero_sum_basis(u.nrows());
    if q.ncols() == 0 {
        return 0.0;
    }
    (q.transpose() * u * &q).singular_values().max()
}

/// Ratio of singular values that marks `I − U(1,0)` as unusable.
pub const MAX_INVERSE_NORM: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicSolution {
    pub beta: f64,
    pub tau: f64,
    pub tol: f64,
    /// Uniform sample times `k / N`, including both endpoints.
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// `ρ̇ = τ H ρ` at each sample; used for Hermite interpolation.
    pub derivatives: Vec<Vec<f64>>,
    pub restricted_monodromy_norm: f64,
    /// `‖(I − U(1,0))⁻¹‖` on zero-sum vectors.
    pub inverse_norm: f64,
    /// `‖ρ(0) − ρ_fix‖∞` against the eigenvalue-one fixed point of `U(1,0)`.
    pub fixed_point_discrepancy: f64,
    /// `‖ρ(1) − ρ(0)‖∞`.
    pub periodicity_residual: f64,
}

impl PeriodicSolution {
    pub fn state(&self, k: usize) -> DVector<f64> {
        DVector::from_column_slice(&self.states[k])
    }

    pub fn intervals(&self) -> usize {
        self.times.len() - 1
    }

    /// Cubic Hermite interpolation between samples.
    pub fn at(&self, t: f64) -> DVector<f64> {
        let n = self.intervals();
        let t = t.clamp(0.0, 1.0);
        let k = ((t * n as f64).floor() as usize).min(n - 1);
        let h = self.times[k + 1] - self.times[k];
        let s = (t - self.times[k]) / h;
        let (h00, h10, h01, h11) = (
            (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s),
            s * (1.0 - s) * (1.0 - s),
            s * s * (3.0 - 2.0 * s),
            s * s * (s - 1.0),
        );
        DVector::from_iterator(
            self.states[k].len(),
            (0..self.states[k].len()).map(|i| {
                h00 * self.states[k][i]
                    + h10 * h * self.derivatives[k][i]
                    + h01 * self.states[k + 1][i]
                    + h11 * h * self.derivatives[k + 1][i]
            }),
        )
    }

    /// `sup_t ‖ρ(t) − ρ^B(γ(t))‖∞` over the samples.
    pub fn boltzmann_deviation<L: DrivingLoop + ?Sized>(&self, lp: &L) -> f64 {
        self.times
            .iter()
            .zip(&self.states)
            .map(|(&t, s)| {
                let rb = boltzmann(&lp.point(t).e, self.beta);
                s.iter().zip(rb.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }
}

/// The unique periodic solution of `ρ̇ = τ H(γ(t)) ρ`.
///
/// Writes `ρ = ρ^B + ξ` and integrates `ξ̇ = τHξ − ρ̇^B` as a homogeneous
/// system one dimension larger, which yields `U(1,0)` and the particular
/// solution `ξ_p(1)` together. Then `(I − U(1,0)) ξ(0) = ξ_p(1)` is solved on
/// zero-sum vectors.
pub fn periodic_solution<L: DrivingLoop + ?Sized>(
    g: &Graph,
    lp: &L,
    beta: f64,
    tau: f64,
    opts: &SolverOptions,
) -> Result<PeriodicSolution> {
    let n = g.vertex_count();
    if opts.grid_intervals < 2 || !opts.grid_intervals.is_multiple_of(2) {
        return Err(Error::InvalidArgument("grid_intervals must be even and >= 2".into()));
    }
    let augmented = |t: f64| -> Result<DMatrix<f64>> {
        let (p, dp) = lp.evaluate(t);
        let h = master_operator(g, beta, &p)?;
        let drive = boltzmann_derivative(&p.e, &dp.e, beta);
        let mut a = DMatrix::zeros(n + 1, n + 1);
        let s = tau * h.scale();
        a.view_mut((0, 0), (n, n)).copy_from(&(h.scaled * s));
        a.view_mut((0, n), (n, 1)).copy_from(&(-drive));
        Ok(a)
    };
    let full = integrator::propagate_conservative(&augmented, &DMatrix::identity(n + 1, n + 1), &[0.0, 1.0], opts.tol)?
        .pop()
        .expect("propagate returns the final state");
    let u = full.view((0, 0), (n, n)).into_owned();
    let xi_p = full.view((0, n), (n, 1)).into_owned();

    let q = zero_sum_basis(n);
    let rho_b0 = boltzmann(&lp.point(0.0).e, beta);
    let (rho0, restricted_monodromy_norm, inverse_norm) = if n == 1 {
        (rho_b0.clone(), 0.0, 1.0)
    } else {
        let u_r = q.transpose() * &u * &q;
        let system = DMatrix::identity(n - 1, n - 1) - &u_r;
        let sv = system.singular_values();
        let inverse_norm = 1.0 / sv.min();
        if inverse_norm.is_nan() || inverse_norm > MAX_INVERSE_NORM {
            return Err(Error::NearSingularMonodromy { inverse_norm });
        }
        let rhs = q.transpose() * &xi_p;
        let c = system
            .lu()
            .solve(&rhs)
            .ok_or(Error::NearSingularMonodromy { inverse_norm })?;
        let xi0 = &q * c;
        (&rho_b0 + xi0.column(0), u_r.singular_values().max(), inverse_norm)
    };

    // fixed point of U(1,0) with unit mass
    let mut fixed = DMatrix::identity(n, n) - &u;
    fixed.row_mut(n - 1).fill(1.0);
    let mut e_last = DVector::zeros(n);
    e_last[n - 1] = 1.0;
    let rho_fix = fixed.lu().solve(&e_last).unwrap_or_else(|| rho0.clone());
    let fixed_point_discrepancy = (&rho0 - &rho_fix).amax();

    let intervals = opts.grid_intervals;
    let times: Vec<f64> = (0..=intervals).map(|k| k as f64 / intervals as f64).collect();
    let gen = |t: f64| generator(g, lp, beta, tau, t);
    let y0 = DMatrix::from_column_slice(n, 1, rho0.as_slice());
    let samples = integrator::propagate_conservative(&gen, &y0, &times, opts.tol)?;
    let states: Vec<Vec<f64>> = samples.iter().map(|m| m.column(0).iter().copied().collect()).collect();
    let derivatives = times
        .iter()
        .zip(&samples)
        .map(|(&t, s)| Ok((gen(t)? * s).column(0).iter().copied().collect()))
        .collect::<Result<Vec<Vec<f64>>>>()?;
    let periodicity_residual = (&samples[intervals] - &samples[0]).amax();
    Ok(PeriodicSolution {
        beta,
        tau,
        tol: opts.tol,
        times,
        states,
        derivatives,
        restricted_monodromy_norm,
        inverse_norm,
        fixed_point_discrepancy,
        periodicity_residual,
    })
}

/// `max_k ‖∂J + ρ̇‖∞` on the periodic solution's grid, with `ρ̇` from a
/// sixth-order periodic central difference of the samples.
pub fn continuity_residual<L: DrivingLoop + ?Sized>(g: &Graph, lp: &L, sol: &PeriodicSolution) -> Result<f64> {
    let n = sol.intervals();
    let h = 1.0 / n as f64;
    let s = |k: isize| sol.state(k.rem_euclid(n as isize) as usize);
    let mut worst: f64 = 0.0;
    for k in 0..n as isize {
        let rho_dot = (-s(k - 3) + s(k - 2) * 9.0 - s(k - 1) * 45.0 + s(k + 1) * 45.0 - s(k + 2) * 9.0 + s(k + 3)) / (60.0 * h);
        let t = sol.times[k as usize];
        let j = instantaneous_current(g, sol.beta, sol.tau, &lp.point(t), &s(k))?;
        worst = worst.max((g.boundary(&j)? + rho_dot).amax());
    }
    Ok(worst)
}

fn simpson_weights(intervals: usize) -> Vec<f64> {
    let h = 1.0 / intervals as f64;
    (0..=intervals)
        .map(|k| {
            let w = if k == 0 || k == intervals {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w * h / 3.0
        })
        .collect()
}

/// Average current per period with its periodic-solution diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AverageCurrent {
    pub report: CurrentReport,
    pub restricted_monodromy_norm: f64,
    pub inverse_norm: f64,
    pub fixed_point_discrepancy: f64,
    pub periodicity_residual: f64,
}

/// `Q = ∫₀¹ J dt` along the periodic solution.
///
/// Since `J(t) = A(t) ρ̇(t)`, integrating by parts over the period gives
/// `Q = A(0)(ρ(1) − ρ(0)) − ∫ Ȧ(t)(ρ(t) − δ_0) dt`. This form never
/// multiplies the state by the (possibly huge) rates `τ ĝ⁻¹κ̂`, so errors in
/// `ρ` are not amplified.
pub fn average_current<L: DrivingLoop + ?Sized>(
    g: &Graph,
    lp: &L,
    beta: f64,
    tau: f64,
    opts: &SolverOptions,
) -> Result<AverageCurrent> {
    let sol = periodic_solution(g, lp, beta, tau, opts)?;
    let chain = integrated_current(g, lp, &sol)?;
    let basis = CycleBasis::new(g);
    Ok(AverageCurrent {
        report: CurrentReport::new(g, &basis, chain)?,
        restricted_monodromy_norm: sol.restricted_monodromy_norm,
        inverse_norm: sol.inverse_norm,
        fixed_point_discrepancy: sol.fixed_point_discrepancy,
        periodicity_residual: sol.periodicity_residual,
    })
}

/// The integrated-by-parts current over a computed periodic solution.
pub fn integrated_current<L: DrivingLoop + ?Sized>(g: &Graph, lp: &L, sol: &PeriodicSolution) -> Result<DVector<f64>> {
    let n = sol.intervals();
    let weights = simpson_weights(n);
    let (a0, _) = adiabatic::a_matrices(g, sol.beta, &lp.point(0.0), None)?;
    let mut q = a0 * (sol.state(n) - sol.state(0));
    for (k, &t) in sol.times.iter().enumerate() {
        let (p, dp) = lp.evaluate(t);
        let (_, a_dot) = adiabatic::a_matrices(g, sol.beta, &p, Some(&dp))?;
        let mut x = sol.state(k);
        x[0] -= 1.0;
        q -= a_dot.expect("derivative requested") * x * weights[k];
    }
    Ok(q)
}

/// `Q = ∫₀¹ J dt` by Simpson's rule on `J = τĝ⁻¹∂*κ̂ρ` directly.
pub fn direct_current<L: DrivingLoop + ?Sized>(g: &Graph, lp: &L, sol: &PeriodicSolution) -> Result<DVector<f64>> {
    let weights = simpson_weights(sol.intervals());
    let mut q = DVector::zeros(g.edge_count());
    for (k, &t) in sol.times.iter().enumerate() {
        q += instantaneous_current(g, sol.beta, sol.tau, &lp.point(t), &sol.state(k))? * weights[k];
    }
    Ok(q)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayEstimate {
    /// `−sup_t` of the largest nonzero eigenvalue of `H(γ(t))`.
    pub lambda: f64,
    pub restricted_monodromy_norm: Option<f64>,
    /// `ln c` in `‖U(1,0)‖ ≤ c e^{−λτ}`, fitted from the measured norm.
    pub log_prefactor: Option<f64>,
}

pub fn decay_constants<L: DrivingLoop + ?Sized>(g: &Graph, lp: &L, beta: f64, samples: usize) -> Result<DecayEstimate> {
    let samples = samples.max(1);
    let mut lambda = f64::INFINITY;
    for k in 0..samples {
        let h = master_operator(g, beta, &lp.point(k as f64 / samples as f64))?;
        lambda = lambda.min(h.spectral_gap());
    }
    Ok(DecayEstimate {
        lambda,
        restricted_monodromy_norm: None,
        log_prefactor: None,
    })
}

impl DecayEstimate {
    pub fn with_monodromy(mut self, norm: f64, tau: f64) -> Self {
        self.restricted_monodromy_norm = Some(norm);
        self.log_prefactor = Some(norm.ln() + self.lambda * tau);
        self
    }
}
