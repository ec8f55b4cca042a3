//! The operator `A` sending a zero-sum population change to the current
//! that realizes it, and the adiabatic current `∫ A(γ) ρ̇^B dt`.
//!
//! `A(x)` is the unique chain `y` with `−∂y = x` that is `ĝ`-orthogonal to
//! every cycle. It is computed from the Laplacian `L = ∂ ĝ⁻¹ ∂*`, grounded at
//! vertex 0: `Lφ = −x`, `y = ĝ⁻¹∂*φ`. `A` is unchanged when all
//! conductances are scaled by a common factor, so shifted conductances are
//! used throughout.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::conductances;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::homology::{CurrentReport, CycleBasis};
use crate::params::{boltzmann_derivative, ParamPoint};
use crate::protocol::DrivingLoop;
use crate::trees::{enumerate_spanning_trees, tree_boltzmann, SpanningTree, DEFAULT_TREE_CAP};

/// Grounded inverse of the weighted Laplacian, padded with a zero row and
/// column at vertex 0.
fn grounded_inverse(g: &Graph, c: &DVector<f64>, beta: f64, w: &[f64]) -> Result<DMatrix<f64>> {
    let n = g.vertex_count();
    let d = g.incidence();
    let lap = &d * DMatrix::from_diagonal(c) * d.transpose();
    let mut out = DMatrix::zeros(n, n);
    if n > 1 {
        let reduced = lap.view((1, 1), (n - 1, n - 1)).into_owned();
        let inv = reduced.cholesky().map(|ch| ch.inverse()).ok_or_else(|| {
            let spread = w.iter().copied().fold(f64::NEG_INFINITY, f64::max)
                - w.iter().copied().fold(f64::INFINITY, f64::min);
            Error::Overflow {
                exponent: beta * spread,
            }
        })?;
        out.view_mut((1, 1), (n - 1, n - 1)).copy_from(&inv);
    }
    Ok(out)
}

/// The matrix of `A` (edges × vertices), valid on zero-sum inputs, and
/// optionally its time derivative along `ṗ`.
pub fn a_matrices(
    g: &Graph,
    beta: f64,
    p: &ParamPoint,
    p_dot: Option<&ParamPoint>,
) -> Result<(DMatrix<f64>, Option<DMatrix<f64>>)> {
    p.check(g)?;
    let c = conductances(beta, &p.w);
    let inv = grounded_inverse(g, &c, beta, &p.w)?;
    let dt = g.incidence().transpose();
    let c_dt_inv = DMatrix::from_diagonal(&c) * &dt * &inv;
    let a = -&c_dt_inv;
    let a_dot = match p_dot {
        None => None,
        Some(dp) => {
            dp.check(g)?;
            let c_dot = DVector::from_iterator(
                c.len(),
                c.iter().zip(&dp.w).map(|(ci, wd)| -beta * wd * ci),
            );
            let c_dot_dt = DMatrix::from_diagonal(&c_dot) * &dt;
            let lap_dot = dt.transpose() * &c_dot_dt;
            Some(-(c_dot_dt * &inv) + c_dt_inv * lap_dot * &inv)
        }
    };
    Ok((a, a_dot))
}

fn check_zero_sum(x: &DVector<f64>) -> Result<()> {
    let sum = x.sum();
    if sum.abs() > 1e-10 * x.lp_norm(1).max(1.0) {
        return Err(Error::NotZeroSum { sum });
    }
    Ok(())
}

/// `A(x)` for a zero-sum vertex vector `x`.
pub fn solve_a(g: &Graph, beta: f64, p: &ParamPoint, x: &DVector<f64>) -> Result<DVector<f64>> {
    Error::check_len(g.vertex_count(), x.len())?;
    check_zero_sum(x)?;
    let (a, _) = a_matrices(g, beta, p, None)?;
    Ok(a * x)
}

/// Kirchhoff's form `A^e(j) = Σ_T Q_i^{T,j} ϱ_T` with basepoint `i`.
pub fn tree_a(g: &Graph, beta: f64, p: &ParamPoint, i: usize, j: usize) -> Result<DVector<f64>> {
    let trees = enumerate_spanning_trees(g, DEFAULT_TREE_CAP)?;
    tree_a_with(g, &trees, beta, p, i, j)
}

pub fn tree_a_with(
    g: &Graph,
    trees: &[SpanningTree],
    beta: f64,
    p: &ParamPoint,
    i: usize,
    j: usize,
) -> Result<DVector<f64>> {
    p.check(g)?;
    let weights = tree_boltzmann(trees, &p.w, beta);
    let mut out = DVector::zeros(g.edge_count());
    for (t, &rho) in trees.iter().zip(&weights.0) {
        if rho > 0.0 {
            out += t.path_chain(g, i, j).to_real() * rho;
        }
    }
    Ok(out)
}

/// Node-doubling schedule for the composite Simpson rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    pub min_intervals: usize,
    pub max_intervals: usize,
    /// Stop once the cycle coordinates move by less than this.
    pub tol: f64,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            min_intervals: 64,
            max_intervals: 1 << 16,
            tol: 1e-8,
        }
    }
}

fn simpson<F>(intervals: usize, f: &F) -> Result<DVector<f64>>
where
    F: Fn(f64) -> Result<DVector<f64>> + Sync,
{
    let h = 1.0 / intervals as f64;
    let terms = (0..=intervals)
        .into_par_iter()
        .map(|k| {
            let w = if k == 0 || k == intervals {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            Ok(f(k as f64 * h)? * (w * h / 3.0))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(terms.into_iter().reduce(|a, b| a + b).expect("at least one node"))
}

/// The adiabatic current `∫₀¹ A(γ(t)) ρ̇^B(t) dt`.
pub fn analytic_current<L: DrivingLoop + ?Sized>(
    g: &Graph,
    lp: &L,
    beta: f64,
    quad: &Quadrature,
) -> Result<CurrentReport> {
    if quad.min_intervals < 2 || !quad.min_intervals.is_multiple_of(2) {
        return Err(Error::InvalidArgument("quadrature needs an even number of intervals".into()));
    }
    let basis = CycleBasis::new(g);
    let integrand = |t: f64| -> Result<DVector<f64>> {
        let (p, dp) = lp.evaluate(t);
        let rho_dot = boltzmann_derivative(&p.e, &dp.e, beta);
        Ok(a_matrices(g, beta, &p, None)?.0 * rho_dot)
    };
    let key = |q: &DVector<f64>| -> DVector<f64> {
        if basis.is_empty() {
            q.clone()
        } else {
            DVector::from_vec(basis.coords_unchecked(q))
        }
    };
    let mut intervals = quad.min_intervals;
    let mut q = simpson(intervals, &integrand)?;
    while intervals < quad.max_intervals {
        intervals *= 2;
        let next = simpson(intervals, &integrand)?;
        let change = (key(&next) - key(&q)).amax();
        q = next;
        if change < quad.tol {
            break;
        }
    }
    CurrentReport::new(g, &basis, q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::{c3, g2, g3};
    use crate::protocol::fixtures::{c3_rotating_loop, g2_loop};
    use crate::protocol::Protocol;
    use crate::testutil::{random_connected_graph, random_vec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn g2_point(g1: f64) -> ParamPoint {
        ParamPoint {
            e: vec![0.0, 0.0],
            w: vec![0.0, g1.ln()],
        }
    }

    fn cycle_orthogonality(g: &Graph, beta: f64, p: &ParamPoint, y: &DVector<f64>) -> f64 {
        let basis = CycleBasis::new(g);
        let gvec: Vec<f64> = p.w.iter().map(|w| (beta * w).exp()).collect();
        basis
            .cycles
            .iter()
            .map(|z| z.as_slice().iter().zip(y.iter()).zip(&gvec).map(|((zc, yc), gc)| *zc as f64 * gc * yc).sum::<f64>().abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn two_state_closed_forms() {
        let g = g2();
        let x = DVector::from_vec(vec![1.0, -1.0]);
        let y = solve_a(&g, 1.0, &g2_point(1.0), &x).unwrap();
        assert!((y - DVector::from_vec(vec![-0.5, -0.5])).amax() < 1e-15);

        let y = solve_a(&g, 1.0, &g2_point(3.0), &x).unwrap();
        assert!((&y - DVector::from_vec(vec![-0.75, -0.25])).amax() < 1e-15);
        assert!(cycle_orthogonality(&g, 1.0, &g2_point(3.0), &y) < 1e-14);

        assert_eq!(solve_a(&g, 1.0, &g2_point(3.0), &DVector::zeros(2)).unwrap(), DVector::zeros(2));
        assert!(matches!(
            solve_a(&g, 1.0, &g2_point(3.0), &DVector::from_vec(vec![1.0, 0.0])),
            Err(Error::NotZeroSum { .. })
        ));
    }

    #[test]
    fn tree_sum_examples() {
        let g = g2();
        let p = ParamPoint::zeros(&g);
        let y = tree_a(&g, 1.0, &p, 0, 1).unwrap();
        assert!((y - DVector::from_vec(vec![0.5, 0.5])).amax() < 1e-15);
        assert_eq!(tree_a(&g, 1.0, &p, 1, 1).unwrap(), DVector::zeros(2));
    }

    #[test]
    fn tree_sum_equals_laplacian_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..60 {
            let v = rng.gen_range(2..=6);
            let e = rng.gen_range(v - 1..=9);
            let g = random_connected_graph(&mut rng, v, e);
            let beta = rng.gen_range(0.1..4.0);
            let p = ParamPoint {
                e: random_vec(&mut rng, v, -1.0, 1.0),
                w: random_vec(&mut rng, e, -1.0, 1.0),
            };
            let mut x = DVector::from_vec(random_vec(&mut rng, v, -1.0, 1.0));
            x.add_scalar_mut(-x.mean());
            let base = rng.gen_range(0..v);
            let trees = enumerate_spanning_trees(&g, DEFAULT_TREE_CAP).unwrap();
            let mut kirchhoff = DVector::zeros(e);
            for j in 0..v {
                kirchhoff += tree_a_with(&g, &trees, beta, &p, base, j).unwrap() * x[j];
            }
            let y = solve_a(&g, beta, &p, &x).unwrap();
            assert!((&kirchhoff - &y).amax() < 1e-10);
            assert!((g.boundary(&y).unwrap() + &x).amax() < 1e-10);
            let scale: f64 = p.w.iter().map(|w| (beta * w).exp()).fold(1.0, f64::max);
            assert!(cycle_orthogonality(&g, beta, &p, &y) < 1e-10 * scale);
        }
    }

    #[test]
    fn tree_sum_differences_are_basepoint_free() {
        let g = g3();
        let p = ParamPoint {
            e: vec![0.1, 0.2, 0.3],
            w: vec![0.4, -0.3, 0.2],
        };
        let d0 = tree_a(&g, 2.0, &p, 0, 2).unwrap() - tree_a(&g, 2.0, &p, 0, 1).unwrap();
        let d1 = tree_a(&g, 2.0, &p, 1, 2).unwrap() - tree_a(&g, 2.0, &p, 1, 1).unwrap();
        assert!((d0 - d1).amax() < 1e-14);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let g = c3();
        let lp = c3_rotating_loop();
        for &t in &[0.1, 0.37, 0.8] {
            let (p, dp) = lp.evaluate(t);
            let (_, a_dot) = a_matrices(&g, 3.0, &p, Some(&dp)).unwrap();
            let h = 1e-6;
            let fd = (a_matrices(&g, 3.0, &lp.point(t + h), None).unwrap().0
                - a_matrices(&g, 3.0, &lp.point(t - h), None).unwrap().0)
                / (2.0 * h);
            assert!((a_dot.unwrap() - fd).amax() < 1e-6);
        }
    }

    #[test]
    fn analytic_current_basics() {
        let g = g2();
        let flat = Protocol::constant(&ParamPoint {
            e: vec![0.3, 0.0],
            w: vec![0.1, 0.2],
        });
        let q = analytic_current(&g, &flat, 4.0, &Quadrature::default()).unwrap();
        assert!(q.chain.iter().all(|&x| x == 0.0));

        let q = analytic_current(&g, &g2_loop(), 8.0, &Quadrature::default()).unwrap();
        assert!(q.boundary_residual < 1e-10);
        assert!((q.coordinates[0] + 1.0).abs() < 0.05, "{:?}", q.coordinates);

        let r = analytic_current(&g, &g2_loop().reversed(), 8.0, &Quadrature::default()).unwrap();
        assert!((q.coordinates[0] + r.coordinates[0]).abs() < 1e-8);
    }

    #[test]
    fn reparametrization_invariance() {
        let g = c3();
        let lp = c3_rotating_loop();
        let q = analytic_current(&g, &lp, 4.0, &Quadrature::default()).unwrap();
        let s = analytic_current(&g, &lp.shifted(0.3), 4.0, &Quadrature::default()).unwrap();
        assert!((q.coordinates[0] - s.coordinates[0]).abs() < 1e-8);

        struct Warped(Protocol);
        impl DrivingLoop for Warped {
            fn evaluate(&self, t: f64) -> (ParamPoint, ParamPoint) {
                let k = 0.1;
                let phi = t + k * (std::f64::consts::TAU * t).sin();
                let dphi = 1.0 + k * std::f64::consts::TAU * (std::f64::consts::TAU * t).cos();
                let (p, mut dp) = self.0.evaluate(phi);
                dp.e.iter_mut().chain(dp.w.iter_mut()).for_each(|x| *x *= dphi);
                (p, dp)
            }
        }
        let w = analytic_current(&g, &Warped(lp), 4.0, &Quadrature::default()).unwrap();
        assert!((q.coordinates[0] - w.coordinates[0]).abs() < 1e-8);
    }
}
