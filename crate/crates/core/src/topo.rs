//! Robustness of driving loops, their arc decomposition, the exact integer
//! current in the joint adiabatic and low-temperature limit, holonomies of
//! edge phases, and the twisted-operator ground-state probe.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{Rates, MAX_EXPONENT};
use crate::error::{Error, Result};
use crate::graph::{Graph, IntChain};
use crate::homology::{CycleBasis, IntCurrentReport};
use crate::params::{
    height_function, is_inessential, HeightFunction, ParamPoint, DEFAULT_DELTA_E, DEFAULT_DELTA_W,
    DEFAULT_RESOLUTION_CAP,
};
use crate::protocol::DrivingLoop;
use crate::trees::{sigma_tree, TotalEdgeOrder, Tree};

/// Which vertex to use when several are admissible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum VertexChoice {
    #[default]
    Lowest,
    Highest,
}

/// Junction vertex rule: the strict minimizer of `E` when it lies in both
/// trees, or an explicit pick among all admissible minima.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum JunctionChoice {
    #[default]
    Minimizer,
    Pick(VertexChoice),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TopoOptions {
    pub delta_e: f64,
    pub delta_w: f64,
    pub samples: usize,
    pub base: VertexChoice,
    pub junction: JunctionChoice,
    pub resolution_cap: usize,
    /// Bisection depth allowed when locating a junction.
    pub max_depth: usize,
}

impl Default for TopoOptions {
    fn default() -> Self {
        TopoOptions {
            delta_e: DEFAULT_DELTA_E,
            delta_w: DEFAULT_DELTA_W,
            samples: 1024,
            base: VertexChoice::Lowest,
            junction: JunctionChoice::Minimizer,
            resolution_cap: DEFAULT_RESOLUTION_CAP,
            max_depth: 48,
        }
    }
}

/// A region of the good cover containing a sample point.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    /// `j` is the unique lowest well.
    Well(usize),
    /// The barriers are strictly ordered by this order.
    Barriers(TotalEdgeOrder),
    /// A degenerate but inessential cell.
    Cell(HeightFunction),
}

impl Region {
    /// Strict membership of a raw point in the (open) region.
    pub fn contains(&self, p: &ParamPoint) -> bool {
        match self {
            Region::Well(j) => p.e.iter().enumerate().all(|(i, &e)| i == *j || p.e[*j] < e),
            Region::Barriers(order) => order.as_slice().windows(2).all(|w| p.w[w[0]] < p.w[w[1]]),
            Region::Cell(h) => {
                let minima_below = h.h0.iter().enumerate().all(|(i, &hi)| {
                    hi == 2 || h.h0.iter().enumerate().all(|(j, &hj)| hj == 1 || p.e[i] < p.e[j])
                });
                let groups = h.barrier_groups();
                let ordered = groups.windows(2).all(|pair| {
                    let top = pair[0].iter().map(|&a| p.w[a]).fold(f64::NEG_INFINITY, f64::max);
                    let bottom = pair[1].iter().map(|&a| p.w[a]).fold(f64::INFINITY, f64::min);
                    top < bottom
                });
                minima_below && ordered
            }
        }
    }

    /// The extended height function of the region.
    pub fn height(&self, g: &Graph) -> HeightFunction {
        match self {
            Region::Well(j) => HeightFunction::unique_minimum(g, *j),
            Region::Barriers(order) => HeightFunction::barrier_order(g, order),
            Region::Cell(h) => h.clone(),
        }
    }
}

/// Outcome of classifying one parameter point.
#[derive(Debug, Clone, PartialEq)]
pub enum Classification {
    Good { region: Region, tree: Tree },
    /// Lies on an essential cell, or its barriers cannot be grouped.
    Essential { reason: String },
}

/// Places a point in the cover: a unique minimum first, then an injective
/// barrier order, then an inessential degenerate cell.
pub fn classify(g: &Graph, p: &ParamPoint, opts: &TopoOptions) -> Result<Classification> {
    p.check(g)?;
    let min_e = p.e.iter().copied().fold(f64::INFINITY, f64::min);
    let minima: Vec<usize> = (0..p.e.len()).filter(|&i| p.e[i] <= min_e + opts.delta_e).collect();
    if minima.len() == 1 {
        return Ok(Classification::Good {
            region: Region::Well(minima[0]),
            tree: Tree::single(minima[0]),
        });
    }
    let h = match height_function(p, opts.delta_e, opts.delta_w) {
        Ok(h) => h,
        Err(Error::AmbiguousGrouping { value }) => {
            return Ok(Classification::Essential {
                reason: format!("barriers cannot be grouped near {value}"),
            })
        }
        Err(e) => return Err(e),
    };
    if h.is_barrier_injective() {
        let order = TotalEdgeOrder::from_values(&p.w);
        let tree = Tree::spanning(g, &sigma_tree(g, &order));
        return Ok(Classification::Good {
            region: Region::Barriers(order),
            tree,
        });
    }
    match is_inessential(g, &h, opts.resolution_cap)? {
        Some(tree) => Ok(Classification::Good {
            region: Region::Cell(h),
            tree,
        }),
        None => Ok(Classification::Essential {
            reason: format!("minima {:?} are split by the barrier ties", h.minima()),
        }),
    }
}

#[derive(Debug, Clone)]
struct Sample {
    t: f64,
    point: ParamPoint,
    region: Region,
    tree: Tree,
}

fn sample<L: DrivingLoop + ?Sized>(g: &Graph, lp: &L, t: f64, opts: &TopoOptions) -> Result<Sample> {
    let point = lp.point(t);
    match classify(g, &point, opts)? {
        Classification::Good { region, tree } => Ok(Sample {
            t,
            point,
            region,
            tree,
        }),
        Classification::Essential { .. } => Err(Error::NonRobust { t: t.rem_euclid(1.0) }),
    }
}

fn has_junction(a: &Sample, b: &Sample) -> bool {
    a.region == b.region || b.region.contains(&a.point) || a.region.contains(&b.point)
}

/// Bisects between two samples until every neighbouring pair shares a
/// region or has a point lying in both regions.
fn refine<L: DrivingLoop + ?Sized>(
    g: &Graph,
    lp: &L,
    a: &Sample,
    b: &Sample,
    depth: usize,
    opts: &TopoOptions,
) -> Result<Vec<Sample>> {
    if has_junction(a, b) {
        return Ok(Vec::new());
    }
    if depth >= opts.max_depth {
        return Err(Error::RefinementLimit { t: a.t.rem_euclid(1.0) });
    }
    let mid = sample(g, lp, 0.5 * (a.t + b.t), opts)?;
    let mut out = refine(g, lp, a, &mid, depth + 1, opts)?;
    let right = refine(g, lp, &mid, b, depth + 1, opts)?;
    out.push(mid);
    out.extend(right);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    /// Parameter interval; `end` may exceed 1 for the arc wrapping past 0.
    pub start: f64,
    pub end: f64,
    pub region: Region,
    pub height: HeightFunction,
    pub tree: Tree,
    pub base: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Junction {
    /// A parameter value whose point lies in both adjacent regions.
    pub t: f64,
    pub vertex: usize,
}

/// Arcs in loop order; junction `m` joins arc `m` to arc `m + 1` (cyclically).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcDecomposition {
    pub arcs: Vec<Arc>,
    pub junctions: Vec<Junction>,
}

fn pick(candidates: &[usize], choice: VertexChoice) -> Option<usize> {
    match choice {
        VertexChoice::Lowest => candidates.first().copied(),
        VertexChoice::Highest => candidates.last().copied(),
    }
}

pub fn arc_decompose<L: DrivingLoop + ?Sized>(g: &Graph, lp: &L, opts: &TopoOptions) -> Result<ArcDecomposition> {
    let n = opts.samples.max(1);
    let coarse: Vec<Sample> = (0..n)
        .map(|k| sample(g, lp, k as f64 / n as f64, opts))
        .collect::<Result<_>>()?;

    let mut samples = Vec::with_capacity(n);
    for k in 0..n {
        let a = &coarse[k];
        let mut b = coarse[(k + 1) % n].clone();
        if k + 1 == n {
            b.t += 1.0;
        }
        samples.push(a.clone());
        samples.extend(refine(g, lp, a, &b, 0, opts)?);
    }

    // rotate so that samples[0] starts an arc
    let m = samples.len();
    let Some(first_change) = (0..m).find(|&k| samples[k].region != samples[(k + 1) % m].region) else {
        let s = &samples[0];
        let base = pick(&s.tree.vertices, opts.base).expect("trees are non-empty");
        return Ok(ArcDecomposition {
            arcs: vec![Arc {
                start: 0.0,
                end: 1.0,
                height: s.region.height(g),
                region: s.region.clone(),
                tree: s.tree.clone(),
                base,
            }],
            junctions: Vec::new(),
        });
    };
    let start = first_change + 1;
    let ordered: Vec<Sample> = (0..m)
        .map(|k| {
            let idx = (start + k) % m;
            let mut s = samples[idx].clone();
            if idx < start {
                s.t += 1.0;
            }
            s
        })
        .collect();

    let mut arcs: Vec<Arc> = Vec::new();
    let mut junctions = Vec::new();
    for k in 0..m {
        let s = &ordered[k];
        if arcs.last().is_none_or(|a: &Arc| a.region != s.region) {
            arcs.push(Arc {
                start: s.t,
                end: s.t,
                height: s.region.height(g),
                region: s.region.clone(),
                tree: s.tree.clone(),
                base: pick(&s.tree.vertices, opts.base).expect("trees are non-empty"),
            });
        }
        arcs.last_mut().unwrap().end = s.t;
        let next = &ordered[(k + 1) % m];
        if next.region != s.region {
            let at = if next.region.contains(&s.point) { s } else { next };
            junctions.push(junction(g, at, &s.tree, &next.tree, opts)?);
        }
    }
    for k in 0..arcs.len() {
        let next_start = if k + 1 < arcs.len() { arcs[k + 1].start } else { arcs[0].start + 1.0 };
        arcs[k].end = next_start;
    }
    Ok(ArcDecomposition { arcs, junctions })
}

fn junction(g: &Graph, at: &Sample, left: &Tree, right: &Tree, opts: &TopoOptions) -> Result<Junction> {
    let e = &at.point.e;
    let min_e = e.iter().copied().fold(f64::INFINITY, f64::min);
    let candidates: Vec<usize> = (0..g.vertex_count())
        .filter(|&i| e[i] <= min_e + opts.delta_e && left.contains_vertex(i) && right.contains_vertex(i))
        .collect();
    let strict = (0..e.len()).filter(|&i| e[i] == min_e).collect::<Vec<_>>();
    let vertex = match opts.junction {
        JunctionChoice::Minimizer => match strict.as_slice() {
            [j] if candidates.contains(j) => Some(*j),
            _ => candidates.first().copied(),
        },
        JunctionChoice::Pick(choice) => pick(&candidates, choice),
    };
    let vertex = vertex.ok_or(Error::RefinementLimit { t: at.t.rem_euclid(1.0) })?;
    Ok(Junction {
        t: at.t.rem_euclid(1.0),
        vertex,
    })
}

/// `Σ_m (Q_{i_m}^{T_m, j_m} − Q_{i_{m+1}}^{T_{m+1}, j_m})`.
pub fn current_of_decomposition(g: &Graph, d: &ArcDecomposition) -> IntChain {
    let mut q = IntChain::zeros(g.edge_count());
    let k = d.arcs.len();
    for (m, junction) in d.junctions.iter().enumerate() {
        let here = &d.arcs[m];
        let next = &d.arcs[(m + 1) % k];
        let into = here
            .tree
            .path_chain(g, here.base, junction.vertex)
            .expect("junction vertex lies in the arc's tree");
        let out = next
            .tree
            .path_chain(g, next.base, junction.vertex)
            .expect("junction vertex lies in the next arc's tree");
        q += &into;
        q = &q - &out;
    }
    q
}

pub fn topological_current<L: DrivingLoop + ?Sized>(g: &Graph, lp: &L, opts: &TopoOptions) -> Result<IntCurrentReport> {
    let d = arc_decompose(g, lp, opts)?;
    IntCurrentReport::new(g, &CycleBasis::new(g), current_of_decomposition(g, &d))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessReport {
    pub robust: bool,
    pub arcs: Option<usize>,
    /// Parameter value of the first failure.
    pub failure_t: Option<f64>,
    pub reason: Option<String>,
}

pub fn check_loop_robust<L: DrivingLoop + ?Sized>(g: &Graph, lp: &L, opts: &TopoOptions) -> RobustnessReport {
    match arc_decompose(g, lp, opts) {
        Ok(d) => RobustnessReport {
            robust: true,
            arcs: Some(d.arcs.len()),
            failure_t: None,
            reason: None,
        },
        Err(e) => {
            let t = match e {
                Error::NonRobust { t } | Error::RefinementLimit { t } => Some(t),
                _ => None,
            };
            RobustnessReport {
                robust: false,
                arcs: None,
                failure_t: t,
                reason: Some(e.to_string()),
            }
        }
    }
}

/// Edge phases `λ_α = e^{iθ_α}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TwistAngles(pub Vec<f64>);

impl TwistAngles {
    pub fn new(angles: Vec<f64>) -> Self {
        TwistAngles(angles.into_iter().map(|a| a.rem_euclid(TAU)).collect())
    }

    pub fn trivial(edge_count: usize) -> Self {
        TwistAngles(vec![0.0; edge_count])
    }

    pub fn phases(&self) -> Vec<Complex64> {
        self.0.iter().map(|&a| Complex64::from_polar(1.0, a)).collect()
    }
}

/// A vertex-wise phase `φ_i`, acting on edges by
/// `λ_α ↦ e^{iφ_{d0}} λ_α e^{−iφ_{d1}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GaugeElement(pub Vec<f64>);

impl GaugeElement {
    pub fn act(&self, g: &Graph, theta: &TwistAngles) -> TwistAngles {
        TwistAngles::new(
            g.edges()
                .iter()
                .zip(&theta.0)
                .map(|(&(a, b), &th)| th + self.0[a] - self.0[b])
                .collect(),
        )
    }

    pub fn matrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_diagonal(&DVector::from_iterator(
            self.0.len(),
            self.0.iter().map(|&p| Complex64::from_polar(1.0, p)),
        ))
    }
}

/// `exp(i Σ_α c_α θ_α)` for a conserved integer chain.
pub fn holonomy_of_chain(g: &Graph, c: &IntChain, theta: &TwistAngles) -> Result<Complex64> {
    Error::check_len(g.edge_count(), theta.0.len())?;
    if let Some(&r) = g.boundary_int(c)?.iter().find(|&&x| x != 0) {
        return Err(Error::NotConserved {
            residual: r.abs() as f64,
        });
    }
    let phase: f64 = c.as_slice().iter().zip(&theta.0).map(|(&k, &th)| k as f64 * th).sum();
    Ok(Complex64::from_polar(1.0, phase))
}

/// Product of edge phases along the arc trees, walking from one junction
/// vertex to the next inside each arc's tree.
pub fn arcwise_holonomy(g: &Graph, d: &ArcDecomposition, theta: &TwistAngles) -> Complex64 {
    let k = d.arcs.len();
    let lambda = theta.phases();
    let mut total = Complex64::new(1.0, 0.0);
    for m in 0..d.junctions.len() {
        let from = d.junctions[(m + d.junctions.len() - 1) % d.junctions.len()].vertex;
        let to = d.junctions[m].vertex;
        total *= walk_phase(g, &d.arcs[m % k].tree, from, to, &lambda);
    }
    total
}

/// Depth-first walk inside `tree`, multiplying `λ` forwards and `λ̄`
/// backwards along the edges traversed.
fn walk_phase(g: &Graph, tree: &Tree, from: usize, to: usize, lambda: &[Complex64]) -> Complex64 {
    fn dfs(g: &Graph, tree: &Tree, v: usize, to: usize, seen: &mut Vec<bool>, lambda: &[Complex64]) -> Option<Complex64> {
        if v == to {
            return Some(Complex64::new(1.0, 0.0));
        }
        seen[v] = true;
        for &alpha in &tree.edges {
            let (a, b) = g.edge(alpha);
            let (next, factor) = if a == v && !seen[b] {
                (b, lambda[alpha])
            } else if b == v && !seen[a] {
                (a, lambda[alpha].conj())
            } else {
                continue;
            };
            if let Some(rest) = dfs(g, tree, next, to, seen, lambda) {
                return Some(factor * rest);
            }
        }
        None
    }
    let mut seen = vec![false; g.vertex_count()];
    dfs(g, tree, from, to, &mut seen, lambda).expect("junction vertices lie in the arc tree")
}

/// How the edge phases enter the twisted master operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum TwistConvention {
    /// `−∂ ĝ⁻¹ λ̂ ∂* κ̂`: each edge's whole contribution is scaled by `λ_α`.
    #[default]
    Literal,
    /// `−∂_λ ĝ⁻¹ ∂_λ^† κ̂` with `∂_λ α = d0(α) − λ_α d1(α)`: the phase acts as
    /// a parallel transport across the edge, so the operator is conjugated
    /// by the gauge action.
    Magnetic,
}

/// A twisted operator stored divided by `e^{log_scale}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwistedOperator {
    pub scaled: DMatrix<Complex64>,
    pub log_scale: f64,
}

impl TwistedOperator {
    pub fn matrix(&self) -> DMatrix<Complex64> {
        self.scaled.map(|z| z * self.log_scale.exp())
    }
}

pub fn twisted_master(
    g: &Graph,
    beta: f64,
    p: &ParamPoint,
    theta: &TwistAngles,
    convention: TwistConvention,
) -> Result<TwistedOperator> {
    Error::check_len(g.edge_count(), theta.0.len())?;
    let rates = Rates::new(g, beta, p)?;
    let n = g.vertex_count();
    let lambda = theta.phases();
    let mut h = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for (alpha, &(a, b)) in g.edges().iter().enumerate() {
        if a == b {
            continue;
        }
        let c = rates.conductance[alpha];
        let (ka, kb) = (rates.kappa[a], rates.kappa[b]);
        let l = lambda[alpha];
        match convention {
            TwistConvention::Literal => {
                h[(a, a)] -= l * c * ka;
                h[(b, b)] -= l * c * kb;
                h[(a, b)] += l * c * kb;
                h[(b, a)] += l * c * ka;
            }
            TwistConvention::Magnetic => {
                h[(a, a)] -= c * ka;
                h[(b, b)] -= c * kb;
                h[(a, b)] += l.conj() * c * kb;
                h[(b, a)] += l * c * ka;
            }
        }
    }
    Ok(TwistedOperator {
        scaled: h,
        log_scale: rates.log_scale,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundState {
    pub eigenvalue: Complex64,
    /// Unit eigenvector, defined up to a phase.
    pub vector: Vec<Complex64>,
    /// Real-part distance to the next eigenvalue.
    pub gap: f64,
}

pub const DEGENERACY_GAP: f64 = 1e-9;

/// Eigenvalues of a complex square matrix.
pub fn complex_spectrum(m: &DMatrix<Complex64>) -> Vec<Complex64> {
    Schur::new(m.clone()).eigenvalues().expect("complex Schur form is triangular").iter().copied().collect()
}

/// The eigenvalue of largest real part, its eigenvector and the gap.
pub fn ground_state(m: &DMatrix<Complex64>) -> Result<GroundState> {
    let n = m.nrows();
    let mut ev = complex_spectrum(m);
    ev.sort_by(|a, b| b.re.total_cmp(&a.re));
    let top = ev[0];
    let gap = if n > 1 { top.re - ev[1].re } else { f64::INFINITY };
    if gap < DEGENERACY_GAP {
        return Err(Error::Degenerate { gap });
    }
    let shifted = m - DMatrix::from_diagonal_element(n, n, top);
    let svd = shifted.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let k = svd.singular_values.imin();
    let vector: Vec<Complex64> = v_t.row(k).iter().map(|z| z.conj()).collect();
    Ok(GroundState {
        eigenvalue: top,
        vector,
        gap,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub winding: i64,
    pub min_gap: f64,
    pub steps: usize,
    /// Whether two successive refinements gave the same winding.
    pub stable: bool,
    pub holonomies: Vec<Complex64>,
}

/// Holonomy of the ground line transported around the loop, for fixed
/// edge phases: `conj(W)/|W|`, `W = Π ⟨u_t, u_{t+1}⟩`.
fn transport_holonomy<L: DrivingLoop + ?Sized>(
    g: &Graph,
    lp: &L,
    beta: f64,
    theta: &TwistAngles,
    convention: TwistConvention,
    steps: usize,
) -> Result<(Complex64, f64)> {
    let mut min_gap = f64::INFINITY;
    let mut states = Vec::with_capacity(steps);
    for l in 0..steps {
        let op = twisted_master(g, beta, &lp.point(l as f64 / steps as f64), theta, convention)?;
        let gs = ground_state(&op.scaled)?;
        min_gap = min_gap.min(gs.gap);
        states.push(DVector::from_vec(gs.vector));
    }
    let mut w = Complex64::new(1.0, 0.0);
    for l in 0..steps {
        let overlap = states[l].dotc(&states[(l + 1) % steps]);
        w *= overlap / overlap.norm();
    }
    Ok((w.conj(), min_gap))
}

fn winding_of(h: &[Complex64]) -> i64 {
    let mut total = 0.0;
    for k in 0..h.len() {
        total += (h[(k + 1) % h.len()] / h[k]).arg();
    }
    (total / TAU).round() as i64
}

/// Winding number of the ground-line holonomy as the phase on the `k`-th
/// cycle-basis generator edge sweeps once around the circle. Gaps are on
/// the operator's shifted scale.
pub fn ground_holonomy_probe<L: DrivingLoop + ?Sized>(
    g: &Graph,
    lp: &L,
    beta: f64,
    generator: usize,
    steps: usize,
    convention: TwistConvention,
) -> Result<ProbeReport> {
    let basis = CycleBasis::new(g);
    let edge = *basis.generators.get(generator).ok_or_else(|| {
        Error::InvalidArgument(format!("generator {generator} out of range (basis has {})", basis.len()))
    })?;
    if beta * 2.0 > MAX_EXPONENT {
        return Err(Error::Overflow { exponent: beta * 2.0 });
    }
    let run = |steps: usize| -> Result<(i64, f64, Vec<Complex64>)> {
        let phases = (steps / 4).max(16);
        let mut min_gap = f64::INFINITY;
        let mut holonomies = Vec::with_capacity(phases);
        for k in 0..phases {
            let mut angles = vec![0.0; g.edge_count()];
            angles[edge] = TAU * k as f64 / phases as f64;
            let (h, gap) = transport_holonomy(g, lp, beta, &TwistAngles::new(angles), convention, steps)?;
            min_gap = min_gap.min(gap);
            holonomies.push(h);
        }
        Ok((winding_of(&holonomies), min_gap, holonomies))
    };
    let mut steps = steps.max(16);
    let (mut winding, mut min_gap, mut holonomies) = run(steps)?;
    for _ in 0..3 {
        let (w, gap, h) = run(steps * 2)?;
        steps *= 2;
        let stable = w == winding;
        winding = w;
        min_gap = min_gap.min(gap);
        holonomies = h;
        if stable {
            return Ok(ProbeReport {
                winding,
                min_gap,
                steps,
                stable: true,
                holonomies,
            });
        }
    }
    Ok(ProbeReport {
        winding,
        min_gap,
        steps,
        stable: false,
        holonomies,
    })
}
