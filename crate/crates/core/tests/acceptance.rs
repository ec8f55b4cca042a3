//! End-to-end acceptance suite. Prints one line per criterion and exits
//! non-zero if any gating criterion fails.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stochpump::adiabatic::{analytic_current, solve_a, tree_a_with, Quadrature};
use stochpump::dynamics::{average_current, continuity_residual, master_operator, periodic_solution, SolverOptions};
use stochpump::graph::fixtures::{c3, g2, g3};
use stochpump::params::{boltzmann, enumerate_top_cells, DEFAULT_CELL_CAP};
use stochpump::protocol::fixtures::{c3_rotating_loop, g2_loop};
use stochpump::topo::{
    check_loop_robust, ground_holonomy_probe, topological_current, JunctionChoice, TopoOptions, TwistConvention,
    VertexChoice,
};
use stochpump::trees::{enumerate_spanning_trees, sigma_tree, tree_weight, DEFAULT_TREE_CAP};
use stochpump::{Graph, ParamPoint, Protocol, TotalEdgeOrder};

use common::{g3_loop, random_connected_graph, random_vec};

type Outcome = Result<String, String>;

/// Name, check, and whether a failure fails the suite.
type Criterion = (&'static str, fn() -> Outcome, bool);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn fail<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn random_point(rng: &mut ChaCha8Rng, g: &Graph, lo: f64, hi: f64) -> ParamPoint {
    ParamPoint {
        e: random_vec(rng, g.vertex_count(), lo, hi),
        w: random_vec(rng, g.edge_count(), lo, hi),
    }
}

fn two_state_quantization() -> Outcome {
    let start = Instant::now();
    let (g, lp) = (g2(), g2_loop());
    let top = topological_current(&g, &lp, &TopoOptions::default()).map_err(fail)?;
    let analytic = analytic_current(&g, &lp, 16.0, &Quadrature::default()).map_err(fail)?;
    let average = average_current(&g, &lp, 8.0, 200.0, &SolverOptions::default()).map_err(fail)?;
    let z = top.coordinates[0] as f64;
    let da = (analytic.coordinates[0] - z).abs();
    let dv = (average.report.coordinates[0] - z).abs();
    let secs = start.elapsed().as_secs_f64();
    check(
        top.coordinates[0].abs() == 1 && da <= 0.02 && dv <= 0.05 && secs < 10.0,
        format!(
            "topological {:?}, analytic(β=16) {:.6}, average(β=8, τ=200) {:.6}, {secs:.2} s",
            top.coordinates, analytic.coordinates[0], average.report.coordinates[0]
        ),
    )
}

fn essential_cells() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut graphs = vec![g2(), g3(), c3()];
    for _ in 0..25 {
        let v = rng.gen_range(2..=5);
        let e = rng.gen_range(v.max(2)..=7);
        graphs.push(random_connected_graph(&mut rng, v, e));
    }
    let mut cells = 0;
    for g in &graphs {
        let all = enumerate_top_cells(g, DEFAULT_CELL_CAP).map_err(fail)?;
        cells += all.len();
        if let Some(bad) = all.iter().find(|c| !c.forest_agrees) {
            return Err(format!("disagreement on {:?} at {:?}", g.edges(), bad.height));
        }
    }
    let g2_cells = enumerate_top_cells(&g2(), DEFAULT_CELL_CAP).map_err(fail)?;
    let g3_cells = enumerate_top_cells(&g3(), DEFAULT_CELL_CAP).map_err(fail)?;
    let g3_inessential = g3_cells.iter().any(|c| !c.essential && c.minima == (0, 1));
    check(
        g2_cells.len() == 1 && g2_cells[0].essential && g3_inessential,
        format!("{cells} cells on {} graphs agree; G2 has {} cell(s)", graphs.len(), g2_cells.len()),
    )
}

fn kirchhoff_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let v = rng.gen_range(2..=6);
        let e = rng.gen_range(v - 1..=9);
        let g = random_connected_graph(&mut rng, v, e);
        let beta = rng.gen_range(0.2..3.0);
        let p = random_point(&mut rng, &g, -1.0, 1.0);
        let mut x = DVector::from_vec(random_vec(&mut rng, v, -1.0, 1.0));
        x.add_scalar_mut(-x.mean());
        let trees = enumerate_spanning_trees(&g, DEFAULT_TREE_CAP).map_err(fail)?;
        let mut from_trees = DVector::zeros(g.edge_count());
        for i in 1..v {
            from_trees += tree_a_with(&g, &trees, beta, &p, 0, i).map_err(fail)? * x[i];
        }
        let direct = solve_a(&g, beta, &p, &x).map_err(fail)?;
        worst = worst.max((from_trees - &direct).amax() / direct.amax().max(1.0));
    }
    let secs = start.elapsed().as_secs_f64();
    check(worst <= 1e-10 && secs < 30.0, format!("max deviation {worst:.2e}, {secs:.2} s"))
}

fn sigma_maximizer() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for k in 0..100 {
        let v = rng.gen_range(2..=6);
        let e = rng.gen_range(v - 1..=9);
        let g = random_connected_graph(&mut rng, v, e);
        let w = random_vec(&mut rng, g.edge_count(), -1.0, 1.0);
        let greedy = sigma_tree(&g, &TotalEdgeOrder::from_values(&w));
        let trees = enumerate_spanning_trees(&g, DEFAULT_TREE_CAP).map_err(fail)?;
        let best = trees
            .iter()
            .max_by(|a, b| tree_weight(a, &w).total_cmp(&tree_weight(b, &w)))
            .expect("connected graphs have a spanning tree");
        if *best != greedy {
            return Err(format!("instance {k}: greedy {:?}, argmax {:?}", greedy.edges(), best.edges()));
        }
    }
    Ok("100 instances match".into())
}

fn master_invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for g in [g2(), g3(), c3()] {
        for _ in 0..200 {
            let beta = rng.gen_range(0.1..5.0);
            let p = random_point(&mut rng, &g, -2.0, 2.0);
            let h = master_operator(&g, beta, &p).map_err(fail)?;
            let m = h.scaled.clone();
            let n = g.vertex_count();
            let mass = (0..n).map(|j| m.column(j).sum().abs()).fold(0.0, f64::max);
            let top_e = p.e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let kappa: Vec<f64> = p.e.iter().map(|e| (beta * (e - top_e)).exp()).collect();
            let sym = (0..n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .map(|(i, j)| (m[(i, j)] * kappa[i] - m[(j, i)] * kappa[j]).abs())
                .fold(0.0, f64::max);
            let null = (&m * boltzmann(&p.e, beta)).amax();
            let top = h.symmetrized_scaled().symmetric_eigen().eigenvalues.max();
            worst = worst.max(mass).max(sym).max(null).max(top);
        }
    }
    check(worst <= 1e-10, format!("600 instances, worst violation {worst:.2e} (shifted scale)"))
}

fn periodic_and_adiabatic_rate() -> Outcome {
    let (g, lp) = (g2(), g2_loop());
    let opts = SolverOptions::default();
    let mut deviations = Vec::new();
    let mut worst_fixed: f64 = 0.0;
    let mut last_norm = f64::NAN;
    for tau in [50.0, 100.0, 200.0, 400.0] {
        let sol = periodic_solution(&g, &lp, 2.0, tau, &opts).map_err(fail)?;
        worst_fixed = worst_fixed.max(sol.fixed_point_discrepancy);
        deviations.push(sol.boltzmann_deviation(&lp));
        last_norm = sol.restricted_monodromy_norm;
    }
    let ratios: Vec<f64> = deviations.windows(2).map(|w| w[1] / w[0]).collect();
    check(
        worst_fixed <= 1e-8 && ratios.iter().all(|r| (0.35..=0.65).contains(r)) && last_norm < 0.5,
        format!("fixed-point gap {worst_fixed:.2e}, ratios {ratios:.4?}, ‖U‖ at τ=400 {last_norm:.2e}"),
    )
}

fn continuity_equation() -> Outcome {
    let opts = SolverOptions {
        tol: 1e-6,
        ..Default::default()
    };
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, g, lp) in [("G2", g2(), g2_loop()), ("G3", g3(), g3_loop()), ("C3", c3(), c3_rotating_loop())] {
        let sol = periodic_solution(&g, &lp, 2.0, 50.0, &opts).map_err(fail)?;
        let r = continuity_residual(&g, &lp, &sol).map_err(fail)?;
        ok &= r <= 10.0 * opts.tol;
        parts.push(format!("{name} {r:.2e}"));
    }
    check(ok, format!("residuals {} (limit {:.0e})", parts.join(", "), 10.0 * opts.tol))
}

fn low_temperature_trend() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, g, lp) in [("G2", g2(), g2_loop()), ("C3", c3(), c3_rotating_loop())] {
        let top = topological_current(&g, &lp, &TopoOptions::default()).map_err(fail)?;
        let mut distances = Vec::new();
        let mut nearest = Vec::new();
        for beta in [2.0, 4.0, 8.0, 16.0] {
            let r = analytic_current(&g, &lp, beta, &Quadrature::default()).map_err(fail)?;
            distances.push(r.lattice_distance());
            nearest = r.nearest_lattice_point();
        }
        ok &= distances.windows(2).all(|w| w[1] < w[0]) && distances[3] <= 0.02 && nearest == top.coordinates;
        let shown: Vec<String> = distances.iter().map(|d| format!("{d:.2e}")).collect();
        parts.push(format!("{name} distances [{}] nearest {nearest:?}", shown.join(", ")));
    }
    check(ok, parts.join("; "))
}

fn combinatorial_stability() -> Outcome {
    let base = TopoOptions::default();
    let variants = [
        TopoOptions { samples: 2 * base.samples, ..base },
        TopoOptions { delta_e: base.delta_e / 2.0, delta_w: base.delta_w / 2.0, ..base },
        TopoOptions { delta_e: base.delta_e * 2.0, delta_w: base.delta_w * 2.0, ..base },
        TopoOptions { base: VertexChoice::Highest, ..base },
        TopoOptions { junction: JunctionChoice::Pick(VertexChoice::Lowest), ..base },
        TopoOptions { junction: JunctionChoice::Pick(VertexChoice::Highest), ..base },
    ];
    let loops: Vec<(&str, Graph, Protocol)> = vec![
        ("G2", g2(), g2_loop()),
        ("C3", c3(), c3_rotating_loop()),
        ("G3", g3(), g3_loop()),
        ("G2 reversed", g2(), g2_loop().reversed()),
    ];
    let mut parts = Vec::new();
    for (name, g, lp) in &loops {
        if !check_loop_robust(g, lp, &base).robust {
            parts.push(format!("{name} non-robust, skipped"));
            continue;
        }
        let reference = topological_current(g, lp, &base).map_err(fail)?;
        for v in &variants {
            let other = topological_current(g, lp, v).map_err(fail)?;
            if other != reference {
                return Err(format!("{name}: {:?} vs {:?} under {v:?}", other.chain, reference.chain));
            }
        }
        parts.push(format!("{name} {:?}", reference.coordinates));
    }
    Ok(parts.join(", "))
}

fn ground_holonomy() -> Outcome {
    let (g, lp) = (g2(), g2_loop());
    let expected = topological_current(&g, &lp, &TopoOptions::default()).map_err(fail)?.coordinates[0];
    let mut parts = Vec::new();
    let mut ok = true;
    for conv in [TwistConvention::Literal, TwistConvention::Magnetic] {
        match ground_holonomy_probe(&g, &lp, 10.0, 0, 64, conv) {
            Ok(r) => {
                ok &= r.winding == expected;
                parts.push(format!("{conv:?}: winding {} (min gap {:.2e}, stable {})", r.winding, r.min_gap, r.stable));
            }
            Err(e) => parts.push(format!("{conv:?}: {e}")),
        }
    }
    check(ok, format!("expected {expected}; {}", parts.join("; ")))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("two-state quantization", two_state_quantization, true),
        ("essential-cell agreement", essential_cells, true),
        ("Kirchhoff oracle", kirchhoff_oracle, true),
        ("σ-tree maximizer", sigma_maximizer, true),
        ("master-operator invariants", master_invariants, true),
        ("periodic solution and adiabatic rate", periodic_and_adiabatic_rate, true),
        ("continuity equation", continuity_equation, true),
        ("low-temperature trend", low_temperature_trend, true),
        ("combinatorial stability", combinatorial_stability, true),
        ("ground-state holonomy probe", ground_holonomy, false),
    ];
    let mut failed = 0;
    for (k, (name, run, gating)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        let (status, detail) = match (&outcome, gating) {
            (Ok(d), _) => ("PASS", d),
            (Err(d), true) => {
                failed += 1;
                ("FAIL", d)
            }
            (Err(d), false) => ("FAIL (non-gating)", d),
        };
        println!("criterion {:>2} {status}: {name} [{secs:.2} s] {detail}", k + 1);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} gating criteria failed");
        ExitCode::FAILURE
    }
}
