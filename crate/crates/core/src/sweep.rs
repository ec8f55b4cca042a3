//! Grids of simulated and adiabatic currents over temperature and driving
//! period, written as a fixed-format CSV table.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adiabatic::{analytic_current, Quadrature};
use crate::dynamics::{average_current, SolverOptions};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::homology::CycleBasis;
use crate::protocol::Protocol;
use crate::topo::{check_loop_robust, topological_current, TopoOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Period {
    Finite(f64),
    Adiabatic,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SweepOptions {
    pub solver: SolverOptions,
    pub quadrature: Quadrature,
    pub topo: TopoOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub beta: f64,
    pub period: Period,
    pub coordinates: Option<Vec<f64>>,
    pub lattice_distance: Option<f64>,
    /// `‖∂Q‖∞`.
    pub divergence_residual: Option<f64>,
    /// Euclidean distance to the topological current, when it exists.
    pub topological_distance: Option<f64>,
    pub monodromy_inverse_norm: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub betti_number: usize,
    pub robust: bool,
    pub topological: Option<Vec<i64>>,
    pub rows: Vec<SweepRow>,
}

/// Runs every `(β, period)` cell in parallel; failures are kept in their row.
pub fn sweep(g: &Graph, protocol: &Protocol, betas: &[f64], periods: &[Period], opts: &SweepOptions) -> Result<SweepReport> {
    if betas.is_empty() || periods.is_empty() {
        return Err(Error::InvalidArgument("sweep needs at least one β and one period".into()));
    }
    protocol.check_arity(g)?;
    let robust = check_loop_robust(g, protocol, &opts.topo).robust;
    let topological = if robust {
        Some(topological_current(g, protocol, &opts.topo)?.coordinates)
    } else {
        None
    };
    let cells: Vec<(f64, Period)> = betas.iter().flat_map(|&b| periods.iter().map(move |&p| (b, p))).collect();
    let rows = cells
        .par_iter()
        .map(|&(beta, period)| run_cell(g, protocol, beta, period, opts, topological.as_deref()))
        .collect();
    Ok(SweepReport {
        betti_number: CycleBasis::new(g).len(),
        robust,
        topological,
        rows,
    })
}

fn run_cell(g: &Graph, protocol: &Protocol, beta: f64, period: Period, opts: &SweepOptions, topological: Option<&[i64]>) -> SweepRow {
    let mut row = SweepRow {
        beta,
        period,
        coordinates: None,
        lattice_distance: None,
        divergence_residual: None,
        topological_distance: None,
        monodromy_inverse_norm: None,
        error: None,
    };
    let outcome = match period {
        Period::Finite(tau) => average_current(g, protocol, beta, tau, &opts.solver).map(|a| {
            row.monodromy_inverse_norm = Some(a.inverse_norm);
            a.report
        }),
        Period::Adiabatic => analytic_current(g, protocol, beta, &opts.quadrature),
    };
    match outcome {
        Ok(report) => {
            row.lattice_distance = Some(report.lattice_distance());
            row.divergence_residual = Some(report.boundary_residual);
            row.topological_distance = topological.map(|z| {
                report
                    .coordinates
                    .iter()
                    .zip(z)
                    .map(|(x, &k)| (x - k as f64).powi(2))
                    .sum::<f64>()
                    .sqrt()
            });
            row.coordinates = Some(report.coordinates);
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

fn number(x: f64) -> String {
    format!("{x:.11e}")
}

fn optional(x: Option<f64>) -> String {
    x.map(number).unwrap_or_default()
}

fn quoted(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

impl SweepReport {
    pub fn csv_header(&self) -> String {
        let mut cols = vec!["beta".to_string(), "tau_d".to_string()];
        cols.extend((0..self.betti_number).map(|k| format!("coord_{k}")));
        cols.extend(["lattice_distance", "robust", "divergence_residual"].map(String::from));
        cols.extend((0..self.betti_number).map(|k| format!("topological_{k}")));
        cols.extend(["topological_distance", "monodromy_inverse_norm", "error"].map(String::from));
        cols.join(",")
    }

    /// Every number is written with 12 significant digits, so identical
    /// inputs give byte-identical output.
    pub fn to_csv(&self) -> String {
        let mut out = self.csv_header();
        out.push('\n');
        for row in &self.rows {
            let mut cells = vec![number(row.beta)];
            cells.push(match row.period {
                Period::Finite(tau) => number(tau),
                Period::Adiabatic => "adiabatic".into(),
            });
            match &row.coordinates {
                Some(c) => cells.extend(c.iter().map(|&x| number(x))),
                None => cells.extend(std::iter::repeat_n(String::new(), self.betti_number)),
            }
            cells.push(optional(row.lattice_distance));
            cells.push(self.robust.to_string());
            cells.push(optional(row.divergence_residual));
            match &self.topological {
                Some(z) => cells.extend(z.iter().map(|k| k.to_string())),
                None => cells.extend(std::iter::repeat_n(String::new(), self.betti_number)),
            }
            cells.push(optional(row.topological_distance));
            cells.push(optional(row.monodromy_inverse_norm));
            cells.push(row.error.as_deref().map(quoted).unwrap_or_default());
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}
