//! Periodic driving protocols given by finite Fourier series.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::params::ParamPoint;

/// `a0 + Σ_k (c_k cos 2πkt + s_k sin 2πkt)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fourier {
    #[serde(rename = "const", default)]
    pub constant: f64,
    #[serde(default)]
    pub cos: Vec<f64>,
    #[serde(default)]
    pub sin: Vec<f64>,
}

impl Fourier {
    pub fn constant(a0: f64) -> Self {
        Fourier {
            constant: a0,
            ..Default::default()
        }
    }

    /// Value and derivative at `t`.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        let t = t.rem_euclid(1.0);
        let mut value = self.constant;
        let mut deriv = 0.0;
        let k_max = self.cos.len().max(self.sin.len());
        for k in 1..=k_max {
            let w = TAU * k as f64;
            let (s, c) = (w * t).sin_cos();
            let a = self.cos.get(k - 1).copied().unwrap_or(0.0);
            let b = self.sin.get(k - 1).copied().unwrap_or(0.0);
            value += a * c + b * s;
            deriv += w * (b * c - a * s);
        }
        (value, deriv)
    }

    pub fn is_constant(&self) -> bool {
        self.cos.iter().chain(&self.sin).all(|&x| x == 0.0)
    }
}

/// A smooth loop `t ↦ (E(t), W(t))` with exact derivative.
pub trait DrivingLoop: Sync {
    /// `(γ(t), γ̇(t))`.
    fn evaluate(&self, t: f64) -> (ParamPoint, ParamPoint);

    fn point(&self, t: f64) -> ParamPoint {
        self.evaluate(t).0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Protocol {
    #[serde(rename = "E")]
    pub e: Vec<Fourier>,
    #[serde(rename = "W")]
    pub w: Vec<Fourier>,
}

impl Protocol {
    pub fn check_arity(&self, g: &Graph) -> Result<()> {
        if self.e.len() != g.vertex_count() {
            return Err(Error::ArityMismatch {
                what: "E",
                expected: g.vertex_count(),
                got: self.e.len(),
            });
        }
        if self.w.len() != g.edge_count() {
            return Err(Error::ArityMismatch {
                what: "W",
                expected: g.edge_count(),
                got: self.w.len(),
            });
        }
        Ok(())
    }

    pub fn constant(p: &ParamPoint) -> Self {
        Protocol {
            e: p.e.iter().map(|&x| Fourier::constant(x)).collect(),
            w: p.w.iter().map(|&x| Fourier::constant(x)).collect(),
        }
    }

    pub fn is_constant(&self) -> bool {
        self.e.iter().chain(&self.w).all(Fourier::is_constant)
    }

    /// The same loop traversed backwards, `t ↦ γ(−t)`.
    pub fn reversed(&self) -> Self {
        let flip = |f: &Fourier| Fourier {
            constant: f.constant,
            cos: f.cos.clone(),
            sin: f.sin.iter().map(|x| -x).collect(),
        };
        Protocol {
            e: self.e.iter().map(flip).collect(),
            w: self.w.iter().map(flip).collect(),
        }
    }

    /// `t ↦ γ(t + s)`.
    pub fn shifted(&self, s: f64) -> Self {
        let shift = |f: &Fourier| {
            let k_max = f.cos.len().max(f.sin.len());
            let mut cos = vec![0.0; k_max];
            let mut sin = vec![0.0; k_max];
            for k in 1..=k_max {
                let (sn, cs) = (TAU * k as f64 * s).sin_cos();
                let a = f.cos.get(k - 1).copied().unwrap_or(0.0);
                let b = f.sin.get(k - 1).copied().unwrap_or(0.0);
                cos[k - 1] = a * cs + b * sn;
                sin[k - 1] = b * cs - a * sn;
            }
            Fourier {
                constant: f.constant,
                cos,
                sin,
            }
        };
        Protocol {
            e: self.e.iter().map(shift).collect(),
            w: self.w.iter().map(shift).collect(),
        }
    }
}

impl DrivingLoop for Protocol {
    fn evaluate(&self, t: f64) -> (ParamPoint, ParamPoint) {
        let (e, de): (Vec<f64>, Vec<f64>) = self.e.iter().map(|f| f.eval(t)).unzip();
        let (w, dw): (Vec<f64>, Vec<f64>) = self.w.iter().map(|f| f.eval(t)).unzip();
        (ParamPoint { e, w }, ParamPoint { e: de, w: dw })
    }
}

/// Loop fixtures shared by tests, examples and the CLI.
pub mod fixtures {
    use super::{Fourier, Protocol};

    fn cos1(a: f64) -> Fourier {
        Fourier {
            constant: 0.0,
            cos: vec![a],
            sin: vec![],
        }
    }

    fn sin1(b: f64) -> Fourier {
        Fourier {
            constant: 0.0,
            cos: vec![],
            sin: vec![b],
        }
    }

    /// Two-state loop `(E0, E1, W0, W1) = (cos 2πt, 0, sin 2πt, 0)`.
    pub fn g2_loop() -> Protocol {
        Protocol {
            e: vec![cos1(1.0), Fourier::constant(0.0)],
            w: vec![sin1(1.0), Fourier::constant(0.0)],
        }
    }

    /// Two-state loop through the doubly degenerate point `E0 = E1, W0 = W1`.
    pub fn g2_degenerate_loop() -> Protocol {
        Protocol {
            e: vec![cos1(1.0), Fourier::constant(0.0)],
            w: vec![cos1(1.0), Fourier::constant(0.0)],
        }
    }

    /// `A cos(2π(t − φ))` as a Fourier term.
    fn phased(a: f64, phase: f64) -> Fourier {
        let (s, c) = (std::f64::consts::TAU * phase).sin_cos();
        Fourier {
            constant: 0.0,
            cos: vec![a * c],
            sin: vec![a * s],
        }
    }

    /// Triangle loop on which the unique well rotates `0 → 1 → 2`, with each
    /// edge's barrier lowest while the opposite vertex is the well.
    pub fn c3_rotating_loop() -> Protocol {
        Protocol {
            e: (0..3).map(|i| phased(-1.0, i as f64 / 3.0)).collect(),
            w: [0.75, 1.0 / 12.0, 5.0 / 12.0]
                .iter()
                .map(|&phase| phased(1.0, phase))
                .collect(),
        }
    }
}
