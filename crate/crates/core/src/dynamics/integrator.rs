use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default number of RK4 substeps per control step.
pub const DEFAULT_RK4_SUBSTEPS: usize = 4;

/// Largest ‖h·G‖∞ handled by one Taylor expansion; longer segments are split.
pub(crate) const TAYLOR_MAX_NORM: f64 = 1.5;
pub(crate) const TAYLOR_MAX_TERMS: usize = 60;

/// Time-stepping scheme for one constant-generator segment.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Integrator {
    /// Classical fourth-order Runge–Kutta with a fixed number of substeps.
    Rk4 { substeps: usize },
    /// Action of the segment's matrix exponential, summed as a Taylor series
    /// to machine precision (exact up to rounding for piecewise-constant
    /// controls).
    #[default]
    Exponential,
}

impl Integrator {
    pub fn rk4() -> Self {
        Integrator::Rk4 {
            substeps: DEFAULT_RK4_SUBSTEPS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Integrator::Rk4 { substeps: 0 } => Err(Error::config("RK4 needs at least one substep")),
            _ => Ok(()),
        }
    }
}

/// Minimal vector-space interface for the generic (non-hot-path) steppers.
pub(crate) trait StateSpace: Clone {
    fn axpy(&mut self, a: f64, x: &Self);
    fn scaled(&self, a: f64) -> Self;
    fn sup_norm(&self) -> f64;
}

impl StateSpace for crate::quantum_state::ComplexMatrix {
    fn axpy(&mut self, a: f64, x: &Self) {
        crate::quantum_state::ComplexMatrix::axpy(self, num_complex::Complex64::new(a, 0.0), x)
    }

    fn scaled(&self, a: f64) -> Self {
        self.scale_real(a)
    }

    fn sup_norm(&self) -> f64 {
        self.max_abs()
    }
}

/// Advances ẏ = f(y) over `h` where `f` is linear (no constant term).
///
/// `norm_hint` is a bound on the operator norm of `f`, used to split the
/// Taylor series into well-conditioned pieces.
pub(crate) fn advance_linear<S: StateSpace>(
    integrator: Integrator,
    y: &S,
    h: f64,
    norm_hint: f64,
    f: impl Fn(&S) -> S,
) -> S {
    match integrator {
        Integrator::Rk4 { substeps } => {
            let hs = h / substeps as f64;
            let mut y = y.clone();
            for _ in 0..substeps {
                y = rk4_step(&y, hs, &f);
            }
            y
        }
        Integrator::Exponential => {
            let pieces = ((h.abs() * norm_hint) / TAYLOR_MAX_NORM).ceil().max(1.0) as usize;
            let hs = h / pieces as f64;
            let mut y = y.clone();
            for _ in 0..pieces {
                y = taylor_step(&y, hs, &f);
            }
            y
        }
    }
}

fn rk4_step<S: StateSpace>(y: &S, h: f64, f: &impl Fn(&S) -> S) -> S {
    let k1 = f(y);
    let mut tmp = y.clone();
    tmp.axpy(0.5 * h, &k1);
    let k2 = f(&tmp);
    let mut tmp = y.clone();
    tmp.axpy(0.5 * h, &k2);
    let k3 = f(&tmp);
    let mut tmp = y.clone();
    tmp.axpy(h, &k3);
    let k4 = f(&tmp);
    let mut out = y.clone();
    out.axpy(h / 6.0, &k1);
    out.axpy(h / 3.0, &k2);
    out.axpy(h / 3.0, &k3);
    out.axpy(h / 6.0, &k4);
    out
}

fn taylor_step<S: StateSpace>(y: &S, h: f64, f: &impl Fn(&S) -> S) -> S {
    let mut sum = y.clone();
    let mut term = y.clone();
    for k in 1..=TAYLOR_MAX_TERMS {
        term = f(&term).scaled(h / k as f64);
        sum.axpy(1.0, &term);
        let t = term.sup_norm();
        if t == 0.0 || t <= f64::EPSILON * 0.25 * sum.sup_norm() {
            break;
        }
    }
    sum
}
